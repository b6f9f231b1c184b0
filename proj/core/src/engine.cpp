#include "prefelicit/engine.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "prefelicit/errors.hpp"
#include "prefelicit/pl_model.hpp"

namespace prefelicit {

Response SimulatedOracle::answer(const Design& design) {
  return sampleResponse(scenario_, design.agent, design.question, truth_, rng_);
}

Response ScriptedOracle::answer(const Design& design) {
  if (next_ >= rankings_.size()) throw Error("scripted oracle has no answers left");
  return Response{design.agent, design.question, rankings_[next_++]};
}

Elicitation::Elicitation(const Scenario& scenario, std::vector<Design> designs,
                         CostModel costModel, CriterionSpec spec, double budget,
                         Dataset initData, EngineConfig cfg)
    : scenario_(scenario),
      designs_(std::move(designs)),
      costModel_(std::move(costModel)),
      spec_(spec),
      budget_(budget),
      data_(std::move(initData)),
      cfg_(std::move(cfg)) {
  scenario_.validate();
  validate(spec_, scenario_);
  if (!(budget_ >= 0)) throw ConfigError("budget must be non-negative");
  if (cfg_.groundTruth) validate(scenario_, *cfg_.groundTruth);
  for (const Response& r : data_) validate(scenario_, r);
  for (const Design& d : designs_) {
    validate(scenario_, d.question);
    if (scenario_.agent(d.agent).group != Group::regular) {
      throw ConfigError("designs may only query regular-group agents");
    }
    costModel_.cost(d.question);
  }
  refit();
  initial_ = snapshot();
  pruneAndPropose();
}

void Elicitation::refit() {
  const int K = scenario_.K();
  const int L = scenario_.L();
  const Parameter warm = posterior_.dim() == K * L ? Parameter(K, L, posterior_.mean())
                                                   : Parameter::zeros(K, L);
  try {
    posterior_ = fitPosterior(scenario_, data_, warm, cfg_.fit);
  } catch (const ConvergenceError&) {
    ++fitRetries_;
    posterior_ = fitPosterior(scenario_, data_, Parameter::zeros(K, L), cfg_.fit);
  }
}

Snapshot Elicitation::snapshot() const {
  Snapshot s;
  s.criterionValue = evaluate(spec_, posterior_, scenario_);
  const auto keys = scenario_.keyAgents();
  if (keys.empty()) return s;
  const Parameter mean(scenario_.K(), scenario_.L(), posterior_.mean());
  s.plurality = pluralityWinnerDist(mean, scenario_, keys);
  s.borda = bordaWinnerDist(mean, scenario_, keys);
  if (cfg_.groundTruth) {
    s.tvPlurality = totalVariation(pluralityWinnerDist(*cfg_.groundTruth, scenario_, keys),
                                   *s.plurality);
    s.tvBorda = totalVariation(bordaWinnerDist(*cfg_.groundTruth, scenario_, keys), *s.borda);
  }
  return s;
}

void Elicitation::pruneAndPropose() {
  const double remaining = remainingBudget();
  std::erase_if(designs_, [&](const Design& d) { return costModel_.cost(d.question) > remaining; });
  const auto t = static_cast<std::uint64_t>(trace_.size() + 1);
  GainConfig gain = cfg_.gain;
  gain.seed = deriveSeed(cfg_.seed, {t, 2});
  Rng rng(deriveSeed(cfg_.seed, {t, 1}));
  pending_ = selectDesign(designs_, posterior_, scenario_, spec_, costModel_, remaining, gain, rng);
}

void Elicitation::checkAnswer(const Response& resp) const {
  if (!pending_) throw DomainError("elicitation is finished; no question is pending");
  const Design& d = pending_->design;
  if (resp.agent != d.agent || !(resp.question == d.question)) {
    throw DomainError("answer does not match the pending question");
  }
  try {
    validate(scenario_, resp);
  } catch (const InvalidScenarioError& e) {
    throw DomainError(e.what());
  }
}

const IterationRecord& Elicitation::submit(const Response& resp) {
  checkAnswer(resp);
  const Selection chosen = *pending_;

  Dataset next = data_;
  next.append(resp);
  std::swap(data_, next);
  try {
    refit();
  } catch (...) {
    std::swap(data_, next);  // leave state as it was before the answer
    throw;
  }

  cumulative_ += chosen.cost;
  std::erase_if(designs_, [&](const Design& d) { return d.id == chosen.design.id; });

  IterationRecord rec;
  rec.index = static_cast<int>(trace_.size()) + 1;
  rec.design = chosen.design;
  rec.cost = chosen.cost;
  rec.cumulativeCost = cumulative_;
  rec.response = resp;
  rec.state = snapshot();
  trace_.push_back(std::move(rec));

  pruneAndPropose();
  return trace_.back();
}

ElicitationResult Elicitation::result() const {
  ElicitationResult r;
  r.initial = initial_;
  r.trace = trace_;
  r.finalPosterior = posterior_;
  r.data = data_;
  r.budget = budget_;
  r.fitRetries = fitRetries_;
  if (scenario_.n1 >= 2) {
    r.pluralityOutput = current().plurality;
    r.bordaOutput = current().borda;
  } else if (scenario_.n1 == 1) {
    const int k = cfg_.predictTopK > 0 ? std::min(cfg_.predictTopK, scenario_.m()) : scenario_.m();
    r.predictedRanking = predictedTopK(posterior_, scenario_, 0, k);
  }
  return r;
}

ElicitationResult runElicitation(const Scenario& scenario, std::vector<Design> designs,
                                 const CostModel& costModel, const CriterionSpec& spec,
                                 double budget, const Dataset& initData, AnswerOracle& oracle,
                                 const EngineConfig& cfg) {
  Elicitation run(scenario, std::move(designs), costModel, spec, budget, initData, cfg);
  while (!run.finished()) {
    try {
      run.submit(oracle.answer(run.pending()->design));
    } catch (const std::exception& e) {
      ElicitationResult partial = run.result();
      partial.aborted = true;
      partial.abortReason = e.what();
      return partial;
    }
  }
  return run.result();
}

Dataset initializeData(const Scenario& scenario, int count, Rng& rng,
                       const Parameter& groundTruth) {
  if (count < 0) throw ConfigError("initialization count must be non-negative");
  const auto regular = scenario.regularAgents();
  if (count > 0 && (regular.empty() || scenario.m() < 2)) {
    throw ConfigError("initialization needs a regular agent and two alternatives");
  }
  Dataset data;
  std::uniform_int_distribution<std::size_t> pickAgent(0, regular.empty() ? 0 : regular.size() - 1);
  std::uniform_int_distribution<int> pickAlt(0, scenario.m() - 1);
  for (int i = 0; i < count; ++i) {
    const int agent = regular[pickAgent(rng)];
    const int a = pickAlt(rng);
    int b = pickAlt(rng);
    while (b == a) b = pickAlt(rng);
    const Question q{{std::min(a, b), std::max(a, b)}, 1};
    data.append(sampleResponse(scenario, agent, q, groundTruth, rng));
  }
  return data;
}

std::string formatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

std::string joinIds(const std::vector<int>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(ids[i]);
  }
  return s;
}

std::vector<int> splitIds(const std::string& s) {
  std::vector<int> ids;
  if (s.empty()) return ids;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, '-')) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError("bad id list '" + s + "'");
    }
    ids.push_back(v);
  }
  return ids;
}

std::string optionalDouble(const std::optional<double>& v) {
  return v ? formatDouble(*v) : std::string();
}

double parseDouble(const std::string& s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    // from_chars rejects "inf"; accept what to_chars emits for infinities.
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ParseError("bad number '" + s + "'");
  }
  return v;
}

std::optional<int> optionalInt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return static_cast<int>(parseDouble(s));
}

}  // namespace

void writeTraceCsv(std::ostream& out, const ElicitationResult& result) {
  out << kTraceHeader << '\n';
  const Snapshot& s0 = result.initial;
  out << "0,,,,,0,0,," << formatDouble(s0.criterionValue) << ',' << optionalDouble(s0.tvPlurality)
      << ',' << optionalDouble(s0.tvBorda) << '\n';
  for (const IterationRecord& r : result.trace) {
    const Question& q = r.design.question;
    out << r.index << ',' << r.design.agent << ',' << q.k() << ',' << q.l() << ','
        << joinIds(q.subset) << ',' << formatDouble(r.cost) << ','
        << formatDouble(r.cumulativeCost) << ',' << joinIds(r.response.ranking) << ','
        << formatDouble(r.state.criterionValue) << ',' << optionalDouble(r.state.tvPlurality)
        << ',' << optionalDouble(r.state.tvBorda) << '\n';
  }
}

std::vector<TraceRow> readTraceCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw ParseError("missing trace header");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 11) throw ParseError("trace row has " + std::to_string(f.size()) + " fields");
    TraceRow r;
    r.iteration = static_cast<int>(parseDouble(f[0]));
    r.agent = optionalInt(f[1]);
    r.k = optionalInt(f[2]);
    r.l = optionalInt(f[3]);
    r.subset = splitIds(f[4]);
    r.cost = parseDouble(f[5]);
    r.cumulativeCost = parseDouble(f[6]);
    r.response = splitIds(f[7]);
    r.criterionValue = parseDouble(f[8]);
    if (!f[9].empty()) r.tvPlurality = parseDouble(f[9]);
    if (!f[10].empty()) r.tvBorda = parseDouble(f[10]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace prefelicit
