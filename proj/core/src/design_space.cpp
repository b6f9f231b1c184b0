#include "prefelicit/design_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "prefelicit/errors.hpp"

namespace prefelicit {

CostModel CostModel::builtinMturkHotels() { return CostModel{}; }

CostModel CostModel::table(std::map<std::pair<int, int>, double> prices) {
  for (const auto& [shape, dollars] : prices) {
    if (!(dollars > 0) || !std::isfinite(dollars)) {
      throw CostModelError("cost for (" + std::to_string(shape.first) + "," +
                           std::to_string(shape.second) + ") must be positive");
    }
  }
  CostModel m;
  m.builtin_ = false;
  m.prices_ = std::move(prices);
  return m;
}

CostModel CostModel::parseTable(std::istream& in) {
  std::map<std::pair<int, int>, double> prices;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    int k = 0;
    int l = 0;
    double dollars = 0;
    char c1 = 0;
    char c2 = 0;
    if (!(ss >> k >> c1 >> l >> c2 >> dollars) || c1 != ',' || c2 != ',') {
      throw ParseError("cost table line " + std::to_string(lineNo) + ": expected k,l,dollars");
    }
    std::string rest;
    if (ss >> rest) throw ParseError("cost table line " + std::to_string(lineNo) + ": trailing text");
    if (k < 1 || k >= l) throw ParseError("cost table line " + std::to_string(lineNo) + ": need 1 <= k < l");
    prices[{k, l}] = dollars;
  }
  return table(std::move(prices));
}

CostModel CostModel::loadTable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open cost table " + path.string());
  return parseTable(in);
}

double CostModel::cost(int k, int l) const {
  if (builtin_) {
    // Integer numerators keep the results the nearest doubles to the decimal prices.
    if (k == l - 1 && l >= 2) return (47.0 * l) / 10000.0;
    if (l == 10 && k >= 1 && k < 9) return (12.0 * k + 280.0) / 10000.0;
    throw CostModelError("built-in cost model does not cover k=" + std::to_string(k) +
                         ", l=" + std::to_string(l));
  }
  const auto it = prices_.find({k, l});
  if (it == prices_.end()) {
    throw CostModelError("cost table has no entry for k=" + std::to_string(k) +
                         ", l=" + std::to_string(l));
  }
  return it->second;
}

namespace {

std::vector<std::vector<int>> subsetsFor(const Scenario& scenario, int l,
                                         const SubsetPolicy& policy, int agent) {
  const int m = scenario.m();
  std::vector<std::vector<int>> out;
  if (l == m) {
    std::vector<int> all(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) all[static_cast<std::size_t>(i)] = i;
    out.push_back(std::move(all));
  } else if (l == 2) {
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) out.push_back({a, b});
  } else {
    for (const auto& s : policy.explicitSubsets) {
      if (static_cast<int>(s.size()) == l) out.push_back(s);
    }
    if (out.empty() && policy.sampledCount > 0) {
      Rng rng(deriveSeed(policy.seed, {static_cast<std::uint64_t>(l),
                                       static_cast<std::uint64_t>(agent)}));
      std::set<std::vector<int>> drawn;
      std::vector<int> ids(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) ids[static_cast<std::size_t>(i)] = i;
      // Bounded attempts: small (m choose l) may have fewer distinct subsets than requested.
      for (int attempt = 0; attempt < 100 * policy.sampledCount &&
                            static_cast<int>(drawn.size()) < policy.sampledCount;
           ++attempt) {
        std::shuffle(ids.begin(), ids.end(), rng);
        std::vector<int> s(ids.begin(), ids.begin() + l);
        std::sort(s.begin(), s.end());
        drawn.insert(std::move(s));
      }
      out.assign(drawn.begin(), drawn.end());
    }
    std::sort(out.begin(), out.end());
  }
  return out;
}

}  // namespace

std::vector<Design> buildDesignSpace(const Scenario& scenario,
                                     const std::vector<QuestionTemplate>& templates,
                                     const SubsetPolicy& policy) {
  scenario.validate();
  for (const auto& t : templates) {
    if (t.l < 2 || t.l > scenario.m() || t.k < 1 || t.k >= t.l) {
      throw ConfigError("template (" + std::to_string(t.k) + "," + std::to_string(t.l) +
                        ") is invalid for m=" + std::to_string(scenario.m()));
    }
  }
  std::vector<Design> designs;
  for (const auto& t : templates) {
    for (int agent : scenario.regularAgents()) {
      for (auto& subset : subsetsFor(scenario, t.l, policy, agent)) {
        Design d;
        d.id = static_cast<int>(designs.size());
        d.agent = agent;
        d.question = Question{std::move(subset), t.k};
        validate(scenario, d.question);
        designs.push_back(std::move(d));
      }
    }
  }
  return designs;
}

double expectedGain(const Design& design, const GaussianPosterior& post, const Scenario& scenario,
                    const PreparedCriterion& criterion, double currentValue,
                    const GainConfig& cfg) {
  if (criterion.spec().kind == CriterionKind::random) return 0.0;
  const Parameter mean(scenario.K(), scenario.L(), post.mean());
  const Question& q = design.question;

  // D-optimality values are log determinants; in determinant units the gain
  // is reported relative to det J.
  const bool relativeDet = criterion.spec().kind == CriterionKind::dOpt &&
                           cfg.dScale == DeterminantScale::determinant;
  auto valueAfter = [&](const Response& r) {
    const double v = criterion.valueAt(hypotheticalPrecision(post, scenario, r));
    return relativeDet ? std::exp(v - currentValue) : v;
  };
  const double baseline = relativeDet ? 1.0 : currentValue;

  // With one stage the Hessian depends only on the offered subset, so every
  // answer yields the same updated precision and the expectation collapses.
  // Rank-breaking keeps this only for pairs.
  if (q.depth == 1 && (post.events() == MarginalEvents::response || q.l() == 2)) {
    return valueAfter(Response{design.agent, q, {q.subset.front()}}) - baseline;
  }

  if (responseCount(q) <= cfg.enumerationCap) {
    double expected = 0.0;
    for (const Response& r : enumerateResponses(design.agent, q, cfg.enumerationCap)) {
      expected += std::exp(responseLogProb(scenario, r, mean)) * valueAfter(r);
    }
    return expected - baseline;
  }

  if (cfg.mcSamples < 1) throw ConfigError("mcSamples must be positive");
  Rng rng(deriveSeed(cfg.seed, {static_cast<std::uint64_t>(design.id)}));
  double total = 0.0;
  for (int s = 0; s < cfg.mcSamples; ++s) {
    total += valueAfter(sampleResponse(scenario, design.agent, q, mean, rng));
  }
  return total / cfg.mcSamples - baseline;
}

double expectedGain(const Design& design, const GaussianPosterior& post, const Scenario& scenario,
                    const CriterionSpec& spec, const GainConfig& cfg) {
  const PreparedCriterion criterion(spec, scenario, post);
  return expectedGain(design, post, scenario, criterion, criterion.valueAt(post.precision()),
                      cfg);
}

std::optional<Selection> selectDesign(const std::vector<Design>& designs,
                                      const GaussianPosterior& post, const Scenario& scenario,
                                      const CriterionSpec& spec, const CostModel& costModel,
                                      double remainingBudget, const GainConfig& cfg, Rng& rng) {
  std::vector<std::size_t> affordable;
  std::vector<double> costs(designs.size());
  for (std::size_t i = 0; i < designs.size(); ++i) {
    costs[i] = costModel.cost(designs[i].question);
    if (costs[i] <= remainingBudget) affordable.push_back(i);
  }
  if (affordable.empty()) return std::nullopt;

  if (spec.kind == CriterionKind::random) {
    std::uniform_int_distribution<std::size_t> pick(0, affordable.size() - 1);
    const std::size_t i = affordable[pick(rng)];
    return Selection{designs[i], costs[i], 0.0};
  }

  const PreparedCriterion criterion(spec, scenario, post);
  const double current = criterion.valueAt(post.precision());
  std::optional<Selection> best;
  double bestRatio = -std::numeric_limits<double>::infinity();
  for (std::size_t i : affordable) {
    const double gain = expectedGain(designs[i], post, scenario, criterion, current, cfg);
    const double ratio =
        std::isnan(gain) ? -std::numeric_limits<double>::infinity() : gain / costs[i];
    bool better = !best || ratio > bestRatio;
    if (best && ratio == bestRatio) {
      better = costs[i] < best->cost || (costs[i] == best->cost && designs[i].id < best->design.id);
    }
    if (better) {
      best = Selection{designs[i], costs[i], gain};
      bestRatio = ratio;
    }
  }
  return best;
}

}  // namespace prefelicit
