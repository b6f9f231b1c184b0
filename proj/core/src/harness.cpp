#include "prefelicit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "prefelicit/errors.hpp"

namespace prefelicit {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  int n = 0;
};

MeanStderr summarize(const std::vector<double>& xs) {
  MeanStderr s;
  s.n = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

// Tolerance for comparing accumulated dollar sums against probe costs.
constexpr double kCostSlack = 1e-9;

}  // namespace

GeneratedScenario generateScenario(const ScenarioConfig& cfg) {
  if (cfg.m < 2 || cfg.n1 < 1 || cfg.n2 < 0 || cfg.K < 1 || cfg.L < 1) {
    throw ConfigError("scenario config needs m >= 2, n1 >= 1, n2 >= 0, K, L >= 1");
  }
  Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd alts(cfg.m, cfg.K);
  for (int i = 0; i < cfg.m; ++i)
    for (int k = 0; k < cfg.K; ++k) alts(i, k) = normal(rng);
  Eigen::MatrixXd agents(cfg.n1 + cfg.n2, cfg.L);
  for (int j = 0; j < cfg.n1 + cfg.n2; ++j)
    for (int l = 0; l < cfg.L; ++l) agents(j, l) = normal(rng);

  // Flat Dirichlet over all K*L entries: normalized unit-rate exponentials.
  std::gamma_distribution<double> gamma(1.0, 1.0);
  Eigen::VectorXd g(cfg.K * cfg.L);
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = gamma(rng);
  g /= g.sum();

  return {Scenario::fromMatrices(alts, agents, cfg.n1), Parameter(cfg.K, cfg.L, g)};
}

std::uint64_t trialSeed(std::uint64_t master, int trial) {
  return deriveSeed(master, {static_cast<std::uint64_t>(trial)});
}

ExperimentResult runExperiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (!(cfg.budget > 0)) throw ConfigError("budget must be positive");
  if (cfg.criteria.empty()) throw ConfigError("no criteria given");
  {
    ScenarioConfig probe = cfg.scenario;
    const GeneratedScenario gs = generateScenario(probe);
    buildDesignSpace(gs.scenario, cfg.templates);
    for (const auto& c : cfg.criteria) validate(c, gs.scenario);
  }

  const CostModel costModel = CostModel::builtinMturkHotels();
  const std::size_t nc = cfg.criteria.size();
  std::vector<TrialRun> runs(static_cast<std::size_t>(cfg.trials) * nc);

  auto runTrial = [&](int t) {
    const std::uint64_t ts = trialSeed(cfg.seed, t);
    ScenarioConfig sc = cfg.scenario;
    sc.seed = deriveSeed(ts, {0});
    const GeneratedScenario gs = generateScenario(sc);
    Rng initRng(deriveSeed(ts, {1}));
    const Dataset init = initializeData(gs.scenario, cfg.initCount, initRng, gs.groundTruth);
    const std::vector<Design> designs = buildDesignSpace(gs.scenario, cfg.templates);

    for (std::size_t c = 0; c < nc; ++c) {
      TrialRun& run = runs[static_cast<std::size_t>(t) * nc + c];
      run.trial = t;
      run.criterion = toString(cfg.criteria[c]);
      const std::uint64_t key = fnv1a(run.criterion);
      try {
        SimulatedOracle oracle(gs.scenario, gs.groundTruth, deriveSeed(ts, {2, key}));
        EngineConfig ec;
        ec.fit = cfg.fit;
        ec.gain = cfg.gain;
        ec.seed = deriveSeed(ts, {3, key});
        ec.groundTruth = gs.groundTruth;
        run.result = runElicitation(gs.scenario, designs, costModel, cfg.criteria[c], cfg.budget,
                                    init, oracle, ec);
        if (run.result.aborted) {
          run.error = run.result.abortReason;
        } else {
          std::stringstream ss;
          writeTraceCsv(ss, run.result);
          run.rows = readTraceCsv(ss);
          run.ok = true;
        }
      } catch (const std::exception& e) {
        run.error = e.what();
      }
    }
  };

  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, cfg.trials);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < cfg.trials; t = next++) runTrial(t);
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult out;
  std::map<std::string, std::vector<std::vector<TraceRow>>> byCriterion;
  for (const auto& c : cfg.criteria) out.effectiveTrials[toString(c)] = 0;
  for (const TrialRun& r : runs) {
    if (!r.ok) {
      std::cerr << "trial " << r.trial << " (" << r.criterion << ") dropped: " << r.error << '\n';
      continue;
    }
    byCriterion[r.criterion].push_back(r.rows);
    ++out.effectiveTrials[r.criterion];
  }
  out.aggregate = aggregateCurves(byCriterion, cfg.budget, cfg.probeStep);
  for (const auto& c : cfg.criteria) {
    const std::string name = toString(c);
    auto hist = questionTypeHistogram(name, byCriterion[name], cfg.scenario.m);
    out.questionTypes.insert(out.questionTypes.end(), hist.begin(), hist.end());
  }

  if (cfg.outDir) {
    namespace fs = std::filesystem;
    for (const TrialRun& r : runs) {
      if (!r.ok) continue;
      const fs::path dir = *cfg.outDir / "traces" / r.criterion;
      fs::create_directories(dir);
      char name[32];
      std::snprintf(name, sizeof(name), "trial_%04d.csv", r.trial);
      std::ofstream f(dir / name);
      writeTraceCsv(f, r.result);
    }
    std::ofstream agg(*cfg.outDir / "aggregate.csv");
    writeAggregateCsv(agg, out.aggregate);
    std::ofstream qt(*cfg.outDir / "question_types.csv");
    writeQuestionTypesCsv(qt, out.questionTypes);
  }
  out.runs = std::move(runs);
  return out;
}

std::vector<AggregateRow> aggregateCurves(
    const std::map<std::string, std::vector<std::vector<TraceRow>>>& tracesByCriterion,
    double budget, double step) {
  if (!(step > 0)) throw ConfigError("probe step must be positive");
  std::vector<AggregateRow> rows;
  for (const auto& [criterion, traces] : tracesByCriterion) {
    for (int i = 0;; ++i) {
      // Snap to a 1e-9 grid so probe costs print as 0.15, not 0.15000000000000002.
      const double w = std::round(i * step * 1e9) / 1e9;
      if (w > budget + kCostSlack) break;
      std::vector<double> plurality;
      std::vector<double> borda;
      for (const auto& trace : traces) {
        const TraceRow* best = nullptr;
        for (const TraceRow& r : trace) {
          if (r.cumulativeCost <= w + kCostSlack &&
              (!best || r.cumulativeCost >= best->cumulativeCost)) {
            best = &r;
          }
        }
        if (!best || !best->tvPlurality || !best->tvBorda) continue;
        plurality.push_back(*best->tvPlurality);
        borda.push_back(*best->tvBorda);
      }
      const MeanStderr p = summarize(plurality);
      const MeanStderr b = summarize(borda);
      rows.push_back({w, criterion, p.mean, p.stderr_, b.mean, b.stderr_, p.n});
    }
  }
  return rows;
}

std::vector<QuestionTypeCounts> questionTypeHistogram(
    const std::string& criterion, const std::vector<std::vector<TraceRow>>& traces, int m) {
  std::vector<QuestionTypeCounts> counts;
  for (const auto& trace : traces) {
    for (const TraceRow& r : trace) {
      if (r.iteration < 1 || !r.k || !r.l) continue;
      while (static_cast<int>(counts.size()) < r.iteration) {
        counts.push_back({criterion, static_cast<int>(counts.size()) + 1});
      }
      QuestionTypeCounts& c = counts[static_cast<std::size_t>(r.iteration - 1)];
      const int k = *r.k;
      const int l = *r.l;
      if (l == m && k == l - 1) {
        ++c.fullRanking;
      } else if (l == m && k == 1) {
        ++c.topChoice;
      } else if (l == 2 && k == 1) {
        ++c.pairwise;
      } else {
        ++c.other;
      }
    }
  }
  return counts;
}

void writeAggregateCsv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << kAggregateHeader << '\n';
  for (const AggregateRow& r : rows) {
    out << formatDouble(r.probeCost) << ',' << r.criterion << ',' << formatDouble(r.meanTvPlurality)
        << ',' << formatDouble(r.stderrTvPlurality) << ',' << formatDouble(r.meanTvBorda) << ','
        << formatDouble(r.stderrTvBorda) << ',' << r.nTrials << '\n';
  }
}

void writeQuestionTypesCsv(std::ostream& out, const std::vector<QuestionTypeCounts>& rows) {
  out << "criterion,iteration,full_ranking,top_choice,pairwise,other\n";
  for (const auto& r : rows) {
    out << r.criterion << ',' << r.iteration << ',' << r.fullRanking << ',' << r.topChoice << ','
        << r.pairwise << ',' << r.other << '\n';
  }
}

std::map<std::string, std::vector<std::vector<TraceRow>>> loadTraceDirectory(
    const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::path root = fs::is_directory(dir / "traces") ? dir / "traces" : dir;
  if (!fs::is_directory(root)) throw ParseError("not a directory: " + dir.string());
  std::map<std::string, std::vector<std::vector<TraceRow>>> out;
  std::vector<fs::path> criterionDirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) criterionDirs.push_back(e.path());
  }
  std::sort(criterionDirs.begin(), criterionDirs.end());
  for (const auto& cdir : criterionDirs) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(cdir)) {
      if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    auto& traces = out[cdir.filename().string()];
    for (const auto& f : files) {
      std::ifstream in(f);
      traces.push_back(readTraceCsv(in));
    }
  }
  return out;
}

}  // namespace prefelicit
