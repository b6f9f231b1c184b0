// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. An optional first argument names a directory that
// receives the replication's traces and aggregate curves.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "prefelicit/criteria.hpp"
#include "prefelicit/design_space.hpp"
#include "prefelicit/engine.hpp"
#include "prefelicit/harness.hpp"
#include "prefelicit/pl_model.hpp"
#include "prefelicit/posterior.hpp"
#include "prefelicit/voting.hpp"
#include "test_support.hpp"

using namespace prefelicit;
using namespace prefelicit::testing;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << detail
            << std::endl;
  if (!pass) ++failures;
}

std::string fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

double seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double normRelError(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
  return (a - ref).norm() / std::max(ref.norm(), 1e-8);
}

void workedExample() {
  const Profile profile{exampleOneRankings()};
  const auto p = profileWinnerDist(profile, VotingRule::plurality).probabilities();
  const auto b = profileWinnerDist(profile, VotingRule::borda).probabilities();
  const double errP = (p - Eigen::Vector3d(2.0 / 3, 1.0 / 3, 0.0)).cwiseAbs().maxCoeff();
  const double errB = (b - Eigen::Vector3d(5.0 / 9, 3.0 / 9, 1.0 / 9)).cwiseAbs().maxCoeff();
  report(1, "three-voter example winner distributions", errP <= 1e-12 && errB <= 1e-12,
         fmt("plurality (%.15g, %.15g, %.15g)", p[0], p[1], p[2]) +
             fmt(" borda (%.15g, %.15g, %.15g)", b[0], b[1], b[2]) +
             fmt(" max error %.3g", std::max(errP, errB)));
}

Eigen::VectorXd enumeratedWinnerDist(const Scenario& s, const Parameter& p, VotingRule rule) {
  const auto perms = allPermutations(s.m());
  const std::vector<int> keys = s.keyAgents();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s.m());
  std::vector<std::size_t> idx(keys.size(), 0);
  while (true) {
    Profile profile;
    double prob = 1.0;
    for (std::size_t j = 0; j < keys.size(); ++j) {
      profile.rankings.push_back(perms[idx[j]]);
      prob *= plOrderingProb(s, keys[j], perms[idx[j]], p);
    }
    out += prob * profileWinnerDist(profile, rule).probabilities();
    std::size_t j = 0;
    while (j < keys.size() && ++idx[j] == perms.size()) idx[j++] = 0;
    if (j == keys.size()) break;
  }
  return out;
}

void profileEnumeration() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(deriveSeed(20261018, {2}));
  double worstGroup = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const Scenario s = randomScenario(rng, 3, 2, 2, 2, 1);
    const Parameter p = randomParameter(rng, 2, 2);
    const auto keys = s.keyAgents();
    worstGroup = std::max(worstGroup, (pluralityWinnerDist(p, s, keys).probabilities() -
                                       enumeratedWinnerDist(s, p, VotingRule::plurality))
                                          .cwiseAbs()
                                          .maxCoeff());
    worstGroup = std::max(worstGroup, (bordaWinnerDist(p, s, keys).probabilities() -
                                       enumeratedWinnerDist(s, p, VotingRule::borda))
                                          .cwiseAbs()
                                          .maxCoeff());
  }
  double worstSingle = 0.0;
  for (int m = 2; m <= 5; ++m) {
    for (int rep = 0; rep < 10; ++rep) {
      const Scenario s = randomScenario(rng, m, 3, 2, 1, 0);
      const Parameter p = randomParameter(rng, 3, 2);
      worstSingle = std::max(worstSingle, (bordaWinnerDist(p, s, {0}).probabilities() -
                                           enumeratedWinnerDist(s, p, VotingRule::borda))
                                              .cwiseAbs()
                                              .maxCoeff());
    }
  }
  const double elapsed = seconds(start);
  report(2, "probabilistic rules vs profile enumeration",
         worstGroup <= 1e-10 && worstSingle <= 1e-10 && elapsed < 60.0,
         fmt("36-profile max error %.3g, single-agent Borda max error %.3g, %.2f s", worstGroup,
             worstSingle, elapsed));
}

void derivatives() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(deriveSeed(20261018, {3}));
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_int_distribution<int> size(2, 5);
  double worstGrad = 0.0, worstHess = 0.0, maxEig = -std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 100; ++rep) {
    const int K = dim(rng), L = dim(rng), l = size(rng);
    const Scenario s = randomScenario(rng, l, K, L, 0, 1);
    const Parameter p = randomParameter(rng, K, L);
    std::vector<int> subset(l);
    std::iota(subset.begin(), subset.end(), 0);
    std::shuffle(subset.begin(), subset.end(), rng);
    const int k = std::uniform_int_distribution<int>(1, l - 1)(rng);
    const Response r = sampleResponse(s, 0, Question{subset, k}, p, rng);
    const auto f = [&](const Eigen::VectorXd& b) { return responseLogProb(s, r, Parameter(K, L, b)); };
    const auto g = [&](const Eigen::VectorXd& b) { return responseGrad(s, r, Parameter(K, L, b)); };
    worstGrad = std::max(worstGrad, normRelError(responseGrad(s, r, p), fdGradient(f, p.vec())));
    const Eigen::MatrixXd H = responseHessian(s, r, p);
    worstHess = std::max(worstHess, normRelError(H, fdJacobian(g, p.vec())));
    maxEig = std::max(maxEig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues().maxCoeff());
  }
  const double elapsed = seconds(start);
  report(3, "gradient and Hessian vs central differences",
         worstGrad < 1e-5 && worstHess < 1e-4 && maxEig <= 1e-10 && elapsed < 60.0,
         fmt("worst gradient rel. error %.3g, worst Hessian rel. error %.3g, max eigenvalue %.3g, "
             "%.2f s",
             worstGrad, worstHess, maxEig, elapsed));
}

void cmlConsistency() {
  Rng rng(deriveSeed(20261018, {4}));
  const Scenario s = randomScenario(rng, 5, 2, 2, 3, 7);
  const Parameter truth = randomParameter(rng, 2, 2);
  Dataset d;
  std::uniform_int_distribution<int> agent(0, static_cast<int>(s.agents.size()) - 1);
  std::uniform_int_distribution<int> alt(0, s.m() - 1);
  for (int i = 0; i < 2000; ++i) {
    const int a = alt(rng);
    int b = alt(rng);
    while (b == a) b = alt(rng);
    d.append(sampleResponse(s, agent(rng), Question{{a, b}, 1}, truth, rng));
  }
  const GaussianPosterior post = fitPosterior(s, d, Parameter::zeros(2, 2));
  const Parameter est(2, 2, post.mean());
  int agree = 0, total = 0;
  for (int j = 0; j < static_cast<int>(s.agents.size()); ++j)
    for (int a = 0; a < s.m(); ++a)
      for (int b = a + 1; b < s.m(); ++b) {
        const double t = oracleUtility(s, j, a, truth) - oracleUtility(s, j, b, truth);
        const double e = oracleUtility(s, j, a, est) - oracleUtility(s, j, b, est);
        agree += (t > 0) == (e > 0);
        ++total;
      }
  const double agreement = static_cast<double>(agree) / total;
  const double tv = totalVariation(pluralityWinnerDist(truth, s, s.keyAgents()),
                                   pluralityWinnerDist(est, s, s.keyAgents()));
  report(4, "CML consistency on 2000 pairwise answers", agreement >= 0.95 && tv < 0.05,
         fmt("orientation agreement %.4f (%g pairs), plurality TV %.4f", agreement, total, tv));
}

void costs() {
  const CostModel c = CostModel::builtinMturkHotels();
  const double full10 = c.cost(9, 10), top10 = c.cost(1, 10), pair = c.cost(1, 2);
  report(5, "built-in cost model",
         std::abs(full10 - 0.047) < 1e-15 && std::abs(top10 - 0.0292) < 1e-15 &&
             std::abs(pair - 0.0094) < 1e-15,
         fmt("(9,10) $%.15g, (1,10) $%.15g, (1,2) $%.15g", full10, top10, pair));
}

void budgetArithmetic() {
  int worst = 0;
  for (int t = 0; t < 5; ++t) {
    ScenarioConfig sc;
    sc.seed = deriveSeed(20261018, {6, static_cast<std::uint64_t>(t)});
    const GeneratedScenario gs = generateScenario(sc);
    const auto designs = buildDesignSpace(gs.scenario, {{9, 10}});
    SimulatedOracle oracle(gs.scenario, gs.groundTruth, sc.seed + 1);
    EngineConfig cfg;
    cfg.seed = sc.seed + 2;
    cfg.groundTruth = gs.groundTruth;
    const ElicitationResult r =
        runElicitation(gs.scenario, designs, CostModel::builtinMturkHotels(), CriterionSpec::dOpt(),
                       0.9, Dataset{}, oracle, cfg);
    worst = std::max(worst, static_cast<int>(r.trace.size()));
  }
  report(6, "full rankings only at $0.9", worst <= 19,
         fmt("max iterations over 5 runs: %g", worst));
}

double tvAt(const ExperimentResult& r, const std::string& criterion, double probe, bool borda) {
  for (const AggregateRow& row : r.aggregate) {
    if (row.criterion == criterion && std::abs(row.probeCost - probe) < 1e-9) {
      return borda ? row.meanTvBorda : row.meanTvPlurality;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// Mean TV after the last answered question of each successful run.
double finalTv(const ExperimentResult& r, const std::string& criterion, bool borda) {
  double sum = 0.0;
  int n = 0;
  for (const TrialRun& run : r.runs) {
    if (!run.ok || run.criterion != criterion) continue;
    const TraceRow& last = run.rows.back();
    sum += borda ? *last.tvBorda : *last.tvPlurality;
    ++n;
  }
  return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

void replication(const std::optional<fs::path>& outDir) {
  ExperimentConfig cfg;  // defaults are the replication setting
  cfg.trials = 100;
  cfg.seed = 20261018;
  cfg.outDir = outDir;
  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult r = runExperiment(cfg);
  const double elapsed = seconds(start);

  bool enoughTrials = true;
  for (const auto& [name, n] : r.effectiveTrials) enoughTrials = enoughTrials && n >= 100;

  std::ostringstream detail;
  bool beatsRandom = enoughTrials;
  const double randomP = finalTv(r, "random", false);
  const double randomB = finalTv(r, "random", true);
  detail << fmt("random final TV %.4f/%.4f", randomP, randomB);
  for (const char* c : {"mpc", "dopt", "eopt"}) {
    const double p = finalTv(r, c, false), b = finalTv(r, c, true);
    beatsRandom = beatsRandom && p < randomP && b < randomB;
    detail << "; " << c << fmt(" %.4f/%.4f", p, b);
  }
  const double mpcP = tvAt(r, "mpc", 0.85, false), mpcB = tvAt(r, "mpc", 0.85, true);
  const double rndP = tvAt(r, "random", 0.85, false), rndB = tvAt(r, "random", 0.85, true);
  const bool improvement = mpcP <= 0.95 * rndP && mpcB <= 0.95 * rndB;
  detail << fmt("; at $0.85 mpc/random plurality %.4f/%.4f, borda %.4f/%.4f", mpcP, rndP, mpcB, rndB);
  detail << "; trials per criterion";
  for (const auto& [name, n] : r.effectiveTrials) detail << ' ' << name << '=' << n;
  detail << fmt("; %.0f s", elapsed);
  report(7, "scaled replication of TV vs spend (plurality/borda)", beatsRandom && improvement,
         detail.str());

  // Question mix over every selected design of every trial.
  auto share = [&](const std::string& criterion, int k, int l) {
    int hit = 0, total = 0;
    for (const TrialRun& run : r.runs) {
      if (!run.ok || run.criterion != criterion) continue;
      for (const IterationRecord& it : run.result.trace) {
        hit += it.design.question.k() == k && it.design.question.l() == l;
        ++total;
      }
    }
    return total > 0 ? static_cast<double>(hit) / total : 0.0;
  };
  const double doptFull = share("dopt", 9, 10);
  double worstTop = 0.0;
  std::ostringstream mix;
  mix << fmt("dopt full-ranking share %.3f; top-choice share", doptFull);
  for (const char* c : {"mpc", "dopt", "eopt"}) {
    const double top = share(c, 1, 10);
    worstTop = std::max(worstTop, top);
    mix << ' ' << c << fmt("=%.3f", top);
  }
  mix << "; full-ranking share";
  for (const char* c : {"mpc", "eopt", "random"}) mix << ' ' << c << fmt("=%.3f", share(c, 9, 10));
  report(8, "question types selected in the replication", doptFull >= 0.70 && worstTop <= 0.05,
         mix.str());
}

void determinism() {
  ExperimentConfig cfg;
  cfg.trials = 2;
  cfg.budget = 0.2;
  cfg.seed = 99;
  const fs::path base = fs::temp_directory_path() / ("prefelicit_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(base);
  cfg.outDir = base / "a";
  runExperiment(cfg);
  cfg.outDir = base / "b";
  runExperiment(cfg);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  int files = 0, identical = 0;
  for (const auto& e : fs::recursive_directory_iterator(base / "a" / "traces")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path twin = base / "b" / fs::relative(e.path(), base / "a");
    identical += fs::exists(twin) && slurp(e.path()) == slurp(twin);
  }
  fs::remove_all(base);
  report(9, "identical seeds give byte-identical traces", files == 8 && identical == files,
         fmt("%g of %g trace files identical", identical, files));
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<fs::path> outDir;
  if (argc > 1) outDir = fs::path(argv[1]);
  const std::vector<std::function<void()>> checks{
      workedExample, profileEnumeration, derivatives,  cmlConsistency, costs,
      budgetArithmetic, [&] { replication(outDir); }, determinism};
  for (const auto& check : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      std::cout << "FAIL (exception) " << e.what() << std::endl;
      ++failures;
    }
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
