#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prefelicit/criteria.hpp"
#include "prefelicit/design_space.hpp"
#include "prefelicit/engine.hpp"
#include "prefelicit/posterior.hpp"
#include "prefelicit/types.hpp"

namespace prefelicit {

/// Synthetic scenario: standard normal attributes, flat Dirichlet ground truth
/// over the K*L entries of B.
struct ScenarioConfig {
  int m = 10;
  int K = 3;
  int L = 3;
  int n1 = 5;
  int n2 = 20;
  std::uint64_t seed = 0;
};

struct GeneratedScenario {
  Scenario scenario;
  Parameter groundTruth;
};

GeneratedScenario generateScenario(const ScenarioConfig& cfg);

struct ExperimentConfig {
  ScenarioConfig scenario;
  std::vector<CriterionSpec> criteria{CriterionSpec::mpcGroup(), CriterionSpec::dOpt(),
                                      CriterionSpec::eOpt(), CriterionSpec::random()};
  int trials = 400;
  double budget = 0.9;
  int initCount = 50;
  std::vector<QuestionTemplate> templates{{1, 2}, {1, 10}, {9, 10}};
  GainConfig gain;
  FitConfig fit;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  std::optional<std::filesystem::path> outDir;
  double probeStep = 0.05;
};

/// One elicitation run inside an experiment.
struct TrialRun {
  int trial = 0;
  std::string criterion;
  bool ok = false;
  std::string error;
  std::vector<TraceRow> rows;  // trace as written to disk
  ElicitationResult result;
};

struct AggregateRow {
  double probeCost = 0.0;
  std::string criterion;
  double meanTvPlurality = 0.0;
  double stderrTvPlurality = 0.0;
  double meanTvBorda = 0.0;
  double stderrTvBorda = 0.0;
  int nTrials = 0;
};

struct QuestionTypeCounts {
  std::string criterion;
  int iteration = 0;  // 1-based
  int fullRanking = 0;
  int topChoice = 0;
  int pairwise = 0;
  int other = 0;

  int total() const { return fullRanking + topChoice + pairwise + other; }
};

struct ExperimentResult {
  std::vector<TrialRun> runs;  // sorted by (trial, criterion order)
  std::vector<AggregateRow> aggregate;
  std::vector<QuestionTypeCounts> questionTypes;
  std::map<std::string, int> effectiveTrials;  // per criterion, failed trials excluded
};

/// Seed of trial t: deriveSeed(master, {t}). Within a trial the scenario uses
/// stream 0 and the shared initial data stream 1; each criterion's oracle and
/// engine streams are keyed by a hash of its name, so adding or reordering
/// criteria does not change another criterion's run.
std::uint64_t trialSeed(std::uint64_t master, int trial);

/// Runs every criterion on `trials` fresh scenarios sharing, per trial, the
/// scenario and the free initial data. Writes traces/<criterion>/trial_NNNN.csv,
/// aggregate.csv and question_types.csv under outDir when set.
ExperimentResult runExperiment(const ExperimentConfig& cfg);

/// TV-vs-spend curves. At each probe cost w (0, step, 2 step, ... <= budget),
/// each trial contributes its row with the largest cumulative cost <= w.
std::vector<AggregateRow> aggregateCurves(
    const std::map<std::string, std::vector<std::vector<TraceRow>>>& tracesByCriterion,
    double budget, double step = 0.05);

/// Per-iteration counts of Full Ranking (k = l-1, l = m), Top Choice
/// (k = 1, l = m) and Pairwise (k = 1, l = 2) questions.
std::vector<QuestionTypeCounts> questionTypeHistogram(
    const std::string& criterion, const std::vector<std::vector<TraceRow>>& traces, int m);

inline constexpr const char* kAggregateHeader =
    "probe_cost,criterion,mean_tv_plurality,stderr_tv_plurality,mean_tv_borda,stderr_tv_borda,"
    "n_trials";

void writeAggregateCsv(std::ostream& out, const std::vector<AggregateRow>& rows);
void writeQuestionTypesCsv(std::ostream& out, const std::vector<QuestionTypeCounts>& rows);

/// Reads traces/<criterion>/*.csv under `dir` (or <criterion>/*.csv directly
/// when there is no traces/ subdirectory), sorted by file name.
std::map<std::string, std::vector<std::vector<TraceRow>>> loadTraceDirectory(
    const std::filesystem::path& dir);

/// Scenario document (JSON): m, K, L, n1, n2, alternatives (m rows of K),
/// agents (n1+n2 rows of L), optional ground_truth (K rows of L), optional
/// alternative_names, alternative_attribute_names, agent_attribute_names.
struct ScenarioDocument {
  Scenario scenario;
  std::optional<Parameter> groundTruth;
};

std::string scenarioToJson(const Scenario& scenario, const std::optional<Parameter>& groundTruth);
ScenarioDocument scenarioFromJson(const std::string& text);
void saveScenario(const std::filesystem::path& path, const Scenario& scenario,
                  const std::optional<Parameter>& groundTruth);
ScenarioDocument loadScenario(const std::filesystem::path& path);

}  // namespace prefelicit
