#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "prefelicit/criteria.hpp"
#include "prefelicit/design_space.hpp"
#include "prefelicit/posterior.hpp"
#include "prefelicit/rng.hpp"
#include "prefelicit/types.hpp"
#include "prefelicit/voting.hpp"

namespace prefelicit {

/// Answers a queried design. Implementations must return a response for the
/// design's agent and question.
class AnswerOracle {
 public:
  virtual ~AnswerOracle() = default;
  virtual Response answer(const Design& design) = 0;
};

/// Samples answers from a hidden ground-truth parameter.
class SimulatedOracle : public AnswerOracle {
 public:
  SimulatedOracle(const Scenario& scenario, Parameter truth, std::uint64_t seed)
      : scenario_(scenario), truth_(std::move(truth)), rng_(seed) {}
  Response answer(const Design& design) override;

 private:
  const Scenario& scenario_;
  Parameter truth_;
  Rng rng_;
};

/// Replays a fixed list of rankings in order.
class ScriptedOracle : public AnswerOracle {
 public:
  explicit ScriptedOracle(std::vector<std::vector<int>> rankings)
      : rankings_(std::move(rankings)) {}
  Response answer(const Design& design) override;

 private:
  std::vector<std::vector<int>> rankings_;
  std::size_t next_ = 0;
};

struct EngineConfig {
  FitConfig fit;
  GainConfig gain;         // gain.seed is replaced per iteration from `seed`
  std::uint64_t seed = 0;  // selection and Monte Carlo streams
  std::optional<Parameter> groundTruth;  // enables total variation columns
  int predictTopK = 0;     // n1 = 1 output prefix length; 0 means a full ranking
};

/// Posterior summary after some number of answers.
struct Snapshot {
  double criterionValue = 0.0;
  std::optional<WinnerDistribution> plurality;  // present when n1 >= 1
  std::optional<WinnerDistribution> borda;
  std::optional<double> tvPlurality;  // present when the ground truth is known
  std::optional<double> tvBorda;
};

struct IterationRecord {
  int index = 0;  // 1-based
  Design design;
  double cost = 0.0;
  double cumulativeCost = 0.0;
  Response response;
  Snapshot state;  // after the response is incorporated
};

struct ElicitationResult {
  Snapshot initial;  // before any paid question
  std::vector<IterationRecord> trace;
  GaussianPosterior finalPosterior;
  Dataset data;
  double budget = 0.0;
  /// n1 >= 2: the group's winner distributions.
  std::optional<WinnerDistribution> pluralityOutput;
  std::optional<WinnerDistribution> bordaOutput;
  /// n1 = 1: the key agent's predicted ranking (prefix of length predictTopK if set).
  std::vector<int> predictedRanking;
  int fitRetries = 0;
  bool aborted = false;
  std::string abortReason;

  double spent() const { return trace.empty() ? 0.0 : trace.back().cumulativeCost; }
};

/// The cost-effective elicitation loop as an explicit state machine: fit,
/// propose a design, accept its answer, repeat until nothing is affordable.
/// runElicitation drives it with an oracle; live sessions drive it with
/// human answers. Both paths produce identical posteriors for identical
/// answers.
class Elicitation {
 public:
  Elicitation(const Scenario& scenario, std::vector<Design> designs, CostModel costModel,
              CriterionSpec spec, double budget, Dataset initData, EngineConfig cfg);

  bool finished() const { return !pending_.has_value(); }
  /// The design awaiting an answer.
  const std::optional<Selection>& pending() const { return pending_; }

  /// Incorporates the answer to the pending design and proposes the next.
  /// Throws DomainError (state unchanged) if `resp` does not answer it.
  const IterationRecord& submit(const Response& resp);

  /// Throws DomainError (state unchanged) if `resp` does not answer the pending design.
  void checkAnswer(const Response& resp) const;

  const GaussianPosterior& posterior() const { return posterior_; }
  const Dataset& data() const { return data_; }
  double remainingBudget() const { return budget_ - cumulative_; }
  int iteration() const { return static_cast<int>(trace_.size()); }
  const std::vector<Design>& designs() const { return designs_; }
  const Snapshot& current() const { return trace_.empty() ? initial_ : trace_.back().state; }

  ElicitationResult result() const;

 private:
  void refit();
  Snapshot snapshot() const;
  void pruneAndPropose();

  const Scenario& scenario_;
  std::vector<Design> designs_;
  CostModel costModel_;
  CriterionSpec spec_;
  double budget_;
  Dataset data_;
  EngineConfig cfg_;

  GaussianPosterior posterior_;
  Snapshot initial_;
  std::vector<IterationRecord> trace_;
  std::optional<Selection> pending_;
  double cumulative_ = 0.0;
  int fitRetries_ = 0;
};

/// Runs the loop to completion. Oracle or fit failures abort the run and
/// return the partial trace with `aborted` set.
ElicitationResult runElicitation(const Scenario& scenario, std::vector<Design> designs,
                                 const CostModel& costModel, const CriterionSpec& spec,
                                 double budget, const Dataset& initData, AnswerOracle& oracle,
                                 const EngineConfig& cfg);

/// `count` pairwise answers from uniformly drawn regular agents and pairs,
/// sampled from `groundTruth`. These are free: no budget is charged.
Dataset initializeData(const Scenario& scenario, int count, Rng& rng,
                       const Parameter& groundTruth);

/// Header of the per-run trace file.
inline constexpr const char* kTraceHeader =
    "iteration,agent,k,l,subset,cost,cumulative_cost,response,criterion_value,tv_plurality,"
    "tv_borda";

/// Writes the trace: an iteration-0 row for the free initial state, then one
/// row per answered question. Id lists are hyphen-joined; doubles use the
/// shortest round-trip form; absent values are empty fields.
void writeTraceCsv(std::ostream& out, const ElicitationResult& result);

/// One parsed trace row.
struct TraceRow {
  int iteration = 0;
  std::optional<int> agent;
  std::optional<int> k;
  std::optional<int> l;
  std::vector<int> subset;
  double cost = 0.0;
  double cumulativeCost = 0.0;
  std::vector<int> response;
  double criterionValue = 0.0;
  std::optional<double> tvPlurality;
  std::optional<double> tvBorda;
};

std::vector<TraceRow> readTraceCsv(std::istream& in);

/// Shortest round-trip decimal form of a double.
std::string formatDouble(double v);

}  // namespace prefelicit
