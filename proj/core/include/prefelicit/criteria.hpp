#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "prefelicit/posterior.hpp"
#include "prefelicit/types.hpp"

namespace prefelicit {

enum class CriterionKind { dOpt, eOpt, mpcUnorderedTopK, mpcRankedTopK, mpcGroup, random };

struct CriterionSpec {
  CriterionKind kind = CriterionKind::mpcGroup;
  int k = 1;       // single-agent MPC variants only
  int target = 0;  // single-agent MPC variants only

  static CriterionSpec dOpt() { return {CriterionKind::dOpt}; }
  static CriterionSpec eOpt() { return {CriterionKind::eOpt}; }
  static CriterionSpec mpcGroup() { return {CriterionKind::mpcGroup}; }
  static CriterionSpec random() { return {CriterionKind::random}; }
  static CriterionSpec mpcUnordered(int k, int target = 0) {
    return {CriterionKind::mpcUnorderedTopK, k, target};
  }
  static CriterionSpec mpcRanked(int k, int target = 0) {
    return {CriterionKind::mpcRankedTopK, k, target};
  }

  bool operator==(const CriterionSpec&) const = default;
};

/// Short names used on the command line and in file names:
/// "dopt", "eopt", "mpc", "random", "mpc-topk:K[@agent]", "mpc-ranked:K[@agent]".
std::string toString(const CriterionSpec& spec);
CriterionSpec parseCriterion(std::string_view text);

/// Throws ConfigError when `spec` cannot be evaluated on this scenario.
void validate(const CriterionSpec& spec, const Scenario& scenario);

/// log det of the precision. Monotone in det, and finite at any dimension.
double dOptimality(const GaussianPosterior& post);

/// Smallest eigenvalue of the precision.
double eOptimality(const GaussianPosterior& post);

/// The k alternatives with highest posterior-mean utility for `agent`, in
/// descending order; equal means are ordered by ascending id.
std::vector<int> predictedTopK(const GaussianPosterior& post, const Scenario& scenario, int agent,
                               int k);

/// Minimum pairwise certainty for one agent. Unordered: pairs straddling the
/// predicted top-k boundary. Ordered: every pair with one side in the top k.
double mpcSingle(const GaussianPosterior& post, const Scenario& scenario, int agent, int k,
                 bool ordered);

/// Minimum pairwise certainty over every key agent and every pair of
/// alternatives. Needs at least two key agents.
double mpcGroup(const GaussianPosterior& post, const Scenario& scenario,
                const std::vector<int>& keyAgents);

/// Dispatch. The random criterion is always 0.
double evaluate(const CriterionSpec& spec, const GaussianPosterior& post,
                const Scenario& scenario);

/// A criterion specialised to a fixed posterior mean, for scoring many
/// hypothetical precisions that share that mean. MPC pair sets and utility
/// difference means are computed once.
class PreparedCriterion {
 public:
  PreparedCriterion(const CriterionSpec& spec, const Scenario& scenario,
                    const GaussianPosterior& post);

  /// Criterion value of N(mean, precision^-1).
  double valueAt(const Eigen::MatrixXd& precision) const;

  const CriterionSpec& spec() const { return spec_; }

 private:
  CriterionSpec spec_;
  Eigen::MatrixXd pairCoefficients_;  // one column per scanned pair
  Eigen::VectorXd pairMeans_;
};

}  // namespace prefelicit
