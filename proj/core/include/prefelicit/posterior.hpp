#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "prefelicit/types.hpp"

namespace prefelicit {

/// Marginal events each response contributes to the composite likelihood.
///
/// `response`: the response itself, with its top-k-of-l probability.
/// `pairwise`: rank-breaking; every pair (a, b) whose order the response
/// reveals (a ranked, b ranked after a or left unranked) contributes the
/// pairwise event a > b. Pairwise questions are identical under both.
enum class MarginalEvents { response, pairwise };

std::string toString(MarginalEvents events);
MarginalEvents parseMarginalEvents(const std::string& name);

/// The pairwise events revealed by `resp`, as (winner, loser) ids in
/// ranking order.
std::vector<std::pair<int, int>> revealedPairs(const Response& resp);

struct FitConfig {
  MarginalEvents events = MarginalEvents::response;
  double priorStd = 10.0;
  int maxIterations = 100;
  double gradientTolerance = 1e-8;
  double armijo = 1e-4;         // sufficient-increase constant
  double backtrackFactor = 0.5;
  int maxBacktracks = 60;
};

/// Gaussian approximation N(mean, precision^-1) of the posterior over beta.
///
/// Immutable once built. The constructor checks the precision is symmetric
/// positive definite and caches its Cholesky factor and inverse.
class GaussianPosterior {
 public:
  GaussianPosterior() = default;
  GaussianPosterior(Eigen::VectorXd mean, Eigen::MatrixXd precision,
                    MarginalEvents events = MarginalEvents::response);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  int dim() const { return static_cast<int>(mean_.size()); }
  /// Event model the precision was accumulated under.
  MarginalEvents events() const { return events_; }

  /// log det(precision), from the Cholesky factor.
  double logDetPrecision() const { return logDet_; }

  Parameter meanParameter(int K, int L) const { return Parameter(K, L, mean_); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd precision_;
  Eigen::MatrixXd covariance_;
  double logDet_ = 0.0;
  MarginalEvents events_ = MarginalEvents::response;
};

/// Sum of event log-probabilities minus ||beta||^2 / (2 priorStd^2).
/// An infinite priorStd disables the penalty.
double compositeLogLikelihood(const Scenario& scenario, const Dataset& data,
                              const Parameter& param, double priorStd,
                              MarginalEvents events = MarginalEvents::response);

/// Log-probability, gradient and Hessian of one response's events.
double eventLogProb(const Scenario& scenario, const Response& resp, const Parameter& param,
                    MarginalEvents events);
Eigen::VectorXd eventGrad(const Scenario& scenario, const Response& resp, const Parameter& param,
                          MarginalEvents events);
Eigen::MatrixXd eventHessian(const Scenario& scenario, const Response& resp,
                             const Parameter& param, MarginalEvents events);

/// Gradient and (negated) Hessian of compositeLogLikelihood.
struct ObjectiveDerivatives {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd negHessian;
};
ObjectiveDerivatives compositeDerivatives(const Scenario& scenario, const Dataset& data,
                                          const Parameter& param, double priorStd,
                                          MarginalEvents events = MarginalEvents::response);

/// Maximizer of the penalized composite log-likelihood by damped Newton.
/// Throws ConvergenceError (carrying the last iterate) after maxIterations.
Parameter cmlEstimate(const Scenario& scenario, const Dataset& data, const Parameter& init,
                      const FitConfig& cfg = {});

/// Mean = cmlEstimate; precision = sum of negative event Hessians at the
/// mean plus priorStd^-2 I.
GaussianPosterior fitPosterior(const Scenario& scenario, const Dataset& data,
                               const Parameter& init, const FitConfig& cfg = {});

/// Precision after observing `resp`, keeping the mean fixed. Uses the
/// posterior's own event model.
Eigen::MatrixXd hypotheticalPrecision(const GaussianPosterior& post, const Scenario& scenario,
                                      const Response& resp);

/// Posterior mean and standard deviation of u(agent, altA) - u(agent, altB).
struct DiffStats {
  double mean = 0.0;
  double std = 0.0;
  bool degenerate = false;  // variance below kVarianceFloor; std reported as kStdFloor

  /// |mean| / std, with +inf (mean != 0) or 0 (mean == 0) when degenerate.
  double certainty() const;
};

inline constexpr double kVarianceFloor = 1e-18;
inline constexpr double kStdFloor = 1e-9;

/// Coefficient vector of u(agent, altA) - u(agent, altB) in beta.
Eigen::VectorXd diffCoefficients(const Scenario& scenario, int agent, int altA, int altB);

DiffStats utilityDiffStats(const GaussianPosterior& post, const Scenario& scenario, int agent,
                           int altA, int altB);

/// Stats for a precomputed coefficient vector.
DiffStats diffStatsFor(const Eigen::VectorXd& c, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& covariance);

}  // namespace prefelicit
