#pragma once

// Plackett-Luce with features: utilities u_ji = z_i' B x_j, choice and
// top-k-of-l response probabilities, and their derivatives in beta.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "prefelicit/rng.hpp"
#include "prefelicit/types.hpp"

namespace prefelicit {

inline constexpr std::size_t kDefaultEnumerationCap = 24;

/// Coefficient vector c with u = c' beta, i.e. c[kappa*L + iota] = z[kappa] * x[iota].
Eigen::VectorXd utilityCoefficients(const AgentProfile& agent, const AlternativeProfile& alt);

double utility(const AgentProfile& agent, const AlternativeProfile& alt, const Parameter& param);

/// Utilities of `alts` for one agent, in the given order.
Eigen::VectorXd utilities(const Scenario& scenario, int agent, std::span<const int> alts,
                          const Parameter& param);

/// Max-shifted log(sum(exp(v))).
double logSumExp(const Eigen::Ref<const Eigen::VectorXd>& v);

/// Probability that `target` is ranked first among `subset`.
double topProb(const AgentProfile& agent, std::span<const AlternativeProfile> subset, int target,
               const Parameter& param);
double topProb(const Scenario& scenario, int agent, std::span<const int> subset, int target,
               const Parameter& param);

/// Probability that a1 is preferred to a2.
double pairwiseProb(const AgentProfile& agent, const AlternativeProfile& a1,
                    const AlternativeProfile& a2, const Parameter& param);

/// Log-probability of a top-k-of-l answer: sum over stages of the chosen
/// utility minus the log-sum-exp over the alternatives still unranked.
double responseLogProb(const Scenario& scenario, const Response& resp, const Parameter& param);

/// Gradient of responseLogProb with respect to beta.
Eigen::VectorXd responseGrad(const Scenario& scenario, const Response& resp,
                             const Parameter& param);

/// Hessian of responseLogProb with respect to beta. Each stage contributes
/// -Cov(z) (x x'), the covariance taken under that stage's choice
/// probabilities; the result is symmetric negative semidefinite.
Eigen::MatrixXd responseHessian(const Scenario& scenario, const Response& resp,
                                const Parameter& param);

/// Draws an answer by sequential sampling from the PL stage distributions.
Response sampleResponse(const Scenario& scenario, int agent, const Question& question,
                        const Parameter& param, Rng& rng);

/// l! / (l-k)!, saturating at SIZE_MAX.
std::size_t responseCount(const Question& question);

/// Every ordered k-prefix of the subset, as responses from `agent`.
/// Throws TooLargeError when there are more than `cap` of them.
std::vector<Response> enumerateResponses(int agent, const Question& question,
                                         std::size_t cap = kDefaultEnumerationCap);

}  // namespace prefelicit
