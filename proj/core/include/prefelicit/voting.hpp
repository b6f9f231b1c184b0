#pragma once

// Randomized voting rules: an alternative wins with probability proportional
// to its (expected) score under a positional scoring rule.

#include <vector>

#include <Eigen/Dense>

#include "prefelicit/rng.hpp"
#include "prefelicit/types.hpp"

namespace prefelicit {

/// Probability of each alternative being the winner.
class WinnerDistribution {
 public:
  WinnerDistribution() = default;
  /// Throws DomainError unless entries are >= 0 and sum to 1 within 1e-10.
  explicit WinnerDistribution(Eigen::VectorXd probabilities);

  /// Normalizes non-negative scores with a positive sum.
  static WinnerDistribution fromScores(const Eigen::VectorXd& scores);

  const Eigen::VectorXd& probabilities() const { return p_; }
  double operator[](int i) const { return p_[i]; }
  int size() const { return static_cast<int>(p_.size()); }

 private:
  Eigen::VectorXd p_;
};

enum class VotingRule { plurality, borda };

/// n1 full rankings, one per key agent; each is a permutation of 0..m-1, best first.
struct Profile {
  std::vector<std::vector<int>> rankings;
};

WinnerDistribution profileWinnerDist(const Profile& profile, VotingRule rule);

/// Probabilistic plurality under PL: the average top-choice distribution of
/// the key agents (random dictatorship).
WinnerDistribution pluralityWinnerDist(const Parameter& param, const Scenario& scenario,
                                       const std::vector<int>& keyAgents);

/// Probabilistic Borda under PL: the expected Borda score of a_i for one
/// agent is the sum of its pairwise win probabilities.
WinnerDistribution bordaWinnerDist(const Parameter& param, const Scenario& scenario,
                                   const std::vector<int>& keyAgents);

/// Any positional rule, by Monte Carlo over sampled full rankings.
/// scoreVector[p] is the score of position p (0 = top).
WinnerDistribution expectedScoreWinnerDist(const Parameter& param, const Scenario& scenario,
                                           const std::vector<int>& keyAgents,
                                           const Eigen::VectorXd& scoreVector, int mcSamples,
                                           Rng& rng);

WinnerDistribution winnerDist(VotingRule rule, const Parameter& param, const Scenario& scenario,
                              const std::vector<int>& keyAgents);

/// Half the L1 distance.
double totalVariation(const WinnerDistribution& p, const WinnerDistribution& q);

}  // namespace prefelicit
