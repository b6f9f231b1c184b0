#include "prefelicit/voting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "prefelicit/errors.hpp"
#include "prefelicit/pl_model.hpp"

namespace prefelicit {

WinnerDistribution::WinnerDistribution(Eigen::VectorXd probabilities)
    : p_(std::move(probabilities)) {
  if (p_.size() == 0) throw DomainError("empty winner distribution");
  if ((p_.array() < 0).any() || !p_.allFinite()) {
    throw DomainError("winner probabilities must be finite and non-negative");
  }
  if (std::abs(p_.sum() - 1.0) > 1e-10) throw DomainError("winner probabilities must sum to 1");
}

WinnerDistribution WinnerDistribution::fromScores(const Eigen::VectorXd& scores) {
  const double total = scores.sum();
  if (!(total > 0)) throw DomainError("scores must have a positive sum");
  return WinnerDistribution(scores / total);
}

namespace {

void checkRanking(const std::vector<int>& ranking, int m) {
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  if (static_cast<int>(ranking.size()) != m) throw DomainError("profile rankings must be full");
  for (int id : ranking) {
    if (id < 0 || id >= m || seen[static_cast<std::size_t>(id)]) {
      throw DomainError("profile ranking is not a permutation");
    }
    seen[static_cast<std::size_t>(id)] = true;
  }
}

void checkKeyAgents(const std::vector<int>& keyAgents) {
  if (keyAgents.empty()) throw DomainError("need at least one key agent");
}

}  // namespace

WinnerDistribution profileWinnerDist(const Profile& profile, VotingRule rule) {
  if (profile.rankings.empty()) throw DomainError("empty profile");
  const int m = static_cast<int>(profile.rankings.front().size());
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(m);
  for (const auto& r : profile.rankings) {
    checkRanking(r, m);
    if (rule == VotingRule::plurality) {
      scores[r.front()] += 1.0;
    } else {
      for (int pos = 0; pos < m; ++pos) scores[r[static_cast<std::size_t>(pos)]] += m - 1 - pos;
    }
  }
  return WinnerDistribution::fromScores(scores);
}

WinnerDistribution pluralityWinnerDist(const Parameter& param, const Scenario& scenario,
                                       const std::vector<int>& keyAgents) {
  checkKeyAgents(keyAgents);
  std::vector<int> all(static_cast<std::size_t>(scenario.m()));
  std::iota(all.begin(), all.end(), 0);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(scenario.m());
  for (int j : keyAgents) {
    const Eigen::VectorXd u = utilities(scenario, j, all, param);
    const Eigen::VectorXd w = (u.array() - u.maxCoeff()).exp();
    acc += w / w.sum();
  }
  acc /= static_cast<double>(keyAgents.size());
  return WinnerDistribution(acc / acc.sum());
}

WinnerDistribution bordaWinnerDist(const Parameter& param, const Scenario& scenario,
                                   const std::vector<int>& keyAgents) {
  checkKeyAgents(keyAgents);
  const int m = scenario.m();
  std::vector<int> all(static_cast<std::size_t>(m));
  std::iota(all.begin(), all.end(), 0);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(m);
  for (int j : keyAgents) {
    const Eigen::VectorXd u = utilities(scenario, j, all, param);
    for (int a = 0; a < m; ++a) {
      for (int b = a + 1; b < m; ++b) {
        const double d = u[a] - u[b];
        const double pab = d >= 0 ? 1.0 / (1.0 + std::exp(-d)) : std::exp(d) / (1.0 + std::exp(d));
        expected[a] += pab;
        expected[b] += 1.0 - pab;
      }
    }
  }
  // Every agent contributes exactly one unit per unordered pair.
  const double normalizer = static_cast<double>(keyAgents.size()) * m * (m - 1) / 2.0;
  return WinnerDistribution(expected / normalizer);
}

WinnerDistribution expectedScoreWinnerDist(const Parameter& param, const Scenario& scenario,
                                           const std::vector<int>& keyAgents,
                                           const Eigen::VectorXd& scoreVector, int mcSamples,
                                           Rng& rng) {
  checkKeyAgents(keyAgents);
  const int m = scenario.m();
  if (scoreVector.size() != m) throw DomainError("score vector length must equal m");
  if ((scoreVector.array() < 0).any()) throw DomainError("scores must be non-negative");
  if (scoreVector.maxCoeff() == scoreVector.minCoeff()) {
    throw DomainError("a score vector with all entries equal carries no information");
  }
  if (mcSamples < 1) throw DomainError("mcSamples must be positive");
  std::vector<int> all(static_cast<std::size_t>(m));
  std::iota(all.begin(), all.end(), 0);
  const Question full{all, m - 1};
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(m);
  for (int j : keyAgents) {
    for (int s = 0; s < mcSamples; ++s) {
      Response r = sampleResponse(scenario, j, full, param, rng);
      std::vector<bool> placed(static_cast<std::size_t>(m), false);
      for (int pos = 0; pos < m - 1; ++pos) {
        scores[r.ranking[static_cast<std::size_t>(pos)]] += scoreVector[pos];
        placed[static_cast<std::size_t>(r.ranking[static_cast<std::size_t>(pos)])] = true;
      }
      const int last = static_cast<int>(std::find(placed.begin(), placed.end(), false) - placed.begin());
      scores[last] += scoreVector[m - 1];
    }
  }
  return WinnerDistribution::fromScores(scores);
}

WinnerDistribution winnerDist(VotingRule rule, const Parameter& param, const Scenario& scenario,
                              const std::vector<int>& keyAgents) {
  return rule == VotingRule::plurality ? pluralityWinnerDist(param, scenario, keyAgents)
                                       : bordaWinnerDist(param, scenario, keyAgents);
}

double totalVariation(const WinnerDistribution& p, const WinnerDistribution& q) {
  if (p.size() != q.size()) {
    throw DomainError("total variation needs distributions of equal length (" +
                      std::to_string(p.size()) + " vs " + std::to_string(q.size()) + ")");
  }
  return 0.5 * (p.probabilities() - q.probabilities()).cwiseAbs().sum();
}

}  // namespace prefelicit
