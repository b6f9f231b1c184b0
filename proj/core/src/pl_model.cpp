#include "prefelicit/pl_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "prefelicit/errors.hpp"

namespace prefelicit {

namespace {

void checkDims(const AgentProfile& agent, const AlternativeProfile& alt, const Parameter& param) {
  if (alt.attributes.size() != param.K() || agent.attributes.size() != param.L()) {
    throw InvalidScenarioError("profile dimensions do not match the " + std::to_string(param.K()) +
                               "x" + std::to_string(param.L()) + " parameter");
  }
}

Eigen::VectorXd kron(const Eigen::VectorXd& z, const Eigen::VectorXd& x) {
  const Eigen::Index L = x.size();
  Eigen::VectorXd c(z.size() * L);
  for (Eigen::Index kappa = 0; kappa < z.size(); ++kappa) c.segment(kappa * L, L) = z[kappa] * x;
  return c;
}

// Kronecker product of two square matrices, A (K x K) and B (L x L).
Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::Index K = A.rows();
  const Eigen::Index L = B.rows();
  Eigen::MatrixXd out(K * L, K * L);
  for (Eigen::Index r = 0; r < K; ++r)
    for (Eigen::Index c = 0; c < K; ++c) out.block(r * L, c * L, L, L) = A(r, c) * B;
  return out;
}

// Subset ids reordered so the ranked prefix comes first in ranking order and
// the unranked remainder follows in subset order. Stage p then covers the
// suffix starting at position p.
std::vector<int> stageOrder(const Response& resp) {
  std::vector<int> order = resp.ranking;
  for (int id : resp.question.subset) {
    if (std::find(resp.ranking.begin(), resp.ranking.end(), id) == resp.ranking.end()) {
      order.push_back(id);
    }
  }
  return order;
}

struct StagedResponse {
  const AgentProfile* agent;
  std::vector<int> order;
  Eigen::MatrixXd Z;  // row s = attributes of order[s]
  Eigen::VectorXd u;  // utilities in stage order
};

StagedResponse stage(const Scenario& scenario, const Response& resp, const Parameter& param) {
  validate(scenario, param);
  validate(scenario, resp);
  StagedResponse s;
  s.agent = &scenario.agent(resp.agent);
  s.order = stageOrder(resp);
  const Eigen::Index l = static_cast<Eigen::Index>(s.order.size());
  s.Z.resize(l, param.K());
  for (Eigen::Index i = 0; i < l; ++i) {
    s.Z.row(i) = scenario.alternative(s.order[static_cast<std::size_t>(i)]).attributes.transpose();
  }
  const Eigen::VectorXd Bx = param.matrix() * s.agent->attributes;
  s.u = s.Z * Bx;
  return s;
}

// Stage choice probabilities over the suffix u[p..].
Eigen::VectorXd softmaxSuffix(const Eigen::VectorXd& u, Eigen::Index p) {
  const auto tail = u.tail(u.size() - p);
  Eigen::VectorXd w = (tail.array() - tail.maxCoeff()).exp();
  return w / w.sum();
}

}  // namespace

Eigen::VectorXd utilityCoefficients(const AgentProfile& agent, const AlternativeProfile& alt) {
  return kron(alt.attributes, agent.attributes);
}

double utility(const AgentProfile& agent, const AlternativeProfile& alt, const Parameter& param) {
  checkDims(agent, alt, param);
  return alt.attributes.dot(param.matrix() * agent.attributes);
}

Eigen::VectorXd utilities(const Scenario& scenario, int agent, std::span<const int> alts,
                          const Parameter& param) {
  validate(scenario, param);
  const Eigen::VectorXd Bx = param.matrix() * scenario.agent(agent).attributes;
  Eigen::VectorXd u(static_cast<Eigen::Index>(alts.size()));
  for (std::size_t i = 0; i < alts.size(); ++i) {
    u[static_cast<Eigen::Index>(i)] = scenario.alternative(alts[i]).attributes.dot(Bx);
  }
  return u;
}

double logSumExp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double hi = v.maxCoeff();
  if (!std::isfinite(hi)) return hi;
  return hi + std::log((v.array() - hi).exp().sum());
}

double topProb(const AgentProfile& agent, std::span<const AlternativeProfile> subset, int target,
               const Parameter& param) {
  if (subset.size() < 2) throw DomainError("topProb needs a subset of at least two alternatives");
  Eigen::VectorXd u(static_cast<Eigen::Index>(subset.size()));
  Eigen::Index where = -1;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    u[static_cast<Eigen::Index>(i)] = utility(agent, subset[i], param);
    if (subset[i].id == target) where = static_cast<Eigen::Index>(i);
  }
  if (where < 0) throw DomainError("target alternative is not in the subset");
  return std::exp(u[where] - logSumExp(u));
}

double topProb(const Scenario& scenario, int agent, std::span<const int> subset, int target,
               const Parameter& param) {
  std::vector<AlternativeProfile> alts;
  alts.reserve(subset.size());
  for (int id : subset) alts.push_back(scenario.alternative(id));
  return topProb(scenario.agent(agent), alts, target, param);
}

double pairwiseProb(const AgentProfile& agent, const AlternativeProfile& a1,
                    const AlternativeProfile& a2, const Parameter& param) {
  if (a1.id == a2.id) throw DomainError("pairwiseProb needs two distinct alternatives");
  const double d = utility(agent, a1, param) - utility(agent, a2, param);
  // Logistic in the utility difference; written to stay accurate for either sign.
  return d >= 0 ? 1.0 / (1.0 + std::exp(-d)) : std::exp(d) / (1.0 + std::exp(d));
}

double responseLogProb(const Scenario& scenario, const Response& resp, const Parameter& param) {
  const StagedResponse s = stage(scenario, resp, param);
  double lp = 0.0;
  const Eigen::Index l = s.u.size();
  for (Eigen::Index p = 0; p < resp.question.depth; ++p) {
    lp += s.u[p] - logSumExp(s.u.tail(l - p));
  }
  return lp;
}

Eigen::VectorXd responseGrad(const Scenario& scenario, const Response& resp,
                             const Parameter& param) {
  const StagedResponse s = stage(scenario, resp, param);
  // d/dbeta of stage p is (z_p - E_p[z]) (x) x; accumulate in z-space first.
  Eigen::VectorXd dz = Eigen::VectorXd::Zero(param.K());
  for (Eigen::Index p = 0; p < resp.question.depth; ++p) {
    const Eigen::VectorXd pi = softmaxSuffix(s.u, p);
    const auto tailZ = s.Z.bottomRows(s.Z.rows() - p);
    dz += s.Z.row(p).transpose() - tailZ.transpose() * pi;
  }
  return kron(dz, s.agent->attributes);
}

Eigen::MatrixXd responseHessian(const Scenario& scenario, const Response& resp,
                                const Parameter& param) {
  const StagedResponse s = stage(scenario, resp, param);
  Eigen::MatrixXd covZ = Eigen::MatrixXd::Zero(param.K(), param.K());
  for (Eigen::Index p = 0; p < resp.question.depth; ++p) {
    const Eigen::VectorXd pi = softmaxSuffix(s.u, p);
    const auto tailZ = s.Z.bottomRows(s.Z.rows() - p);
    const Eigen::VectorXd mean = tailZ.transpose() * pi;
    const Eigen::MatrixXd centered = tailZ.rowwise() - mean.transpose();
    covZ.noalias() += centered.transpose() * pi.asDiagonal() * centered;
  }
  const Eigen::VectorXd& x = s.agent->attributes;
  Eigen::MatrixXd H = -kron(covZ, Eigen::MatrixXd(x * x.transpose()));
  return 0.5 * (H + H.transpose());
}

Response sampleResponse(const Scenario& scenario, int agent, const Question& question,
                        const Parameter& param, Rng& rng) {
  validate(scenario, question);
  std::vector<int> remaining = question.subset;
  Eigen::VectorXd u = utilities(scenario, agent, remaining, param);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Response r;
  r.agent = agent;
  r.question = question;
  for (int p = 0; p < question.depth; ++p) {
    const Eigen::Index n = static_cast<Eigen::Index>(remaining.size());
    Eigen::VectorXd w = (u.head(n).array() - u.head(n).maxCoeff()).exp();
    const double draw = unif(rng) * w.sum();
    Eigen::Index pick = n - 1;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += w[i];
      if (draw < acc) {
        pick = i;
        break;
      }
    }
    r.ranking.push_back(remaining[static_cast<std::size_t>(pick)]);
    remaining.erase(remaining.begin() + pick);
    for (Eigen::Index i = pick; i + 1 < n; ++i) u[i] = u[i + 1];
  }
  return r;
}

std::size_t responseCount(const Question& question) {
  std::size_t count = 1;
  const std::size_t l = question.subset.size();
  for (int p = 0; p < question.depth; ++p) {
    const std::size_t factor = l - static_cast<std::size_t>(p);
    if (count > std::numeric_limits<std::size_t>::max() / factor) {
      return std::numeric_limits<std::size_t>::max();
    }
    count *= factor;
  }
  return count;
}

std::vector<Response> enumerateResponses(int agent, const Question& question, std::size_t cap) {
  const std::size_t count = responseCount(question);
  if (count > cap) {
    throw TooLargeError("question has " + std::to_string(count) +
                        " possible responses, above the enumeration cap of " +
                        std::to_string(cap));
  }
  std::vector<Response> out;
  out.reserve(count);
  std::vector<int> prefix;
  std::vector<bool> used(question.subset.size(), false);
  auto recurse = [&](auto&& self) -> void {
    if (static_cast<int>(prefix.size()) == question.depth) {
      out.push_back({agent, question, prefix});
      return;
    }
    for (std::size_t i = 0; i < question.subset.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      prefix.push_back(question.subset[i]);
      self(self);
      prefix.pop_back();
      used[i] = false;
    }
  };
  recurse(recurse);
  return out;
}

}  // namespace prefelicit
