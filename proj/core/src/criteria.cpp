#include "prefelicit/criteria.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "prefelicit/errors.hpp"
#include "prefelicit/pl_model.hpp"

namespace prefelicit {

namespace {

struct Pair {
  int agent;
  int a;
  int b;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Pair> singleAgentPairs(const std::vector<int>& topK, int m, int agent, bool ordered) {
  std::vector<bool> inTop(static_cast<std::size_t>(m), false);
  for (int i : topK) inTop[static_cast<std::size_t>(i)] = true;
  std::vector<Pair> pairs;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      const bool ta = inTop[static_cast<std::size_t>(a)];
      const bool tb = inTop[static_cast<std::size_t>(b)];
      const bool keep = ordered ? (ta || tb) : (ta != tb);
      if (keep) pairs.push_back({agent, a, b});
    }
  }
  return pairs;
}

std::vector<Pair> groupPairs(const std::vector<int>& keyAgents, int m) {
  std::vector<Pair> pairs;
  for (int j : keyAgents)
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) pairs.push_back({j, a, b});
  return pairs;
}

std::vector<Pair> pairsFor(const CriterionSpec& spec, const Scenario& scenario,
                           const GaussianPosterior& post) {
  switch (spec.kind) {
    case CriterionKind::mpcUnorderedTopK:
    case CriterionKind::mpcRankedTopK: {
      const bool ordered = spec.kind == CriterionKind::mpcRankedTopK;
      return singleAgentPairs(predictedTopK(post, scenario, spec.target, spec.k), scenario.m(),
                              spec.target, ordered);
    }
    case CriterionKind::mpcGroup:
      return groupPairs(scenario.keyAgents(), scenario.m());
    default:
      return {};
  }
}

double minCertainty(const std::vector<Pair>& pairs, const GaussianPosterior& post,
                    const Scenario& scenario) {
  double best = kInf;
  for (const Pair& p : pairs) {
    best = std::min(best, utilityDiffStats(post, scenario, p.agent, p.a, p.b).certainty());
  }
  return best;
}

int parseInt(std::string_view s, std::string_view whole) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("cannot parse criterion '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

std::string toString(const CriterionSpec& spec) {
  switch (spec.kind) {
    case CriterionKind::dOpt:
      return "dopt";
    case CriterionKind::eOpt:
      return "eopt";
    case CriterionKind::mpcGroup:
      return "mpc";
    case CriterionKind::random:
      return "random";
    case CriterionKind::mpcUnorderedTopK:
      return "mpc-topk:" + std::to_string(spec.k) + "@" + std::to_string(spec.target);
    case CriterionKind::mpcRankedTopK:
      return "mpc-ranked:" + std::to_string(spec.k) + "@" + std::to_string(spec.target);
  }
  return "unknown";
}

CriterionSpec parseCriterion(std::string_view text) {
  if (text == "dopt" || text == "d-opt") return CriterionSpec::dOpt();
  if (text == "eopt" || text == "e-opt") return CriterionSpec::eOpt();
  if (text == "mpc" || text == "mpc-group") return CriterionSpec::mpcGroup();
  if (text == "random") return CriterionSpec::random();
  for (auto [prefix, kind] : {std::pair{std::string_view("mpc-topk:"), CriterionKind::mpcUnorderedTopK},
                              std::pair{std::string_view("mpc-ranked:"), CriterionKind::mpcRankedTopK}}) {
    if (text.substr(0, prefix.size()) != prefix) continue;
    std::string_view rest = text.substr(prefix.size());
    CriterionSpec spec{kind};
    const auto at = rest.find('@');
    spec.k = parseInt(rest.substr(0, at), text);
    spec.target = at == std::string_view::npos ? 0 : parseInt(rest.substr(at + 1), text);
    return spec;
  }
  throw ConfigError("unknown criterion '" + std::string(text) + "'");
}

void validate(const CriterionSpec& spec, const Scenario& scenario) {
  const int m = scenario.m();
  switch (spec.kind) {
    case CriterionKind::mpcUnorderedTopK:
      if (spec.k < 1 || spec.k >= m) throw ConfigError("unordered MPC needs 1 <= k < m");
      break;
    case CriterionKind::mpcRankedTopK:
      if (spec.k <= 1 || spec.k >= m) throw ConfigError("ranked MPC needs 1 < k < m");
      break;
    case CriterionKind::mpcGroup:
      if (scenario.n1 < 2) throw ConfigError("group MPC needs at least two key agents");
      break;
    default:
      return;
  }
  if (spec.kind != CriterionKind::mpcGroup &&
      (spec.target < 0 || spec.target >= static_cast<int>(scenario.agents.size()))) {
    throw ConfigError("MPC target agent out of range");
  }
}

double dOptimality(const GaussianPosterior& post) { return post.logDetPrecision(); }

double eOptimality(const GaussianPosterior& post) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(post.precision(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::vector<int> predictedTopK(const GaussianPosterior& post, const Scenario& scenario, int agent,
                               int k) {
  const int m = scenario.m();
  if (k < 1 || k > m) throw DomainError("predictedTopK needs 1 <= k <= m");
  std::vector<int> ids(static_cast<std::size_t>(m));
  std::iota(ids.begin(), ids.end(), 0);
  const Eigen::VectorXd u =
      utilities(scenario, agent, ids, Parameter(scenario.K(), scenario.L(), post.mean()));
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    return std::tie(u[b], a) < std::tie(u[a], b);  // descending utility, ascending id
  });
  ids.resize(static_cast<std::size_t>(k));
  return ids;
}

double mpcSingle(const GaussianPosterior& post, const Scenario& scenario, int agent, int k,
                 bool ordered) {
  validate(ordered ? CriterionSpec::mpcRanked(k, agent) : CriterionSpec::mpcUnordered(k, agent),
           scenario);
  const auto pairs =
      singleAgentPairs(predictedTopK(post, scenario, agent, k), scenario.m(), agent, ordered);
  return minCertainty(pairs, post, scenario);
}

double mpcGroup(const GaussianPosterior& post, const Scenario& scenario,
                const std::vector<int>& keyAgents) {
  if (keyAgents.size() < 2) throw DomainError("group MPC needs at least two key agents");
  return minCertainty(groupPairs(keyAgents, scenario.m()), post, scenario);
}

double evaluate(const CriterionSpec& spec, const GaussianPosterior& post,
                const Scenario& scenario) {
  validate(spec, scenario);
  if (post.dim() != scenario.K() * scenario.L()) {
    throw ConfigError("posterior dimension does not match the scenario");
  }
  switch (spec.kind) {
    case CriterionKind::dOpt:
      return dOptimality(post);
    case CriterionKind::eOpt:
      return eOptimality(post);
    case CriterionKind::mpcUnorderedTopK:
      return mpcSingle(post, scenario, spec.target, spec.k, false);
    case CriterionKind::mpcRankedTopK:
      return mpcSingle(post, scenario, spec.target, spec.k, true);
    case CriterionKind::mpcGroup:
      return mpcGroup(post, scenario, scenario.keyAgents());
    case CriterionKind::random:
      return 0.0;
  }
  throw ConfigError("unknown criterion kind");
}

PreparedCriterion::PreparedCriterion(const CriterionSpec& spec, const Scenario& scenario,
                                     const GaussianPosterior& post)
    : spec_(spec) {
  validate(spec, scenario);
  const auto pairs = pairsFor(spec, scenario, post);
  pairCoefficients_.resize(post.dim(), static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pairCoefficients_.col(static_cast<Eigen::Index>(i)) =
        diffCoefficients(scenario, pairs[i].agent, pairs[i].a, pairs[i].b);
  }
  pairMeans_ = pairCoefficients_.transpose() * post.mean();
}

double PreparedCriterion::valueAt(const Eigen::MatrixXd& precision) const {
  switch (spec_.kind) {
    case CriterionKind::random:
      return 0.0;
    case CriterionKind::dOpt: {
      Eigen::LLT<Eigen::MatrixXd> llt(precision);
      if (llt.info() != Eigen::Success) throw DomainError("precision is not positive definite");
      return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }
    case CriterionKind::eOpt: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(precision, Eigen::EigenvaluesOnly);
      return es.eigenvalues().minCoeff();
    }
    default:
      break;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw DomainError("precision is not positive definite");
  // c' J^-1 c = ||L^-1 c||^2
  const Eigen::MatrixXd w = llt.matrixL().solve(pairCoefficients_);
  const Eigen::VectorXd var = w.colwise().squaredNorm().transpose();
  double best = kInf;
  for (Eigen::Index i = 0; i < var.size(); ++i) {
    double c;
    if (var[i] < kVarianceFloor) {
      c = pairMeans_[i] != 0.0 ? kInf : 0.0;
    } else {
      c = std::abs(pairMeans_[i]) / std::sqrt(var[i]);
    }
    best = std::min(best, c);
  }
  return best;
}

}  // namespace prefelicit
