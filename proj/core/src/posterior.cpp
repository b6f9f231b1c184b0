#include "prefelicit/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "prefelicit/errors.hpp"
#include "prefelicit/pl_model.hpp"

namespace prefelicit {

namespace {

double priorWeight(double priorStd) {
  if (!(priorStd > 0)) throw ConfigError("priorStd must be positive");
  return std::isinf(priorStd) ? 0.0 : 1.0 / (priorStd * priorStd);
}

// Calls f(c, s) for each revealed pair with c = coefficients of
// u(winner) - u(loser) and s = c . beta.
template <typename F>
void forEachPair(const Scenario& scenario, const Response& resp, const Parameter& param, F&& f) {
  const AgentProfile& x = scenario.agent(resp.agent);
  for (const auto& [w, l] : revealedPairs(resp)) {
    const Eigen::VectorXd c = utilityCoefficients(x, scenario.alternative(w)) -
                              utilityCoefficients(x, scenario.alternative(l));
    f(c, c.dot(param.vec()));
  }
}

// log(1 / (1 + exp(-s))) without overflow.
double logSigmoid(double s) { return s >= 0 ? -std::log1p(std::exp(-s)) : s - std::log1p(std::exp(s)); }

double sigmoid(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

}  // namespace

std::string toString(MarginalEvents events) {
  return events == MarginalEvents::pairwise ? "pairwise" : "response";
}

MarginalEvents parseMarginalEvents(const std::string& name) {
  if (name == "response") return MarginalEvents::response;
  if (name == "pairwise") return MarginalEvents::pairwise;
  throw ConfigError("unknown marginal event model '" + name + "'");
}

std::vector<std::pair<int, int>> revealedPairs(const Response& resp) {
  std::vector<std::pair<int, int>> pairs;
  const auto& subset = resp.question.subset;
  for (std::size_t p = 0; p < resp.ranking.size(); ++p) {
    const int w = resp.ranking[p];
    for (std::size_t q = p + 1; q < resp.ranking.size(); ++q) pairs.emplace_back(w, resp.ranking[q]);
    for (int a : subset) {
      if (std::find(resp.ranking.begin(), resp.ranking.end(), a) == resp.ranking.end()) {
        pairs.emplace_back(w, a);
      }
    }
  }
  return pairs;
}

double eventLogProb(const Scenario& scenario, const Response& resp, const Parameter& param,
                    MarginalEvents events) {
  if (events == MarginalEvents::response) return responseLogProb(scenario, resp, param);
  validate(scenario, resp);
  double total = 0.0;
  forEachPair(scenario, resp, param,
              [&](const Eigen::VectorXd&, double s) { total += logSigmoid(s); });
  return total;
}

Eigen::VectorXd eventGrad(const Scenario& scenario, const Response& resp, const Parameter& param,
                          MarginalEvents events) {
  if (events == MarginalEvents::response) return responseGrad(scenario, resp, param);
  validate(scenario, resp);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(param.dim());
  forEachPair(scenario, resp, param,
              [&](const Eigen::VectorXd& c, double s) { g += sigmoid(-s) * c; });
  return g;
}

Eigen::MatrixXd eventHessian(const Scenario& scenario, const Response& resp,
                             const Parameter& param, MarginalEvents events) {
  if (events == MarginalEvents::response) return responseHessian(scenario, resp, param);
  validate(scenario, resp);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(param.dim(), param.dim());
  forEachPair(scenario, resp, param, [&](const Eigen::VectorXd& c, double s) {
    const double p = sigmoid(s);
    H.selfadjointView<Eigen::Lower>().rankUpdate(c, -p * (1.0 - p));
  });
  return H.selfadjointView<Eigen::Lower>();
}

GaussianPosterior::GaussianPosterior(Eigen::VectorXd mean, Eigen::MatrixXd precision,
                                     MarginalEvents events)
    : mean_(std::move(mean)), precision_(std::move(precision)), events_(events) {
  if (precision_.rows() != mean_.size() || precision_.cols() != mean_.size()) {
    throw DomainError("precision shape does not match the mean");
  }
  precision_ = 0.5 * (precision_ + precision_.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(precision_);
  if (llt.info() != Eigen::Success) throw DomainError("precision is not positive definite");
  logDet_ = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  covariance_ = llt.solve(Eigen::MatrixXd::Identity(mean_.size(), mean_.size()));
  covariance_ = 0.5 * (covariance_ + covariance_.transpose());
}

double compositeLogLikelihood(const Scenario& scenario, const Dataset& data,
                              const Parameter& param, double priorStd, MarginalEvents events) {
  double total = 0.0;
  for (const Response& r : data) total += eventLogProb(scenario, r, param, events);
  return total - 0.5 * priorWeight(priorStd) * param.vec().squaredNorm();
}

ObjectiveDerivatives compositeDerivatives(const Scenario& scenario, const Dataset& data,
                                          const Parameter& param, double priorStd,
                                          MarginalEvents events) {
  const double w = priorWeight(priorStd);
  ObjectiveDerivatives d;
  d.gradient = -w * param.vec();
  d.negHessian = w * Eigen::MatrixXd::Identity(param.dim(), param.dim());
  for (const Response& r : data) {
    d.gradient += eventGrad(scenario, r, param, events);
    d.negHessian -= eventHessian(scenario, r, param, events);
  }
  return d;
}

Parameter cmlEstimate(const Scenario& scenario, const Dataset& data, const Parameter& init,
                      const FitConfig& cfg) {
  validate(scenario, init);
  if (cfg.maxIterations < 1 || !(cfg.gradientTolerance > 0) || !(cfg.armijo > 0) ||
      !(cfg.backtrackFactor > 0 && cfg.backtrackFactor < 1)) {
    throw ConfigError("invalid fit configuration");
  }
  const int K = init.K();
  const int L = init.L();
  auto objective = [&](const Eigen::VectorXd& b) {
    return compositeLogLikelihood(scenario, data, Parameter(K, L, b), cfg.priorStd, cfg.events);
  };

  Eigen::VectorXd beta = init.vec();
  double gradNorm = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.maxIterations; ++it) {
    const ObjectiveDerivatives d = compositeDerivatives(scenario, data, Parameter(K, L, beta),
                                                        cfg.priorStd, cfg.events);
    gradNorm = d.gradient.norm();
    if (gradNorm <= cfg.gradientTolerance) return Parameter(K, L, beta);

    const double f0 = objective(beta);
    Eigen::VectorXd direction;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(d.negHessian);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) direction = ldlt.solve(d.gradient);
    const bool newton =
        direction.size() > 0 && direction.allFinite() && direction.dot(d.gradient) > 0;
    if (!newton) direction = d.gradient;

    bool accepted = false;
    auto search = [&](const Eigen::VectorXd& dir) {
      const double slope = dir.dot(d.gradient);
      double t = 1.0;
      for (int bt = 0; bt < cfg.maxBacktracks; ++bt, t *= cfg.backtrackFactor) {
        const Eigen::VectorXd cand = beta + t * dir;
        const double f1 = objective(cand);
        if (std::isfinite(f1) && f1 >= f0 + cfg.armijo * t * slope) {
          beta = cand;
          return true;
        }
        // Close to the optimum the objective change drops below rounding;
        // a full step that shrinks the gradient is still progress.
        if (bt == 0) {
          const double g1 = compositeDerivatives(scenario, data, Parameter(K, L, cand),
                                                 cfg.priorStd, cfg.events)
                                .gradient.norm();
          if (g1 < gradNorm && std::isfinite(f1) && f1 >= f0 - 1e-12 * (1.0 + std::abs(f0))) {
            beta = cand;
            return true;
          }
        }
      }
      return false;
    };
    accepted = search(direction);
    if (!accepted && newton) {
      // Gradient ascent fallback, scaled by the curvature bound.
      const double scale = 1.0 / std::max(1.0, d.negHessian.diagonal().maxCoeff());
      accepted = search(scale * d.gradient);
    }
    if (!accepted) {
      throw ConvergenceError("line search failed at iteration " + std::to_string(it), beta,
                             gradNorm);
    }
  }
  const double finalNorm =
      compositeDerivatives(scenario, data, Parameter(K, L, beta), cfg.priorStd, cfg.events)
          .gradient.norm();
  if (finalNorm <= cfg.gradientTolerance) return Parameter(K, L, beta);
  throw ConvergenceError("CML fit did not converge within " + std::to_string(cfg.maxIterations) +
                             " iterations",
                         beta, finalNorm);
}

GaussianPosterior fitPosterior(const Scenario& scenario, const Dataset& data,
                               const Parameter& init, const FitConfig& cfg) {
  const Parameter mean = cmlEstimate(scenario, data, init, cfg);
  ObjectiveDerivatives d = compositeDerivatives(scenario, data, mean, cfg.priorStd, cfg.events);
  return GaussianPosterior(mean.vec(), std::move(d.negHessian), cfg.events);
}

Eigen::MatrixXd hypotheticalPrecision(const GaussianPosterior& post, const Scenario& scenario,
                                      const Response& resp) {
  const Parameter mean(scenario.K(), scenario.L(), post.mean());
  return post.precision() - eventHessian(scenario, resp, mean, post.events());
}

double DiffStats::certainty() const {
  if (degenerate) return mean != 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::abs(mean) / std;
}

Eigen::VectorXd diffCoefficients(const Scenario& scenario, int agent, int altA, int altB) {
  if (altA == altB) throw DomainError("utility difference needs two distinct alternatives");
  const AgentProfile& x = scenario.agent(agent);
  return utilityCoefficients(x, scenario.alternative(altA)) -
         utilityCoefficients(x, scenario.alternative(altB));
}

DiffStats diffStatsFor(const Eigen::VectorXd& c, const Eigen::VectorXd& mean,
                       const Eigen::MatrixXd& covariance) {
  DiffStats s;
  s.mean = c.dot(mean);
  const double var = c.dot(covariance * c);
  if (var < kVarianceFloor) {
    s.std = kStdFloor;
    s.degenerate = true;
  } else {
    s.std = std::sqrt(var);
  }
  return s;
}

DiffStats utilityDiffStats(const GaussianPosterior& post, const Scenario& scenario, int agent,
                           int altA, int altB) {
  const Eigen::VectorXd c = diffCoefficients(scenario, agent, altA, altB);
  if (c.size() != post.dim()) throw InvalidScenarioError("posterior dimension mismatch");
  return diffStatsFor(c, post.mean(), post.covariance());
}

}  // namespace prefelicit
