#pragma once

// Oracles and fixtures shared by the unit and acceptance tests. Nothing here
// calls into the library's math; each oracle is an independent computation
// from first principles.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "prefelicit/rng.hpp"
#include "prefelicit/types.hpp"

namespace prefelicit::testing {

inline Scenario randomScenario(Rng& rng, int m, int K, int L, int n1, int n2,
                               double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd alts(m, K);
  Eigen::MatrixXd agents(n1 + n2, L);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < K; ++k) alts(i, k) = normal(rng);
  for (int j = 0; j < n1 + n2; ++j)
    for (int l = 0; l < L; ++l) agents(j, l) = normal(rng);
  return Scenario::fromMatrices(alts, agents, n1);
}

inline Parameter randomParameter(Rng& rng, int K, int L, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd b(K * L);
  for (int i = 0; i < K * L; ++i) b[i] = normal(rng);
  return Parameter(K, L, b);
}

/// u = sum_{kappa, iota} z_kappa b_{kappa iota} x_iota, written out.
inline double doubleSumUtility(const Eigen::VectorXd& z, const Eigen::MatrixXd& B,
                               const Eigen::VectorXd& x) {
  double u = 0.0;
  for (int k = 0; k < B.rows(); ++k)
    for (int l = 0; l < B.cols(); ++l) u += z[k] * B(k, l) * x[l];
  return u;
}

inline double oracleUtility(const Scenario& s, int agent, int alt, const Parameter& p) {
  return doubleSumUtility(s.alternatives[alt].attributes, p.matrix(), s.agents[agent].attributes);
}

/// Probability of a complete ordering of `order` under PL, as a product of
/// plain (unshifted) softmax ratios.
inline double plOrderingProb(const Scenario& s, int agent, const std::vector<int>& order,
                             const Parameter& p) {
  double prob = 1.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    double denom = 0.0;
    for (std::size_t j = i; j < order.size(); ++j) denom += std::exp(oracleUtility(s, agent, order[j], p));
    prob *= std::exp(oracleUtility(s, agent, order[i], p)) / denom;
  }
  return prob;
}

/// Marginal probability of a top-k prefix: sum over every full ordering of
/// the subset that starts with `prefix`.
inline double bruteForcePrefixProb(const Scenario& s, int agent, const std::vector<int>& subset,
                                   const std::vector<int>& prefix, const Parameter& p) {
  std::vector<int> perm = subset;
  std::sort(perm.begin(), perm.end());
  double total = 0.0;
  do {
    if (std::equal(prefix.begin(), prefix.end(), perm.begin())) {
      total += plOrderingProb(s, agent, perm, p);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

/// Central finite-difference gradient of f at x.
inline Eigen::VectorXd fdGradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

/// Central finite-difference Jacobian of a vector function (columns = inputs).
inline Eigen::MatrixXd fdJacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h = 1e-5) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    J.col(i) = (f(a) - f(b)) / (2 * h);
  }
  return J;
}

/// max |a - b| / max(1, max |b|): relative to the scale of the reference.
inline double relError(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// Determinant by Laplace cofactor expansion along the first row.
inline double cofactorDeterminant(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  if (n == 1) return A(0, 0);
  double det = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::MatrixXd minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r) {
      Eigen::Index cc = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k == c) continue;
        minor(r - 1, cc++) = A(r, k);
      }
    }
    det += ((c % 2 == 0) ? 1.0 : -1.0) * A(0, c) * cofactorDeterminant(minor);
  }
  return det;
}

/// Smallest eigenvalue of an SPD matrix by inverse power iteration.
inline double inversePowerMinEigenvalue(const Eigen::MatrixXd& A, int iterations = 5000) {
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(A.rows()).normalized();
  v[0] += 0.1;
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd w = lu.solve(v);
    w.normalize();
    const double next = w.dot(A * w);
    v = w;
    if (it > 10 && std::abs(next - lambda) < 1e-15 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

inline Eigen::MatrixXd randomSpd(Rng& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = normal(rng);
  return M * M.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

/// All permutations of 0..m-1.
inline std::vector<std::vector<int>> allPermutations(int m) {
  std::vector<int> p(m);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

/// The three-vote profile over a1, a2, a3 (ids 0, 1, 2):
/// a1 > a2 > a3, a1 > a3 > a2, a2 > a1 > a3.
inline std::vector<std::vector<int>> exampleOneRankings() {
  return {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}};
}

}  // namespace prefelicit::testing
