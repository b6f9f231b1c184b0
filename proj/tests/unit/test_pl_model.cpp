#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "prefelicit/errors.hpp"
#include "prefelicit/pl_model.hpp"
#include "test_support.hpp"

using namespace prefelicit;
using namespace prefelicit::testing;

namespace {

Scenario scalarScenario(double z, double x) {
  Eigen::MatrixXd alts(2, 1);
  alts << z, 0.0;
  Eigen::MatrixXd agents(1, 1);
  agents << x;
  return Scenario::fromMatrices(alts, agents, 0);
}

// A random question with l <= 5 and 1 <= k < l over a random subset.
Question randomQuestion(Rng& rng, int m) {
  std::uniform_int_distribution<int> lDist(2, std::min(5, m));
  const int l = lDist(rng);
  std::vector<int> ids(m);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(l);
  std::uniform_int_distribution<int> kDist(1, l - 1);
  return Question{ids, kDist(rng)};
}

Response randomResponse(Rng& rng, const Scenario& s, int agent, const Question& q) {
  std::vector<int> order = q.subset;
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(q.depth);
  return Response{agent, q, order};
}

}  // namespace

TEST(Utility, ZeroParameterGivesZero) {
  Rng rng(1);
  const Scenario s = randomScenario(rng, 4, 3, 2, 1, 1);
  EXPECT_EQ(utility(s.agents[0], s.alternatives[2], Parameter::zeros(3, 2)), 0.0);
}

TEST(Utility, ScalarBilinearForm) {
  const Scenario s = scalarScenario(1.0, 3.0);
  Eigen::MatrixXd B(1, 1);
  B << 2.0;
  EXPECT_DOUBLE_EQ(utility(s.agents[0], s.alternatives[0], Parameter::fromMatrix(B)), 6.0);
}

TEST(Utility, MatchesDoubleSumOracle) {
  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const Scenario s = randomScenario(rng, 5, 3, 3, 1, 2);
    const Parameter p = randomParameter(rng, 3, 3);
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 5; ++i) {
        EXPECT_NEAR(utility(s.agents[j], s.alternatives[i], p), oracleUtility(s, j, i, p), 1e-12);
      }
  }
}

TEST(Utility, DimensionMismatchThrows) {
  Rng rng(3);
  const Scenario s = randomScenario(rng, 3, 2, 2, 1, 0);
  EXPECT_THROW(utility(s.agents[0], s.alternatives[0], Parameter::zeros(3, 2)),
               InvalidScenarioError);
}

TEST(Utility, IndexMapRowsAreAlternativeAttributes) {
  Parameter p(2, 3);
  p(1, 2) = 5.0;
  EXPECT_EQ(p.vec()[1 * 3 + 2], 5.0);
  EXPECT_EQ(p.matrix()(1, 2), 5.0);
  EXPECT_EQ(Parameter::fromMatrix(p.matrix()).vec(), p.vec());
}

TEST(TopProb, EqualUtilitiesAreUniform) {
  Rng rng(4);
  const Scenario s = randomScenario(rng, 5, 2, 2, 1, 0);
  const std::vector<int> subset{0, 1, 3, 4};
  for (int t : subset) EXPECT_NEAR(topProb(s, 0, subset, t, Parameter::zeros(2, 2)), 0.25, 1e-15);
}

TEST(TopProb, LogThreeGapGivesThreeQuarters) {
  const Scenario s = scalarScenario(1.0, 1.0);
  Eigen::MatrixXd B(1, 1);
  B << std::log(3.0);
  EXPECT_NEAR(topProb(s, 0, std::vector<int>{0, 1}, 0, Parameter::fromMatrix(B)), 0.75, 1e-15);
}

TEST(TopProb, TargetOutsideSubsetThrows) {
  Rng rng(5);
  const Scenario s = randomScenario(rng, 4, 2, 2, 1, 0);
  EXPECT_THROW(topProb(s, 0, std::vector<int>{0, 1}, 3, Parameter::zeros(2, 2)), DomainError);
}

TEST(TopProb, OverflowSafeAtHugeUtilities) {
  const Scenario s = scalarScenario(1.0, 1.0);
  Eigen::MatrixXd B(1, 1);
  B << 1000.0;
  const double p = topProb(s, 0, std::vector<int>{0, 1}, 0, Parameter::fromMatrix(B));
  EXPECT_TRUE(std::isfinite(p));
  EXPECT_NEAR(p, 1.0, 1e-15);
}

TEST(TopProb, MatchesMonteCarloFrequency) {
  Rng rng(6);
  const Scenario s = randomScenario(rng, 4, 2, 2, 1, 0);
  const Parameter p = randomParameter(rng, 2, 2, 0.5);
  const std::vector<int> subset{0, 1, 2, 3};
  const Question q{subset, 1};
  const int n = 1000000;
  std::vector<int> counts(4, 0);
  Rng draw(7);
  for (int i = 0; i < n; ++i) ++counts[sampleResponse(s, 0, q, p, draw).ranking[0]];
  for (int t = 0; t < 4; ++t) {
    const double pr = topProb(s, 0, subset, t, p);
    const double se = std::sqrt(pr * (1 - pr) / n);
    EXPECT_NEAR(counts[t] / static_cast<double>(n), pr, 3 * se) << "alternative " << t;
  }
}

TEST(PairwiseProb, EqualUtilitiesGiveHalf) {
  Rng rng(8);
  const Scenario s = randomScenario(rng, 3, 2, 2, 1, 0);
  EXPECT_EQ(pairwiseProb(s.agents[0], s.alternatives[0], s.alternatives[1], Parameter::zeros(2, 2)),
            0.5);
}

TEST(PairwiseProb, SaturatesAtLargeGap) {
  const Scenario s = scalarScenario(1.0, 1.0);
  Eigen::MatrixXd B(1, 1);
  B << 50.0;
  const Parameter p = Parameter::fromMatrix(B);
  EXPECT_NEAR(pairwiseProb(s.agents[0], s.alternatives[0], s.alternatives[1], p), 1.0, 1e-15);
}

TEST(PairwiseProb, ComplementsAndMatchesTopProb) {
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const Scenario s = randomScenario(rng, 4, 3, 2, 1, 0);
    const Parameter p = randomParameter(rng, 3, 2);
    const double ab = pairwiseProb(s.agents[0], s.alternatives[1], s.alternatives[3], p);
    const double ba = pairwiseProb(s.agents[0], s.alternatives[3], s.alternatives[1], p);
    EXPECT_NEAR(ab + ba, 1.0, 1e-15);
    EXPECT_NEAR(ab, topProb(s, 0, std::vector<int>{1, 3}, 1, p), 1e-12);
  }
}

TEST(PairwiseProb, SameAlternativeThrows) {
  Rng rng(10);
  const Scenario s = randomScenario(rng, 3, 2, 2, 1, 0);
  EXPECT_THROW(pairwiseProb(s.agents[0], s.alternatives[1], s.alternatives[1], Parameter::zeros(2, 2)),
               DomainError);
}

TEST(ResponseLogProb, UniformTopTwoOfThree) {
  Rng rng(11);
  const Scenario s = randomScenario(rng, 3, 2, 2, 1, 0);
  const Response r{0, Question{{0, 1, 2}, 2}, {2, 0}};
  EXPECT_NEAR(responseLogProb(s, r, Parameter::zeros(2, 2)), -std::log(6.0), 1e-15);
}

TEST(ResponseLogProb, UniformPairwise) {
  Rng rng(12);
  const Scenario s = randomScenario(rng, 3, 2, 2, 1, 0);
  const Response r{0, Question{{0, 2}, 1}, {2}};
  EXPECT_NEAR(responseLogProb(s, r, Parameter::zeros(2, 2)), std::log(0.5), 1e-15);
}

TEST(ResponseLogProb, MatchesBruteForceMarginalization) {
  Rng rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    const Scenario s = randomScenario(rng, 6, 3, 2, 0, 1);
    const Parameter p = randomParameter(rng, 3, 2, 0.7);
    std::uniform_int_distribution<int> lDist(3, 6);
    const int l = lDist(rng);
    std::vector<int> ids{0, 1, 2, 3, 4, 5};
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(l);
    std::uniform_int_distribution<int> kDist(1, l - 2);
    const Question q{ids, kDist(rng)};
    const Response r = randomResponse(rng, s, 0, q);
    const double oracle = std::log(bruteForcePrefixProb(s, 0, q.subset, r.ranking, p));
    EXPECT_NEAR(responseLogProb(s, r, p), oracle, 1e-10);
  }
}

TEST(ResponseLogProb, EnumeratedProbabilitiesSumToOne) {
  Rng rng(14);
  for (int rep = 0; rep < 30; ++rep) {
    const Scenario s = randomScenario(rng, 5, 2, 3, 0, 1);
    const Parameter p = randomParameter(rng, 2, 3);
    const Question q = randomQuestion(rng, 5);
    if (responseCount(q) > 120) continue;
    double total = 0.0;
    for (const Response& r : enumerateResponses(0, q, 120)) total += std::exp(responseLogProb(s, r, p));
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
}

TEST(ResponseLogProb, InvariantToCommonUtilityShift) {
  // Shifting every alternative's attributes by a vector v adds z-independent
  // v'Bx to all utilities of the agent, which PL ignores.
  Rng rng(15);
  for (int rep = 0; rep < 30; ++rep) {
    Scenario s = randomScenario(rng, 5, 3, 2, 0, 1);
    const Parameter p = randomParameter(rng, 3, 2);
    const Question q = randomQuestion(rng, 5);
    const Response r = randomResponse(rng, s, 0, q);
    const double before = responseLogProb(s, r, p);
    Eigen::VectorXd v(3);
    v << 1.5, -2.0, 0.3;
    for (auto& a : s.alternatives) a.attributes += v;
    EXPECT_NEAR(responseLogProb(s, r, p), before, 1e-10);
  }
}

TEST(ResponseGrad, ZeroUnderTotalSymmetry) {
  Eigen::MatrixXd alts = Eigen::MatrixXd::Constant(3, 2, 0.7);
  Eigen::MatrixXd agents(1, 2);
  agents << 1.0, -2.0;
  const Scenario s = Scenario::fromMatrices(alts, agents, 0);
  const Response r{0, Question{{0, 1, 2}, 2}, {1, 2}};
  EXPECT_LT(responseGrad(s, r, Parameter::zeros(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ResponseGrad, PairwiseLogisticForm) {
  Rng rng(16);
  for (int rep = 0; rep < 30; ++rep) {
    const Scenario s = randomScenario(rng, 4, 3, 3, 0, 1);
    const Parameter p = randomParameter(rng, 3, 3);
    const Response r{0, Question{{1, 3}, 1}, {3}};
    const double pw = pairwiseProb(s.agents[0], s.alternatives[3], s.alternatives[1], p);
    Eigen::VectorXd c(9);
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) {
        c[k * 3 + l] = (s.alternatives[3].attributes[k] - s.alternatives[1].attributes[k]) *
                       s.agents[0].attributes[l];
      }
    EXPECT_LT((responseGrad(s, r, p) - (1 - pw) * c).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ResponseDerivatives, MatchFiniteDifferences) {
  Rng rng(17);
  std::uniform_int_distribution<int> dim(1, 4);
  for (int rep = 0; rep < 100; ++rep) {
    const int K = dim(rng);
    const int L = dim(rng);
    const Scenario s = randomScenario(rng, 6, K, L, 0, 1);
    const Parameter p = randomParameter(rng, K, L, 0.5);
    const Question q = randomQuestion(rng, 6);
    const Response r = randomResponse(rng, s, 0, q);
    const auto f = [&](const Eigen::VectorXd& b) { return responseLogProb(s, r, Parameter(K, L, b)); };
    const auto g = [&](const Eigen::VectorXd& b) { return responseGrad(s, r, Parameter(K, L, b)); };
    const Eigen::MatrixXd H = responseHessian(s, r, p);
    EXPECT_LT(relError(responseGrad(s, r, p), fdGradient(f, p.vec())), 1e-5);
    EXPECT_LT(relError(H, fdJacobian(g, p.vec())), 1e-4);
    EXPECT_LT((H - H.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues().maxCoeff(), 1e-10);
  }
}

TEST(ResponseHessian, PairwiseAtZeroIsQuarterOuterProduct) {
  Rng rng(18);
  const Scenario s = randomScenario(rng, 3, 2, 3, 0, 1);
  const Response r{0, Question{{0, 2}, 1}, {0}};
  Eigen::VectorXd c(6);
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 3; ++l) {
      c[k * 3 + l] = (s.alternatives[0].attributes[k] - s.alternatives[2].attributes[k]) *
                     s.agents[0].attributes[l];
    }
  const Eigen::MatrixXd expected = -0.25 * c * c.transpose();
  EXPECT_LT((responseHessian(s, r, Parameter::zeros(2, 3)) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SampleResponse, TwoAlternativesSymmetric) {
  Rng rng(19);
  const Scenario s = randomScenario(rng, 2, 2, 2, 0, 1);
  const Question q{{0, 1}, 1};
  const int n = 100000;
  int first = 0;
  Rng draw(20);
  for (int i = 0; i < n; ++i) first += sampleResponse(s, 0, q, Parameter::zeros(2, 2), draw).ranking[0] == 0;
  EXPECT_NEAR(first / static_cast<double>(n), 0.5, 3 * std::sqrt(0.25 / n));
}

TEST(SampleResponse, ChiSquareAgainstExactProbabilities) {
  Rng rng(21);
  const Scenario s = randomScenario(rng, 3, 2, 2, 0, 1);
  const Parameter p = randomParameter(rng, 2, 2, 0.6);
  const Question q{{0, 1, 2}, 2};
  const int n = 100000;
  std::map<std::vector<int>, int> counts;
  Rng draw(22);
  for (int i = 0; i < n; ++i) ++counts[sampleResponse(s, 0, q, p, draw).ranking];
  double chi2 = 0.0;
  for (const Response& r : enumerateResponses(0, q)) {
    const double expected = n * std::exp(responseLogProb(s, r, p));
    const double d = counts[r.ranking] - expected;
    chi2 += d * d / expected;
  }
  // 5 degrees of freedom; the 0.99 quantile is 15.086.
  EXPECT_LT(chi2, 15.086);
}

TEST(SampleResponse, DeterministicForFixedSeed) {
  Rng rng(23);
  const Scenario s = randomScenario(rng, 6, 2, 2, 0, 1);
  const Parameter p = randomParameter(rng, 2, 2);
  const Question q{{0, 1, 2, 3, 4, 5}, 5};
  Rng a(99), b(99);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sampleResponse(s, 0, q, p, a), sampleResponse(s, 0, q, p, b));
}

TEST(EnumerateResponses, Counts) {
  EXPECT_EQ(enumerateResponses(0, Question{{0, 1}, 1}).size(), 2u);
  EXPECT_EQ(enumerateResponses(0, Question{{0, 1, 2}, 2}).size(), 6u);
  Question full{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 9};
  EXPECT_EQ(responseCount(full), 3628800u);
  EXPECT_THROW(enumerateResponses(0, full), TooLargeError);
}

TEST(EnumerateResponses, DistinctValidPrefixes) {
  const Question q{{4, 1, 7, 2}, 2};
  const auto rs = enumerateResponses(3, q);
  ASSERT_EQ(rs.size(), 12u);
  std::set<std::vector<int>> seen;
  for (const Response& r : rs) {
    EXPECT_EQ(r.agent, 3);
    EXPECT_EQ(r.question, q);
    EXPECT_EQ(r.ranking.size(), 2u);
    EXPECT_NE(r.ranking[0], r.ranking[1]);
    seen.insert(r.ranking);
  }
  EXPECT_EQ(seen.size(), 12u);
}

TEST(Validation, RejectsMalformedResponses) {
  Rng rng(24);
  const Scenario s = randomScenario(rng, 4, 2, 2, 1, 1);
  const Parameter p = Parameter::zeros(2, 2);
  EXPECT_THROW(responseLogProb(s, Response{1, Question{{0, 1}, 1}, {2}}, p), InvalidScenarioError);
  EXPECT_THROW(responseLogProb(s, Response{1, Question{{0, 0}, 1}, {0}}, p), InvalidScenarioError);
  EXPECT_THROW(responseLogProb(s, Response{1, Question{{0, 1}, 2}, {0, 1}}, p), InvalidScenarioError);
  EXPECT_THROW(responseLogProb(s, Response{1, Question{{0, 1, 2}, 2}, {0}}, p), InvalidScenarioError);
  EXPECT_THROW(responseLogProb(s, Response{9, Question{{0, 1}, 1}, {0}}, p), InvalidScenarioError);
}
