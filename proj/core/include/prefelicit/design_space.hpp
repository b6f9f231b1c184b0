#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "prefelicit/criteria.hpp"
#include "prefelicit/pl_model.hpp"
#include "prefelicit/posterior.hpp"
#include "prefelicit/rng.hpp"
#include "prefelicit/types.hpp"

namespace prefelicit {

/// An (agent, question) pair that may be queried. `id` is the design's
/// position in the space it was built in and stays fixed when designs are
/// removed; it seeds Monte Carlo streams and breaks ties.
struct Design {
  int id = 0;
  int agent = 0;
  Question question;

  bool operator==(const Design&) const = default;
};

/// A "top k of l" question shape.
struct QuestionTemplate {
  int k = 1;
  int l = 2;

  bool operator==(const QuestionTemplate&) const = default;
  auto operator<=>(const QuestionTemplate&) const = default;
};

/// Dollar cost of answering a question.
///
/// The built-in model uses time-per-answer regressions from a hotel-ranking
/// crowdsourcing study at a fixed wage: a full ranking of l costs 0.0047 l,
/// and a ranked top-k of 10 costs 0.0012 k + 0.028. A table model prices
/// each (k, l) explicitly.
class CostModel {
 public:
  static CostModel builtinMturkHotels();
  static CostModel table(std::map<std::pair<int, int>, double> prices);

  /// Reads lines "k,l,dollars"; blank lines and lines starting with '#' are skipped.
  static CostModel parseTable(std::istream& in);
  static CostModel loadTable(const std::filesystem::path& path);

  bool builtin() const { return builtin_; }
  const std::map<std::pair<int, int>, double>& prices() const { return prices_; }

  /// Throws CostModelError for shapes the model does not cover.
  double cost(int k, int l) const;
  double cost(const Question& q) const { return cost(q.k(), q.l()); }

 private:
  bool builtin_ = true;
  std::map<std::pair<int, int>, double> prices_;
};

/// How subsets are chosen for templates with 2 < l < m.
struct SubsetPolicy {
  std::vector<std::vector<int>> explicitSubsets;  // used when any has size l
  int sampledCount = 0;                           // otherwise draw this many
  std::uint64_t seed = 0;
};

/// Designs for every regular agent: l = m asks about all alternatives, l = 2
/// asks about every unordered pair, and 2 < l < m follows the subset policy.
/// Order: template, then agent, then subset (lexicographic).
std::vector<Design> buildDesignSpace(const Scenario& scenario,
                                     const std::vector<QuestionTemplate>& templates,
                                     const SubsetPolicy& policy = {});

/// Units in which D-optimality gains are compared across designs.
///
/// `determinant` ranks designs by E[det J'] - det J per dollar, computed as
/// E[det J' / det J] - 1 (the common factor det J does not change the
/// argmax). `logDeterminant` uses E[log det J'] - log det J instead, which
/// penalizes large multiplicative updates such as full rankings.
enum class DeterminantScale { determinant, logDeterminant };

struct GainConfig {
  std::size_t enumerationCap = kDefaultEnumerationCap;
  DeterminantScale dScale = DeterminantScale::determinant;
  int mcSamples = 32;
  std::uint64_t seed = 0;  // Monte Carlo stream for design d is deriveSeed(seed, {d.id})
};

/// E[G(posterior after answer)] - G(posterior), with answers distributed as
/// PL at the posterior mean and posteriors updated by hypotheticalPrecision.
/// Exact when the answers enumerate under the cap, Monte Carlo otherwise.
/// For D-optimality the units follow cfg.dScale.
double expectedGain(const Design& design, const GaussianPosterior& post, const Scenario& scenario,
                    const CriterionSpec& spec, const GainConfig& cfg);

/// Same, reusing a criterion prepared for `post` and its current value.
double expectedGain(const Design& design, const GaussianPosterior& post, const Scenario& scenario,
                    const PreparedCriterion& criterion, double currentValue,
                    const GainConfig& cfg);

struct Selection {
  Design design;
  double cost = 0.0;
  double gain = 0.0;  // 0 for the random criterion
};

/// argmax of expectedGain / cost over designs with cost <= remainingBudget.
/// Ties go to the cheaper design, then the lower id. The random criterion
/// draws uniformly from the affordable designs using `rng`.
std::optional<Selection> selectDesign(const std::vector<Design>& designs,
                                      const GaussianPosterior& post, const Scenario& scenario,
                                      const CriterionSpec& spec, const CostModel& costModel,
                                      double remainingBudget, const GainConfig& cfg, Rng& rng);

}  // namespace prefelicit
