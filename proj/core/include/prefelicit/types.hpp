#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace prefelicit {

enum class Group { key, regular };

/// One alternative a_i, described by K real attributes z_i.
struct AlternativeProfile {
  int id = 0;
  Eigen::VectorXd attributes;
  std::string name;  // display only
};

/// One agent j, described by L real attributes x_j.
struct AgentProfile {
  int id = 0;
  Eigen::VectorXd attributes;
  Group group = Group::regular;
};

/// The K x L coefficient matrix B, stored as its vectorization beta.
///
/// Entry b(kappa, iota) lives at beta[kappa * L + iota]; kappa indexes
/// alternative attributes and iota indexes agent attributes. Every covariance
/// lookup downstream depends on this map, so nothing else may reorder it.
class Parameter {
 public:
  Parameter() = default;
  Parameter(int K, int L);
  Parameter(int K, int L, Eigen::VectorXd beta);

  static Parameter zeros(int K, int L) { return Parameter(K, L); }
  static Parameter fromMatrix(const Eigen::MatrixXd& B);

  int K() const { return K_; }
  int L() const { return L_; }
  int dim() const { return K_ * L_; }

  static int index(int kappa, int iota, int L) { return kappa * L + iota; }

  double operator()(int kappa, int iota) const { return beta_[index(kappa, iota, L_)]; }
  double& operator()(int kappa, int iota) { return beta_[index(kappa, iota, L_)]; }

  const Eigen::VectorXd& vec() const { return beta_; }
  Eigen::VectorXd& vec() { return beta_; }
  Eigen::MatrixXd matrix() const;

 private:
  int K_ = 0;
  int L_ = 0;
  Eigen::VectorXd beta_;
};

/// "Rank your top `depth` of these `subset.size()` alternatives."
struct Question {
  std::vector<int> subset;
  int depth = 1;

  int l() const { return static_cast<int>(subset.size()); }
  int k() const { return depth; }

  bool operator==(const Question&) const = default;
};

struct Response {
  int agent = 0;
  Question question;
  std::vector<int> ranking;

  bool operator==(const Response&) const = default;
};

/// Append-only multiset of observed responses.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Response> entries) : entries_(std::move(entries)) {}

  void append(Response r) { entries_.push_back(std::move(r)); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Response& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<Response>& entries() const { return entries_; }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::vector<Response> entries_;
};

/// The alternatives and agents of one elicitation problem.
///
/// Agents with id < n1 form the key group; the rest are regular. Ids equal
/// positions in the respective vectors.
struct Scenario {
  std::vector<AlternativeProfile> alternatives;
  std::vector<AgentProfile> agents;
  int n1 = 0;
  std::vector<std::string> alternativeAttributeNames;
  std::vector<std::string> agentAttributeNames;

  int m() const { return static_cast<int>(alternatives.size()); }
  int n2() const { return static_cast<int>(agents.size()) - n1; }
  int K() const;
  int L() const;

  const AlternativeProfile& alternative(int id) const;
  const AgentProfile& agent(int id) const;

  std::vector<int> keyAgents() const;
  std::vector<int> regularAgents() const;

  /// Builds a scenario from raw attribute matrices (one row per profile).
  static Scenario fromMatrices(const Eigen::MatrixXd& alternativeAttributes,
                               const Eigen::MatrixXd& agentAttributes, int n1);

  /// Throws InvalidScenarioError on inconsistent dimensions, ids or groups.
  void validate() const;
};

void validate(const Scenario& scenario, const Parameter& param);
void validate(const Scenario& scenario, const Question& question);
void validate(const Scenario& scenario, const Response& response);

}  // namespace prefelicit
