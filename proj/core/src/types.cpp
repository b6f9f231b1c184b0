#include "prefelicit/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "prefelicit/errors.hpp"

namespace prefelicit {

Parameter::Parameter(int K, int L) : K_(K), L_(L), beta_(Eigen::VectorXd::Zero(K * L)) {
  if (K < 1 || L < 1) throw InvalidScenarioError("parameter dimensions must be positive");
}

Parameter::Parameter(int K, int L, Eigen::VectorXd beta) : K_(K), L_(L), beta_(std::move(beta)) {
  if (K < 1 || L < 1) throw InvalidScenarioError("parameter dimensions must be positive");
  if (beta_.size() != K * L) {
    throw InvalidScenarioError("parameter vector length " + std::to_string(beta_.size()) +
                               " does not match K*L = " + std::to_string(K * L));
  }
  if (!beta_.allFinite()) throw InvalidScenarioError("parameter entries must be finite");
}

Parameter Parameter::fromMatrix(const Eigen::MatrixXd& B) {
  Parameter p(static_cast<int>(B.rows()), static_cast<int>(B.cols()));
  for (int kappa = 0; kappa < p.K_; ++kappa)
    for (int iota = 0; iota < p.L_; ++iota) p(kappa, iota) = B(kappa, iota);
  if (!p.beta_.allFinite()) throw InvalidScenarioError("parameter entries must be finite");
  return p;
}

Eigen::MatrixXd Parameter::matrix() const {
  Eigen::MatrixXd B(K_, L_);
  for (int kappa = 0; kappa < K_; ++kappa)
    for (int iota = 0; iota < L_; ++iota) B(kappa, iota) = (*this)(kappa, iota);
  return B;
}

int Scenario::K() const {
  return alternatives.empty() ? 0 : static_cast<int>(alternatives.front().attributes.size());
}

int Scenario::L() const {
  return agents.empty() ? 0 : static_cast<int>(agents.front().attributes.size());
}

const AlternativeProfile& Scenario::alternative(int id) const {
  if (id < 0 || id >= m()) {
    throw InvalidScenarioError("alternative id " + std::to_string(id) + " out of range");
  }
  return alternatives[static_cast<std::size_t>(id)];
}

const AgentProfile& Scenario::agent(int id) const {
  if (id < 0 || id >= static_cast<int>(agents.size())) {
    throw InvalidScenarioError("agent id " + std::to_string(id) + " out of range");
  }
  return agents[static_cast<std::size_t>(id)];
}

std::vector<int> Scenario::keyAgents() const {
  std::vector<int> ids;
  for (int j = 0; j < n1 && j < static_cast<int>(agents.size()); ++j) ids.push_back(j);
  return ids;
}

std::vector<int> Scenario::regularAgents() const {
  std::vector<int> ids;
  for (int j = n1; j < static_cast<int>(agents.size()); ++j) ids.push_back(j);
  return ids;
}

Scenario Scenario::fromMatrices(const Eigen::MatrixXd& alternativeAttributes,
                                const Eigen::MatrixXd& agentAttributes, int n1) {
  Scenario s;
  s.n1 = n1;
  for (Eigen::Index i = 0; i < alternativeAttributes.rows(); ++i) {
    s.alternatives.push_back({static_cast<int>(i), alternativeAttributes.row(i).transpose(), {}});
  }
  for (Eigen::Index j = 0; j < agentAttributes.rows(); ++j) {
    s.agents.push_back({static_cast<int>(j), agentAttributes.row(j).transpose(),
                        j < n1 ? Group::key : Group::regular});
  }
  s.validate();
  return s;
}

void Scenario::validate() const {
  if (alternatives.empty()) throw InvalidScenarioError("scenario has no alternatives");
  if (agents.empty()) throw InvalidScenarioError("scenario has no agents");
  if (n1 < 0 || n1 > static_cast<int>(agents.size())) {
    throw InvalidScenarioError("key group size out of range");
  }
  const int k = K();
  const int l = L();
  if (k < 1 || l < 1) throw InvalidScenarioError("attribute dimensions must be positive");
  for (int i = 0; i < m(); ++i) {
    const auto& a = alternatives[static_cast<std::size_t>(i)];
    if (a.id != i) throw InvalidScenarioError("alternative ids must equal their positions");
    if (a.attributes.size() != k) throw InvalidScenarioError("alternatives disagree on K");
    if (!a.attributes.allFinite()) throw InvalidScenarioError("non-finite alternative attribute");
  }
  for (int j = 0; j < static_cast<int>(agents.size()); ++j) {
    const auto& x = agents[static_cast<std::size_t>(j)];
    if (x.id != j) throw InvalidScenarioError("agent ids must equal their positions");
    if (x.attributes.size() != l) throw InvalidScenarioError("agents disagree on L");
    if (!x.attributes.allFinite()) throw InvalidScenarioError("non-finite agent attribute");
    if ((j < n1) != (x.group == Group::key)) {
      throw InvalidScenarioError("agent " + std::to_string(j) + " has the wrong group tag");
    }
  }
  if (!alternativeAttributeNames.empty() && static_cast<int>(alternativeAttributeNames.size()) != k) {
    throw InvalidScenarioError("alternative attribute names do not match K");
  }
  if (!agentAttributeNames.empty() && static_cast<int>(agentAttributeNames.size()) != l) {
    throw InvalidScenarioError("agent attribute names do not match L");
  }
}

void validate(const Scenario& scenario, const Parameter& param) {
  if (param.K() != scenario.K() || param.L() != scenario.L()) {
    throw InvalidScenarioError("parameter is " + std::to_string(param.K()) + "x" +
                               std::to_string(param.L()) + " but scenario has K=" +
                               std::to_string(scenario.K()) + ", L=" + std::to_string(scenario.L()));
  }
}

void validate(const Scenario& scenario, const Question& question) {
  if (question.l() < 2) throw InvalidScenarioError("a question needs at least two alternatives");
  if (question.depth < 1 || question.depth >= question.l()) {
    throw InvalidScenarioError("question depth must satisfy 1 <= k < l");
  }
  std::unordered_set<int> seen;
  for (int id : question.subset) {
    scenario.alternative(id);
    if (!seen.insert(id).second) throw InvalidScenarioError("duplicate alternative in question");
  }
}

void validate(const Scenario& scenario, const Response& response) {
  scenario.agent(response.agent);
  validate(scenario, response.question);
  if (static_cast<int>(response.ranking.size()) != response.question.depth) {
    throw InvalidScenarioError("ranking length must equal the question depth");
  }
  std::unordered_set<int> seen;
  for (int id : response.ranking) {
    if (std::find(response.question.subset.begin(), response.question.subset.end(), id) ==
        response.question.subset.end()) {
      throw InvalidScenarioError("ranked alternative " + std::to_string(id) +
                                 " is not in the question subset");
    }
    if (!seen.insert(id).second) throw InvalidScenarioError("duplicate alternative in ranking");
  }
}

}  // namespace prefelicit
