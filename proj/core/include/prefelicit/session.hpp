#pragma once

// Live elicitation sessions: a human respondent plays the answer oracle.
// Transport-agnostic; http_service.hpp maps this onto HTTP.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "prefelicit/criteria.hpp"
#include "prefelicit/design_space.hpp"
#include "prefelicit/engine.hpp"
#include "prefelicit/errors.hpp"
#include "prefelicit/types.hpp"
#include "prefelicit/voting.hpp"

namespace prefelicit {

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// The request refers to a question that is no longer pending.
class ConflictError : public Error {
 public:
  using Error::Error;
};

/// The scenario inside a create request could not be read.
class MalformedScenarioError : public ParseError {
 public:
  using ParseError::ParseError;
};

struct CreateSessionRequest {
  Scenario scenario;
  double budget = 0.0;
  CriterionSpec criterion = CriterionSpec::dOpt();
  CostModel costModel = CostModel::builtinMturkHotels();
  std::optional<int> respondent;           // default: first regular agent
  std::vector<QuestionTemplate> templates;  // default: (1,2), (1,m), (m-1,m) where priced
  Dataset seedData;
  std::uint64_t seed = 0;
  FitConfig fit;
  GainConfig gain;
};

/// Parses the POST /sessions body. Throws MalformedScenarioError for a bad
/// scenario and ParseError for any other malformed field.
CreateSessionRequest parseCreateRequest(const std::string& json);
std::string toJson(const CreateSessionRequest& request);

/// Designs and engine configuration a session uses; exposed so a session can
/// be replayed offline through runElicitation.
std::vector<Design> sessionDesigns(const CreateSessionRequest& request);
EngineConfig sessionEngineConfig(const CreateSessionRequest& request);
ElicitationResult replaySession(const CreateSessionRequest& request,
                                const std::vector<std::vector<int>>& answers);

enum class SessionState { awaitingAnswer, selecting, finished };
std::string toString(SessionState state);

struct QuestionView {
  std::string token;
  int iteration = 0;  // 1-based index of the question
  int agent = 0;
  Question question;
  double cost = 0.0;
  double remainingBudget = 0.0;
};

struct AnsweredQuestion {
  int iteration = 0;
  Question question;
  std::vector<int> ranking;
  double cost = 0.0;
  double cumulativeCost = 0.0;
};

struct SessionSnapshot {
  std::string id;
  SessionState state = SessionState::finished;
  double budget = 0.0;
  double remainingBudget = 0.0;
  int iterations = 0;  // answered questions
  std::optional<QuestionView> pending;
  std::optional<WinnerDistribution> plurality;
  std::optional<WinnerDistribution> borda;
  std::vector<int> predictedRanking;  // key agent 0's ranking by posterior mean
  std::vector<AnsweredQuestion> history;
};

/// Renders a snapshot as the JSON body returned to clients; alternatives in
/// a pending question carry their names and named attribute values.
std::string toJson(const SessionSnapshot& snapshot, const Scenario& scenario);

/// In-memory session registry. Each session's mutations are serialized;
/// status reads may run concurrently. With an event log path, every creation
/// and accepted answer is appended as one JSON line, and `recover` rebuilds
/// the sessions from such a log.
class SessionManager {
 public:
  explicit SessionManager(std::optional<std::filesystem::path> eventLog = std::nullopt);
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  SessionSnapshot create(CreateSessionRequest request);

  /// Throws NotFoundError, ConflictError (stale token or finished session)
  /// or DomainError (ranking invalid for the pending question). On error the
  /// session is unchanged.
  SessionSnapshot submit(const std::string& id, const std::string& token,
                         const std::vector<int>& ranking);

  SessionSnapshot status(const std::string& id) const;

  /// JSON rendering of status(id), made under the same lock.
  std::string statusJson(const std::string& id) const;

  const Scenario& scenario(const std::string& id) const;
  CreateSessionRequest request(const std::string& id) const;
  std::vector<std::vector<int>> answers(const std::string& id) const;
  ElicitationResult result(const std::string& id) const;

  std::size_t size() const;

  /// Replays an event log written by a previous manager.
  void recover(const std::filesystem::path& eventLog);

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<Session> build(const std::string& id, CreateSessionRequest request);
  void appendLog(const std::string& line);

  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::optional<std::filesystem::path> eventLog_;
  std::mutex logMutex_;
};

}  // namespace prefelicit
