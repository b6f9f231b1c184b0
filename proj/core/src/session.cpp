#include "prefelicit/session.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "prefelicit/harness.hpp"

namespace prefelicit {

namespace {

using nlohmann::json;

std::string randomHex(Rng& rng, int words) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (int w = 0; w < words; ++w) {
    std::uint64_t v = rng();
    for (int i = 0; i < 16; ++i, v >>= 4) s.push_back(digits[v & 0xf]);
  }
  return s;
}

json questionJson(const Question& q) { return {{"subset", q.subset}, {"k", q.depth}}; }

std::vector<int> intList(const json& v, const char* what) {
  if (!v.is_array()) throw ParseError(std::string(what) + " must be an array of ids");
  std::vector<int> ids;
  for (const json& x : v) {
    if (!x.is_number_integer()) throw ParseError(std::string(what) + " must contain integers");
    ids.push_back(x.get<int>());
  }
  return ids;
}

json distribution(const std::optional<WinnerDistribution>& d) {
  if (!d) return nullptr;
  json arr = json::array();
  for (int i = 0; i < d->size(); ++i) arr.push_back((*d)[i]);
  return arr;
}

}  // namespace

std::string toString(SessionState state) {
  switch (state) {
    case SessionState::awaitingAnswer:
      return "awaiting-answer";
    case SessionState::selecting:
      return "selecting";
    case SessionState::finished:
      return "finished";
  }
  return "unknown";
}

CreateSessionRequest parseCreateRequest(const std::string& text) {
  json body;
  try {
    body = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("request body is not valid JSON: ") + e.what());
  }
  if (!body.is_object()) throw ParseError("request body must be a JSON object");
  CreateSessionRequest req;
  if (!body.contains("scenario")) throw MalformedScenarioError("request needs a 'scenario'");
  try {
    req.scenario = scenarioFromJson(body["scenario"].dump()).scenario;
  } catch (const ParseError& e) {
    throw MalformedScenarioError(e.what());
  }

  try {
    if (!body.contains("budget") || !body["budget"].is_number()) {
      throw ParseError("'budget' must be a number");
    }
    req.budget = body["budget"].get<double>();
    if (!(req.budget >= 0)) throw ParseError("'budget' must be non-negative");
    if (body.contains("criterion")) req.criterion = parseCriterion(body["criterion"].get<std::string>());
    if (body.contains("cost_model")) {
      const json& cm = body["cost_model"];
      if (cm.is_string() && cm.get<std::string>() == "builtin") {
        req.costModel = CostModel::builtinMturkHotels();
      } else if (cm.is_object() && cm.contains("table")) {
        std::map<std::pair<int, int>, double> prices;
        for (const json& row : cm["table"]) {
          if (!row.is_array() || row.size() != 3) throw ParseError("cost table rows are [k, l, dollars]");
          prices[{row[0].get<int>(), row[1].get<int>()}] = row[2].get<double>();
        }
        req.costModel = CostModel::table(std::move(prices));
      } else {
        throw ParseError("'cost_model' must be \"builtin\" or {\"table\": [...]}");
      }
    }
    if (body.contains("respondent")) req.respondent = body["respondent"].get<int>();
    if (body.contains("templates")) {
      for (const json& t : body["templates"]) {
        if (!t.is_array() || t.size() != 2) throw ParseError("templates are [k, l] pairs");
        req.templates.push_back({t[0].get<int>(), t[1].get<int>()});
      }
    }
    if (body.contains("seed_data")) {
      for (const json& r : body["seed_data"]) {
        Response resp;
        resp.agent = r.at("agent").get<int>();
        resp.question.subset = intList(r.at("subset"), "seed_data subset");
        resp.question.depth = r.at("k").get<int>();
        resp.ranking = intList(r.at("ranking"), "seed_data ranking");
        validate(req.scenario, resp);
        req.seedData.append(std::move(resp));
      }
    }
    if (body.contains("seed")) req.seed = body["seed"].get<std::uint64_t>();
    if (body.contains("prior_std")) req.fit.priorStd = body["prior_std"].get<double>();
    if (body.contains("mc_samples")) req.gain.mcSamples = body["mc_samples"].get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed request field: ") + e.what());
  } catch (const InvalidScenarioError& e) {
    throw ParseError(e.what());
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  } catch (const CostModelError& e) {
    throw ParseError(e.what());
  }
  return req;
}

std::string toJson(const CreateSessionRequest& req) {
  json body;
  body["scenario"] = json::parse(scenarioToJson(req.scenario, std::nullopt));
  body["budget"] = req.budget;
  body["criterion"] = toString(req.criterion);
  if (req.costModel.builtin()) {
    body["cost_model"] = "builtin";
  } else {
    json table = json::array();
    for (const auto& [shape, dollars] : req.costModel.prices()) {
      table.push_back({shape.first, shape.second, dollars});
    }
    body["cost_model"] = {{"table", table}};
  }
  if (req.respondent) body["respondent"] = *req.respondent;
  if (!req.templates.empty()) {
    json ts = json::array();
    for (const auto& t : req.templates) ts.push_back({t.k, t.l});
    body["templates"] = ts;
  }
  if (!req.seedData.empty()) {
    json sd = json::array();
    for (const Response& r : req.seedData) {
      sd.push_back({{"agent", r.agent}, {"subset", r.question.subset}, {"k", r.question.depth},
                    {"ranking", r.ranking}});
    }
    body["seed_data"] = sd;
  }
  body["seed"] = req.seed;
  body["prior_std"] = req.fit.priorStd;
  body["mc_samples"] = req.gain.mcSamples;
  return body.dump();
}

std::vector<Design> sessionDesigns(const CreateSessionRequest& req) {
  const Scenario& s = req.scenario;
  s.validate();
  const auto regular = s.regularAgents();
  if (regular.empty()) throw ConfigError("scenario has no regular-group respondent");
  const int respondent = req.respondent.value_or(regular.front());
  if (respondent < s.n1 || respondent >= static_cast<int>(s.agents.size())) {
    throw ConfigError("respondent must be a regular-group agent");
  }
  std::vector<QuestionTemplate> templates = req.templates;
  if (templates.empty()) {
    const int m = s.m();
    std::vector<QuestionTemplate> candidates{{1, 2}};
    if (m > 2) candidates.push_back({1, m});
    if (m > 2) candidates.push_back({m - 1, m});
    for (const auto& t : candidates) {
      try {
        req.costModel.cost(t.k, t.l);
        templates.push_back(t);
      } catch (const CostModelError&) {
      }
    }
  }
  std::vector<Design> designs;
  for (Design& d : buildDesignSpace(s, templates)) {
    if (d.agent == respondent) designs.push_back(std::move(d));
  }
  return designs;
}

EngineConfig sessionEngineConfig(const CreateSessionRequest& req) {
  EngineConfig cfg;
  cfg.fit = req.fit;
  cfg.gain = req.gain;
  cfg.seed = req.seed;
  return cfg;
}

ElicitationResult replaySession(const CreateSessionRequest& req,
                                const std::vector<std::vector<int>>& answers) {
  ScriptedOracle oracle(answers);
  return runElicitation(req.scenario, sessionDesigns(req), req.costModel, req.criterion,
                        req.budget, req.seedData, oracle, sessionEngineConfig(req));
}

struct SessionManager::Session {
  std::string id;
  CreateSessionRequest request;  // owns the scenario the run refers to
  std::unique_ptr<Elicitation> run;
  std::vector<std::vector<int>> answers;
  std::string token;
  SessionState state = SessionState::selecting;
  Rng tokenRng{std::random_device{}()};
  mutable std::shared_mutex mutex;

  void refreshState() {
    if (run->finished()) {
      state = SessionState::finished;
      token.clear();
    } else {
      state = SessionState::awaitingAnswer;
      token = std::to_string(run->iteration() + 1) + "-" + randomHex(tokenRng, 1);
    }
  }

  SessionSnapshot snapshot() const {
    SessionSnapshot s;
    s.id = id;
    s.state = state;
    s.budget = request.budget;
    s.remainingBudget = run->remainingBudget();
    s.iterations = run->iteration();
    if (const auto& p = run->pending()) {
      s.pending = QuestionView{token, run->iteration() + 1, p->design.agent, p->design.question,
                               p->cost, run->remainingBudget()};
    }
    const Snapshot& cur = run->current();
    s.plurality = cur.plurality;
    s.borda = cur.borda;
    if (request.scenario.n1 >= 1) {
      s.predictedRanking =
          predictedTopK(run->posterior(), request.scenario, 0, request.scenario.m());
    }
    const ElicitationResult r = run->result();
    for (const IterationRecord& rec : r.trace) {
      s.history.push_back({rec.index, rec.design.question, rec.response.ranking, rec.cost,
                           rec.cumulativeCost});
    }
    return s;
  }
};

std::string toJson(const SessionSnapshot& s, const Scenario& scenario) {
  json body;
  body["session"] = s.id;
  body["state"] = toString(s.state);
  body["budget"] = s.budget;
  body["remaining_budget"] = s.remainingBudget;
  body["iteration"] = s.iterations;
  if (s.pending) {
    const QuestionView& q = *s.pending;
    json alts = json::array();
    for (int id : q.question.subset) {
      const AlternativeProfile& a = scenario.alternative(id);
      json attrs = json::object();
      for (Eigen::Index k = 0; k < a.attributes.size(); ++k) {
        const std::string name = scenario.alternativeAttributeNames.empty()
                                     ? "a" + std::to_string(k)
                                     : scenario.alternativeAttributeNames[static_cast<std::size_t>(k)];
        attrs[name] = a.attributes[k];
      }
      alts.push_back({{"id", id}, {"name", a.name}, {"attributes", attrs}});
    }
    body["question"] = {{"token", q.token},
                        {"iteration", q.iteration},
                        {"agent", q.agent},
                        {"k", q.question.depth},
                        {"alternatives", alts},
                        {"cost", q.cost},
                        {"remaining_budget", q.remainingBudget}};
  } else {
    body["question"] = nullptr;
  }
  body["result"] = {{"plurality", distribution(s.plurality)},
                    {"borda", distribution(s.borda)},
                    {"predicted_ranking", s.predictedRanking},
                    {"final", s.state == SessionState::finished}};
  json history = json::array();
  for (const auto& h : s.history) {
    history.push_back({{"iteration", h.iteration},
                       {"question", questionJson(h.question)},
                       {"ranking", h.ranking},
                       {"cost", h.cost},
                       {"cumulative_cost", h.cumulativeCost}});
  }
  body["history"] = history;
  return body.dump();
}

SessionManager::SessionManager(std::optional<std::filesystem::path> eventLog)
    : eventLog_(std::move(eventLog)) {}

SessionManager::~SessionManager() = default;

std::shared_ptr<SessionManager::Session> SessionManager::build(const std::string& id,
                                                               CreateSessionRequest request) {
  auto session = std::make_shared<Session>();
  session->id = id;
  session->request = std::move(request);
  const CreateSessionRequest& req = session->request;
  if (req.scenario.m() < 2) throw ConfigError("a session needs at least two alternatives");
  session->run = std::make_unique<Elicitation>(req.scenario, sessionDesigns(req), req.costModel,
                                               req.criterion, req.budget, req.seedData,
                                               sessionEngineConfig(req));
  session->refreshState();
  return session;
}

SessionSnapshot SessionManager::create(CreateSessionRequest request) {
  static thread_local Rng idRng{std::random_device{}()};
  const std::string logLine =
      eventLog_ ? json{{"event", "create"}, {"request", json::parse(toJson(request))}}.dump()
                : std::string();
  std::string id;
  {
    std::shared_lock lock(mutex_);
    do {
      id = randomHex(idRng, 2);
    } while (sessions_.count(id));
  }
  auto session = build(id, std::move(request));
  {
    std::unique_lock lock(mutex_);
    sessions_[id] = session;
  }
  if (eventLog_) {
    json line = json::parse(logLine);
    line["session"] = id;
    appendLog(line.dump());
  }
  std::shared_lock lock(session->mutex);
  return session->snapshot();
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("no session '" + id + "'");
  return it->second;
}

SessionSnapshot SessionManager::submit(const std::string& id, const std::string& token,
                                       const std::vector<int>& ranking) {
  auto session = find(id);
  std::unique_lock lock(session->mutex);
  if (session->state == SessionState::finished) throw ConflictError("session is finished");
  if (token != session->token) throw ConflictError("stale or unknown question token");
  const Design& d = session->run->pending()->design;
  const Response resp{d.agent, d.question, ranking};
  session->run->checkAnswer(resp);

  session->state = SessionState::selecting;
  try {
    session->run->submit(resp);
  } catch (...) {
    session->state = SessionState::awaitingAnswer;
    throw;
  }
  session->answers.push_back(ranking);
  session->refreshState();
  if (eventLog_) {
    appendLog(json{{"event", "answer"}, {"session", id}, {"token", token}, {"ranking", ranking}}
                  .dump());
  }
  return session->snapshot();
}

SessionSnapshot SessionManager::status(const std::string& id) const {
  auto session = find(id);
  std::shared_lock lock(session->mutex);
  return session->snapshot();
}

std::string SessionManager::statusJson(const std::string& id) const {
  auto session = find(id);
  std::shared_lock lock(session->mutex);
  return toJson(session->snapshot(), session->request.scenario);
}

const Scenario& SessionManager::scenario(const std::string& id) const {
  return find(id)->request.scenario;
}

CreateSessionRequest SessionManager::request(const std::string& id) const {
  auto session = find(id);
  std::shared_lock lock(session->mutex);
  return session->request;
}

std::vector<std::vector<int>> SessionManager::answers(const std::string& id) const {
  auto session = find(id);
  std::shared_lock lock(session->mutex);
  return session->answers;
}

ElicitationResult SessionManager::result(const std::string& id) const {
  auto session = find(id);
  std::shared_lock lock(session->mutex);
  return session->run->result();
}

std::size_t SessionManager::size() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

void SessionManager::appendLog(const std::string& line) {
  std::lock_guard lock(logMutex_);
  std::ofstream out(*eventLog_, std::ios::app);
  out << line << '\n';
}

void SessionManager::recover(const std::filesystem::path& eventLog) {
  std::ifstream in(eventLog);
  if (!in) throw ParseError("cannot open event log " + eventLog.string());
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    try {
      const json ev = json::parse(line);
      const std::string kind = ev.at("event").get<std::string>();
      const std::string id = ev.at("session").get<std::string>();
      if (kind == "create") {
        auto session = build(id, parseCreateRequest(ev.at("request").dump()));
        std::unique_lock lock(mutex_);
        sessions_[id] = session;
      } else if (kind == "answer") {
        auto session = find(id);
        std::unique_lock lock(session->mutex);
        const auto ranking = ev.at("ranking").get<std::vector<int>>();
        if (!session->run->pending()) throw ConflictError("answer logged for a finished session");
        const Design& d = session->run->pending()->design;
        session->run->submit(Response{d.agent, d.question, ranking});
        session->answers.push_back(ranking);
        session->refreshState();
      }
    } catch (const std::exception& e) {
      throw ParseError("event log line " + std::to_string(lineNo) + ": " + e.what());
    }
  }
}

}  // namespace prefelicit
