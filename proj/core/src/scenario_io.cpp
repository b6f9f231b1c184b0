#include <fstream>
#include <sstream>

#include <json.hpp>

#include "prefelicit/errors.hpp"
#include "prefelicit/harness.hpp"

namespace prefelicit {

namespace {

using nlohmann::json;

json rowsOf(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrixOf(const json& rows, int nRows, int nCols, const char* what) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != nRows) {
    throw ParseError(std::string(what) + " must have " + std::to_string(nRows) + " rows");
  }
  Eigen::MatrixXd M(nRows, nCols);
  for (int r = 0; r < nRows; ++r) {
    const json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != nCols) {
      throw ParseError(std::string(what) + " rows must have " + std::to_string(nCols) + " entries");
    }
    for (int c = 0; c < nCols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw ParseError(std::string(what) + " entries must be numbers");
      M(r, c) = v.get<double>();
    }
  }
  return M;
}

int requiredInt(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number_integer()) {
    throw ParseError(std::string("scenario field '") + key + "' must be an integer");
  }
  return doc[key].get<int>();
}

std::vector<std::string> optionalNames(const json& doc, const char* key, int expected) {
  if (!doc.contains(key)) return {};
  const json& v = doc[key];
  if (!v.is_array() || static_cast<int>(v.size()) != expected) {
    throw ParseError(std::string("'") + key + "' must list " + std::to_string(expected) + " names");
  }
  std::vector<std::string> names;
  for (const json& n : v) {
    if (!n.is_string()) throw ParseError(std::string("'") + key + "' entries must be strings");
    names.push_back(n.get<std::string>());
  }
  return names;
}

}  // namespace

std::string scenarioToJson(const Scenario& scenario, const std::optional<Parameter>& groundTruth) {
  scenario.validate();
  const int m = scenario.m();
  const int n = static_cast<int>(scenario.agents.size());
  Eigen::MatrixXd alts(m, scenario.K());
  for (int i = 0; i < m; ++i) alts.row(i) = scenario.alternatives[static_cast<std::size_t>(i)].attributes;
  Eigen::MatrixXd agents(n, scenario.L());
  for (int j = 0; j < n; ++j) agents.row(j) = scenario.agents[static_cast<std::size_t>(j)].attributes;

  json doc;
  doc["m"] = m;
  doc["K"] = scenario.K();
  doc["L"] = scenario.L();
  doc["n1"] = scenario.n1;
  doc["n2"] = scenario.n2();
  doc["alternatives"] = rowsOf(alts);
  doc["agents"] = rowsOf(agents);
  bool named = false;
  json names = json::array();
  for (const auto& a : scenario.alternatives) {
    names.push_back(a.name);
    named = named || !a.name.empty();
  }
  if (named) doc["alternative_names"] = names;
  if (!scenario.alternativeAttributeNames.empty()) {
    doc["alternative_attribute_names"] = scenario.alternativeAttributeNames;
  }
  if (!scenario.agentAttributeNames.empty()) {
    doc["agent_attribute_names"] = scenario.agentAttributeNames;
  }
  if (groundTruth) {
    validate(scenario, *groundTruth);
    doc["ground_truth"] = rowsOf(groundTruth->matrix());
  }
  return doc.dump(2);
}

ScenarioDocument scenarioFromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario must be a JSON object");
  const int m = requiredInt(doc, "m");
  const int K = requiredInt(doc, "K");
  const int L = requiredInt(doc, "L");
  const int n1 = requiredInt(doc, "n1");
  const int n2 = requiredInt(doc, "n2");
  if (m < 2 || K < 1 || L < 1 || n1 < 0 || n2 < 0 || n1 + n2 < 1) {
    throw ParseError("scenario sizes out of range");
  }
  if (!doc.contains("alternatives") || !doc.contains("agents")) {
    throw ParseError("scenario needs 'alternatives' and 'agents'");
  }
  ScenarioDocument out;
  try {
    out.scenario = Scenario::fromMatrices(matrixOf(doc["alternatives"], m, K, "alternatives"),
                                          matrixOf(doc["agents"], n1 + n2, L, "agents"), n1);
    const auto altNames = optionalNames(doc, "alternative_names", m);
    for (int i = 0; i < static_cast<int>(altNames.size()); ++i) {
      out.scenario.alternatives[static_cast<std::size_t>(i)].name = altNames[static_cast<std::size_t>(i)];
    }
    out.scenario.alternativeAttributeNames = optionalNames(doc, "alternative_attribute_names", K);
    out.scenario.agentAttributeNames = optionalNames(doc, "agent_attribute_names", L);
    out.scenario.validate();
    if (doc.contains("ground_truth")) {
      out.groundTruth = Parameter::fromMatrix(matrixOf(doc["ground_truth"], K, L, "ground_truth"));
    }
  } catch (const InvalidScenarioError& e) {
    throw ParseError(e.what());
  }
  return out;
}

void saveScenario(const std::filesystem::path& path, const Scenario& scenario,
                  const std::optional<Parameter>& groundTruth) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << scenarioToJson(scenario, groundTruth) << '\n';
}

ScenarioDocument loadScenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return scenarioFromJson(ss.str());
}

}  // namespace prefelicit
