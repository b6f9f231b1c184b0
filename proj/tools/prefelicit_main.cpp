// prefelicit: simulation experiments, scenario files, trace aggregation and
// the live session server.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "prefelicit/criteria.hpp"
#include "prefelicit/errors.hpp"
#include "prefelicit/harness.hpp"
#include "prefelicit/http_service.hpp"
#include "prefelicit/session.hpp"

namespace {

using namespace prefelicit;

std::vector<std::string> splitList(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "1:2,1:10,9:10"
std::vector<QuestionTemplate> parseTemplates(const std::string& text) {
  std::vector<QuestionTemplate> out;
  for (const std::string& item : splitList(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("template '" + item + "' is not k:l");
    try {
      out.push_back({std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1))});
    } catch (const std::logic_error&) {
      throw ConfigError("template '" + item + "' is not k:l");
    }
  }
  if (out.empty()) throw ConfigError("no templates given");
  return out;
}

std::vector<CriterionSpec> parseCriteria(const std::string& text) {
  std::vector<CriterionSpec> out;
  for (const std::string& name : splitList(text, ',')) out.push_back(parseCriterion(name));
  if (out.empty()) throw ConfigError("no criteria given");
  return out;
}

void addScenarioShape(CLI::App* cmd, ScenarioConfig& sc) {
  cmd->add_option("--m", sc.m, "Number of alternatives")->capture_default_str();
  cmd->add_option("--K", sc.K, "Alternative attribute count")->capture_default_str();
  cmd->add_option("--L", sc.L, "Agent attribute count")->capture_default_str();
  cmd->add_option("--n1", sc.n1, "Key agents")->capture_default_str();
  cmd->add_option("--n2", sc.n2, "Regular agents")->capture_default_str();
}

HttpService* activeService = nullptr;

extern "C" void onSignal(int) {
  if (activeService) activeService->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-effective preference elicitation for group decisions"};
  app.require_subcommand(1);

  ExperimentConfig exp;
  std::string criteria = "mpc,dopt,eopt,random";
  std::string templates = "1:2,1:10,9:10";
  std::string outDir;
  auto* simulate = app.add_subcommand("simulate", "Run the multi-trial criterion comparison");
  simulate->add_option("--trials", exp.trials, "Number of trials")->capture_default_str();
  simulate->add_option("--budget", exp.budget, "Dollar budget per run")->capture_default_str();
  simulate->add_option("--criteria", criteria,
                       "Comma list of dopt, eopt, mpc, random, mpc-topk:K@AGENT, "
                       "mpc-ranked:K@AGENT")
      ->capture_default_str();
  simulate->add_option("--seed", exp.seed, "Master seed")->capture_default_str();
  simulate->add_option("--templates", templates, "Comma list of k:l question shapes")
      ->capture_default_str();
  simulate->add_option("--out-dir", outDir, "Directory for traces and aggregates")->required();
  simulate->add_option("--mc-samples", exp.gain.mcSamples, "Monte Carlo answers per design")
      ->capture_default_str();
  simulate->add_option("--init-count", exp.initCount, "Free pairwise answers per trial")
      ->capture_default_str();
  std::string events = "response";
  simulate->add_option("--events", events, "Marginal events per response: response or pairwise")
      ->capture_default_str();
  std::string dScale = "det";
  simulate->add_option("--d-scale", dScale, "D-optimality gain units: det or logdet")
      ->capture_default_str();
  simulate->add_option("--threads", exp.threads, "Worker threads (0: all cores)")
      ->capture_default_str();
  addScenarioShape(simulate, exp.scenario);

  ScenarioConfig sc;
  std::string scenarioOut;
  auto* scenario = app.add_subcommand("scenario", "Generate a synthetic scenario file");
  scenario->add_option("--seed", sc.seed, "Scenario seed")->capture_default_str();
  scenario->add_option("--out", scenarioOut, "Output path (default: stdout)");
  addScenarioShape(scenario, sc);

  std::string traceDir;
  std::string aggregateOut;
  double aggBudget = 0.9;
  double aggStep = 0.05;
  auto* aggregate = app.add_subcommand("aggregate", "Fold trace directories into TV curves");
  aggregate->add_option("dir", traceDir, "Directory holding traces/<criterion>/*.csv")->required();
  aggregate->add_option("--budget", aggBudget, "Largest probe cost")->capture_default_str();
  aggregate->add_option("--step", aggStep, "Probe cost spacing")->capture_default_str();
  aggregate->add_option("--out", aggregateOut, "Output path (default: stdout)");

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string eventLog;
  auto* serve = app.add_subcommand("serve", "Serve live elicitation sessions over HTTP");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--event-log", eventLog, "Append-only log; replayed at startup if present");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      exp.criteria = parseCriteria(criteria);
      exp.templates = parseTemplates(templates);
      exp.fit.events = parseMarginalEvents(events);
      if (dScale == "det") {
        exp.gain.dScale = DeterminantScale::determinant;
      } else if (dScale == "logdet") {
        exp.gain.dScale = DeterminantScale::logDeterminant;
      } else {
        throw ConfigError("--d-scale must be det or logdet");
      }
      exp.outDir = outDir;
      const ExperimentResult result = runExperiment(exp);
      for (const auto& [name, n] : result.effectiveTrials) {
        std::cout << name << ": " << n << " of " << exp.trials << " trials\n";
      }
      std::cout << "wrote " << outDir << "/aggregate.csv\n";
    } else if (*scenario) {
      const GeneratedScenario gs = generateScenario(sc);
      if (scenarioOut.empty()) {
        std::cout << scenarioToJson(gs.scenario, gs.groundTruth) << '\n';
      } else {
        saveScenario(scenarioOut, gs.scenario, gs.groundTruth);
      }
    } else if (*aggregate) {
      const auto rows = aggregateCurves(loadTraceDirectory(traceDir), aggBudget, aggStep);
      if (aggregateOut.empty()) {
        writeAggregateCsv(std::cout, rows);
      } else {
        std::ofstream out(aggregateOut);
        writeAggregateCsv(out, rows);
      }
    } else if (*serve) {
      std::optional<std::filesystem::path> log;
      if (!eventLog.empty()) log = eventLog;
      SessionManager sessions(log);
      if (log && std::filesystem::exists(*log)) {
        sessions.recover(*log);
        std::cerr << "recovered " << sessions.size() << " sessions\n";
      }
      HttpService service(sessions);
      const int bound = service.bind(host, port);
      activeService = &service;
      std::signal(SIGINT, onSignal);
      std::signal(SIGTERM, onSignal);
      std::cerr << "listening on " << host << ':' << bound << '\n';
      service.listen();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
