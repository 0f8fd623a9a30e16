#include "scrapelab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace scrapelab::experiments {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

scraper::RequestProfile profile_from_config(const json& j) {
  if (j.is_string()) return scraper::RequestProfile::parse(j.get<std::string>());
  scraper::RequestProfile p = scraper::RequestProfile::benchmark();
  if (j.contains("name")) p.name = j["name"].get<std::string>();
  if (j.contains("ua")) p.user_agent = j["ua"].get<std::string>();
  if (j.contains("lang")) p.accept_language = j["lang"].get<std::string>();
  if (j.contains("ip")) p.forwarded_for = j["ip"].get<std::string>();
  return p;
}

ordered_json profile_to_config(const scraper::RequestProfile& p) {
  return ordered_json{{"name", p.name},
                      {"ua", p.user_agent},
                      {"lang", p.accept_language},
                      {"ip", p.forwarded_for}};
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig config;
  config.kind = j.at("kind").get<std::string>();
  if (config.kind != "volatility" && config.kind != "personalization" &&
      config.kind != "indexing") {
    throw config_error("experiment: unknown kind '" + config.kind + "'");
  }
  config.seed = j.at("seed").get<std::uint64_t>();
  if (auto it = j.find("transport"); it != j.end()) {
    std::string t = it->get<std::string>();
    if (t == "in_process") {
      config.transport = Transport::in_process;
    } else if (t == "http") {
      config.transport = Transport::http;
    } else {
      throw config_error("experiment: unknown transport '" + t + "'");
    }
  }

  // The population block may omit its own seed; the experiment seed then
  // drives generation directly.
  json pop = j.at("population");
  if (!pop.contains("seed")) pop["seed"] = config.seed;
  config.population = population_config_from_json(pop);

  if (auto it = j.find("server"); it != j.end()) {
    config.server = webserve::server_config_from_json(*it);
  }

  if (config.kind == "volatility") {
    const json& v = j.at("volatility");
    for (const auto& lag : v.at("lag_grid")) {
      config.volatility.lag_grid.push_back(lag.get<double>());
    }
    if (config.volatility.lag_grid.empty()) {
      throw config_error("volatility: lag_grid must not be empty");
    }
    for (double lag : config.volatility.lag_grid) {
      if (lag < 0) throw config_error("volatility: lags must be >= 0");
    }
    config.volatility.pilot_size = v.at("pilot_size").get<std::size_t>();
    if (config.volatility.pilot_size < 2) {
      throw config_error("volatility: pilot_size must be >= 2");
    }
    config.volatility.poll_interval = v.at("poll_interval").get<double>();
    config.volatility.monitor_horizon = v.at("monitor_horizon").get<double>();
    if (auto d = v.find("discovery_interval"); d != v.end()) {
      config.volatility.discovery_interval = d->get<double>();
    }
    if (auto w = v.find("weight_report_lag"); w != v.end()) {
      config.volatility.weight_report_lag = w->get<double>();
    } else {
      config.volatility.weight_report_lag = config.volatility.lag_grid.back();
    }
    if (std::find(config.volatility.lag_grid.begin(),
                  config.volatility.lag_grid.end(),
                  config.volatility.weight_report_lag) ==
        config.volatility.lag_grid.end()) {
      throw config_error("volatility: weight_report_lag must be one of the lags");
    }
    for (const auto& var : v.at("variables")) {
      config.volatility.variables.push_back(var.get<std::string>());
    }
    for (const auto& cov : v.at("hazard_covariates")) {
      config.volatility.hazard_covariates.push_back(cov.get<std::string>());
    }
    if (config.volatility.variables.empty()) {
      throw config_error("volatility: no variables listed");
    }
    if (config.volatility.hazard_covariates.empty()) {
      throw config_error("volatility: no hazard covariates listed");
    }
  } else if (config.kind == "personalization") {
    const json& p = j.at("personalization");
    for (const auto& k : p.at("keywords")) {
      config.personalization.keywords.push_back(k.get<std::string>());
    }
    if (config.personalization.keywords.empty()) {
      throw config_error("personalization: no keywords listed");
    }
    config.personalization.benchmark =
        p.contains("benchmark") ? profile_from_config(p["benchmark"])
                                : scraper::RequestProfile::benchmark();
    for (const auto& v : p.at("variants")) {
      config.personalization.variants.push_back(profile_from_config(v));
    }
    if (config.personalization.variants.empty()) {
      throw config_error("personalization: no variant profiles listed");
    }
    for (const auto& var : p.at("variables")) {
      config.personalization.variables.push_back(var.get<std::string>());
    }
    if (auto la = p.find("log_adjust"); la != p.end()) {
      for (const auto& v : *la) {
        config.personalization.log_adjust.insert(v.get<std::string>());
      }
    }
    if (auto par = p.find("parallel_variants"); par != p.end()) {
      config.personalization.parallel_variants = par->get<bool>();
    }
  } else {
    const json& x = j.at("indexing");
    config.indexing.at = x.value("at", 0.0);
    for (const auto& var : x.at("variables")) {
      config.indexing.variables.push_back(var.get<std::string>());
    }
    for (const auto& h : x.at("heuristics")) {
      HeuristicSpec spec;
      spec.name = h.at("name").get<std::string>();
      spec.strategy = h.at("strategy").get<std::string>();
      if (spec.strategy == "marker") {
        spec.keyword = h.at("keyword").get<std::string>();
      } else if (spec.strategy == "traverse") {
        spec.start_locator = h.at("start").get<std::string>();
        spec.budget = h.at("budget").get<std::size_t>();
      } else if (spec.strategy == "guess") {
        spec.guess.width = h.at("width").get<int>();
        spec.guess.from = h.at("from").get<std::uint64_t>();
        spec.guess.to = h.at("to").get<std::uint64_t>();
        if (auto pl = h.find("probe_limit"); pl != h.end()) {
          spec.probe_limit = pl->get<std::size_t>();
        }
      } else {
        throw config_error("heuristic '" + spec.name + "': unknown strategy '" +
                           spec.strategy + "'");
      }
      config.indexing.heuristics.push_back(std::move(spec));
    }
    if (config.indexing.heuristics.empty()) {
      throw config_error("indexing: no heuristics listed");
    }
    if (config.server.catalogue_enabled) {
      throw config_error(
          "indexing: the serving side must have the catalogue disabled");
    }
  }
  return config;
}

ordered_json to_json(const ExperimentConfig& config) {
  ordered_json j;
  j["kind"] = config.kind;
  j["seed"] = config.seed;
  j["transport"] = config.transport == Transport::http ? "http" : "in_process";
  j["population"] = to_json(config.population);
  j["server"] = to_json(config.server);
  if (config.kind == "volatility") {
    const auto& v = config.volatility;
    j["volatility"] = ordered_json{{"lag_grid", v.lag_grid},
                                   {"pilot_size", v.pilot_size},
                                   {"poll_interval", v.poll_interval},
                                   {"monitor_horizon", v.monitor_horizon},
                                   {"discovery_interval", v.discovery_interval},
                                   {"weight_report_lag", v.weight_report_lag},
                                   {"variables", v.variables},
                                   {"hazard_covariates", v.hazard_covariates}};
  } else if (config.kind == "personalization") {
    const auto& p = config.personalization;
    ordered_json variants = ordered_json::array();
    for (const auto& v : p.variants) variants.push_back(profile_to_config(v));
    j["personalization"] =
        ordered_json{{"keywords", p.keywords},
                     {"benchmark", profile_to_config(p.benchmark)},
                     {"variants", variants},
                     {"variables", p.variables},
                     {"log_adjust", p.log_adjust},
                     {"parallel_variants", p.parallel_variants}};
  } else {
    const auto& x = config.indexing;
    ordered_json heuristics = ordered_json::array();
    for (const auto& h : x.heuristics) {
      ordered_json hj;
      hj["name"] = h.name;
      hj["strategy"] = h.strategy;
      if (h.strategy == "marker") hj["keyword"] = h.keyword;
      if (h.strategy == "traverse") {
        hj["start"] = h.start_locator;
        hj["budget"] = h.budget;
      }
      if (h.strategy == "guess") {
        hj["width"] = h.guess.width;
        hj["from"] = h.guess.from;
        hj["to"] = h.guess.to;
        hj["probe_limit"] = h.probe_limit;
      }
      heuristics.push_back(hj);
    }
    j["indexing"] = ordered_json{
        {"at", x.at}, {"variables", x.variables}, {"heuristics", heuristics}};
  }
  return j;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw config_error("config parse error in " + path + ": " + e.what());
  }
  try {
    return experiment_config_from_json(j);
  } catch (const json::exception& e) {
    throw config_error("config error in " + path + ": " + e.what());
  }
}

std::string config_digest(const ExperimentConfig& config) {
  // The digest identifies the scientific content of a run. Delivery knobs
  // while the report must be byte-identical across transports are left out:
  // transport choice and variant parallelism change nothing downstream.
  ordered_json j = to_json(config);
  j.erase("transport");
  if (j.contains("personalization")) {
    j["personalization"].erase("parallel_variants");
  }
  return hex64(fnv1a64(j.dump()));
}

double expected_gone_fraction(const GroundTruthLedger& ledger, Seconds lag) {
  auto hazards = sitegen::unit_hazards(ledger);
  double surviving = 0.0;
  for (std::size_t i = 0; i < ledger.units.size(); ++i) {
    surviving += ledger.units[i].removed_at ? std::exp(-hazards[i] * lag) : 1.0;
  }
  return 1.0 - surviving / static_cast<double>(ledger.units.size());
}

double expected_gone_fraction_se(const GroundTruthLedger& ledger, Seconds lag) {
  auto hazards = sitegen::unit_hazards(ledger);
  double var = 0.0;
  for (std::size_t i = 0; i < ledger.units.size(); ++i) {
    if (!ledger.units[i].removed_at) continue;
    double p = 1.0 - std::exp(-hazards[i] * lag);
    var += p * (1.0 - p);
  }
  double n = static_cast<double>(ledger.units.size());
  return std::sqrt(var) / n;
}

}  // namespace scrapelab::experiments
