#include "scrapelab/population_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace scrapelab {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg) { throw config_error(msg); }

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where + ": missing field '" + key + "'");
  return *it;
}

double num(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) fail(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

double num_or(const json& j, const char* key, double fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) fail("field '" + std::string(key) + "' must be a number");
  return it->get<double>();
}

std::string str(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_string()) fail(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

AttributeSpec::Kind parse_kind(const std::string& s, const std::string& where) {
  if (s == "normal") return AttributeSpec::Kind::normal;
  if (s == "lognormal") return AttributeSpec::Kind::lognormal;
  if (s == "uniform") return AttributeSpec::Kind::uniform;
  if (s == "constant") return AttributeSpec::Kind::constant;
  if (s == "rank_bucket") return AttributeSpec::Kind::rank_bucket;
  if (s == "bucket_value") return AttributeSpec::Kind::bucket_value;
  fail(where + ": unknown distribution '" + s + "'");
}

const char* kind_name(AttributeSpec::Kind k) {
  switch (k) {
    case AttributeSpec::Kind::normal: return "normal";
    case AttributeSpec::Kind::lognormal: return "lognormal";
    case AttributeSpec::Kind::uniform: return "uniform";
    case AttributeSpec::Kind::constant: return "constant";
    case AttributeSpec::Kind::rank_bucket: return "rank_bucket";
    case AttributeSpec::Kind::bucket_value: return "bucket_value";
  }
  return "?";
}

AttributeSpec parse_attribute(const json& j) {
  AttributeSpec spec;
  spec.name = str(j, "name", "attribute");
  const std::string where = "attribute '" + spec.name + "'";
  spec.kind = parse_kind(str(j, "distribution", where), where);
  switch (spec.kind) {
    case AttributeSpec::Kind::normal:
      spec.a = num(j, "mean", where);
      spec.b = num(j, "stddev", where);
      break;
    case AttributeSpec::Kind::lognormal:
      spec.a = num(j, "log_mean", where);
      spec.b = num(j, "log_stddev", where);
      break;
    case AttributeSpec::Kind::uniform:
      spec.a = num(j, "low", where);
      spec.b = num(j, "high", where);
      if (spec.b < spec.a) fail(where + ": high < low");
      break;
    case AttributeSpec::Kind::constant:
      spec.a = num(j, "value", where);
      break;
    case AttributeSpec::Kind::rank_bucket: {
      spec.source = str(j, "source", where);
      const json& w = need(j, "weights", where);
      if (!w.is_array() || w.empty()) fail(where + ": weights must be a non-empty array");
      for (const auto& x : w) {
        double v = x.get<double>();
        if (v <= 0) fail(where + ": weights must be positive");
        spec.weights.push_back(v);
      }
      break;
    }
    case AttributeSpec::Kind::bucket_value: {
      spec.source = str(j, "source", where);
      const json& vals = need(j, "values", where);
      if (!vals.is_array() || vals.empty()) fail(where + ": values must be a non-empty array");
      for (const auto& x : vals) spec.values.push_back(x.get<double>());
      if (auto it = j.find("scales"); it != j.end()) {
        for (const auto& x : *it) spec.scales.push_back(x.get<double>());
      }
      spec.jitter = num_or(j, "jitter", 0.0);
      if (spec.jitter < 0) fail(where + ": jitter must be >= 0");
      if (auto it = j.find("exp"); it != j.end()) spec.exp_transform = it->get<bool>();
      break;
    }
  }
  if (auto it = j.find("latent_loadings"); it != j.end()) {
    for (const auto& [k, v] : it->items()) spec.latent_loadings[k] = v.get<double>();
  }
  if (auto it = j.find("round"); it != j.end()) spec.round_values = it->get<bool>();
  if (auto it = j.find("clamp_min"); it != j.end()) spec.clamp_min = it->get<double>();
  if (auto it = j.find("clamp_max"); it != j.end()) spec.clamp_max = it->get<double>();
  if (spec.clamp_min && spec.clamp_max && *spec.clamp_min > *spec.clamp_max) {
    fail(where + ": clamp_min > clamp_max");
  }
  return spec;
}

}  // namespace

bool marker_rule_matches(const MarkerRule& rule, double value) {
  if (rule.op == "==") return value == rule.value;
  if (rule.op == "!=") return value != rule.value;
  if (rule.op == ">=") return value >= rule.value;
  if (rule.op == "<=") return value <= rule.value;
  if (rule.op == ">") return value > rule.value;
  if (rule.op == "<") return value < rule.value;
  throw config_error("marker '" + rule.keyword + "': unknown operator '" + rule.op + "'");
}

void validate(const PopulationConfig& config) {
  if (config.size < 1) fail("population: size must be >= 1");
  if (config.id_width < 1 || config.id_width > 18) {
    fail("population: id_width must be in [1,18]");
  }
  double max_id = static_cast<double>(config.id_start) +
                  static_cast<double>(config.size) - 1.0;
  if (max_id >= std::pow(10.0, config.id_width)) {
    fail("population: id range overflows id_width digits");
  }
  if (config.creation_window < 0) fail("population: creation_window must be >= 0");
  if (config.lifetime.baseline_hazard <= 0) {
    fail("lifetime_model: baseline_hazard must be > 0");
  }
  if (config.never_removed_fraction < 0 || config.never_removed_fraction > 1) {
    fail("population: never_removed_fraction must be in [0,1]");
  }
  if (config.bestseller_size > config.size) {
    fail("population: bestseller_size exceeds population size");
  }
  if (config.links.neighbors >= config.size && config.links.neighbors > 0) {
    fail("links: neighbors must be < population size");
  }
  if (config.relevance.base_high < config.relevance.base_low) {
    fail("relevance: base_high < base_low");
  }

  std::set<std::string> names;
  std::set<std::string> latents(config.latents.begin(), config.latents.end());
  for (const auto& attr : config.attributes) {
    if (attr.name.empty()) fail("attribute: empty name");
    if (!names.insert(attr.name).second) fail("attribute '" + attr.name + "': duplicate name");
    for (const auto& [l, _] : attr.latent_loadings) {
      if (!latents.count(l)) fail("attribute '" + attr.name + "': unknown latent '" + l + "'");
    }
    if (attr.kind == AttributeSpec::Kind::rank_bucket ||
        attr.kind == AttributeSpec::Kind::bucket_value) {
      if (!names.count(attr.source)) {
        fail("attribute '" + attr.name + "': source '" + attr.source +
             "' must be declared earlier");
      }
    }
    if (attr.kind == AttributeSpec::Kind::bucket_value && !attr.scales.empty()) {
      if (attr.scales.size() != attr.values.size()) {
        fail("attribute '" + attr.name + "': scales must match values in length");
      }
      for (double s : attr.scales) {
        if (s < 0) fail("attribute '" + attr.name + "': scales must be >= 0");
      }
    }
  }
  for (const auto& [coef_attr, _] : config.lifetime.coefficients) {
    if (!names.count(coef_attr)) {
      fail("lifetime_model: coefficient references unknown attribute '" + coef_attr + "'");
    }
  }
  for (const auto& rule : config.markers) {
    if (rule.keyword.empty()) fail("marker: empty keyword");
    if (rule.keyword == "bestseller") {
      fail("marker: keyword 'bestseller' is reserved for the ranking marker");
    }
    if (!names.count(rule.attribute)) {
      fail("marker '" + rule.keyword + "': unknown attribute '" + rule.attribute + "'");
    }
    marker_rule_matches(rule, 0.0);  // operator check
  }
  if (config.bestseller_size > 0 && !names.count("views")) {
    fail("population: bestseller_size > 0 requires a 'views' attribute");
  }
  for (const auto& attr : config.links.attributes) {
    if (!names.count(attr)) fail("links: unknown attribute '" + attr + "'");
  }
  if (config.links.neighbors > 0 && config.links.attributes.empty()) {
    fail("links: neighbors > 0 requires at least one attribute");
  }
  std::set<std::string> affinity_keys;
  for (const auto& aff : config.relevance.affinities) {
    if (aff.value.empty()) fail("affinity: empty dimension value");
    if (!affinity_keys.insert(aff.value).second) {
      fail("affinity '" + aff.value + "': duplicate dimension value");
    }
    if (aff.sigma < 0) fail("affinity '" + aff.value + "': sigma must be >= 0");
    for (const auto& [t, _] : aff.tilt) {
      if (!names.count(t)) fail("affinity '" + aff.value + "': unknown attribute '" + t + "'");
    }
  }
}

PopulationConfig population_config_from_json(const json& j) {
  PopulationConfig config;
  const std::string where = "population";
  config.size = static_cast<std::size_t>(num(j, "size", where));
  config.seed = need(j, "seed", where).get<std::uint64_t>();
  config.id_width = static_cast<int>(num_or(j, "id_width", 9));
  if (auto it = j.find("id_start"); it != j.end()) {
    config.id_start = it->get<std::uint64_t>();
  }
  config.creation_window = num_or(j, "creation_window", 0.0);
  if (auto it = j.find("latents"); it != j.end()) {
    for (const auto& l : *it) config.latents.push_back(l.get<std::string>());
  }
  for (const auto& a : need(j, "attributes", where)) {
    config.attributes.push_back(parse_attribute(a));
  }
  const json& lm = need(j, "lifetime_model", where);
  config.lifetime.baseline_hazard = num(lm, "baseline_hazard", "lifetime_model");
  if (auto it = lm.find("coefficients"); it != lm.end()) {
    for (const auto& [k, v] : it->items()) {
      config.lifetime.coefficients[k] = v.get<double>();
    }
  }
  config.never_removed_fraction = num_or(j, "never_removed_fraction", 0.0);
  if (auto it = j.find("markers"); it != j.end()) {
    for (const auto& m : *it) {
      MarkerRule rule;
      rule.keyword = str(m, "keyword", "marker");
      rule.attribute = str(m, "attribute", "marker '" + rule.keyword + "'");
      rule.op = str(m, "op", "marker '" + rule.keyword + "'");
      rule.value = num(m, "value", "marker '" + rule.keyword + "'");
      config.markers.push_back(rule);
    }
  }
  if (auto it = j.find("bestseller_size"); it != j.end()) {
    config.bestseller_size = it->get<std::size_t>();
  }
  if (auto it = j.find("links"); it != j.end()) {
    config.links.neighbors = static_cast<std::size_t>(num(*it, "neighbors", "links"));
    if (auto at = it->find("attributes"); at != it->end()) {
      for (const auto& a : *at) config.links.attributes.push_back(a.get<std::string>());
    }
  }
  if (auto it = j.find("relevance"); it != j.end()) {
    config.relevance.base_low = num_or(*it, "base_low", 0.0);
    config.relevance.base_high = num_or(*it, "base_high", 1.0);
    if (auto af = it->find("affinities"); af != it->end()) {
      for (const auto& a : *af) {
        AffinitySpec spec;
        spec.value = str(a, "value", "affinity");
        spec.sigma = num_or(a, "sigma", 0.0);
        if (auto t = a.find("tilt"); t != a.end()) {
          for (const auto& [k, v] : t->items()) spec.tilt[k] = v.get<double>();
        }
        config.relevance.affinities.push_back(spec);
      }
    }
  }
  validate(config);
  return config;
}

ordered_json to_json(const PopulationConfig& config) {
  ordered_json j;
  j["size"] = config.size;
  j["seed"] = config.seed;
  j["id_width"] = config.id_width;
  j["id_start"] = config.id_start;
  j["creation_window"] = config.creation_window;
  j["latents"] = config.latents;
  ordered_json attrs = ordered_json::array();
  for (const auto& a : config.attributes) {
    ordered_json aj;
    aj["name"] = a.name;
    aj["distribution"] = kind_name(a.kind);
    switch (a.kind) {
      case AttributeSpec::Kind::normal:
        aj["mean"] = a.a;
        aj["stddev"] = a.b;
        break;
      case AttributeSpec::Kind::lognormal:
        aj["log_mean"] = a.a;
        aj["log_stddev"] = a.b;
        break;
      case AttributeSpec::Kind::uniform:
        aj["low"] = a.a;
        aj["high"] = a.b;
        break;
      case AttributeSpec::Kind::constant:
        aj["value"] = a.a;
        break;
      case AttributeSpec::Kind::rank_bucket:
        aj["source"] = a.source;
        aj["weights"] = a.weights;
        break;
      case AttributeSpec::Kind::bucket_value:
        aj["source"] = a.source;
        aj["values"] = a.values;
        if (!a.scales.empty()) aj["scales"] = a.scales;
        aj["jitter"] = a.jitter;
        if (a.exp_transform) aj["exp"] = true;
        break;
    }
    if (!a.latent_loadings.empty()) aj["latent_loadings"] = a.latent_loadings;
    if (a.round_values) aj["round"] = true;
    if (a.clamp_min) aj["clamp_min"] = *a.clamp_min;
    if (a.clamp_max) aj["clamp_max"] = *a.clamp_max;
    attrs.push_back(aj);
  }
  j["attributes"] = attrs;
  j["lifetime_model"] = {{"baseline_hazard", config.lifetime.baseline_hazard},
                         {"coefficients", config.lifetime.coefficients}};
  j["never_removed_fraction"] = config.never_removed_fraction;
  ordered_json markers = ordered_json::array();
  for (const auto& m : config.markers) {
    markers.push_back({{"keyword", m.keyword},
                       {"attribute", m.attribute},
                       {"op", m.op},
                       {"value", m.value}});
  }
  j["markers"] = markers;
  j["bestseller_size"] = config.bestseller_size;
  j["links"] = {{"neighbors", config.links.neighbors},
                {"attributes", config.links.attributes}};
  ordered_json affinities = ordered_json::array();
  for (const auto& a : config.relevance.affinities) {
    ordered_json aj;
    aj["value"] = a.value;
    aj["sigma"] = a.sigma;
    if (!a.tilt.empty()) aj["tilt"] = a.tilt;
    affinities.push_back(aj);
  }
  j["relevance"] = {{"base_low", config.relevance.base_low},
                    {"base_high", config.relevance.base_high},
                    {"affinities", affinities}};
  return j;
}

PopulationConfig load_population_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw config_error("config parse error in " + path + ": " + e.what());
  }
  return population_config_from_json(j);
}

}  // namespace scrapelab
