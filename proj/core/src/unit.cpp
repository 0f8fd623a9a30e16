#include "scrapelab/unit.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace scrapelab {

using nlohmann::json;
using nlohmann::ordered_json;

const GroundTruthUnit* GroundTruthLedger::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &units[it->second];
}

std::vector<const GroundTruthUnit*> GroundTruthLedger::alive_at(Seconds at) const {
  std::vector<const GroundTruthUnit*> out;
  for (const auto& u : units) {
    if (u.alive_at(at)) out.push_back(&u);
  }
  return out;
}

void GroundTruthLedger::rebuild_index() {
  index_.clear();
  index_.reserve(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) index_[units[i].id] = i;
}

PopulationAggregates compute_aggregates(const std::vector<GroundTruthUnit>& units) {
  PopulationAggregates agg;
  agg.population_size = units.size();
  if (units.empty()) return agg;
  for (const auto& u : units) {
    for (const auto& [name, value] : u.attributes) {
      agg.attribute_means[name] += value;
    }
  }
  for (auto& [_, sum] : agg.attribute_means) {
    sum /= static_cast<double>(units.size());
  }
  return agg;
}

ordered_json unit_to_json(const GroundTruthUnit& unit) {
  ordered_json j;
  j["id"] = unit.id;
  j["created_at"] = unit.created_at;
  if (unit.removed_at) {
    j["removed_at"] = *unit.removed_at;
  } else {
    j["removed_at"] = nullptr;
  }
  j["attributes"] = unit.attributes;
  j["markers"] = unit.markers;
  j["links"] = unit.out_links;
  j["base_relevance"] = unit.base_relevance;
  j["affinity"] = unit.affinity;
  return j;
}

GroundTruthUnit unit_from_json(const json& j) {
  GroundTruthUnit u;
  u.id = j.at("id").get<std::string>();
  u.created_at = j.at("created_at").get<double>();
  if (!j.at("removed_at").is_null()) {
    u.removed_at = j.at("removed_at").get<double>();
  }
  for (const auto& [k, v] : j.at("attributes").items()) {
    u.attributes[k] = v.get<double>();
  }
  for (const auto& m : j.at("markers")) u.markers.insert(m.get<std::string>());
  for (const auto& l : j.at("links")) u.out_links.push_back(l.get<std::string>());
  u.base_relevance = j.at("base_relevance").get<double>();
  if (auto it = j.find("affinity"); it != j.end()) {
    for (const auto& [k, v] : it->items()) u.affinity[k] = v.get<double>();
  }
  return u;
}

void save_ledger(const GroundTruthLedger& ledger, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw transport_error("cannot write ledger file: " + path);
  ordered_json header;
  header["kind"] = "ledger";
  header["config"] = to_json(ledger.config);
  header["aggregates"] = {{"population_size", ledger.aggregates.population_size},
                          {"attribute_means", ledger.aggregates.attribute_means}};
  out << header.dump() << "\n";
  for (const auto& u : ledger.units) {
    out << unit_to_json(u).dump() << "\n";
  }
  if (!out) throw transport_error("write failed: " + path);
}

GroundTruthLedger load_ledger(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw transport_error("cannot open ledger file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw config_error("empty ledger file: " + path);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("kind", "") != std::string("ledger")) {
    throw config_error("not a ledger file: " + path);
  }
  GroundTruthLedger ledger;
  ledger.config = population_config_from_json(header.at("config"));
  ledger.aggregates.population_size =
      header.at("aggregates").at("population_size").get<std::size_t>();
  for (const auto& [k, v] : header.at("aggregates").at("attribute_means").items()) {
    ledger.aggregates.attribute_means[k] = v.get<double>();
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json uj = json::parse(line, nullptr, false);
    if (uj.is_discarded()) throw config_error("bad ledger line in " + path);
    ledger.units.push_back(unit_from_json(uj));
  }
  ledger.rebuild_index();
  return ledger;
}

}  // namespace scrapelab
