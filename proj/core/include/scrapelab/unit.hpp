// unit.hpp
// Ground-truth data model: units, population aggregates, and the ledger that
// records exactly what the simulated site contains at every virtual instant.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "scrapelab/common.hpp"
#include "scrapelab/population_config.hpp"

#include <nlohmann/json_fwd.hpp>

namespace scrapelab {

struct GroundTruthUnit {
  std::string id;  // zero-padded decimal, fixed width
  Seconds created_at = 0.0;
  std::optional<Seconds> removed_at;  // absent: never removed
  std::map<std::string, double> attributes;
  std::set<std::string> markers;
  std::vector<std::string> out_links;  // ids of linked units
  double base_relevance = 0.0;
  std::map<std::string, double> affinity;  // dimension key -> offset

  // Liveness is half-open: alive on [created_at, removed_at).
  bool alive_at(Seconds at) const {
    return created_at <= at && (!removed_at || at < *removed_at);
  }
};

struct PopulationAggregates {
  std::size_t population_size = 0;
  std::map<std::string, double> attribute_means;
};

// Immutable after generation. Mutating it mid-run would make the recorded
// truth diverge from what the server serves, so don't.
struct GroundTruthLedger {
  PopulationConfig config;
  std::vector<GroundTruthUnit> units;  // ascending id order
  PopulationAggregates aggregates;

  const GroundTruthUnit* find(const std::string& id) const;
  std::vector<const GroundTruthUnit*> alive_at(Seconds at) const;
  void rebuild_index();

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

PopulationAggregates compute_aggregates(const std::vector<GroundTruthUnit>& units);

nlohmann::ordered_json unit_to_json(const GroundTruthUnit& unit);
GroundTruthUnit unit_from_json(const nlohmann::json& j);

// JSONL layout: a header line {"kind":"ledger","config":...,"aggregates":...}
// followed by one unit per line. Byte-identical for identical inputs.
void save_ledger(const GroundTruthLedger& ledger, const std::string& path);
GroundTruthLedger load_ledger(const std::string& path);

}  // namespace scrapelab
