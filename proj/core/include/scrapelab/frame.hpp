// frame.hpp
// Sampling frames and fetched samples: the two artifacts every scrape
// produces. Frames record which locators a strategy surfaced and how; samples
// record what fetching those locators returned. Coverage and bias numbers in
// reports are recomputable from these files alone.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scrapelab/common.hpp"
#include "scrapelab/profile.hpp"

#include <nlohmann/json_fwd.hpp>

namespace scrapelab::scraper {

// How a frame entry was discovered.
struct FrameVia {
  std::string strategy;           // catalogue | marker | traverse | guess
  std::string keyword;            // marker
  int depth = -1;                 // traverse: hops from the start unit
  int times_seen = 1;             // traverse: how often the locator was linked
  std::string guessed_id;         // guess
};

struct FrameEntry {
  std::string locator;  // e.g. "/unit/000000042"
  Seconds discovered_at = 0.0;
  FrameVia via;
};

// Ordered, duplicate-free register of locators. Order is discovery order.
struct SamplingFrame {
  std::vector<FrameEntry> entries;

  bool contains(const std::string& locator) const;
  // True if the locator was new and got appended.
  bool add(FrameEntry entry);
  std::set<std::string> unit_ids() const;

 private:
  std::set<std::string> seen_;
};

struct SampleRecord {
  std::string unit_id;
  std::map<std::string, double> attributes;
  Seconds fetched_at = 0.0;
  Seconds discovered_at = 0.0;
  FrameVia via;
};

struct FetchFailure {
  std::string locator;
  Seconds fetched_at = 0.0;
  std::string kind;  // gone | parse | transport
  std::string detail;
};

struct Sample {
  RequestProfile profile;
  std::vector<SampleRecord> records;
  std::vector<FetchFailure> failures;

  std::set<std::string> unit_ids() const;
  std::vector<double> values(const std::string& attribute) const;
};

std::string locator_for(const std::string& unit_id);
// "/unit/000000042" -> "000000042"; empty if not a unit locator.
std::string unit_id_from_locator(const std::string& locator);

nlohmann::ordered_json to_json(const FrameVia& via);
FrameVia via_from_json(const nlohmann::json& j);

void save_frame(const SamplingFrame& frame, const std::string& path);
SamplingFrame load_frame(const std::string& path);
void save_sample(const Sample& sample, const std::string& path);
Sample load_sample(const std::string& path);

}  // namespace scrapelab::scraper
