#include "scrapelab/frame.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace scrapelab::scraper {

using nlohmann::json;
using nlohmann::ordered_json;

bool SamplingFrame::contains(const std::string& locator) const {
  return seen_.count(locator) > 0;
}

bool SamplingFrame::add(FrameEntry entry) {
  if (!seen_.insert(entry.locator).second) return false;
  entries.push_back(std::move(entry));
  return true;
}

std::set<std::string> SamplingFrame::unit_ids() const {
  std::set<std::string> out;
  for (const auto& e : entries) {
    std::string id = unit_id_from_locator(e.locator);
    if (!id.empty()) out.insert(id);
  }
  return out;
}

std::set<std::string> Sample::unit_ids() const {
  std::set<std::string> out;
  for (const auto& r : records) out.insert(r.unit_id);
  return out;
}

std::vector<double> Sample::values(const std::string& attribute) const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    auto it = r.attributes.find(attribute);
    if (it != r.attributes.end()) out.push_back(it->second);
  }
  return out;
}

std::string locator_for(const std::string& unit_id) { return "/unit/" + unit_id; }

std::string unit_id_from_locator(const std::string& locator) {
  if (locator.rfind("/unit/", 0) != 0) return "";
  return locator.substr(6);
}

ordered_json to_json(const FrameVia& via) {
  ordered_json j;
  j["strategy"] = via.strategy;
  if (via.strategy == "marker") j["keyword"] = via.keyword;
  if (via.strategy == "traverse") {
    j["depth"] = via.depth;
    j["times_seen"] = via.times_seen;
  }
  if (via.strategy == "guess") j["guessed_id"] = via.guessed_id;
  return j;
}

FrameVia via_from_json(const json& j) {
  FrameVia via;
  via.strategy = j.at("strategy").get<std::string>();
  if (auto it = j.find("keyword"); it != j.end()) via.keyword = *it;
  if (auto it = j.find("depth"); it != j.end()) via.depth = *it;
  if (auto it = j.find("times_seen"); it != j.end()) via.times_seen = *it;
  if (auto it = j.find("guessed_id"); it != j.end()) via.guessed_id = *it;
  return via;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw transport_error("cannot write file: " + path);
  return out;
}

json read_header(std::ifstream& in, const std::string& path, const char* kind) {
  std::string line;
  if (!std::getline(in, line)) throw config_error("empty file: " + path);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("kind", "") != std::string(kind)) {
    throw config_error(std::string("not a ") + kind + " file: " + path);
  }
  return header;
}

}  // namespace

void save_frame(const SamplingFrame& frame, const std::string& path) {
  auto out = open_out(path);
  out << ordered_json{{"kind", "frame"}, {"entries", frame.entries.size()}}.dump()
      << "\n";
  for (const auto& e : frame.entries) {
    ordered_json j;
    j["locator"] = e.locator;
    j["discovered_at"] = e.discovered_at;
    j["via"] = to_json(e.via);
    out << j.dump() << "\n";
  }
  if (!out) throw transport_error("write failed: " + path);
}

SamplingFrame load_frame(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw transport_error("cannot open frame file: " + path);
  read_header(in, path, "frame");
  SamplingFrame frame;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    FrameEntry e;
    e.locator = j.at("locator").get<std::string>();
    e.discovered_at = j.at("discovered_at").get<double>();
    e.via = via_from_json(j.at("via"));
    frame.add(std::move(e));
  }
  return frame;
}

void save_sample(const Sample& sample, const std::string& path) {
  auto out = open_out(path);
  ordered_json header;
  header["kind"] = "sample";
  header["profile"] = to_json(sample.profile);
  header["records"] = sample.records.size();
  header["failures"] = sample.failures.size();
  out << header.dump() << "\n";
  for (const auto& r : sample.records) {
    ordered_json j;
    j["record"] = "unit";
    j["unit_id"] = r.unit_id;
    j["attributes"] = r.attributes;
    j["fetched_at"] = r.fetched_at;
    j["discovered_at"] = r.discovered_at;
    j["via"] = to_json(r.via);
    out << j.dump() << "\n";
  }
  for (const auto& f : sample.failures) {
    ordered_json j;
    j["record"] = "failure";
    j["locator"] = f.locator;
    j["fetched_at"] = f.fetched_at;
    j["failure_kind"] = f.kind;
    j["detail"] = f.detail;
    out << j.dump() << "\n";
  }
  if (!out) throw transport_error("write failed: " + path);
}

Sample load_sample(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw transport_error("cannot open sample file: " + path);
  json header = read_header(in, path, "sample");
  Sample sample;
  sample.profile = profile_from_json(header.at("profile"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (j.at("record") == "unit") {
      SampleRecord r;
      r.unit_id = j.at("unit_id").get<std::string>();
      for (const auto& [k, v] : j.at("attributes").items()) {
        r.attributes[k] = v.get<double>();
      }
      r.fetched_at = j.at("fetched_at").get<double>();
      r.discovered_at = j.at("discovered_at").get<double>();
      r.via = via_from_json(j.at("via"));
      sample.records.push_back(std::move(r));
    } else {
      FetchFailure f;
      f.locator = j.at("locator").get<std::string>();
      f.fetched_at = j.at("fetched_at").get<double>();
      f.kind = j.at("failure_kind").get<std::string>();
      f.detail = j.at("detail").get<std::string>();
      sample.failures.push_back(std::move(f));
    }
  }
  return sample;
}

}  // namespace scrapelab::scraper
