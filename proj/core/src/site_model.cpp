#include "scrapelab/site_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include <nlohmann/json.hpp>

#include "scrapelab/html.hpp"

namespace scrapelab::webserve {

using nlohmann::json;
using nlohmann::ordered_json;

Seconds VirtualClock::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void VirtualClock::set(Seconds at) {
  std::lock_guard lock(mu_);
  if (at < now_) {
    throw clock_error("clock regression: " + format_double(at) + " < " +
                      format_double(now_));
  }
  now_ = at;
}

bool HeaderLess::operator()(const std::string& a, const std::string& b) const {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
        return std::tolower(static_cast<unsigned char>(x)) <
               std::tolower(static_cast<unsigned char>(y));
      });
}

ServerConfig server_config_from_json(const json& j) {
  ServerConfig c;
  if (auto it = j.find("catalogue_enabled"); it != j.end()) {
    c.catalogue_enabled = it->get<bool>();
  }
  if (auto it = j.find("catalogue_page_size"); it != j.end()) {
    c.catalogue_page_size = it->get<std::size_t>();
  }
  if (auto it = j.find("search_page_size"); it != j.end()) {
    c.search_page_size = it->get<std::size_t>();
  }
  if (auto it = j.find("result_cap"); it != j.end()) {
    c.result_cap = it->get<std::size_t>();
  }
  if (auto it = j.find("ua_classes"); it != j.end()) {
    for (const auto& row : *it) {
      c.ua_classes.emplace_back(row.at(0).get<std::string>(),
                                row.at(1).get<std::string>());
    }
  }
  if (auto it = j.find("geo_prefixes"); it != j.end()) {
    for (const auto& row : *it) {
      c.geo_prefixes.emplace_back(row.at(0).get<std::string>(),
                                  row.at(1).get<std::string>());
    }
  }
  if (c.catalogue_page_size == 0 || c.search_page_size == 0) {
    throw config_error("server: page sizes must be >= 1");
  }
  if (c.result_cap == 0) throw config_error("server: result_cap must be >= 1");
  return c;
}

ordered_json to_json(const ServerConfig& config) {
  ordered_json j;
  j["catalogue_enabled"] = config.catalogue_enabled;
  j["catalogue_page_size"] = config.catalogue_page_size;
  j["search_page_size"] = config.search_page_size;
  j["result_cap"] = config.result_cap;
  ordered_json ua = ordered_json::array();
  for (const auto& [sub, cls] : config.ua_classes) ua.push_back({sub, cls});
  j["ua_classes"] = ua;
  ordered_json geo = ordered_json::array();
  for (const auto& [prefix, region] : config.geo_prefixes) geo.push_back({prefix, region});
  j["geo_prefixes"] = geo;
  return j;
}

namespace {

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out += ' ';
    } else if (s[i] == '%' && i + 2 < s.size()) {
      auto hex = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
      };
      int hi = hex(s[i + 1]), lo = hex(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out += static_cast<char>(hi * 16 + lo);
        i += 2;
      } else {
        out += s[i];
      }
    } else {
      out += s[i];
    }
  }
  return out;
}

std::map<std::string, std::string> parse_query(std::string_view query) {
  std::map<std::string, std::string> out;
  while (!query.empty()) {
    auto amp = query.find('&');
    std::string_view pair = query.substr(0, amp);
    query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
    if (pair.empty()) continue;
    auto eq = pair.find('=');
    if (eq == std::string_view::npos) {
      out[percent_decode(pair)] = "";
    } else {
      out[percent_decode(pair.substr(0, eq))] = percent_decode(pair.substr(eq + 1));
    }
  }
  return out;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

Response html_response(int status, std::string body) {
  return Response{status, "text/html", std::move(body)};
}

Response json_response(int status, const ordered_json& j) {
  return Response{status, "application/json", j.dump()};
}

Response error_page(int status, const std::string& message) {
  std::string body = "<!DOCTYPE html>\n<html><body><p class=\"error\">" + message +
                     "</p></body></html>\n";
  return html_response(status, std::move(body));
}

// Positive 1-based page number, or 0 on bad input.
std::size_t parse_page(const std::map<std::string, std::string>& params) {
  auto it = params.find("page");
  if (it == params.end()) return 1;
  const std::string& s = it->second;
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v == 0) return 0;
  return v;
}

}  // namespace

SiteModel::SiteModel(GroundTruthLedger ledger, ServerConfig config)
    : ledger_(std::move(ledger)), config_(std::move(config)) {
  ledger_.rebuild_index();
  for (const auto& u : ledger_.units) {
    for (const auto& m : u.markers) {
      by_marker_[m].push_back(&u);
    }
  }
}

SiteModel::ResolveResult SiteModel::resolve_unit(const std::string& id,
                                                 Seconds at) const {
  if (id.empty() || id.size() > 18 ||
      !std::all_of(id.begin(), id.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    return {ResolveStatus::malformed, nullptr};
  }
  const GroundTruthUnit* unit = ledger_.find(id);
  if (!unit || at < unit->created_at) return {ResolveStatus::not_found, nullptr};
  if (unit->removed_at && at >= *unit->removed_at) {
    return {ResolveStatus::gone, nullptr};
  }
  return {ResolveStatus::ok, unit};
}

std::vector<SearchHit> SiteModel::search(const std::string& keyword,
                                         const ProfileKey& key, Seconds at) const {
  std::vector<SearchHit> hits;
  auto it = by_marker_.find(keyword);
  if (it == by_marker_.end()) return hits;
  hits.reserve(it->second.size());
  for (const auto* u : it->second) {
    if (!u->alive_at(at)) continue;
    double score = u->base_relevance;
    for (const std::string* dim : {&key.browser, &key.language, &key.region}) {
      auto a = u->affinity.find(*dim);
      if (a != u->affinity.end()) score += a->second;
    }
    hits.push_back({u, score});
  }
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.unit->id < b.unit->id;
  });
  if (hits.size() > config_.result_cap) hits.resize(config_.result_cap);
  return hits;
}

std::vector<const GroundTruthUnit*> SiteModel::catalogue(Seconds at) const {
  return ledger_.alive_at(at);
}

ProfileKey SiteModel::resolve_profile(const HeaderMap& headers) const {
  ProfileKey key{"browser:other", "lang:other", "geo:other"};
  if (auto it = headers.find("User-Agent"); it != headers.end()) {
    for (const auto& [needle, cls] : config_.ua_classes) {
      if (it->second.find(needle) != std::string::npos) {
        key.browser = "browser:" + cls;
        break;
      }
    }
  }
  if (auto it = headers.find("Accept-Language"); it != headers.end()) {
    std::string_view raw = it->second;
    auto comma = raw.find(',');
    std::string_view first = trim(raw.substr(0, comma));
    auto semi = first.find(';');
    first = trim(first.substr(0, semi));
    auto dash = first.find('-');
    first = first.substr(0, dash);
    if (!first.empty() && first != "*") {
      key.language = "lang:" + lower(std::string(first));
    }
  }
  if (auto it = headers.find("X-Forwarded-For"); it != headers.end()) {
    std::string_view raw = it->second;
    auto comma = raw.find(',');
    std::string ip(trim(raw.substr(0, comma)));
    std::size_t best_len = 0;
    for (const auto& [prefix, region] : config_.geo_prefixes) {
      if (ip.size() >= prefix.size() && ip.compare(0, prefix.size(), prefix) == 0 &&
          prefix.size() > best_len) {
        best_len = prefix.size();
        key.region = "geo:" + region;
      }
    }
  }
  return key;
}

Response SiteModel::handle(const Request& request) const {
  const Seconds now = clock_.now();
  std::string_view target = request.target;
  auto qpos = target.find('?');
  std::string path(target.substr(0, qpos));
  auto params = parse_query(
      qpos == std::string_view::npos ? std::string_view{} : target.substr(qpos + 1));

  if (request.method == "GET" && path.rfind("/unit/", 0) == 0) {
    std::string id = percent_decode(path.substr(6));
    auto [status, unit] = resolve_unit(id, now);
    switch (status) {
      case ResolveStatus::ok:
        return html_response(200, render_unit_page(*unit));
      case ResolveStatus::malformed:
        return error_page(400, "malformed unit id");
      case ResolveStatus::not_found:
        return error_page(404, "no such unit");
      case ResolveStatus::gone:
        return error_page(410, "unit removed");
    }
  }

  if (request.method == "GET" && path == "/search") {
    auto q = params.find("q");
    if (q == params.end() || q->second.empty()) {
      return error_page(400, "missing query keyword");
    }
    std::size_t page = parse_page(params);
    if (page == 0) return error_page(400, "bad page number");
    ProfileKey key = resolve_profile(request.headers);
    auto hits = search(q->second, key, now);
    std::size_t begin = (page - 1) * config_.search_page_size;
    std::vector<const GroundTruthUnit*> page_units;
    for (std::size_t i = begin; i < hits.size() && i < begin + config_.search_page_size; ++i) {
      page_units.push_back(hits[i].unit);
    }
    bool has_next = begin + config_.search_page_size < hits.size();
    return html_response(200, render_listing_page("search: " + q->second,
                                                  page_units, page, has_next));
  }

  if (request.method == "GET" && path == "/catalogue") {
    if (!config_.catalogue_enabled) {
      return error_page(410, "catalogue disabled");
    }
    std::size_t page = parse_page(params);
    if (page == 0) return error_page(400, "bad page number");
    // Pages slice the alive population in ascending id order. The scan is
    // linear in population size, like a naive real-world listing would be.
    std::vector<const GroundTruthUnit*> page_units;
    std::size_t begin = (page - 1) * config_.catalogue_page_size;
    std::size_t seen = 0;
    bool has_next = false;
    for (const auto& u : ledger_.units) {
      if (!u.alive_at(now)) continue;
      if (seen >= begin && seen < begin + config_.catalogue_page_size) {
        page_units.push_back(&u);
      } else if (seen >= begin + config_.catalogue_page_size) {
        has_next = true;
        break;
      }
      ++seen;
    }
    return html_response(200,
                         render_listing_page("catalogue", page_units, page, has_next));
  }

  if (path == "/admin/clock") {
    if (request.method == "GET") {
      return json_response(200, ordered_json{{"now", now}});
    }
    if (request.method == "PUT") {
      json body = json::parse(request.body, nullptr, false);
      if (body.is_discarded() || !body.contains("now") || !body["now"].is_number()) {
        return json_response(400, ordered_json{{"error", "body must be {\"now\": seconds}"}});
      }
      try {
        clock_.set(body["now"].get<double>());
      } catch (const clock_error& e) {
        return json_response(400, ordered_json{{"error", e.what()}, {"now", now}});
      }
      return json_response(200, ordered_json{{"now", clock_.now()}});
    }
  }

  if (request.method == "GET" && path == "/admin/aggregates") {
    ordered_json j;
    j["population_size"] = ledger_.aggregates.population_size;
    j["attribute_means"] = ledger_.aggregates.attribute_means;
    return json_response(200, j);
  }

  return error_page(404, "no such page");
}

}  // namespace scrapelab::webserve
