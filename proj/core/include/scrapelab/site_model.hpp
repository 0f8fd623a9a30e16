// site_model.hpp
// The simulated website. A SiteModel owns a ledger, a server config, and a
// virtual clock, and answers requests through one route function. The HTTP
// server and the in-process client both call that same function, which is
// what makes the two transports behaviorally indistinguishable.

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "scrapelab/unit.hpp"

namespace scrapelab::webserve {

// Monotone virtual clock. Moving backwards is an error; equal is allowed.
class VirtualClock {
 public:
  Seconds now() const;
  void set(Seconds at);

 private:
  mutable std::mutex mu_;
  Seconds now_ = 0.0;
};

struct ServerConfig {
  bool catalogue_enabled = true;
  std::size_t catalogue_page_size = 100;
  std::size_t search_page_size = 20;
  std::size_t result_cap = 1000;  // search never exposes more than this many
  // User-Agent substring -> browser class; first matching row wins.
  std::vector<std::pair<std::string, std::string>> ua_classes;
  // IP prefix -> region; longest matching prefix wins.
  std::vector<std::pair<std::string, std::string>> geo_prefixes;
};

ServerConfig server_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ServerConfig& config);

// Header names are case-insensitive, as on the wire.
struct HeaderLess {
  bool operator()(const std::string& a, const std::string& b) const;
};
using HeaderMap = std::map<std::string, std::string, HeaderLess>;

struct Request {
  std::string method;  // GET or PUT
  std::string target;  // path plus optional ?query
  HeaderMap headers;
  std::string body;
};

struct Response {
  int status = 0;
  std::string content_type;
  std::string body;
};

// The three request dimensions a profile resolves to. Units carry relevance
// offsets keyed by these strings.
struct ProfileKey {
  std::string browser;  // "browser:<class>"
  std::string language; // "lang:<primary subtag>"
  std::string region;   // "geo:<region>"
};

struct SearchHit {
  const GroundTruthUnit* unit;
  double score;
};

class SiteModel {
 public:
  SiteModel(GroundTruthLedger ledger, ServerConfig config);

  // Full router: parses the target, dispatches, renders. Never throws for
  // client-side problems; those become 4xx responses.
  Response handle(const Request& request) const;

  // Semantic operations behind the routes, usable directly in tests.
  enum class ResolveStatus { ok, malformed, not_found, gone };
  struct ResolveResult {
    ResolveStatus status;
    const GroundTruthUnit* unit;  // set only for ok
  };
  ResolveResult resolve_unit(const std::string& id, Seconds at) const;
  std::vector<SearchHit> search(const std::string& keyword, const ProfileKey& key,
                                Seconds at) const;
  std::vector<const GroundTruthUnit*> catalogue(Seconds at) const;

  ProfileKey resolve_profile(const HeaderMap& headers) const;

  Seconds clock() const { return clock_.now(); }
  void set_clock(Seconds at) { clock_.set(at); }

  const GroundTruthLedger& ledger() const { return ledger_; }
  const ServerConfig& config() const { return config_; }

 private:
  GroundTruthLedger ledger_;
  ServerConfig config_;
  mutable VirtualClock clock_;
  // keyword -> units carrying it, ascending id
  std::map<std::string, std::vector<const GroundTruthUnit*>> by_marker_;
};

}  // namespace scrapelab::webserve
