// profile.hpp
// The identity a scraper presents per request: user agent, language, and
// client address. Servers may rank (never hide) content differently per
// profile, so which profile fetches matters.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scrapelab/site_model.hpp"

#include <nlohmann/json_fwd.hpp>

namespace scrapelab::scraper {

struct RequestProfile {
  std::string name;  // label used in reports
  std::string user_agent;
  std::string accept_language;
  std::string forwarded_for;

  webserve::HeaderMap headers() const;

  // Desktop Chrome, US English, a Los Angeles test address. The reference
  // identity all variant comparisons are made against.
  static RequestProfile benchmark();

  // benchmark | safari | spanish | nyc | houston | miami, or nullopt.
  static std::optional<RequestProfile> named(const std::string& name);

  // Accepts a built-in name or "ua=...;lang=...;ip=..." (any subset; the
  // rest falls back to benchmark values). Throws config_error otherwise.
  static RequestProfile parse(const std::string& flag);
};

nlohmann::ordered_json to_json(const RequestProfile& profile);
RequestProfile profile_from_json(const nlohmann::json& j);

}  // namespace scrapelab::scraper
