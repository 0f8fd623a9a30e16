#include "scrapelab/profile.hpp"

#include <nlohmann/json.hpp>

namespace scrapelab::scraper {

namespace {

// Client addresses come from the TEST-NET-3 documentation range.
constexpr const char* kChromeUa =
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 "
    "(KHTML, like Gecko) Chrome/124.0.0.0 Safari/537.36";
constexpr const char* kSafariUa =
    "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_15_7) AppleWebKit/605.1.15 "
    "(KHTML, like Gecko) Version/17.4 Safari/605.1.15";

RequestProfile make(const std::string& name, const std::string& ua,
                    const std::string& lang, const std::string& ip) {
  RequestProfile p;
  p.name = name;
  p.user_agent = ua;
  p.accept_language = lang;
  p.forwarded_for = ip;
  return p;
}

}  // namespace

webserve::HeaderMap RequestProfile::headers() const {
  webserve::HeaderMap h;
  if (!user_agent.empty()) h["User-Agent"] = user_agent;
  if (!accept_language.empty()) h["Accept-Language"] = accept_language;
  if (!forwarded_for.empty()) h["X-Forwarded-For"] = forwarded_for;
  return h;
}

RequestProfile RequestProfile::benchmark() {
  return make("benchmark", kChromeUa, "en-US,en;q=0.9", "203.0.113.10");
}

std::optional<RequestProfile> RequestProfile::named(const std::string& name) {
  if (name == "benchmark") return benchmark();
  if (name == "safari") {
    return make("safari", kSafariUa, "en-US,en;q=0.9", "203.0.113.10");
  }
  if (name == "spanish") {
    return make("spanish", kChromeUa, "es-ES,es;q=0.9", "203.0.113.10");
  }
  if (name == "nyc") return make("nyc", kChromeUa, "en-US,en;q=0.9", "203.0.113.60");
  if (name == "houston") {
    return make("houston", kChromeUa, "en-US,en;q=0.9", "203.0.113.110");
  }
  if (name == "miami") {
    return make("miami", kChromeUa, "en-US,en;q=0.9", "203.0.113.160");
  }
  return std::nullopt;
}

RequestProfile RequestProfile::parse(const std::string& flag) {
  if (auto p = named(flag)) return *p;
  if (flag.find('=') == std::string::npos) {
    throw config_error("unknown profile '" + flag + "'");
  }
  RequestProfile p = benchmark();
  p.name = "custom";
  std::string_view rest = flag;
  while (!rest.empty()) {
    auto semi = rest.find(';');
    std::string_view part = rest.substr(0, semi);
    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
    if (part.empty()) continue;
    auto eq = part.find('=');
    if (eq == std::string_view::npos) {
      throw config_error("bad profile fragment '" + std::string(part) + "'");
    }
    std::string key(part.substr(0, eq));
    std::string value(part.substr(eq + 1));
    if (key == "ua") {
      p.user_agent = value;
    } else if (key == "lang") {
      p.accept_language = value;
    } else if (key == "ip") {
      p.forwarded_for = value;
    } else if (key == "name") {
      p.name = value;
    } else {
      throw config_error("unknown profile key '" + key + "'");
    }
  }
  return p;
}

nlohmann::ordered_json to_json(const RequestProfile& profile) {
  return nlohmann::ordered_json{{"name", profile.name},
                                {"user_agent", profile.user_agent},
                                {"accept_language", profile.accept_language},
                                {"forwarded_for", profile.forwarded_for}};
}

RequestProfile profile_from_json(const nlohmann::json& j) {
  RequestProfile p;
  p.name = j.at("name").get<std::string>();
  p.user_agent = j.at("user_agent").get<std::string>();
  p.accept_language = j.at("accept_language").get<std::string>();
  p.forwarded_for = j.at("forwarded_for").get<std::string>();
  return p;
}

}  // namespace scrapelab::scraper
