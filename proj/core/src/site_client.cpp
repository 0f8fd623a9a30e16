#include "scrapelab/site_client.hpp"

#include <nlohmann/json.hpp>

#include "httplib.h"

namespace scrapelab {

using webserve::HeaderMap;
using webserve::Request;
using webserve::Response;

Seconds SiteClient::get_clock() {
  Response r = get("/admin/clock");
  if (r.status != 200) {
    throw transport_error("clock read failed: status " + std::to_string(r.status));
  }
  return nlohmann::json::parse(r.body).at("now").get<double>();
}

void SiteClient::set_clock(Seconds at) {
  nlohmann::ordered_json body{{"now", at}};
  Response r = put("/admin/clock", body.dump(), {});
  if (r.status != 200) {
    throw transport_error("clock set failed: status " + std::to_string(r.status) +
                          " body " + r.body);
  }
}

PopulationAggregates SiteClient::get_aggregates() {
  Response r = get("/admin/aggregates");
  if (r.status != 200) {
    throw transport_error("aggregates read failed: status " + std::to_string(r.status));
  }
  auto j = nlohmann::json::parse(r.body);
  PopulationAggregates agg;
  agg.population_size = j.at("population_size").get<std::size_t>();
  for (const auto& [k, v] : j.at("attribute_means").items()) {
    agg.attribute_means[k] = v.get<double>();
  }
  return agg;
}

Response InProcessClient::get(const std::string& target, const HeaderMap& headers) {
  return model_->handle(Request{"GET", target, headers, ""});
}

Response InProcessClient::put(const std::string& target, const std::string& body,
                              const HeaderMap& headers) {
  return model_->handle(Request{"PUT", target, headers, body});
}

struct HttpClient::Impl {
  httplib::Client client;
  Impl(const std::string& host, int port) : client(host, port) {
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(30, 0);
    client.set_keep_alive(true);
    // httplib adds its own Accept/User-Agent defaults; suppress them so the
    // only profile-relevant headers on the wire are the ones callers send.
    client.set_default_headers({});
  }
};

HttpClient::HttpClient(const std::string& host, int port)
    : impl_(std::make_unique<Impl>(host, port)) {}

HttpClient::~HttpClient() = default;

namespace {

httplib::Headers to_httplib(const HeaderMap& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

Response from_httplib(const httplib::Result& result) {
  Response r;
  r.status = result->status;
  r.content_type = result->get_header_value("Content-Type");
  r.body = result->body;
  return r;
}

}  // namespace

Response HttpClient::get(const std::string& target, const HeaderMap& headers) {
  auto h = to_httplib(headers);
  auto result = impl_->client.Get(target, h);
  if (!result) result = impl_->client.Get(target, h);  // one retry
  if (!result) {
    throw transport_error("GET " + target + " failed: " +
                          httplib::to_string(result.error()));
  }
  return from_httplib(result);
}

Response HttpClient::put(const std::string& target, const std::string& body,
                         const HeaderMap& headers) {
  auto h = to_httplib(headers);
  auto result = impl_->client.Put(target, h, body, "application/json");
  if (!result) result = impl_->client.Put(target, h, body, "application/json");
  if (!result) {
    throw transport_error("PUT " + target + " failed: " +
                          httplib::to_string(result.error()));
  }
  return from_httplib(result);
}

}  // namespace scrapelab
