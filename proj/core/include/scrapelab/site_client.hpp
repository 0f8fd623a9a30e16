// site_client.hpp
// Transport abstraction. Scraping and experiment code talks to a SiteClient
// and cannot tell whether requests cross a socket or a function call.

#pragma once

#include <memory>
#include <string>

#include "scrapelab/site_model.hpp"

namespace scrapelab {

class SiteClient {
 public:
  virtual ~SiteClient() = default;

  virtual webserve::Response get(const std::string& target,
                                 const webserve::HeaderMap& headers) = 0;
  virtual webserve::Response put(const std::string& target, const std::string& body,
                                 const webserve::HeaderMap& headers) = 0;

  webserve::Response get(const std::string& target) { return get(target, {}); }

  // Admin conveniences. Throw transport_error on non-200.
  Seconds get_clock();
  void set_clock(Seconds at);
  PopulationAggregates get_aggregates();
};

// Calls SiteModel::handle directly. Millions of requests per minute, used by
// unit tests and the fast experiment paths.
class InProcessClient : public SiteClient {
 public:
  explicit InProcessClient(const webserve::SiteModel& model) : model_(&model) {}
  using SiteClient::get;
  webserve::Response get(const std::string& target,
                         const webserve::HeaderMap& headers) override;
  webserve::Response put(const std::string& target, const std::string& body,
                         const webserve::HeaderMap& headers) override;

 private:
  const webserve::SiteModel* model_;
};

// Real HTTP over loopback. One retry on transport failure, then
// transport_error.
class HttpClient : public SiteClient {
 public:
  HttpClient(const std::string& host, int port);
  ~HttpClient() override;
  using SiteClient::get;
  webserve::Response get(const std::string& target,
                         const webserve::HeaderMap& headers) override;
  webserve::Response put(const std::string& target, const std::string& body,
                         const webserve::HeaderMap& headers) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace scrapelab
