// http_server.hpp
// Serves a SiteModel over loopback HTTP on a background thread.

#pragma once

#include <memory>
#include <string>

#include "scrapelab/site_model.hpp"

namespace scrapelab::webserve {

class SiteHttpServer {
 public:
  // port 0 picks a free port; see port() after construction.
  SiteHttpServer(const SiteModel& model, const std::string& host = "127.0.0.1",
                 int port = 0);
  ~SiteHttpServer();

  SiteHttpServer(const SiteHttpServer&) = delete;
  SiteHttpServer& operator=(const SiteHttpServer&) = delete;

  int port() const;
  const std::string& host() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace scrapelab::webserve
