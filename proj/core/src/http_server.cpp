#include "scrapelab/http_server.hpp"

#include <stdexcept>
#include <thread>

#include "httplib.h"

namespace scrapelab::webserve {

struct SiteHttpServer::Impl {
  const SiteModel* model;
  std::string host;
  int port = 0;
  httplib::Server server;
  std::thread thread;
};

namespace {

// Forward the wire request to the shared route function unchanged. All
// headers pass through; the model decides which ones matter.
void bridge(const SiteModel& model, const httplib::Request& req,
            httplib::Response& res) {
  Request r;
  r.method = req.method;
  r.target = req.target;
  for (const auto& [k, v] : req.headers) r.headers[k] = v;
  r.body = req.body;
  Response out = model.handle(r);
  res.status = out.status;
  res.set_content(out.body, out.content_type);
}

}  // namespace

SiteHttpServer::SiteHttpServer(const SiteModel& model, const std::string& host,
                               int port)
    : impl_(std::make_unique<Impl>()) {
  impl_->model = &model;
  impl_->host = host;

  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    bridge(*impl_->model, req, res);
  };
  impl_->server.Get(R"(/.*)", handler);
  impl_->server.Put(R"(/.*)", handler);

  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
    if (impl_->port <= 0) throw transport_error("cannot bind a loopback port");
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      throw transport_error("cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->port = port;
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

SiteHttpServer::~SiteHttpServer() {
  stop();
}

int SiteHttpServer::port() const { return impl_->port; }

const std::string& SiteHttpServer::host() const { return impl_->host; }

void SiteHttpServer::stop() {
  if (impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

}  // namespace scrapelab::webserve
