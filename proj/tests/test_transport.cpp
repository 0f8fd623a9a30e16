#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <nlohmann/json.hpp>

#include "scrapelab/http_server.hpp"
#include "scrapelab/scraper.hpp"
#include "scrapelab/site_client.hpp"
#include "scrapelab/sitegen.hpp"

using namespace scrapelab;

namespace {

GroundTruthLedger demo_ledger() {
  PopulationConfig c;
  c.size = 40;
  c.seed = 606;
  AttributeSpec x;
  x.name = "x";
  x.kind = AttributeSpec::Kind::uniform;
  x.a = 0;
  x.b = 50;
  AttributeSpec y = x;
  y.name = "y";
  c.attributes = {x, y};
  c.lifetime.baseline_hazard = 1e-4;
  c.markers = {{"tag", "x", ">=", 10.0}};
  c.links.neighbors = 3;
  c.links.attributes = {"x", "y"};
  return sitegen::generate_population(c);
}

}  // namespace

TEST_CASE("every route answers identically over HTTP and in process") {
  webserve::SiteModel model(demo_ledger(), {});
  webserve::SiteHttpServer server(model);
  InProcessClient direct(model);
  HttpClient wire(server.host(), server.port());

  const std::string first = "/unit/" + model.ledger().units.front().id;
  const std::vector<std::string> targets = {
      first,
      "/unit/bogus",
      "/unit/000099999",
      "/catalogue",
      "/catalogue?page=2",
      "/catalogue?page=0",
      "/search?q=tag",
      "/search?q=tag&page=2",
      "/search?q=",
      "/search",
      "/admin/aggregates",
      "/admin/clock",
      "/nowhere",
  };
  for (const auto& target : targets) {
    CAPTURE(target);
    auto a = direct.get(target);
    auto b = wire.get(target);
    CHECK(a.status == b.status);
    CHECK(a.content_type == b.content_type);
    CHECK(a.body == b.body);
  }
}

TEST_CASE("profile headers steer the served ranking the same way on both paths") {
  auto ledger = demo_ledger();
  for (auto& u : ledger.units) u.affinity["browser:safari"] = u.attributes.at("x");
  webserve::ServerConfig cfg;
  cfg.ua_classes = {{"Chrome", "chrome"}, {"Safari", "safari"}};
  webserve::SiteModel model(std::move(ledger), cfg);
  webserve::SiteHttpServer server(model);
  InProcessClient direct(model);
  HttpClient wire(server.host(), server.port());

  auto safari = scraper::RequestProfile::named("safari")->headers();
  auto a = direct.get("/search?q=tag", safari);
  auto b = wire.get("/search?q=tag", safari);
  CHECK(a.body == b.body);

  auto chrome = scraper::RequestProfile::benchmark().headers();
  auto c = direct.get("/search?q=tag", chrome);
  CHECK(a.body != c.body);  // the profile must matter for this setup
}

TEST_CASE("admin clock conveniences work over both transports") {
  webserve::SiteModel model(demo_ledger(), {});
  webserve::SiteHttpServer server(model);
  HttpClient wire(server.host(), server.port());

  CHECK(wire.get_clock() == 0.0);
  wire.set_clock(120.0);
  CHECK(wire.get_clock() == 120.0);
  CHECK(model.clock() == 120.0);
  CHECK_THROWS_AS(wire.set_clock(10.0), transport_error);
  CHECK(wire.get_clock() == 120.0);

  auto agg = wire.get_aggregates();
  CHECK(agg.population_size == 40);
  CHECK(agg.attribute_means.at("x") ==
        model.ledger().aggregates.attribute_means.at("x"));
}

TEST_CASE("scraping through the wire produces the in-process frame and sample") {
  webserve::SiteModel model(demo_ledger(), {});
  webserve::SiteHttpServer server(model);
  InProcessClient direct(model);
  HttpClient wire(server.host(), server.port());
  auto profile = scraper::RequestProfile::benchmark();

  auto f1 = scraper::index_marker(direct, "tag", profile, 0.0);
  auto f2 = scraper::index_marker(wire, "tag", profile, 0.0);
  REQUIRE(f1.entries.size() == f2.entries.size());
  for (std::size_t i = 0; i < f1.entries.size(); ++i) {
    CHECK(f1.entries[i].locator == f2.entries[i].locator);
  }

  auto s1 = scraper::fetch(direct, f1, profile, scraper::LagSchedule{0.0},
                           {"x", "y"});
  auto s2 = scraper::fetch(wire, f2, profile, scraper::LagSchedule{0.0},
                           {"x", "y"});
  REQUIRE(s1.records.size() == s2.records.size());
  for (std::size_t i = 0; i < s1.records.size(); ++i) {
    CHECK(s1.records[i].unit_id == s2.records[i].unit_id);
    CHECK(s1.records[i].attributes == s2.records[i].attributes);
  }
}

TEST_CASE("the http client reports a dead endpoint as a transport error") {
  int dead_port;
  {
    webserve::SiteModel model(demo_ledger(), {});
    webserve::SiteHttpServer server(model);
    dead_port = server.port();
    server.stop();
  }
  HttpClient wire("127.0.0.1", dead_port);
  CHECK_THROWS_AS(wire.get("/catalogue"), transport_error);
}
