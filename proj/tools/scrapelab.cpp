// scrapelab command line. Subcommands cover the full pipeline: generate a
// population, serve it over HTTP, scrape it with any strategy, audit a sample
// against ground truth or a site's own claims, and run the packaged
// experiments.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"

#include "scrapelab/experiments.hpp"

namespace fs = std::filesystem;
using namespace scrapelab;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

volatile std::sig_atomic_t g_stop = 0;
void handle_signal(int) { g_stop = 1; }

std::set<experiments::ReportFormat> parse_formats(const std::string& spec) {
  std::set<experiments::ReportFormat> out;
  std::string_view rest = spec;
  while (!rest.empty()) {
    auto comma = rest.find(',');
    std::string_view token = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (token == "json") {
      out.insert(experiments::ReportFormat::json);
    } else if (token == "csv") {
      out.insert(experiments::ReportFormat::csv);
    } else if (token == "text") {
      out.insert(experiments::ReportFormat::text);
    } else if (!token.empty()) {
      throw config_error("unknown format '" + std::string(token) + "'");
    }
  }
  if (out.empty()) throw config_error("no output format selected");
  return out;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string_view rest = s;
  while (!rest.empty()) {
    auto comma = rest.find(',');
    std::string_view token = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (!token.empty()) out.emplace_back(token);
  }
  return out;
}

// "http://host:port" or "host:port" -> (host, port)
std::pair<std::string, int> parse_site_url(const std::string& url) {
  std::string rest = url;
  if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
  auto colon = rest.rfind(':');
  if (colon == std::string::npos) {
    throw config_error("site URL must include a port: " + url);
  }
  std::string host = rest.substr(0, colon);
  std::string port_s = rest.substr(colon + 1);
  while (!port_s.empty() && port_s.back() == '/') port_s.pop_back();
  int port = 0;
  try {
    port = std::stoi(port_s);
  } catch (...) {
    throw config_error("bad port in site URL: " + url);
  }
  return {host, port};
}

webserve::ServerConfig load_server_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw config_error("cannot open server config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw config_error("server config parse error: " + std::string(e.what()));
  }
  return webserve::server_config_from_json(j);
}

// Everything a scrape-ish subcommand needs to reach a site, whichever side
// of the transport it lives on.
struct SiteAccess {
  std::unique_ptr<webserve::SiteModel> model;  // ledger mode
  std::unique_ptr<SiteClient> client;
};

SiteAccess open_site(const std::string& ledger_path, const std::string& site_url,
                     const std::string& server_config_path) {
  if (ledger_path.empty() == site_url.empty()) {
    throw config_error("provide exactly one of --ledger and --site");
  }
  SiteAccess access;
  if (!ledger_path.empty()) {
    auto ledger = load_ledger(ledger_path);
    access.model = std::make_unique<webserve::SiteModel>(
        std::move(ledger), load_server_config(server_config_path));
    access.client = std::make_unique<InProcessClient>(*access.model);
  } else {
    auto [host, port] = parse_site_url(site_url);
    access.client = std::make_unique<HttpClient>(host, port);
  }
  return access;
}

int cmd_gen(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed) {
  // Accept a bare population config or a full experiment config; in the
  // latter case the embedded population block is what gets generated.
  std::ifstream in(config_path);
  if (!in) throw config_error("cannot open config file: " + config_path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw config_error("config parse error in " + config_path + ": " + e.what());
  }
  PopulationConfig config = population_config_from_json(
      j.is_object() && j.contains("population") ? j.at("population") : j);
  if (seed) config.seed = *seed;
  auto ledger = sitegen::generate_population(config);
  fs::create_directories(out_dir);
  fs::path path = fs::path(out_dir) / "ledger.jsonl";
  save_ledger(ledger, path.string());
  std::size_t removed = 0;
  for (const auto& u : ledger.units) {
    if (u.removed_at) ++removed;
  }
  std::cout << "wrote " << path.string() << ": " << ledger.units.size()
            << " units (" << removed << " with finite lifetimes), seed "
            << config.seed << "\n";
  return 0;
}

int cmd_serve(const std::string& ledger_path, const std::string& host, int port,
              const std::string& server_config_path, double clock) {
  auto ledger = load_ledger(ledger_path);
  webserve::SiteModel model(std::move(ledger), load_server_config(server_config_path));
  if (clock > 0) model.set_clock(clock);
  webserve::SiteHttpServer server(model, host, port);
  std::cout << "serving " << model.ledger().units.size() << " units on http://"
            << server.host() << ":" << server.port() << " (virtual clock "
            << format_double(model.clock()) << ")\n";
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

int cmd_scrape(const std::string& ledger_path, const std::string& site_url,
               const std::string& server_config_path, const std::string& strategy,
               const std::string& keyword, const std::string& start,
               std::size_t budget, int width, std::uint64_t from, std::uint64_t to,
               std::size_t probe_limit, double at, double lag, double interval,
               double horizon, const std::string& profile_flag,
               const std::string& attrs, const std::string& out_dir,
               bool index_only) {
  auto access = open_site(ledger_path, site_url, server_config_path);
  auto profile = scraper::RequestProfile::parse(profile_flag);

  scraper::SamplingFrame frame;
  std::size_t probes = 0, pages = 0;
  std::vector<scraper::FetchFailure> index_failures;
  if (strategy == "catalogue") {
    frame = scraper::index_catalogue(*access.client, at);
  } else if (strategy == "marker") {
    frame = scraper::index_marker(*access.client, keyword, profile, at);
  } else if (strategy == "traverse") {
    if (start.empty()) throw config_error("traverse needs --start");
    auto r = scraper::index_traverse(*access.client, start, profile, at, budget);
    frame = std::move(r.frame);
    pages = r.pages_fetched;
    index_failures = std::move(r.failures);
  } else if (strategy == "guess") {
    scraper::GuessRange range{width, from, to};
    auto g = scraper::index_guess(*access.client, range, at, probe_limit);
    frame = std::move(g.frame);
    probes = g.probes;
  } else {
    throw config_error("unknown strategy '" + strategy + "'");
  }

  fs::create_directories(out_dir);
  fs::path frame_path = fs::path(out_dir) / "frame.jsonl";
  save_frame(frame, frame_path.string());
  std::cout << "frame: " << frame.entries.size() << " locators -> "
            << frame_path.string();
  if (strategy == "guess") std::cout << " (probes: " << probes << ")";
  if (strategy == "traverse") std::cout << " (pages: " << pages << ")";
  std::cout << "\n";
  for (const auto& f : index_failures) {
    std::cout << "index failure: " << f.locator << " " << f.kind << " (" << f.detail
              << ")\n";
  }
  if (index_only || frame.entries.empty()) return 0;

  std::vector<std::string> expected = split_commas(attrs);
  if (expected.empty()) {
    // Fall back to the attribute schema the site itself advertises.
    try {
      auto agg = access.client->get_aggregates();
      for (const auto& [name, _] : agg.attribute_means) expected.push_back(name);
    } catch (const std::exception&) {
      // No aggregates endpoint reachable: accept whatever parses.
    }
  }

  scraper::FetchSchedule schedule;
  if (interval > 0) {
    schedule = scraper::IntervalSchedule{interval, horizon};
  } else {
    schedule = scraper::LagSchedule{lag};
  }
  auto sample = scraper::fetch(*access.client, frame, profile, schedule, expected);
  fs::path sample_path = fs::path(out_dir) / "sample.jsonl";
  save_sample(sample, sample_path.string());
  std::cout << "sample: " << sample.records.size() << " records, "
            << sample.failures.size() << " failures -> " << sample_path.string()
            << "\n";
  return 0;
}

int cmd_monitor(const std::string& ledger_path, const std::string& site_url,
                const std::string& server_config_path, const std::string& frame_path,
                double poll_interval, double horizon, const std::string& out_path) {
  auto access = open_site(ledger_path, site_url, server_config_path);
  auto frame = scraper::load_frame(frame_path);
  auto observations =
      scraper::monitor(*access.client, frame, poll_interval, horizon);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw transport_error("cannot write " + out_path);
  out << ordered_json{{"kind", "monitor"},
                      {"poll_interval", poll_interval},
                      {"horizon", horizon}}
             .dump()
      << "\n";
  std::size_t events = 0;
  std::vector<stats::SurvivalObservation> survival;
  for (const auto& o : observations) {
    if (o.event) ++events;
    survival.push_back({o.duration, o.event});
    out << ordered_json{{"locator", o.locator},
                        {"discovered_at", o.discovered_at},
                        {"duration", o.duration},
                        {"event", o.event}}
               .dump()
        << "\n";
  }
  std::cout << "monitored " << observations.size() << " locators: " << events
            << " removals, " << observations.size() - events << " censored -> "
            << out_path << "\n";
  if (events > 0) {
    auto fit = stats::fit_exponential(survival);
    std::cout << "constant-hazard estimate: " << format_double(fit.lambda)
              << " per second (events " << fit.events << ", exposure "
              << format_double(fit.exposure) << ")\n";
  }
  return 0;
}

int cmd_audit(const std::string& sample_path, const std::string& ledger_path,
              const std::string& site_url, const std::string& log_adjust,
              const std::string& format) {
  if (ledger_path.empty() == site_url.empty()) {
    throw config_error("provide exactly one of --ledger and --site");
  }
  auto sample = scraper::load_sample(sample_path);
  auto log_vars = split_commas(log_adjust);
  auto is_log = [&](const std::string& v) {
    return std::find(log_vars.begin(), log_vars.end(), v) != log_vars.end();
  };

  ordered_json out;
  out["sample"] = sample_path;
  out["records"] = sample.records.size();
  out["failures"] = sample.failures.size();

  std::map<std::string, std::vector<double>> values;
  for (const auto& r : sample.records) {
    for (const auto& [k, v] : r.attributes) values[k].push_back(v);
  }

  if (!ledger_path.empty()) {
    auto ledger = load_ledger(ledger_path);
    std::set<std::string> population_ids;
    for (const auto& u : ledger.units) population_ids.insert(u.id);
    double cov = stats::coverage(sample.unit_ids(), population_ids);
    out["coverage_vs_population"] = cov;

    ordered_json diffs = ordered_json::array();
    for (const auto& [attr, vals] : values) {
      if (vals.size() < 2) continue;
      std::vector<double> truth;
      truth.reserve(ledger.units.size());
      for (const auto& u : ledger.units) {
        auto it = u.attributes.find(attr);
        if (it != u.attributes.end()) truth.push_back(it->second);
      }
      if (truth.size() < 2) continue;
      auto d = stats::mean_diff(vals, truth, attr, is_log(attr));
      diffs.push_back(ordered_json{{"variable", d.variable},
                                   {"estimate", d.estimate},
                                   {"ci_low", d.ci_low},
                                   {"ci_high", d.ci_high},
                                   {"log_adjusted", d.log_adjusted}});
    }
    out["diffs_vs_truth"] = diffs;
  } else {
    auto [host, port] = parse_site_url(site_url);
    HttpClient client(host, port);
    auto agg = client.get_aggregates();
    auto cv = stats::cross_validate(values, sample.records.size(),
                                    agg.population_size, agg.attribute_means);
    ordered_json diffs = ordered_json::array();
    for (const auto& d : cv.attribute_diffs) {
      diffs.push_back(ordered_json{{"variable", d.variable},
                                   {"estimate", d.estimate},
                                   {"ci_low", d.ci_low},
                                   {"ci_high", d.ci_high}});
    }
    out["cross_validation"] = ordered_json{
        {"size_ratio", cv.size_ratio}, {"diffs", diffs}, {"skipped", cv.skipped}};
  }

  if (format == "text") {
    std::cout << "sample " << sample_path << ": " << sample.records.size()
              << " records, " << sample.failures.size() << " failures\n";
    if (out.contains("coverage_vs_population")) {
      std::cout << "coverage vs population: "
                << format_sig6(100.0 * out["coverage_vs_population"].get<double>())
                << "%\n";
      for (const auto& d : out["diffs_vs_truth"]) {
        std::cout << "  " << d["variable"].get<std::string>() << ": "
                  << format_sig6(d["estimate"].get<double>()) << " ["
                  << format_sig6(d["ci_low"].get<double>()) << ", "
                  << format_sig6(d["ci_high"].get<double>()) << "]\n";
      }
    } else {
      const auto& cv = out["cross_validation"];
      std::cout << "sample/claimed size ratio: "
                << format_sig6(cv["size_ratio"].get<double>()) << "\n";
      for (const auto& d : cv["diffs"]) {
        std::cout << "  " << d["variable"].get<std::string>() << " vs claimed: "
                  << format_sig6(d["estimate"].get<double>()) << " ["
                  << format_sig6(d["ci_low"].get<double>()) << ", "
                  << format_sig6(d["ci_high"].get<double>()) << "]\n";
      }
    }
  } else {
    std::cout << out.dump(2) << "\n";
  }
  return 0;
}

int cmd_experiment(const std::string& kind, const std::string& config_path,
                   const std::string& out_dir, std::optional<std::uint64_t> seed,
                   const std::string& transport_override,
                   const std::string& format, bool quiet) {
  auto config = experiments::load_experiment_config(config_path);
  if (!kind.empty() && kind != config.kind) {
    throw config_error("config is a " + config.kind + " experiment, not " + kind);
  }
  if (seed) {
    config.seed = *seed;
    config.population.seed = *seed;
  }
  if (!transport_override.empty()) {
    if (transport_override == "in_process") {
      config.transport = experiments::Transport::in_process;
    } else if (transport_override == "http") {
      config.transport = experiments::Transport::http;
    } else {
      throw config_error("unknown transport '" + transport_override + "'");
    }
  }
  auto formats = parse_formats(format);
  auto report = experiments::run_experiment(config, out_dir);
  auto written = experiments::emit_report(report, out_dir, formats);
  if (!quiet) std::cout << experiments::render_text_summary(report);
  for (const auto& path : written) std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic-site scraping laboratory"};
  app.require_subcommand(1);
  // lets --seed / --format appear after the subcommand name too
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  std::string format = "json,csv,text";
  app.add_option("--seed", seed, "override the config seed")->group("Global");
  app.add_option("--format", format, "output formats: json,csv,text")
      ->group("Global");

  std::string config_path, out_dir = "out";
  auto* gen = app.add_subcommand("gen", "generate a population ledger");
  gen->add_option("--config", config_path, "population config JSON")->required();
  gen->add_option("--out", out_dir, "output directory");

  std::string ledger_path, host = "127.0.0.1", server_config_path;
  int port = 0;
  double clock0 = 0;
  auto* serve = app.add_subcommand("serve", "serve a ledger over HTTP");
  serve->add_option("--ledger", ledger_path, "ledger JSONL")->required();
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port (0 picks one)");
  serve->add_option("--server-config", server_config_path, "server behavior JSON");
  serve->add_option("--clock", clock0, "initial virtual clock");

  std::string s_ledger, s_site, s_server_config, strategy = "catalogue", keyword,
              start, profile_flag = "benchmark", attrs;
  std::size_t budget = 1000, probe_limit = scraper::kDefaultProbeLimit;
  int width = 9;
  std::uint64_t from = 0, to = 0;
  double at = 0, lag = 0, interval = 0, horizon = 0;
  bool index_only = false;
  auto* scrape = app.add_subcommand("scrape", "build a frame and fetch it");
  scrape->add_option("--ledger", s_ledger, "ledger JSONL (in-process site)");
  scrape->add_option("--site", s_site, "http://host:port of a running site");
  scrape->add_option("--server-config", s_server_config,
                     "server behavior JSON (with --ledger)");
  scrape->add_option("--strategy", strategy, "catalogue|marker|traverse|guess");
  scrape->add_option("--keyword", keyword, "marker keyword");
  scrape->add_option("--start", start, "traverse start locator, e.g. /unit/000000042");
  scrape->add_option("--budget", budget, "traverse page budget");
  scrape->add_option("--width", width, "guess: id digit width");
  scrape->add_option("--from", from, "guess: first candidate id");
  scrape->add_option("--to", to, "guess: one past the last candidate id");
  scrape->add_option("--probe-limit", probe_limit, "guess: max probes allowed");
  scrape->add_option("--at", at, "virtual time of frame building");
  scrape->add_option("--lag", lag, "fetch each entry this long after discovery");
  scrape->add_option("--interval", interval,
                     "fetch repeatedly at this spacing until --horizon");
  scrape->add_option("--horizon", horizon, "absolute end time for --interval");
  scrape->add_option("--profile", profile_flag,
                     "request profile: name or ua=..;lang=..;ip=..");
  scrape->add_option("--attrs", attrs, "expected attributes, comma separated");
  scrape->add_option("--out", out_dir, "output directory");
  scrape->add_flag("--index-only", index_only, "build the frame, skip fetching");

  std::string m_frame, m_out = "observations.jsonl";
  double m_interval = 3600, m_horizon = 0;
  auto* mon = app.add_subcommand("monitor", "poll a frame for liveness");
  mon->add_option("--ledger", s_ledger, "ledger JSONL (in-process site)");
  mon->add_option("--site", s_site, "http://host:port of a running site");
  mon->add_option("--server-config", s_server_config, "server behavior JSON");
  mon->add_option("--frame", m_frame, "frame JSONL to watch")->required();
  mon->add_option("--poll-interval", m_interval, "poll spacing in seconds");
  mon->add_option("--horizon", m_horizon, "absolute end time")->required();
  mon->add_option("--out", m_out, "observations JSONL path");

  std::string a_sample, a_truth, a_log_adjust;
  auto* audit = app.add_subcommand("audit", "compare a sample against truth");
  audit->add_option("--sample", a_sample, "sample JSONL")->required();
  audit->add_option("--truth", a_truth,
                    "ledger JSONL path, or http://host:port to cross-validate "
                    "against a site's own aggregates")
      ->required();
  audit->add_option("--log-adjust", a_log_adjust,
                    "attributes compared on the log1p scale, comma separated");

  std::string exp_kind, transport_override;
  bool quiet = false;
  auto* exp = app.add_subcommand("experiment", "run a packaged experiment");
  exp->add_option("kind", exp_kind, "volatility|personalization|indexing");
  exp->add_option("--config", config_path, "experiment config JSON")->required();
  exp->add_option("--out", out_dir, "report + artifact directory");
  exp->add_option("--transport", transport_override, "in_process|http");
  exp->add_flag("--quiet", quiet, "suppress the summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {  // --help and friends
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    // CLI11's native exit codes are >100; flag misuse is a config problem here
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_gen(config_path, out_dir, seed);
    if (serve->parsed()) {
      return cmd_serve(ledger_path, host, port, server_config_path, clock0);
    }
    if (scrape->parsed()) {
      return cmd_scrape(s_ledger, s_site, s_server_config, strategy, keyword,
                        start, budget, width, from, to, probe_limit, at, lag,
                        interval, horizon, profile_flag, attrs, out_dir,
                        index_only);
    }
    if (mon->parsed()) {
      return cmd_monitor(s_ledger, s_site, s_server_config, m_frame, m_interval,
                         m_horizon, m_out);
    }
    if (audit->parsed()) {
      std::string fmt = format == "json,csv,text" ? "json" : format;
      bool is_url = a_truth.rfind("http://", 0) == 0;
      return cmd_audit(a_sample, is_url ? "" : a_truth, is_url ? a_truth : "",
                       a_log_adjust, fmt);
    }
    if (exp->parsed()) {
      return cmd_experiment(exp_kind, config_path, out_dir, seed,
                            transport_override, format, quiet);
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const clock_error& e) {
    std::cerr << "clock error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
