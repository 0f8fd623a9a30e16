// Experiment runners. Each stands up the simulated site, drives the scraper
// through the prescribed schedule on the virtual clock, and reduces the
// resulting frames and samples to a BiasReport. All scraping goes through the
// SiteClient interface, so a config flip moves any run onto real HTTP.

#include "scrapelab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <limits>
#include <queue>
#include <unordered_map>

namespace scrapelab::experiments {

namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SiteHarness {
  webserve::SiteModel model;
  std::unique_ptr<webserve::SiteHttpServer> server;
  std::unique_ptr<SiteClient> client;

  SiteHarness(GroundTruthLedger ledger, const ExperimentConfig& config)
      : model(std::move(ledger), config.server) {
    if (config.transport == Transport::http) {
      server = std::make_unique<webserve::SiteHttpServer>(model);
    }
    client = make_client();
  }

  // Fresh client over the same transport; safe to use from another thread.
  std::unique_ptr<SiteClient> make_client() const {
    if (server) {
      return std::make_unique<HttpClient>(server->host(), server->port());
    }
    return std::make_unique<InProcessClient>(model);
  }
};

// Artifact writer; inert when no directory was requested.
struct ArtifactSink {
  std::optional<fs::path> root;

  explicit ArtifactSink(const std::optional<std::string>& dir) {
    if (!dir) return;
    root = fs::path(*dir);
    std::error_code ec;
    fs::create_directories(*root / "frames", ec);
    fs::create_directories(*root / "samples", ec);
    if (ec) throw transport_error("cannot create artifact directory: " + *dir);
  }

  void frame(const std::string& label, const scraper::SamplingFrame& f) const {
    if (root) save_frame(f, (*root / "frames" / (label + ".frame.jsonl")).string());
  }
  void sample(const std::string& label, const scraper::Sample& s) const {
    if (root) save_sample(s, (*root / "samples" / (label + ".sample.jsonl")).string());
  }
};

std::vector<std::string> merge_unique(const std::vector<std::string>& a,
                                      const std::vector<std::string>& b) {
  std::vector<std::string> out = a;
  for (const auto& x : b) {
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  return out;
}

std::map<std::string, std::vector<double>> truth_values(
    const std::vector<const GroundTruthUnit*>& units,
    const std::vector<std::string>& variables) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& var : variables) {
    auto& vec = out[var];
    vec.reserve(units.size());
    for (const auto* u : units) {
      auto it = u->attributes.find(var);
      if (it != u->attributes.end()) vec.push_back(it->second);
    }
  }
  return out;
}

double plain_mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

std::map<std::string, std::vector<double>> sample_value_map(
    const scraper::Sample& sample) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& r : sample.records) {
    for (const auto& [attr, v] : r.attributes) out[attr].push_back(v);
  }
  return out;
}

BiasReport base_report(const ExperimentConfig& config) {
  BiasReport report;
  report.kind = config.kind;
  report.seed = config.seed;
  report.digest = config_digest(config);
  report.transport = config.transport == Transport::http ? "http" : "in_process";
  report.population_size = config.population.size;
  return report;
}

}  // namespace

BiasReport run_volatility(const ExperimentConfig& config,
                          const std::optional<std::string>& artifacts_dir) {
  const auto& vs = config.volatility;
  ArtifactSink sink(artifacts_dir);
  GroundTruthLedger ledger = sitegen::generate_population(config.population);
  auto truth = truth_values(
      [&] {
        std::vector<const GroundTruthUnit*> all;
        for (const auto& u : ledger.units) all.push_back(&u);
        return all;
      }(),
      vs.variables);
  SiteHarness harness(std::move(ledger), config);
  SiteClient& site = *harness.client;
  const auto benchmark = scraper::RequestProfile::benchmark();
  const auto expected = merge_unique(vs.variables, vs.hazard_covariates);

  // Catalogue polls that discover units as they appear. A zero creation
  // window means a single poll at t=0 sees the entire population at birth.
  std::vector<Seconds> discovery_times;
  if (config.population.creation_window <= 0) {
    discovery_times.push_back(0.0);
  } else {
    for (Seconds t = 0; t < config.population.creation_window;
         t += vs.discovery_interval) {
      discovery_times.push_back(t);
    }
    discovery_times.push_back(config.population.creation_window);
  }

  scraper::SamplingFrame frame;
  scraper::MonitorSession session(vs.poll_interval, vs.monitor_horizon);
  scraper::Sample pilot_sample;
  pilot_sample.profile = benchmark;
  std::unordered_map<std::string, std::size_t> pilot_record_by_locator;
  std::size_t pilot_members = 0;

  struct FetchEvent {
    Seconds at;
    std::size_t lag_idx;
    std::size_t entry_idx;
  };
  auto later = [](const FetchEvent& a, const FetchEvent& b) {
    if (a.at != b.at) return a.at > b.at;
    if (a.lag_idx != b.lag_idx) return a.lag_idx > b.lag_idx;
    return a.entry_idx > b.entry_idx;
  };
  std::priority_queue<FetchEvent, std::vector<FetchEvent>, decltype(later)>
      fetch_events(later);
  std::vector<scraper::Sample> lag_samples(vs.lag_grid.size());
  for (auto& s : lag_samples) s.profile = benchmark;

  Seconds clock = 0.0;
  auto advance = [&](Seconds t) {
    if (t > clock) {
      site.set_clock(t);
      clock = t;
    }
  };

  auto run_discovery = [&](Seconds t) {
    auto found = scraper::index_catalogue(site, t);
    clock = std::max(clock, t);
    for (auto& e : found.entries) {
      scraper::FrameEntry entry = e;
      entry.discovered_at = t;
      if (!frame.add(std::move(entry))) continue;
      std::size_t idx = frame.entries.size() - 1;
      for (std::size_t li = 0; li < vs.lag_grid.size(); ++li) {
        fetch_events.push({t + vs.lag_grid[li], li, idx});
      }
      // Freshly discovered units join the pilot until it is full: an
      // immediate page fetch records their covariates, then the monitor
      // tracks them to removal or the horizon.
      if (pilot_members < vs.pilot_size) {
        auto outcome =
            scraper::fetch_entry(site, frame.entries[idx], benchmark, t, expected);
        if (outcome.ok) {
          pilot_record_by_locator[frame.entries[idx].locator] =
              pilot_sample.records.size();
          pilot_sample.records.push_back(std::move(outcome.record));
          session.add(frame.entries[idx].locator, t);
        } else {
          pilot_sample.failures.push_back(std::move(outcome.failure));
        }
        ++pilot_members;
      }
    }
  };

  // One merged timeline: discovery polls, monitor polls, and per-lag fetches
  // execute in global time order so the virtual clock never runs backwards.
  std::size_t next_discovery = 0;
  while (true) {
    Seconds t_discover = next_discovery < discovery_times.size()
                             ? discovery_times[next_discovery]
                             : kInf;
    auto poll = session.next_poll_time();
    Seconds t_poll = poll ? *poll : kInf;
    Seconds t_fetch = fetch_events.empty() ? kInf : fetch_events.top().at;
    Seconds t = std::min({t_discover, t_poll, t_fetch});
    if (t == kInf) break;
    if (t == t_discover) {
      run_discovery(t);
      ++next_discovery;
      continue;
    }
    if (t_fetch <= t_poll) {
      FetchEvent ev = fetch_events.top();
      fetch_events.pop();
      advance(ev.at);
      auto outcome = scraper::fetch_entry(site, frame.entries[ev.entry_idx],
                                          benchmark, clock, expected);
      auto& sample = lag_samples[ev.lag_idx];
      if (outcome.ok) {
        sample.records.push_back(std::move(outcome.record));
      } else {
        sample.failures.push_back(std::move(outcome.failure));
      }
      continue;
    }
    advance(t_poll);
    session.run_due_polls(site, clock);
  }

  // Survival observations joined with the pilot's parsed covariates.
  std::vector<stats::SurvivalObservation> survival_obs;
  std::vector<stats::PhObservation> ph_obs;
  std::size_t pilot_events = 0;
  for (const auto& obs : session.observations()) {
    survival_obs.push_back({obs.duration, obs.event});
    if (obs.event) ++pilot_events;
    auto it = pilot_record_by_locator.find(obs.locator);
    if (it == pilot_record_by_locator.end()) continue;
    const auto& rec = pilot_sample.records[it->second];
    stats::PhObservation po;
    po.duration = obs.duration;
    po.event = obs.event;
    for (const auto& cov : vs.hazard_covariates) {
      po.covariates.push_back(rec.attributes.at(cov));
    }
    ph_obs.push_back(std::move(po));
  }

  VolatilityReport vol;
  vol.pilot_size = pilot_members;
  vol.pilot_events = pilot_events;
  vol.no_correction = pilot_events == 0;
  if (!survival_obs.empty()) {
    vol.pilot_km = stats::fit_kaplan_meier(survival_obs).steps;
  }
  if (!vol.no_correction) {
    vol.hazard_fit = stats::fit_exponential_ph(ph_obs, vs.hazard_covariates);
  }
  vol.weight_lag = vs.weight_report_lag;

  const double population = static_cast<double>(config.population.size);
  for (std::size_t li = 0; li < vs.lag_grid.size(); ++li) {
    const Seconds lag = vs.lag_grid[li];
    const auto& sample = lag_samples[li];
    VolatilityCondition cond;
    cond.lag = lag;
    cond.frame_size = frame.entries.size();
    cond.records = sample.records.size();
    for (const auto& f : sample.failures) {
      if (f.kind == "gone") ++cond.gone;
    }
    cond.gone_fraction =
        cond.frame_size == 0
            ? 0.0
            : static_cast<double>(cond.gone) / static_cast<double>(cond.frame_size);
    cond.coverage = static_cast<double>(cond.records) / population;

    stats::WeightVector wv;
    if (!vol.no_correction && !sample.records.empty()) {
      std::vector<std::pair<std::string, std::vector<double>>> units;
      units.reserve(sample.records.size());
      for (const auto& r : sample.records) {
        std::vector<double> cov;
        for (const auto& c : vs.hazard_covariates) {
          cov.push_back(r.attributes.at(c));
        }
        units.emplace_back(r.unit_id, std::move(cov));
      }
      wv = stats::hazard_weights(vol.hazard_fit, units, lag);
    }

    for (const auto& var : vs.variables) {
      auto values = sample.values(var);
      if (values.size() >= 2) {
        cond.diffs.push_back(stats::mean_diff(values, truth.at(var), var, false));
      }
      MeansRow row;
      row.variable = var;
      row.true_mean = plain_mean(truth.at(var));
      row.unweighted_mean = plain_mean(values);
      if (!vol.no_correction && !sample.records.empty()) {
        std::vector<double> vals, weights;
        for (const auto& r : sample.records) {
          auto a = r.attributes.find(var);
          auto w = wv.weights.find(r.unit_id);
          if (a == r.attributes.end() || w == wv.weights.end()) continue;
          vals.push_back(a->second);
          weights.push_back(w->second);
        }
        row.weighted_mean =
            vals.empty() ? row.unweighted_mean : stats::weighted_mean(vals, weights);
      } else {
        row.weighted_mean = row.unweighted_mean;
      }
      cond.means.push_back(std::move(row));
    }
    if (lag == vs.weight_report_lag) vol.weights = wv;
    vol.conditions.push_back(std::move(cond));

    sink.sample("lag_" + format_double(lag), sample);
  }
  sink.frame("population", frame);
  sink.sample("pilot", pilot_sample);

  BiasReport report = base_report(config);
  report.volatility = std::move(vol);
  return report;
}

BiasReport run_personalization(const ExperimentConfig& config,
                               const std::optional<std::string>& artifacts_dir) {
  const auto& ps = config.personalization;
  ArtifactSink sink(artifacts_dir);
  GroundTruthLedger ledger = sitegen::generate_population(config.population);
  SiteHarness harness(std::move(ledger), config);

  struct FrameParts {
    scraper::SamplingFrame frame;  // union across keywords
    std::vector<std::set<std::string>> keyword_ids;  // parallel to ps.keywords
  };
  auto build_frame = [&](SiteClient& client, const scraper::RequestProfile& profile) {
    FrameParts parts;
    for (const auto& keyword : ps.keywords) {
      auto part = scraper::index_marker(client, keyword, profile, 0.0);
      parts.keyword_ids.push_back(part.unit_ids());
      for (auto& e : part.entries) parts.frame.add(std::move(e));
    }
    return parts;
  };

  auto benchmark_parts = build_frame(*harness.client, ps.benchmark);
  auto& benchmark_frame = benchmark_parts.frame;
  if (benchmark_frame.entries.empty()) {
    throw config_error("personalization: benchmark frame is empty");
  }
  auto benchmark_sample =
      scraper::fetch(*harness.client, benchmark_frame, ps.benchmark,
                     scraper::LagSchedule{0.0}, ps.variables);
  auto benchmark_ids = benchmark_frame.unit_ids();
  sink.frame(ps.benchmark.name, benchmark_frame);
  sink.sample(ps.benchmark.name, benchmark_sample);

  PersonalizationReport rep;
  rep.benchmark_frame = benchmark_frame.entries.size();
  // The self-comparison guards the pipeline: identical inputs must yield
  // full overlap and exactly zero differences.
  rep.sanity_overlap = stats::coverage(benchmark_ids, benchmark_ids);
  for (const auto& var : ps.variables) {
    auto values = benchmark_sample.values(var);
    rep.sanity_diffs.push_back(
        stats::mean_diff(values, values, var, ps.log_adjust.count(var) > 0));
  }

  struct VariantOutcome {
    FrameParts parts;
    scraper::Sample sample;
  };
  auto scrape_variant = [&](const scraper::RequestProfile& profile) {
    auto client = harness.make_client();
    VariantOutcome out;
    out.parts = build_frame(*client, profile);
    if (!out.parts.frame.entries.empty()) {
      out.sample = scraper::fetch(*client, out.parts.frame, profile,
                                  scraper::LagSchedule{0.0}, ps.variables);
    } else {
      out.sample.profile = profile;
    }
    return out;
  };

  std::vector<VariantOutcome> outcomes(ps.variants.size());
  if (ps.parallel_variants) {
    std::vector<std::future<VariantOutcome>> futures;
    futures.reserve(ps.variants.size());
    for (const auto& v : ps.variants) {
      futures.push_back(
          std::async(std::launch::async, [&, profile = v] { return scrape_variant(profile); }));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) outcomes[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < ps.variants.size(); ++i) {
      outcomes[i] = scrape_variant(ps.variants[i]);
    }
  }

  for (std::size_t i = 0; i < ps.variants.size(); ++i) {
    const auto& profile = ps.variants[i];
    auto& out = outcomes[i];
    PersonalizationCondition cond;
    cond.profile = profile.name;
    cond.frame_size = out.parts.frame.entries.size();
    for (std::size_t k = 0; k < ps.keywords.size(); ++k) {
      const auto& variant_ids = out.parts.keyword_ids[k];
      const auto& bench_kw_ids = benchmark_parts.keyword_ids[k];
      KeywordOverlap ko;
      ko.keyword = ps.keywords[k];
      ko.frame_size = variant_ids.size();
      if (bench_kw_ids.empty()) {
        cond.warnings.push_back("keyword '" + ps.keywords[k] +
                                "' returned nothing for the benchmark");
      } else {
        ko.overlap = stats::coverage(variant_ids, bench_kw_ids);
      }
      cond.per_keyword.push_back(std::move(ko));
    }
    if (out.parts.frame.entries.empty()) {
      cond.empty_frame = true;
      cond.overlap = 0.0;
      cond.warnings.push_back("frame is empty; no pages fetched");
    } else {
      cond.overlap = stats::coverage(out.parts.frame.unit_ids(), benchmark_ids);
      for (const auto& var : ps.variables) {
        auto variant_values = out.sample.values(var);
        auto bench_values = benchmark_sample.values(var);
        if (variant_values.size() < 2 || bench_values.size() < 2) {
          cond.warnings.push_back("variable '" + var + "' has too few values");
          continue;
        }
        cond.diffs.push_back(stats::mean_diff(variant_values, bench_values, var,
                                              ps.log_adjust.count(var) > 0));
      }
      sink.frame(profile.name, out.parts.frame);
      sink.sample(profile.name, out.sample);
    }
    rep.conditions.push_back(std::move(cond));
  }

  BiasReport report = base_report(config);
  report.personalization = std::move(rep);
  return report;
}

BiasReport run_indexing(const ExperimentConfig& config,
                        const std::optional<std::string>& artifacts_dir) {
  const auto& is = config.indexing;
  ArtifactSink sink(artifacts_dir);
  GroundTruthLedger ledger = sitegen::generate_population(config.population);
  auto alive_units = ledger.alive_at(is.at);
  std::set<std::string> alive_ids;
  for (const auto* u : alive_units) alive_ids.insert(u->id);
  auto truth = truth_values(alive_units, is.variables);
  SiteHarness harness(std::move(ledger), config);
  SiteClient& site = *harness.client;
  const auto benchmark = scraper::RequestProfile::benchmark();

  // The audit consumes the site's own claim, over the same transport the
  // scrape uses, not the generator's ledger.
  auto claimed = site.get_aggregates();

  IndexingReport rep;
  rep.alive_units = alive_ids.size();

  for (const auto& h : is.heuristics) {
    IndexingCondition cond;
    cond.heuristic = h.name;
    scraper::SamplingFrame frame;
    if (h.strategy == "marker") {
      frame = scraper::index_marker(site, h.keyword, benchmark, is.at);
    } else if (h.strategy == "traverse") {
      auto r = scraper::index_traverse(site, h.start_locator, benchmark, is.at,
                                       h.budget);
      frame = std::move(r.frame);
      cond.pages = r.pages_fetched;
      for (const auto& f : r.failures) {
        cond.warnings.push_back(f.locator + ": " + f.kind + " (" + f.detail + ")");
      }
    } else {
      auto g = scraper::index_guess(site, h.guess, is.at, h.probe_limit);
      frame = std::move(g.frame);
      cond.probes = g.probes;
    }
    cond.frame_size = frame.entries.size();

    if (frame.entries.empty()) {
      cond.coverage = 0.0;
      cond.warnings.push_back("frame is empty; no pages fetched");
    } else {
      auto sample = scraper::fetch(site, frame, benchmark,
                                   scraper::LagSchedule{0.0}, is.variables);
      cond.records = sample.records.size();
      cond.coverage = stats::coverage(sample.unit_ids(), alive_ids);
      for (const auto& var : is.variables) {
        auto values = sample.values(var);
        if (values.size() >= 2) {
          cond.diffs.push_back(stats::mean_diff(values, truth.at(var), var, false));
        }
      }
      cond.cross_validation =
          stats::cross_validate(sample_value_map(sample), sample.records.size(),
                                claimed.population_size, claimed.attribute_means);
      sink.frame(h.name, frame);
      sink.sample(h.name, sample);
    }
    rep.conditions.push_back(std::move(cond));
  }

  BiasReport report = base_report(config);
  report.indexing = std::move(rep);
  return report;
}

BiasReport run_experiment(const ExperimentConfig& config,
                          const std::optional<std::string>& artifacts_dir) {
  if (config.kind == "volatility") return run_volatility(config, artifacts_dir);
  if (config.kind == "personalization") {
    return run_personalization(config, artifacts_dir);
  }
  if (config.kind == "indexing") return run_indexing(config, artifacts_dir);
  throw config_error("unknown experiment kind '" + config.kind + "'");
}

}  // namespace scrapelab::experiments
