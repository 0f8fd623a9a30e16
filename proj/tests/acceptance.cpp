// The release gate. Re-runs the packaged experiments with their shipped
// configurations, re-derives every number the project advertises, and prints
// one verdict line per claim. Exits nonzero if any claim fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scrapelab/experiments.hpp"
#include "scrapelab/html.hpp"
#include "scrapelab/site_model.hpp"

using namespace scrapelab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// ---- every tolerance the gate applies, pinned in one place ----
constexpr double kGoneAt10min = 0.021;   // removed share 10 minutes after discovery
constexpr double kGoneAt8h = 0.054;      // removed share 8 hours after discovery
constexpr double kGonePp = 0.005;        // +- 0.5 percentage points
constexpr double kVolatilityBudget = 60.0;  // wall-clock seconds
constexpr double kClosedFormSigmas = 3.0;   // Monte Carlo band around the expectation
constexpr Seconds kSignificantFrom = 28800.0;  // rating gap must be significant here on

constexpr Seconds kReweightLag = 86400.0;
constexpr int kReweightReps = 200;
constexpr double kReweightWinShare = 0.95;
constexpr double kHarnessRelTol = 1e-9;  // shortcut harness vs the full pipeline

constexpr double kBrowserOverlap = 0.703;
constexpr double kLanguageOverlap = 0.737;
constexpr double kGeoLow = 0.618, kGeoHigh = 0.692;
constexpr double kOverlapPp = 0.02;
constexpr double kPersonalizationBudget = 30.0;

constexpr double kTaggedCoverage = 0.540;
constexpr double kCrawlCoverage = 0.226;
constexpr double kCoveragePp = 0.02;

constexpr int kTraversalGraphs = 100;
constexpr std::size_t kTraversalMaxNodes = 200;

constexpr double kWelchRelTol = 1e-9;
constexpr int kWelchVectors = 50;
constexpr double kKmTol = 1e-12;
constexpr std::size_t kHazardN = 10000;
constexpr double kHazardLambda = 0.01;

constexpr std::size_t kRoundTripUnits = 1000;

int g_checked = 0;
int g_failed = 0;

void verdict(const std::string& claim, bool ok, const std::string& detail) {
  ++g_checked;
  if (!ok) ++g_failed;
  std::cout << (ok ? "PASS" : "FAIL") << "  " << claim;
  if (!detail.empty()) std::cout << "  [" << detail << "]";
  std::cout << "\n" << std::flush;
}

bool within(double value, double target, double tol) {
  return std::fabs(value - target) <= tol;
}

std::string pct(double x) { return format_sig6(100.0 * x) + "%"; }

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool rel_close(double a, double b, double tol) {
  double denom = std::max({1.0, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) <= tol * denom;
}

const experiments::VolatilityCondition& condition_at(
    const experiments::VolatilityReport& vol, Seconds lag) {
  for (const auto& c : vol.conditions) {
    if (c.lag == lag) return c;
  }
  throw std::runtime_error("no condition at lag " + format_double(lag));
}

const experiments::MeansRow& means_row(const experiments::VolatilityCondition& c,
                                       const std::string& var) {
  for (const auto& m : c.means) {
    if (m.variable == var) return m;
  }
  throw std::runtime_error("no means row for " + var);
}

// ---------------------------------------------------------------------------
// Reweighting harness. Replays the volatility pipeline's estimate directly
// from the ledger: with a zero creation window the whole population is
// discovered at t=0, so pilot membership, monitor durations, and the set of
// survivors at a lag are all closed forms. Rep 0 runs on the shipped seed and
// is cross-checked against the real pipeline before the other seeds count.
// ---------------------------------------------------------------------------

struct RepOutcome {
  double truth = 0.0;
  double unweighted = 0.0;
  double weighted = 0.0;
};

RepOutcome reweight_rep(const experiments::ExperimentConfig& base,
                        std::uint64_t seed, const std::string& variable) {
  auto pop = base.population;
  pop.seed = seed;
  const auto& vs = base.volatility;
  auto ledger = sitegen::generate_population(pop);

  std::vector<stats::PhObservation> obs;
  obs.reserve(vs.pilot_size);
  for (std::size_t i = 0; i < vs.pilot_size && i < ledger.units.size(); ++i) {
    const auto& u = ledger.units[i];
    stats::PhObservation o;
    if (!u.removed_at) {
      o.duration = vs.monitor_horizon;
      o.event = false;
    } else {
      double noticed = vs.poll_interval * std::ceil(*u.removed_at / vs.poll_interval);
      if (noticed <= vs.monitor_horizon) {
        o.duration = noticed;
        o.event = true;
      } else {
        o.duration = vs.monitor_horizon;
        o.event = false;
      }
    }
    for (const auto& cov : vs.hazard_covariates) {
      o.covariates.push_back(u.attributes.at(cov));
    }
    obs.push_back(std::move(o));
  }
  auto fit = stats::fit_exponential_ph(obs, vs.hazard_covariates);

  RepOutcome out;
  double truth_sum = 0.0;
  std::vector<double> values;
  std::vector<std::pair<std::string, std::vector<double>>> survivors;
  for (const auto& u : ledger.units) {
    truth_sum += u.attributes.at(variable);
    bool alive = !u.removed_at || *u.removed_at > kReweightLag;
    if (!alive) continue;
    values.push_back(u.attributes.at(variable));
    std::vector<double> cov;
    for (const auto& c : vs.hazard_covariates) cov.push_back(u.attributes.at(c));
    survivors.emplace_back(u.id, std::move(cov));
  }
  out.truth = truth_sum / static_cast<double>(ledger.units.size());

  double plain = 0.0;
  for (double v : values) plain += v;
  out.unweighted = plain / static_cast<double>(values.size());

  auto wv = stats::hazard_weights(fit, survivors, kReweightLag);
  std::vector<double> weights;
  weights.reserve(values.size());
  for (const auto& [id, _] : survivors) weights.push_back(wv.weights.at(id));
  out.weighted = stats::weighted_mean(values, weights);
  return out;
}

// ---------------------------------------------------------------------------
// Long-double Welch reference, independent of the library's arithmetic.
// ---------------------------------------------------------------------------

struct WelchReference {
  long double estimate, se, df;
};

WelchReference welch_reference(const std::vector<double>& a,
                               const std::vector<double>& b) {
  auto moments = [](const std::vector<double>& xs) {
    long double mean = 0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    long double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (xs.size() - 1);
    return std::pair<long double, long double>(mean, var);
  };
  auto [ma, va] = moments(a);
  auto [mb, vb] = moments(b);
  long double na = a.size(), nb = b.size();
  long double ra = va / na, rb = vb / nb;
  WelchReference r;
  r.estimate = ma - mb;
  r.se = std::sqrt(ra + rb);
  r.df = (ra + rb) * (ra + rb) / (ra * ra / (na - 1) + rb * rb / (nb - 1));
  return r;
}

bool close_ld(double got, long double want, double rel) {
  long double denom = std::max<long double>(std::abs(want), 1e-30L);
  return std::abs(got - want) / denom < rel;
}

fs::path scratch_dir() {
  static fs::path root = [] {
    auto p = fs::temp_directory_path() /
             ("scrapelab_gate_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    files[fs::relative(entry.path(), root).string()] = buf.str();
  }
  return files;
}

// ---------------------------------------------------------------------------
// Gates
// ---------------------------------------------------------------------------

void gate_volatility_and_reweighting(const fs::path& repo) {
  auto config = experiments::load_experiment_config(
      (repo / "configs" / "volatility.json").string());

  auto t0 = Clock::now();
  auto report = experiments::run_volatility(config);
  double elapsed = seconds_since(t0);
  const auto& vol = *report.volatility;

  const auto& c10min = condition_at(vol, 600.0);
  const auto& c8h = condition_at(vol, 28800.0);
  verdict("volatility: share removed by 10 minutes is 2.1% (+-0.5pp)",
          within(c10min.gone_fraction, kGoneAt10min, kGonePp),
          "got " + pct(c10min.gone_fraction));
  verdict("volatility: share removed by 8 hours is 5.4% (+-0.5pp)",
          within(c8h.gone_fraction, kGoneAt8h, kGonePp),
          "got " + pct(c8h.gone_fraction));

  bool monotone = true;
  for (std::size_t i = 1; i < vol.conditions.size(); ++i) {
    if (vol.conditions[i].gone_fraction < vol.conditions[i - 1].gone_fraction) {
      monotone = false;
    }
  }
  verdict("volatility: removed share never falls as the lag grows", monotone,
          std::to_string(vol.conditions.size()) + " lags");
  verdict("volatility: run finishes within 60 s", elapsed <= kVolatilityBudget,
          format_sig6(elapsed) + " s");

  // closed-form expectation from the regenerated ledger
  auto ledger = sitegen::generate_population(config.population);
  bool tracked = true;
  double worst_z = 0.0;
  for (const auto& cond : vol.conditions) {
    double expected = experiments::expected_gone_fraction(ledger, cond.lag);
    double se = experiments::expected_gone_fraction_se(ledger, cond.lag);
    double z = se > 0 ? std::fabs(cond.gone_fraction - expected) / se : 0.0;
    worst_z = std::max(worst_z, z);
    if (z > kClosedFormSigmas) tracked = false;
  }
  verdict("volatility: removals track the closed-form expectation (3 SE)", tracked,
          "max |z| = " + format_sig6(worst_z));

  bool biased_up = true;
  bool significant = true;
  for (const auto& cond : vol.conditions) {
    const auto& row = means_row(cond, "rating");
    if (!(row.unweighted_mean > row.true_mean)) biased_up = false;
    if (cond.lag >= kSignificantFrom) {
      bool found = false;
      for (const auto& d : cond.diffs) {
        if (d.variable == "rating") {
          found = true;
          if (!(d.ci_low > 0.0)) significant = false;
        }
      }
      if (!found) significant = false;
    }
  }
  verdict("volatility: scraped mean rating sits above truth at every lag",
          biased_up, "");
  verdict("volatility: the rating gap is significant from 8 hours on", significant,
          "95% CI excludes zero");

  // rep 0 of the reweighting study runs on the shipped seed, so it must
  // reproduce the pipeline's lag-86400 estimates before the other 199 count
  const auto& anchor = means_row(condition_at(vol, kReweightLag), "rating");
  auto rep0 = reweight_rep(config, config.population.seed, "rating");
  bool anchored = rel_close(rep0.weighted, anchor.weighted_mean, kHarnessRelTol) &&
                  rel_close(rep0.unweighted, anchor.unweighted_mean, kHarnessRelTol) &&
                  rel_close(rep0.truth, anchor.true_mean, kHarnessRelTol);
  verdict("reweighting: ledger replay reproduces the pipeline estimate", anchored,
          "weighted " + format_sig6(rep0.weighted) + " vs " +
              format_sig6(anchor.weighted_mean));

  int wins = 0;
  for (int rep = 0; rep < kReweightReps; ++rep) {
    auto r = reweight_rep(config, config.population.seed + rep, "rating");
    if (std::fabs(r.weighted - r.truth) < std::fabs(r.unweighted - r.truth)) {
      ++wins;
    }
  }
  verdict("reweighting: weighted mean beats unweighted in >= 95% of 200 reruns",
          wins >= static_cast<int>(kReweightWinShare * kReweightReps),
          std::to_string(wins) + "/200 closer to truth");
}

void gate_personalization(const fs::path& repo) {
  auto config = experiments::load_experiment_config(
      (repo / "configs" / "personalization.json").string());
  auto t0 = Clock::now();
  auto report = experiments::run_personalization(config);
  double elapsed = seconds_since(t0);
  const auto& per = *report.personalization;

  auto overlap_of = [&](const std::string& profile) {
    for (const auto& c : per.conditions) {
      if (c.profile == profile) return c.overlap;
    }
    throw std::runtime_error("no condition for profile " + profile);
  };

  double safari = overlap_of("safari");
  verdict("personalization: browser-variant overlap is 70.3% (+-2pp)",
          within(safari, kBrowserOverlap, kOverlapPp), "got " + pct(safari));
  double spanish = overlap_of("spanish");
  verdict("personalization: language-variant overlap is 73.7% (+-2pp)",
          within(spanish, kLanguageOverlap, kOverlapPp), "got " + pct(spanish));

  bool geo_ok = true;
  std::string geo_detail;
  for (const std::string name : {"nyc", "houston", "miami"}) {
    double v = overlap_of(name);
    if (v < kGeoLow || v > kGeoHigh) geo_ok = false;
    if (!geo_detail.empty()) geo_detail += ", ";
    geo_detail += name + " " + pct(v);
  }
  verdict("personalization: geo-variant overlaps stay inside [61.8%, 69.2%]",
          geo_ok, geo_detail);

  bool sane = per.sanity_overlap == 1.0;
  for (const auto& d : per.sanity_diffs) {
    if (d.estimate != 0.0) sane = false;
  }
  verdict("personalization: benchmark-vs-benchmark overlap is exactly 1, no diffs",
          sane, "overlap " + format_double(per.sanity_overlap));
  verdict("personalization: run finishes within 30 s",
          elapsed <= kPersonalizationBudget, format_sig6(elapsed) + " s");
}

void gate_indexing(const fs::path& repo) {
  auto config = experiments::load_experiment_config(
      (repo / "configs" / "indexing.json").string());
  auto report = experiments::run_indexing(config);
  const auto& idx = *report.indexing;

  auto coverage_of = [&](const std::string& heuristic) {
    for (const auto& c : idx.conditions) {
      if (c.heuristic == heuristic) return c.coverage;
    }
    throw std::runtime_error("no condition for heuristic " + heuristic);
  };

  double tagged = coverage_of("tagged");
  verdict("indexing: tag-marker coverage is 54.0% (+-2pp)",
          within(tagged, kTaggedCoverage, kCoveragePp), "got " + pct(tagged));
  double crawl = coverage_of("crawl");
  verdict("indexing: link-traversal coverage is 22.6% (+-2pp)",
          within(crawl, kCrawlCoverage, kCoveragePp), "got " + pct(crawl));
  double guess = coverage_of("guess_all");
  verdict("indexing: exhaustive id guessing reaches every unit exactly",
          guess == 1.0, "coverage " + format_double(guess));
}

void gate_traversal_oracle() {
  int matched = 0;
  for (int g = 0; g < kTraversalGraphs; ++g) {
    PopulationConfig pc;
    pc.size = 20 + (static_cast<std::size_t>(g) * 7) % (kTraversalMaxNodes - 19);
    pc.seed = 880000 + static_cast<std::uint64_t>(g);
    pc.id_width = 5;
    pc.id_start = 100;
    pc.creation_window = 0.0;
    AttributeSpec ax;
    ax.name = "x";
    ax.kind = AttributeSpec::Kind::normal;
    ax.a = 0.0;
    ax.b = 1.0;
    AttributeSpec ay;
    ay.name = "y";
    ay.kind = AttributeSpec::Kind::uniform;
    ay.a = -3.0;
    ay.b = 3.0;
    pc.attributes = {ax, ay};
    pc.links.neighbors = 1 + static_cast<std::size_t>(g) % 6;
    pc.links.attributes =
        g % 2 ? std::vector<std::string>{"x", "y"} : std::vector<std::string>{"x"};
    bool mortal = g % 2 == 1;  // half the graphs have pages missing mid-walk
    pc.lifetime.baseline_hazard = mortal ? 2e-3 : 1e-9;
    if (mortal) pc.lifetime.coefficients = {{"x", 0.4}};
    pc.never_removed_fraction = 0.3;
    const Seconds at = mortal ? 400.0 : 0.0;

    auto ledger = sitegen::generate_population(pc);
    auto alive = [&](const GroundTruthUnit& u) {
      return at >= u.created_at && (!u.removed_at || at < *u.removed_at);
    };

    std::string start_id;
    for (const auto& u : ledger.units) {
      if (alive(u)) {
        start_id = u.id;
        break;
      }
    }
    if (start_id.empty()) continue;  // counts as a mismatch via `matched`

    webserve::SiteModel model(ledger, {});
    InProcessClient client(model);
    auto result = scraper::index_traverse(client, scraper::locator_for(start_id),
                                          scraper::RequestProfile::benchmark(), at,
                                          pc.size + 10);

    // reference 1: discovery order, where only living pages expand
    std::vector<std::string> order{start_id};
    std::set<std::string> seen{start_id};
    std::deque<std::string> queue{start_id};
    while (!queue.empty()) {
      auto id = queue.front();
      queue.pop_front();
      const auto* u = ledger.find(id);
      if (!alive(*u)) continue;
      for (const auto& next : u->out_links) {
        if (seen.insert(next).second) {
          order.push_back(next);
          queue.push_back(next);
        }
      }
    }
    std::vector<std::string> got;
    for (const auto& e : result.frame.entries) {
      got.push_back(scraper::unit_id_from_locator(e.locator));
    }

    // reference 2: the set reachable through living pages alone must be the
    // frame minus the entries the walk reported gone
    std::set<std::string> reachable{start_id};
    std::deque<std::string> q2{start_id};
    while (!q2.empty()) {
      auto id = q2.front();
      q2.pop_front();
      for (const auto& next : ledger.find(id)->out_links) {
        if (alive(*ledger.find(next)) && reachable.insert(next).second) {
          q2.push_back(next);
        }
      }
    }
    std::set<std::string> frame_alive(got.begin(), got.end());
    for (const auto& f : result.failures) {
      if (f.kind == "gone") frame_alive.erase(scraper::unit_id_from_locator(f.locator));
    }

    if (got == order && frame_alive == reachable) ++matched;
  }
  verdict("traversal: walk matches a brute-force reference on 100 seeded graphs",
          matched == kTraversalGraphs,
          std::to_string(matched) + "/" + std::to_string(kTraversalGraphs));
}

void gate_statistics() {
  std::mt19937_64 rng(90210);
  std::normal_distribution<double> noise(0.0, 1.0);
  bool welch_ok = true;
  for (int rep = 0; rep < kWelchVectors; ++rep) {
    std::size_t na = 2 + rng() % 38, nb = 2 + rng() % 38;
    double mu_a = noise(rng) * 3.0 + 1.0, sd_a = 0.2 + std::fabs(noise(rng));
    double mu_b = mu_a - (0.5 + std::fabs(noise(rng))), sd_b = 0.2 + std::fabs(noise(rng));
    std::vector<double> a(na), b(nb);
    for (auto& x : a) x = mu_a + sd_a * noise(rng);
    for (auto& x : b) x = mu_b + sd_b * noise(rng);
    auto got = stats::mean_diff(a, b, "v", false);
    auto want = welch_reference(a, b);
    if (!close_ld(got.estimate, want.estimate, kWelchRelTol) ||
        !close_ld(got.std_error, want.se, kWelchRelTol) ||
        !close_ld(got.df, want.df, kWelchRelTol)) {
      welch_ok = false;
    }
  }
  verdict("stats: Welch estimate/SE/df match a long-double reference to 1e-9",
          welch_ok, std::to_string(kWelchVectors) + " vector pairs");

  // product-limit fit vs the plain empirical survivor function, with ties
  std::vector<stats::SurvivalObservation> uncensored;
  for (int i = 0; i < 400; ++i) {
    double d = i % 3 == 0 ? 0.5 * (1 + rng() % 8)
                          : 0.1 + 10.0 * (rng() % 1000) / 1000.0;
    uncensored.push_back({d, true});
  }
  auto km = stats::fit_kaplan_meier(uncensored);
  double worst_gap = 0.0;
  for (const auto& step : km.steps) {
    std::size_t beyond = 0;
    for (const auto& o : uncensored) {
      if (o.duration > step.time) ++beyond;
    }
    double ecdf_surv = static_cast<double>(beyond) / uncensored.size();
    worst_gap = std::max(worst_gap, std::fabs(step.survival - ecdf_surv));
  }
  verdict("stats: product-limit fit equals the empirical survivor function",
          worst_gap <= kKmTol, "max gap " + format_double(worst_gap));

  std::vector<stats::SurvivalObservation> mle_data = {
      {5.0, true}, {3.5, false}, {10.0, true}, {2.0, true}, {7.25, false}};
  auto mle = stats::fit_exponential(mle_data);
  bool exact = mle.events == 3 && mle.exposure == 27.75 &&
               mle.lambda == 3.0 / 27.75;
  verdict("stats: exponential MLE is exactly events over exposure", exact,
          "lambda " + format_double(mle.lambda));

  std::exponential_distribution<double> life(kHazardLambda);
  std::vector<stats::SurvivalObservation> sim(kHazardN);
  for (auto& o : sim) o = {life(rng), true};
  auto fit = stats::fit_exponential(sim);
  double se = fit.lambda / std::sqrt(static_cast<double>(fit.events));
  verdict("stats: hazard recovered within 3 SE at n = 10,000",
          std::fabs(fit.lambda - kHazardLambda) <= 3.0 * se,
          "estimate " + format_sig6(fit.lambda));
}

void gate_round_trip() {
  PopulationConfig pc;
  pc.size = kRoundTripUnits;
  pc.seed = 424242;
  pc.id_width = 9;
  pc.id_start = 500;
  pc.creation_window = 86400.0;
  auto spec = [](std::string name, AttributeSpec::Kind kind, double a, double b) {
    AttributeSpec s;
    s.name = std::move(name);
    s.kind = kind;
    s.a = a;
    s.b = b;
    return s;
  };
  pc.attributes.push_back(spec("rating", AttributeSpec::Kind::normal, 0.2, 5.5));
  pc.attributes.push_back(spec("views", AttributeSpec::Kind::lognormal, 3.0, 1.5));
  pc.attributes.push_back(spec("frac", AttributeSpec::Kind::uniform, 0.0, 1.0));
  auto tier = spec("tier", AttributeSpec::Kind::rank_bucket, 0, 0);
  tier.source = "rating";
  tier.weights = {0.3, 0.7};
  pc.attributes.push_back(tier);
  auto boost_attr = spec("boost", AttributeSpec::Kind::bucket_value, 0, 0);
  boost_attr.source = "tier";
  boost_attr.values = {2.5, -1.25};
  boost_attr.scales = {0.75, 0.5};
  boost_attr.exp_transform = true;
  pc.attributes.push_back(boost_attr);
  pc.lifetime.baseline_hazard = 1e-7;
  pc.never_removed_fraction = 0.5;
  pc.markers = {{"hot", "rating", ">=", 4.0}, {"deep", "views", ">", 60.0}};
  pc.links.neighbors = 4;
  pc.links.attributes = {"rating", "views"};

  auto ledger = sitegen::generate_population(pc);
  std::size_t exact = 0;
  for (const auto& u : ledger.units) {
    auto parsed = scraper::parse_page(webserve::render_unit_page(u));
    bool ok = parsed.unit_id == u.id && parsed.created_at == u.created_at &&
              parsed.attributes == u.attributes &&
              std::set<std::string>(parsed.markers.begin(), parsed.markers.end()) ==
                  u.markers &&
              parsed.markers.size() == u.markers.size() &&
              parsed.links == u.out_links;
    if (ok) ++exact;
  }
  verdict("round-trip: parse(render(unit)) is exact across a 1,000-unit ledger",
          exact == ledger.units.size(),
          std::to_string(exact) + "/" + std::to_string(ledger.units.size()));
}

void gate_transport_identity(const fs::path& repo) {
  const std::set<experiments::ReportFormat> all_formats = {
      experiments::ReportFormat::json, experiments::ReportFormat::csv,
      experiments::ReportFormat::text};
  bool identical = true;
  std::size_t files_compared = 0;
  for (const std::string name : {"volatility", "personalization", "indexing"}) {
    auto config = experiments::load_experiment_config(
        (repo / "configs" / "smoke" / (name + ".json")).string());

    config.transport = experiments::Transport::in_process;
    fs::path dir_a = scratch_dir() / (name + "_in_process");
    experiments::emit_report(experiments::run_experiment(config), dir_a.string(),
                             all_formats);

    config.transport = experiments::Transport::http;
    fs::path dir_b = scratch_dir() / (name + "_http");
    experiments::emit_report(experiments::run_experiment(config), dir_b.string(),
                             all_formats);

    auto tree_a = read_tree(dir_a);
    auto tree_b = read_tree(dir_b);
    if (tree_a != tree_b || tree_a.empty()) identical = false;
    files_compared += tree_a.size();
  }
  verdict("determinism: in-process and HTTP transports emit identical bytes",
          identical, std::to_string(files_compared) + " files across 3 configs");
}

}  // namespace

int main() {
  fs::path repo(SCRAPELAB_REPO_DIR);
  try {
    gate_volatility_and_reweighting(repo);
    gate_personalization(repo);
    gate_indexing(repo);
    gate_traversal_oracle();
    gate_statistics();
    gate_round_trip();
    gate_transport_identity(repo);
  } catch (const std::exception& e) {
    std::cout << "FAIL  gate aborted: " << e.what() << "\n";
    ++g_failed;
  }
  std::cout << "\n" << g_checked << " claims checked, " << g_failed << " failed\n";
  fs::remove_all(scratch_dir());
  return g_failed == 0 ? 0 : 1;
}
