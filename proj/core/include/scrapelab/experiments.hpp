// experiments.hpp
// The three headline experiments and their reporting. Each run function
// generates a population, stands up the site (in-process or over HTTP),
// scrapes it the way the experiment prescribes, and distills the results
// into a BiasReport whose serialized forms are byte-deterministic.

#pragma once

#include <optional>
#include <set>

#include "scrapelab/http_server.hpp"
#include "scrapelab/scraper.hpp"
#include "scrapelab/sitegen.hpp"
#include "scrapelab/stats.hpp"

namespace scrapelab::experiments {

enum class Transport { in_process, http };

struct VolatilitySettings {
  std::vector<Seconds> lag_grid;
  std::size_t pilot_size = 2000;
  Seconds poll_interval = 3600;
  Seconds monitor_horizon = 1209600;
  Seconds discovery_interval = 3600;  // catalogue re-poll spacing during creation
  Seconds weight_report_lag = 86400;  // lag whose full weight vector is reported
  std::vector<std::string> variables;
  std::vector<std::string> hazard_covariates;
};

struct PersonalizationSettings {
  std::vector<std::string> keywords;
  scraper::RequestProfile benchmark;
  std::vector<scraper::RequestProfile> variants;
  std::vector<std::string> variables;
  std::set<std::string> log_adjust;  // variables compared on the log1p scale
  bool parallel_variants = true;
};

struct HeuristicSpec {
  std::string name;
  std::string strategy;  // marker | traverse | guess
  std::string keyword;
  std::string start_locator;
  std::size_t budget = 0;
  scraper::GuessRange guess;
  std::size_t probe_limit = scraper::kDefaultProbeLimit;
};

struct IndexingSettings {
  std::vector<HeuristicSpec> heuristics;
  std::vector<std::string> variables;
  Seconds at = 0.0;
};

struct ExperimentConfig {
  std::string kind;  // volatility | personalization | indexing
  std::uint64_t seed = 0;
  Transport transport = Transport::in_process;
  PopulationConfig population;
  webserve::ServerConfig server;
  VolatilitySettings volatility;
  PersonalizationSettings personalization;
  IndexingSettings indexing;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::string& path);

// FNV-1a over the canonical serialized config; embedded in every report so
// a report can be traced to the exact inputs that produced it.
std::string config_digest(const ExperimentConfig& config);

// ---- report structures ----

struct MeansRow {
  std::string variable;
  double true_mean = 0.0;
  double unweighted_mean = 0.0;
  double weighted_mean = 0.0;
};

struct VolatilityCondition {
  Seconds lag = 0.0;
  std::size_t frame_size = 0;
  std::size_t records = 0;
  std::size_t gone = 0;
  double gone_fraction = 0.0;
  double coverage = 0.0;  // records / population
  std::vector<stats::MeanDiff> diffs;  // survivors vs full truth
  std::vector<MeansRow> means;
};

struct VolatilityReport {
  std::size_t pilot_size = 0;
  std::size_t pilot_events = 0;
  bool no_correction = false;  // pilot saw zero removals; weights disabled
  stats::PhFit hazard_fit;     // meaningful unless no_correction
  std::vector<stats::KaplanMeierStep> pilot_km;
  std::vector<VolatilityCondition> conditions;
  Seconds weight_lag = 0.0;
  stats::WeightVector weights;  // at weight_lag, over that condition's records
};

// Overlap for a single search term. Conditions keep these alongside the
// aggregated (union-of-terms) numbers so no per-term signal is averaged away.
struct KeywordOverlap {
  std::string keyword;
  std::size_t frame_size = 0;  // units this profile saw for the term
  double overlap = 0.0;        // vs the benchmark's units for the same term
};

struct PersonalizationCondition {
  std::string profile;
  std::size_t frame_size = 0;
  double overlap = 0.0;  // share of the benchmark frame this profile also saw
  std::vector<KeywordOverlap> per_keyword;
  std::vector<stats::MeanDiff> diffs;  // variant sample vs benchmark sample
  bool empty_frame = false;
  std::vector<std::string> warnings;
};

struct PersonalizationReport {
  std::size_t benchmark_frame = 0;
  double sanity_overlap = 0.0;  // benchmark against itself; must be exactly 1
  std::vector<stats::MeanDiff> sanity_diffs;
  std::vector<PersonalizationCondition> conditions;
};

struct IndexingCondition {
  std::string heuristic;
  std::size_t frame_size = 0;
  std::size_t records = 0;
  double coverage = 0.0;  // records / alive population
  std::vector<stats::MeanDiff> diffs;  // sample vs alive truth
  stats::CrossValidation cross_validation;
  std::size_t probes = 0;  // guess only
  std::size_t pages = 0;   // traverse only
  std::vector<std::string> warnings;
};

struct IndexingReport {
  std::size_t alive_units = 0;
  std::vector<IndexingCondition> conditions;
};

struct BiasReport {
  std::string kind;
  std::uint64_t seed = 0;
  std::string digest;
  std::string transport;
  std::size_t population_size = 0;
  std::optional<VolatilityReport> volatility;
  std::optional<PersonalizationReport> personalization;
  std::optional<IndexingReport> indexing;
};

nlohmann::ordered_json to_json(const BiasReport& report);

// ---- runners ----
// artifacts_dir, when set, receives frames/ and samples/ subdirectories with
// every frame and sample the run produced, so each reported coverage number
// can be recomputed from files.

BiasReport run_volatility(const ExperimentConfig& config,
                          const std::optional<std::string>& artifacts_dir = {});
BiasReport run_personalization(const ExperimentConfig& config,
                               const std::optional<std::string>& artifacts_dir = {});
BiasReport run_indexing(const ExperimentConfig& config,
                        const std::optional<std::string>& artifacts_dir = {});

// Dispatches on config.kind.
BiasReport run_experiment(const ExperimentConfig& config,
                          const std::optional<std::string>& artifacts_dir = {});

enum class ReportFormat { json, csv, text };

// Renders the report into named files (report.json, conditions.csv,
// diffs.csv, extras per kind, summary.txt). Content is assembled fully in
// memory and the directory is probed for writability before the first byte
// lands, so a failure cannot leave a half-written report behind.
std::vector<std::string> emit_report(const BiasReport& report,
                                     const std::string& out_dir,
                                     const std::set<ReportFormat>& formats);

std::string render_text_summary(const BiasReport& report);

// ---- closed-form survivorship expectations (ledger-derived) ----

// Expected share of units already removed `lag` seconds after their
// creation: 1 - mean_i S_i(lag), with never-removed units surviving surely.
double expected_gone_fraction(const GroundTruthLedger& ledger, Seconds lag);

// Binomial-style standard error of the realized gone fraction around that
// expectation: sqrt(sum p_i (1-p_i)) / N.
double expected_gone_fraction_se(const GroundTruthLedger& ledger, Seconds lag);

}  // namespace scrapelab::experiments
