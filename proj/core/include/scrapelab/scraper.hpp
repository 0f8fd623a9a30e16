// scraper.hpp
// The scraping engine: page parsing, four frame-building strategies, fetch
// schedules, and liveness monitoring. Everything here talks to the site
// through a SiteClient and works identically over HTTP or in-process.

#pragma once

#include <optional>
#include <variant>

#include "scrapelab/frame.hpp"
#include "scrapelab/site_client.hpp"

namespace scrapelab::scraper {

struct ParsedPage {
  std::string unit_id;
  Seconds created_at = 0.0;
  std::map<std::string, double> attributes;
  std::vector<std::string> markers;
  std::vector<std::string> links;  // ids, in page order
};

// Scans a unit page for its machine-readable hooks. Tolerates arbitrary
// decoration around them. Throws config_error when the page lacks a unit id
// (i.e. it is not a unit page).
ParsedPage parse_page(const std::string& html);

// Unit locators from a listing page (catalogue or search), in page order.
std::vector<std::string> extract_listing_locators(const std::string& html);

// Walks /catalogue pages until an empty page. Throws strategy_unavailable on
// a disabled catalogue (410).
SamplingFrame index_catalogue(SiteClient& site, Seconds at);

// Walks /search pages for one keyword under the given profile.
SamplingFrame index_marker(SiteClient& site, const std::string& keyword,
                           const RequestProfile& profile, Seconds at);

struct TraverseResult {
  SamplingFrame frame;
  std::vector<FetchFailure> failures;
  std::size_t pages_fetched = 0;
};

// Breadth-first over similar-listing links, up to `budget` page fetches.
// The start unit itself counts against the budget. An unresolvable start
// yields an empty frame plus a recorded failure.
TraverseResult index_traverse(SiteClient& site, const std::string& start_locator,
                              const RequestProfile& profile, Seconds at,
                              std::size_t budget);

struct GuessRange {
  int width = 9;              // zero-padded digit count
  std::uint64_t from = 0;     // inclusive
  std::uint64_t to = 0;       // exclusive
};

struct GuessResult {
  SamplingFrame frame;
  std::size_t probes = 0;
};

inline constexpr std::size_t kDefaultProbeLimit = 1u << 20;

// Probes every candidate id in [from, to). Refuses ranges larger than
// `probe_limit` up front (a 9-digit space is a billion requests).
GuessResult index_guess(SiteClient& site, const GuessRange& range, Seconds at,
                        std::size_t probe_limit = kDefaultProbeLimit);

// Fetch every frame entry once, `lag` seconds after its discovery.
struct LagSchedule {
  Seconds lag = 0.0;
};

// Fetch every frame entry repeatedly on a grid (discovery + k*interval,
// k = 0,1,...) until `horizon` absolute virtual time; the first successful
// capture per entry wins. Entries never captured record one gone failure.
struct IntervalSchedule {
  Seconds interval = 0.0;
  Seconds horizon = 0.0;
};

using FetchSchedule = std::variant<LagSchedule, IntervalSchedule>;

// One locator, fetched at the current virtual clock (`at` is recorded in the
// outcome, not enforced). Building block for schedules that interleave
// fetches with other timed work.
struct FetchOutcome {
  bool ok = false;
  SampleRecord record;   // set when ok
  FetchFailure failure;  // set when !ok
};

FetchOutcome fetch_entry(SiteClient& site, const FrameEntry& entry,
                         const RequestProfile& profile, Seconds at,
                         const std::vector<std::string>& expected_attributes);

// Fetches the frame under one profile. Advances the site clock as the
// schedule requires (never backwards). Records with any expected attribute
// missing become parse failures, not partial records. Transport errors are
// retried once by the client, then recorded as failures.
Sample fetch(SiteClient& site, const SamplingFrame& frame,
             const RequestProfile& profile, const FetchSchedule& schedule,
             const std::vector<std::string>& expected_attributes);

struct MonitorObservation {
  std::string locator;
  Seconds discovered_at = 0.0;
  Seconds duration = 0.0;  // first-seen-gone poll minus discovery, or censor time
  bool event = false;      // false: still alive at horizon (censored)
};

// Incremental poll scheduler. Entries may join while the session runs (as a
// discovery process finds them); polls happen at discovery + k*interval,
// k >= 1, capped by the absolute horizon. Drive it by repeatedly asking for
// next_poll_time(), advancing the site clock there, and calling
// run_due_polls(). Removal times are recorded as the first poll that saw the
// unit gone, i.e. the right endpoint of the censoring interval.
class MonitorSession {
 public:
  MonitorSession(Seconds poll_interval, Seconds horizon);

  void add(const std::string& locator, Seconds discovered_at);
  void add(const SamplingFrame& frame);

  std::optional<Seconds> next_poll_time() const;
  void run_due_polls(SiteClient& site, Seconds now);
  bool finished() const;

  // Censors still-alive entries at the horizon. Call after the loop.
  std::vector<MonitorObservation> observations() const;

  Seconds poll_interval() const { return interval_; }
  Seconds horizon() const { return horizon_; }

 private:
  struct Entry {
    std::string locator;
    Seconds discovered_at = 0.0;
    Seconds next_poll = 0.0;
    std::optional<Seconds> gone_at;
    bool done = false;
  };
  Seconds interval_;
  Seconds horizon_;
  std::vector<Entry> entries_;
};

// Convenience wrapper: polls a fixed frame to the horizon in one call.
std::vector<MonitorObservation> monitor(SiteClient& site, const SamplingFrame& frame,
                                        Seconds poll_interval, Seconds horizon);

}  // namespace scrapelab::scraper
