// Scraping engine internals. Parsing is plain substring scanning over the
// stable data-* hooks; everything else a page contains is ignored, so
// decorative markup changes don't break the scraper.

#include "scrapelab/scraper.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <unordered_map>

namespace scrapelab::scraper {

namespace {

// Value of the first `key="..."` occurrence at or after `from`; npos result
// position means not found.
std::pair<std::string, std::size_t> scan_attr(const std::string& html,
                                              const std::string& key,
                                              std::size_t from) {
  const std::string needle = key + "=\"";
  auto pos = html.find(needle, from);
  if (pos == std::string::npos) return {"", std::string::npos};
  auto start = pos + needle.size();
  auto end = html.find('"', start);
  if (end == std::string::npos) return {"", std::string::npos};
  return {html.substr(start, end - start), end};
}

}  // namespace

ParsedPage parse_page(const std::string& html) {
  ParsedPage page;
  auto [id, id_end] = scan_attr(html, "data-unit-id", 0);
  if (id.empty()) throw config_error("page has no unit id");
  page.unit_id = id;
  auto [created, created_end] = scan_attr(html, "data-created-at", 0);
  if (created_end == std::string::npos) {
    throw config_error("unit page lacks data-created-at");
  }
  page.created_at = parse_double(created);

  std::size_t pos = 0;
  while (true) {
    auto [name, name_end] = scan_attr(html, "data-attr", pos);
    if (name_end == std::string::npos) break;
    auto [value, value_end] = scan_attr(html, "data-value", name_end);
    if (value_end == std::string::npos) {
      throw config_error("attribute '" + name + "' has no value");
    }
    page.attributes[name] = parse_double(value);
    pos = value_end;
  }

  pos = 0;
  const std::string marker_open = "class=\"marker\">";
  while ((pos = html.find(marker_open, pos)) != std::string::npos) {
    auto start = pos + marker_open.size();
    auto end = html.find('<', start);
    if (end == std::string::npos) break;
    page.markers.push_back(html.substr(start, end - start));
    pos = end;
  }

  pos = 0;
  const std::string similar = "class=\"similar-link\"";
  while ((pos = html.find(similar, pos)) != std::string::npos) {
    auto [href, href_end] = scan_attr(html, "href", pos);
    if (href_end == std::string::npos) break;
    std::string linked = unit_id_from_locator(href);
    if (!linked.empty()) page.links.push_back(linked);
    pos = href_end;
  }
  return page;
}

std::vector<std::string> extract_listing_locators(const std::string& html) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  const std::string link = "class=\"unit-link\"";
  while ((pos = html.find(link, pos)) != std::string::npos) {
    auto [href, href_end] = scan_attr(html, "href", pos);
    if (href_end == std::string::npos) break;
    out.push_back(href);
    pos = href_end;
  }
  return out;
}

SamplingFrame index_catalogue(SiteClient& site, Seconds at) {
  site.set_clock(at);
  SamplingFrame frame;
  for (std::size_t page = 1;; ++page) {
    auto response = site.get("/catalogue?page=" + std::to_string(page));
    if (response.status == 410) {
      throw strategy_unavailable("catalogue is disabled on this site");
    }
    if (response.status != 200) {
      throw transport_error("catalogue page " + std::to_string(page) +
                            ": status " + std::to_string(response.status));
    }
    auto locators = extract_listing_locators(response.body);
    if (locators.empty()) break;
    for (auto& loc : locators) {
      FrameEntry e;
      e.locator = std::move(loc);
      e.discovered_at = at;
      e.via.strategy = "catalogue";
      frame.add(std::move(e));
    }
  }
  return frame;
}

SamplingFrame index_marker(SiteClient& site, const std::string& keyword,
                           const RequestProfile& profile, Seconds at) {
  if (keyword.empty()) throw config_error("index_marker: empty keyword");
  site.set_clock(at);
  SamplingFrame frame;
  auto headers = profile.headers();
  for (std::size_t page = 1;; ++page) {
    auto response = site.get(
        "/search?q=" + keyword + "&page=" + std::to_string(page), headers);
    if (response.status != 200) {
      throw transport_error("search '" + keyword + "' page " +
                            std::to_string(page) + ": status " +
                            std::to_string(response.status));
    }
    auto locators = extract_listing_locators(response.body);
    if (locators.empty()) break;
    for (auto& loc : locators) {
      FrameEntry e;
      e.locator = std::move(loc);
      e.discovered_at = at;
      e.via.strategy = "marker";
      e.via.keyword = keyword;
      frame.add(std::move(e));
    }
  }
  return frame;
}

TraverseResult index_traverse(SiteClient& site, const std::string& start_locator,
                              const RequestProfile& profile, Seconds at,
                              std::size_t budget) {
  if (budget == 0) throw config_error("index_traverse: budget must be >= 1");
  site.set_clock(at);
  TraverseResult result;
  auto headers = profile.headers();
  std::unordered_map<std::string, std::size_t> entry_index;
  std::deque<std::size_t> frontier;  // indices into frame.entries, FIFO

  auto discover = [&](const std::string& locator, int depth) {
    auto it = entry_index.find(locator);
    if (it != entry_index.end()) {
      result.frame.entries[it->second].via.times_seen += 1;
      return;
    }
    FrameEntry e;
    e.locator = locator;
    e.discovered_at = at;
    e.via.strategy = "traverse";
    e.via.depth = depth;
    e.via.times_seen = 1;
    entry_index[locator] = result.frame.entries.size();
    frontier.push_back(result.frame.entries.size());
    result.frame.add(std::move(e));
  };

  // The start is provisional: it only enters the frame if its page resolves.
  auto response = site.get(start_locator, headers);
  result.pages_fetched = 1;
  if (response.status != 200) {
    result.failures.push_back({start_locator, at,
                               response.status >= 500 ? "transport" : "gone",
                               "start returned status " + std::to_string(response.status)});
    return result;
  }
  ParsedPage start_page;
  try {
    start_page = parse_page(response.body);
  } catch (const config_error& e) {
    result.failures.push_back({start_locator, at, "parse", e.what()});
    return result;
  }
  discover(start_locator, 0);
  for (const auto& linked : start_page.links) discover(locator_for(linked), 1);
  frontier.pop_front();  // the start itself is already expanded

  while (!frontier.empty() && result.pages_fetched < budget) {
    std::size_t idx = frontier.front();
    frontier.pop_front();
    const FrameEntry& entry = result.frame.entries[idx];
    auto r = site.get(entry.locator, headers);
    result.pages_fetched += 1;
    if (r.status != 200) {
      result.failures.push_back({entry.locator, at,
                                 r.status >= 500 ? "transport" : "gone",
                                 "status " + std::to_string(r.status)});
      continue;
    }
    ParsedPage page;
    try {
      page = parse_page(r.body);
    } catch (const config_error& e) {
      result.failures.push_back({entry.locator, at, "parse", e.what()});
      continue;
    }
    int next_depth = entry.via.depth + 1;
    for (const auto& linked : page.links) discover(locator_for(linked), next_depth);
  }
  return result;
}

GuessResult index_guess(SiteClient& site, const GuessRange& range, Seconds at,
                        std::size_t probe_limit) {
  if (range.to <= range.from) {
    throw config_error("index_guess: empty candidate range");
  }
  if (range.width < 1 || range.width > 18) {
    throw config_error("index_guess: id width must be in [1,18]");
  }
  double max_value = std::pow(10.0, range.width);
  if (static_cast<double>(range.to) > max_value) {
    throw config_error("index_guess: range exceeds id width");
  }
  if (range.to - range.from > probe_limit) {
    throw config_error("index_guess: range of " +
                       std::to_string(range.to - range.from) +
                       " candidates exceeds probe limit of " +
                       std::to_string(probe_limit));
  }
  site.set_clock(at);
  GuessResult result;
  for (std::uint64_t v = range.from; v < range.to; ++v) {
    std::string id = std::to_string(v);
    if (static_cast<int>(id.size()) < range.width) {
      id.insert(0, static_cast<std::size_t>(range.width) - id.size(), '0');
    }
    auto response = site.get(locator_for(id));
    result.probes += 1;
    if (response.status != 200) continue;
    FrameEntry e;
    e.locator = locator_for(id);
    e.discovered_at = at;
    e.via.strategy = "guess";
    e.via.guessed_id = id;
    result.frame.add(std::move(e));
  }
  return result;
}

namespace {

FetchOutcome fetch_one(SiteClient& site, const FrameEntry& entry,
                       const webserve::HeaderMap& headers, Seconds at,
                       const std::vector<std::string>& expected_attributes) {
  FetchOutcome out;
  webserve::Response response;
  try {
    response = site.get(entry.locator, headers);
  } catch (const transport_error& e) {
    out.failure = {entry.locator, at, "transport", e.what()};
    return out;
  }
  if (response.status == 404 || response.status == 410) {
    out.failure = {entry.locator, at, "gone",
                   "status " + std::to_string(response.status)};
    return out;
  }
  if (response.status != 200) {
    out.failure = {entry.locator, at, "transport",
                   "status " + std::to_string(response.status)};
    return out;
  }
  ParsedPage page;
  try {
    page = parse_page(response.body);
  } catch (const config_error& e) {
    out.failure = {entry.locator, at, "parse", e.what()};
    return out;
  }
  for (const auto& attr : expected_attributes) {
    if (!page.attributes.count(attr)) {
      out.failure = {entry.locator, at, "parse",
                     "expected attribute '" + attr + "' missing"};
      return out;
    }
  }
  out.ok = true;
  out.record.unit_id = page.unit_id;
  out.record.attributes = std::move(page.attributes);
  out.record.fetched_at = at;
  out.record.discovered_at = entry.discovered_at;
  out.record.via = entry.via;
  return out;
}

Sample fetch_lagged(SiteClient& site, const SamplingFrame& frame,
                    const RequestProfile& profile, Seconds lag,
                    const std::vector<std::string>& expected_attributes) {
  if (lag < 0) throw config_error("fetch: lag must be >= 0");
  Sample sample;
  sample.profile = profile;
  auto headers = profile.headers();
  // Entries in due-time order so the clock only moves forward.
  std::vector<std::size_t> order(frame.entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return frame.entries[a].discovered_at < frame.entries[b].discovered_at;
  });
  Seconds clock = site.get_clock();
  for (std::size_t idx : order) {
    const FrameEntry& entry = frame.entries[idx];
    Seconds due = entry.discovered_at + lag;
    if (due > clock) {
      site.set_clock(due);
      clock = due;
    }
    auto outcome = fetch_one(site, entry, headers, clock, expected_attributes);
    if (outcome.ok) {
      sample.records.push_back(std::move(outcome.record));
    } else {
      sample.failures.push_back(std::move(outcome.failure));
    }
  }
  return sample;
}

Sample fetch_interval(SiteClient& site, const SamplingFrame& frame,
                      const RequestProfile& profile, const IntervalSchedule& schedule,
                      const std::vector<std::string>& expected_attributes) {
  if (schedule.interval <= 0) throw config_error("fetch: interval must be > 0");
  Sample sample;
  sample.profile = profile;
  auto headers = profile.headers();

  struct Attempt {
    Seconds at;
    std::size_t seq;   // frame position, breaks time ties deterministically
    std::size_t idx;
  };
  auto later = [](const Attempt& a, const Attempt& b) {
    if (a.at != b.at) return a.at > b.at;
    return a.seq > b.seq;
  };
  std::priority_queue<Attempt, std::vector<Attempt>, decltype(later)> queue(later);
  std::vector<char> captured(frame.entries.size(), 0);
  std::vector<Seconds> last_attempt(frame.entries.size(), 0.0);
  std::vector<int> attempts(frame.entries.size(), 0);
  for (std::size_t i = 0; i < frame.entries.size(); ++i) {
    queue.push({frame.entries[i].discovered_at, i, i});
  }
  Seconds clock = site.get_clock();
  while (!queue.empty()) {
    Attempt a = queue.top();
    queue.pop();
    if (captured[a.idx]) continue;
    if (a.at > schedule.horizon) continue;
    if (a.at > clock) {
      site.set_clock(a.at);
      clock = a.at;
    }
    const FrameEntry& entry = frame.entries[a.idx];
    last_attempt[a.idx] = clock;
    attempts[a.idx] += 1;
    auto outcome = fetch_one(site, entry, headers, clock, expected_attributes);
    if (outcome.ok) {
      captured[a.idx] = 1;
      sample.records.push_back(std::move(outcome.record));
    } else {
      queue.push({a.at + schedule.interval, a.seq, a.idx});
    }
  }
  for (std::size_t i = 0; i < frame.entries.size(); ++i) {
    if (captured[i]) continue;
    sample.failures.push_back(
        {frame.entries[i].locator, last_attempt[i], "gone",
         "never captured in " + std::to_string(attempts[i]) + " attempts"});
  }
  return sample;
}

}  // namespace

FetchOutcome fetch_entry(SiteClient& site, const FrameEntry& entry,
                         const RequestProfile& profile, Seconds at,
                         const std::vector<std::string>& expected_attributes) {
  return fetch_one(site, entry, profile.headers(), at, expected_attributes);
}

Sample fetch(SiteClient& site, const SamplingFrame& frame,
             const RequestProfile& profile, const FetchSchedule& schedule,
             const std::vector<std::string>& expected_attributes) {
  if (frame.entries.empty()) throw config_error("fetch: empty frame");
  if (const auto* lag = std::get_if<LagSchedule>(&schedule)) {
    return fetch_lagged(site, frame, profile, lag->lag, expected_attributes);
  }
  return fetch_interval(site, frame, profile, std::get<IntervalSchedule>(schedule),
                        expected_attributes);
}

MonitorSession::MonitorSession(Seconds poll_interval, Seconds horizon)
    : interval_(poll_interval), horizon_(horizon) {
  if (poll_interval <= 0) throw config_error("monitor: poll interval must be > 0");
  if (horizon < 0) throw config_error("monitor: horizon must be >= 0");
}

void MonitorSession::add(const std::string& locator, Seconds discovered_at) {
  Entry e;
  e.locator = locator;
  e.discovered_at = discovered_at;
  e.next_poll = discovered_at + interval_;
  e.done = e.next_poll > horizon_;
  entries_.push_back(std::move(e));
}

void MonitorSession::add(const SamplingFrame& frame) {
  for (const auto& entry : frame.entries) add(entry.locator, entry.discovered_at);
}

std::optional<Seconds> MonitorSession::next_poll_time() const {
  std::optional<Seconds> best;
  for (const auto& e : entries_) {
    if (e.done) continue;
    if (!best || e.next_poll < *best) best = e.next_poll;
  }
  return best;
}

void MonitorSession::run_due_polls(SiteClient& site, Seconds now) {
  for (auto& e : entries_) {
    if (e.done || e.next_poll > now) continue;
    auto response = site.get(e.locator);
    if (response.status == 404 || response.status == 410) {
      e.gone_at = now;
      e.done = true;
      continue;
    }
    if (response.status != 200) {
      throw transport_error("monitor poll " + e.locator + ": status " +
                            std::to_string(response.status));
    }
    // Still alive. Next poll is the first grid point after `now`.
    while (e.next_poll <= now) e.next_poll += interval_;
    if (e.next_poll > horizon_) e.done = true;
  }
}

bool MonitorSession::finished() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const Entry& e) { return e.done; });
}

std::vector<MonitorObservation> MonitorSession::observations() const {
  std::vector<MonitorObservation> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) {
    MonitorObservation obs;
    obs.locator = e.locator;
    obs.discovered_at = e.discovered_at;
    if (e.gone_at) {
      obs.event = true;
      obs.duration = *e.gone_at - e.discovered_at;
    } else {
      obs.event = false;
      obs.duration = std::max(0.0, horizon_ - e.discovered_at);
    }
    out.push_back(std::move(obs));
  }
  return out;
}

std::vector<MonitorObservation> monitor(SiteClient& site, const SamplingFrame& frame,
                                        Seconds poll_interval, Seconds horizon) {
  MonitorSession session(poll_interval, horizon);
  session.add(frame);
  Seconds clock = site.get_clock();
  while (auto t = session.next_poll_time()) {
    Seconds at = std::max(*t, clock);
    if (at > clock) {
      site.set_clock(at);
      clock = at;
    }
    session.run_due_polls(site, clock);
  }
  return session.observations();
}

}  // namespace scrapelab::scraper
