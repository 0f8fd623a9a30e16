// BiasReport rendering: JSON (full precision), CSV panels (6 significant
// digits), and a human-readable text summary. All content is assembled in
// memory first; emit_report only touches the filesystem once everything is
// ready, so failures cannot leave a torn report.

#include "scrapelab/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace scrapelab::experiments {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

ordered_json diff_json(const stats::MeanDiff& d) {
  return ordered_json{{"variable", d.variable},
                      {"estimate", d.estimate},
                      {"std_error", d.std_error},
                      {"ci_low", d.ci_low},
                      {"ci_high", d.ci_high},
                      {"df", d.df},
                      {"n_a", d.n_a},
                      {"n_b", d.n_b},
                      {"log_adjusted", d.log_adjusted}};
}

ordered_json fit_json(const stats::PhFit& fit) {
  ordered_json coef, centers, scales;
  for (std::size_t k = 0; k < fit.covariate_names.size(); ++k) {
    coef[fit.covariate_names[k]] = fit.coefficients[k];
    centers[fit.covariate_names[k]] = fit.centers[k];
    scales[fit.covariate_names[k]] = fit.scales[k];
  }
  return ordered_json{{"model", "exponential_hazard"},
                      {"intercept", fit.intercept},
                      {"coefficients", coef},
                      {"centers", centers},
                      {"scales", scales},
                      {"events", fit.events},
                      {"log_likelihood", fit.log_likelihood},
                      {"iterations", fit.iterations}};
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ",";
    out += cells[i];
  }
  out += "\n";
  return out;
}

std::string sig(double v) { return format_sig6(v); }

void append_diff_rows(std::string& csv, const std::string& condition,
                      const std::vector<stats::MeanDiff>& diffs) {
  for (const auto& d : diffs) {
    csv += csv_row({condition, d.variable, sig(d.estimate), sig(d.std_error),
                    sig(d.ci_low), sig(d.ci_high), std::to_string(d.n_a),
                    std::to_string(d.n_b), d.log_adjusted ? "1" : "0"});
  }
}

std::string diff_header() {
  return csv_row({"condition", "variable", "estimate", "std_error", "ci_low",
                  "ci_high", "n_sample", "n_reference", "log_adjusted"});
}

// One compact reading of an interval: direction if clearly signed, else "~0".
std::string verdict(const stats::MeanDiff& d) {
  if (d.ci_low > 0) return "high";
  if (d.ci_high < 0) return "low";
  return "~0";
}

}  // namespace

// Serialized reports deliberately omit the transport label: identical inputs
// must produce identical bytes whether the site was driven in-process or over
// HTTP, and any transport marker in the file would break that.
ordered_json to_json(const BiasReport& report) {
  ordered_json j;
  j["kind"] = report.kind;
  j["seed"] = report.seed;
  j["config_digest"] = report.digest;
  j["population_size"] = report.population_size;

  if (report.volatility) {
    const auto& v = *report.volatility;
    ordered_json vj;
    vj["pilot_size"] = v.pilot_size;
    vj["pilot_events"] = v.pilot_events;
    vj["no_correction"] = v.no_correction;
    if (!v.no_correction) vj["hazard_fit"] = fit_json(v.hazard_fit);
    ordered_json km = ordered_json::array();
    for (const auto& s : v.pilot_km) {
      km.push_back({{"time", s.time},
                    {"survival", s.survival},
                    {"at_risk", s.at_risk},
                    {"deaths", s.deaths}});
    }
    vj["pilot_km"] = km;
    ordered_json conds = ordered_json::array();
    for (const auto& c : v.conditions) {
      ordered_json cj;
      cj["lag"] = c.lag;
      cj["frame_size"] = c.frame_size;
      cj["records"] = c.records;
      cj["gone"] = c.gone;
      cj["gone_fraction"] = c.gone_fraction;
      cj["coverage"] = c.coverage;
      ordered_json diffs = ordered_json::array();
      for (const auto& d : c.diffs) diffs.push_back(diff_json(d));
      cj["diffs"] = diffs;
      ordered_json means = ordered_json::array();
      for (const auto& m : c.means) {
        means.push_back({{"variable", m.variable},
                         {"true_mean", m.true_mean},
                         {"unweighted_mean", m.unweighted_mean},
                         {"weighted_mean", m.weighted_mean}});
      }
      cj["means"] = means;
      conds.push_back(cj);
    }
    vj["conditions"] = conds;
    vj["weights"] = ordered_json{{"lag", v.weight_lag},
                                 {"excluded", v.weights.excluded},
                                 {"values", v.weights.weights}};
    j["volatility"] = vj;
  }

  if (report.personalization) {
    const auto& p = *report.personalization;
    ordered_json pj;
    pj["benchmark_frame"] = p.benchmark_frame;
    pj["sanity_overlap"] = p.sanity_overlap;
    ordered_json sd = ordered_json::array();
    for (const auto& d : p.sanity_diffs) sd.push_back(diff_json(d));
    pj["sanity_diffs"] = sd;
    ordered_json conds = ordered_json::array();
    for (const auto& c : p.conditions) {
      ordered_json cj;
      cj["profile"] = c.profile;
      cj["frame_size"] = c.frame_size;
      cj["overlap"] = c.overlap;
      ordered_json per_kw = ordered_json::array();
      for (const auto& k : c.per_keyword) {
        per_kw.push_back({{"keyword", k.keyword},
                          {"frame_size", k.frame_size},
                          {"overlap", k.overlap}});
      }
      cj["per_keyword"] = per_kw;
      cj["empty_frame"] = c.empty_frame;
      ordered_json diffs = ordered_json::array();
      for (const auto& d : c.diffs) diffs.push_back(diff_json(d));
      cj["diffs"] = diffs;
      cj["warnings"] = c.warnings;
      conds.push_back(cj);
    }
    pj["conditions"] = conds;
    j["personalization"] = pj;
  }

  if (report.indexing) {
    const auto& x = *report.indexing;
    ordered_json xj;
    xj["alive_units"] = x.alive_units;
    ordered_json conds = ordered_json::array();
    for (const auto& c : x.conditions) {
      ordered_json cj;
      cj["heuristic"] = c.heuristic;
      cj["frame_size"] = c.frame_size;
      cj["records"] = c.records;
      cj["coverage"] = c.coverage;
      if (c.probes) cj["probes"] = c.probes;
      if (c.pages) cj["pages"] = c.pages;
      ordered_json diffs = ordered_json::array();
      for (const auto& d : c.diffs) diffs.push_back(diff_json(d));
      cj["diffs"] = diffs;
      ordered_json cvd = ordered_json::array();
      for (const auto& d : c.cross_validation.attribute_diffs) {
        cvd.push_back(diff_json(d));
      }
      cj["cross_validation"] = ordered_json{
          {"size_ratio", c.cross_validation.size_ratio},
          {"diffs", cvd},
          {"skipped", c.cross_validation.skipped}};
      cj["warnings"] = c.warnings;
      conds.push_back(cj);
    }
    xj["conditions"] = conds;
    j["indexing"] = xj;
  }
  return j;
}

namespace {

std::vector<std::pair<std::string, std::string>> csv_files(const BiasReport& r) {
  std::vector<std::pair<std::string, std::string>> files;
  std::string conditions, diffs = diff_header(), extra;

  if (r.volatility) {
    const auto& v = *r.volatility;
    conditions = csv_row(
        {"lag", "frame_size", "records", "gone", "gone_fraction", "coverage"});
    for (const auto& c : v.conditions) {
      conditions += csv_row({sig(c.lag), std::to_string(c.frame_size),
                             std::to_string(c.records), std::to_string(c.gone),
                             sig(c.gone_fraction), sig(c.coverage)});
      append_diff_rows(diffs, "lag_" + format_double(c.lag), c.diffs);
    }
    extra = csv_row({"lag", "variable", "true_mean", "unweighted_mean",
                     "weighted_mean"});
    for (const auto& c : v.conditions) {
      for (const auto& m : c.means) {
        extra += csv_row({sig(c.lag), m.variable, sig(m.true_mean),
                          sig(m.unweighted_mean), sig(m.weighted_mean)});
      }
    }
    files.emplace_back("correction.csv", extra);
  } else if (r.personalization) {
    const auto& p = *r.personalization;
    // One aggregated row per profile plus one row per search term, so the
    // union never hides per-term variation.
    conditions = csv_row({"profile", "keyword", "frame_size", "overlap"});
    for (const auto& c : p.conditions) {
      conditions +=
          csv_row({c.profile, "(all)", std::to_string(c.frame_size), sig(c.overlap)});
      for (const auto& k : c.per_keyword) {
        conditions += csv_row(
            {c.profile, k.keyword, std::to_string(k.frame_size), sig(k.overlap)});
      }
      append_diff_rows(diffs, c.profile, c.diffs);
    }
  } else if (r.indexing) {
    const auto& x = *r.indexing;
    conditions =
        csv_row({"heuristic", "frame_size", "records", "coverage", "probes", "pages"});
    for (const auto& c : x.conditions) {
      conditions += csv_row({c.heuristic, std::to_string(c.frame_size),
                             std::to_string(c.records), sig(c.coverage),
                             std::to_string(c.probes), std::to_string(c.pages)});
      append_diff_rows(diffs, c.heuristic, c.diffs);
    }
    extra = csv_row({"heuristic", "size_ratio", "variable", "estimate", "ci_low",
                     "ci_high"});
    for (const auto& c : x.conditions) {
      for (const auto& d : c.cross_validation.attribute_diffs) {
        extra += csv_row({c.heuristic, sig(c.cross_validation.size_ratio),
                          d.variable, sig(d.estimate), sig(d.ci_low), sig(d.ci_high)});
      }
    }
    files.emplace_back("crossval.csv", extra);
  }

  files.insert(files.begin(), {"diffs.csv", diffs});
  files.insert(files.begin(), {"conditions.csv", conditions});
  // Every CSV names the run that produced it.
  const std::string stamp = "# kind=" + r.kind + " seed=" + std::to_string(r.seed) +
                            " digest=" + r.digest + "\n";
  for (auto& [_, content] : files) content.insert(0, stamp);
  return files;
}

}  // namespace

std::string render_text_summary(const BiasReport& r) {
  std::ostringstream out;
  out << "experiment: " << r.kind << "\n";
  out << "seed: " << r.seed << "  config digest: " << r.digest << "\n";
  out << "population: " << r.population_size << " units\n";

  auto describe_diffs = [&](const std::vector<stats::MeanDiff>& diffs,
                            const char* against) {
    for (const auto& d : diffs) {
      out << "    " << d.variable << (d.log_adjusted ? " (log)" : "") << " vs "
          << against << ": " << sig(d.estimate) << " [" << sig(d.ci_low) << ", "
          << sig(d.ci_high) << "] " << verdict(d) << "\n";
    }
  };

  if (r.volatility) {
    const auto& v = *r.volatility;
    out << "pilot: " << v.pilot_size << " units, " << v.pilot_events
        << " removals observed\n";
    if (v.no_correction) {
      out << "correction disabled: the pilot saw no removals, so weights are "
             "unavailable\n";
    } else {
      out << "hazard fit: intercept " << sig(v.hazard_fit.intercept);
      for (std::size_t k = 0; k < v.hazard_fit.covariate_names.size(); ++k) {
        out << ", " << v.hazard_fit.covariate_names[k] << " "
            << sig(v.hazard_fit.coefficients[k]);
      }
      out << " (standardized scale)\n";
    }
    for (const auto& c : v.conditions) {
      out << "lag " << format_double(c.lag) << " s: frame " << c.frame_size
          << ", captured " << c.records << ", gone "
          << sig(100.0 * c.gone_fraction) << "%, coverage "
          << sig(100.0 * c.coverage) << "%\n";
      describe_diffs(c.diffs, "truth");
      for (const auto& m : c.means) {
        out << "    " << m.variable << " means: true " << sig(m.true_mean)
            << ", unweighted " << sig(m.unweighted_mean) << ", weighted "
            << sig(m.weighted_mean) << "\n";
      }
    }
  }

  if (r.personalization) {
    const auto& p = *r.personalization;
    out << "benchmark frame: " << p.benchmark_frame << " units\n";
    out << "sanity (benchmark vs itself): overlap " << sig(p.sanity_overlap)
        << ", all diffs ";
    bool all_zero = true;
    for (const auto& d : p.sanity_diffs) {
      if (d.estimate != 0.0) all_zero = false;
    }
    out << (all_zero ? "exactly zero" : "NOT ZERO (pipeline fault)") << "\n";
    for (const auto& c : p.conditions) {
      out << "profile " << c.profile << ": frame " << c.frame_size
          << ", overlap with benchmark " << sig(100.0 * c.overlap) << "%\n";
      for (const auto& k : c.per_keyword) {
        out << "    term '" << k.keyword << "': " << k.frame_size
            << " units, overlap " << sig(100.0 * k.overlap) << "%\n";
      }
      describe_diffs(c.diffs, "benchmark");
      for (const auto& w : c.warnings) out << "    warning: " << w << "\n";
    }
  }

  if (r.indexing) {
    const auto& x = *r.indexing;
    out << "alive population: " << x.alive_units << " units\n";
    for (const auto& c : x.conditions) {
      out << "heuristic " << c.heuristic << ": frame " << c.frame_size
          << ", captured " << c.records << ", coverage "
          << sig(100.0 * c.coverage) << "%";
      if (c.probes) out << ", probes " << c.probes;
      if (c.pages) out << ", pages " << c.pages;
      out << "\n";
      describe_diffs(c.diffs, "alive truth");
      out << "    self-reported size check: sample/claimed = "
          << sig(c.cross_validation.size_ratio) << "\n";
      describe_diffs(c.cross_validation.attribute_diffs, "claimed means");
      for (const auto& w : c.warnings) out << "    warning: " << w << "\n";
    }
  }
  return out.str();
}

std::vector<std::string> emit_report(const BiasReport& report,
                                     const std::string& out_dir,
                                     const std::set<ReportFormat>& formats) {
  if (formats.empty()) throw config_error("emit_report: no formats requested");

  // Assemble everything before the first write.
  std::vector<std::pair<std::string, std::string>> files;
  if (formats.count(ReportFormat::json)) {
    files.emplace_back("report.json", to_json(report).dump(2) + "\n");
  }
  if (formats.count(ReportFormat::csv)) {
    for (auto& f : csv_files(report)) files.push_back(std::move(f));
  }
  if (formats.count(ReportFormat::text)) {
    files.emplace_back("summary.txt", render_text_summary(report));
  }

  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw transport_error("cannot create report directory: " + out_dir);
  {
    // Writability probe; fail before any report file exists.
    fs::path probe = dir / ".write-probe";
    std::ofstream p(probe);
    if (!p) throw transport_error("report directory not writable: " + out_dir);
    p.close();
    fs::remove(probe, ec);
  }

  std::vector<std::string> written;
  for (const auto& [name, content] : files) {
    fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw transport_error("cannot write " + path.string());
    out << content;
    if (!out) throw transport_error("write failed: " + path.string());
    written.push_back(path.string());
  }
  return written;
}

}  // namespace scrapelab::experiments
