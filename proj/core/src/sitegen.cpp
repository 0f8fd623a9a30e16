// Population generator. Every stochastic quantity is drawn from its own named
// RNG substream keyed by (seed, stream tag, unit index), so adjusting one
// distribution's parameters never reshuffles draws elsewhere. That property is
// what makes calibration sweeps comparable run to run.

#include "scrapelab/sitegen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scrapelab::sitegen {

namespace {

std::string format_id(std::uint64_t value, int width) {
  std::string digits = std::to_string(value);
  if (static_cast<int>(digits.size()) < width) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return digits;
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

// Population moments (ddof=0) per attribute. Zero-variance attributes
// standardize to 0 rather than dividing by zero.
std::map<std::string, Moments> attribute_moments(
    const std::vector<GroundTruthUnit>& units) {
  std::map<std::string, Moments> out;
  if (units.empty()) return out;
  const double n = static_cast<double>(units.size());
  for (const auto& u : units) {
    for (const auto& [name, v] : u.attributes) out[name].mean += v;
  }
  for (auto& [_, m] : out) m.mean /= n;
  for (const auto& u : units) {
    for (const auto& [name, v] : u.attributes) {
      double d = v - out[name].mean;
      out[name].sd += d * d;
    }
  }
  for (auto& [_, m] : out) m.sd = std::sqrt(m.sd / n);
  return out;
}

double standardized(const GroundTruthUnit& unit, const std::string& attr,
                    const std::map<std::string, Moments>& moments) {
  auto uit = unit.attributes.find(attr);
  auto mit = moments.find(attr);
  if (uit == unit.attributes.end() || mit == moments.end()) {
    throw config_error("unit " + unit.id + " lacks attribute '" + attr + "'");
  }
  if (mit->second.sd == 0.0) return 0.0;
  return (uit->second - mit->second.mean) / mit->second.sd;
}

// Exact group sizes via largest-remainder apportionment of `weights` over n.
std::vector<std::size_t> bucket_counts(const std::vector<double>& weights,
                                       std::size_t n) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> counts(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    double exact = weights[k] / total * static_cast<double>(n);
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[k];
    remainders.emplace_back(exact - std::floor(exact), k);
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) {
    counts[remainders[i % remainders.size()].second] += 1;
  }
  return counts;
}

void draw_attribute(const PopulationConfig& config, const AttributeSpec& spec,
                    std::vector<GroundTruthUnit>& units,
                    const std::vector<std::map<std::string, double>>& latents) {
  const std::string tag = "attr:" + spec.name;
  const std::size_t n = units.size();

  if (spec.kind == AttributeSpec::Kind::rank_bucket) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      double va = units[a].attributes.at(spec.source);
      double vb = units[b].attributes.at(spec.source);
      if (va != vb) return va > vb;
      return units[a].id < units[b].id;
    });
    auto counts = bucket_counts(spec.weights, n);
    std::size_t pos = 0;
    for (std::size_t bucket = 0; bucket < counts.size(); ++bucket) {
      for (std::size_t k = 0; k < counts[bucket]; ++k, ++pos) {
        units[order[pos]].attributes[spec.name] = static_cast<double>(bucket);
      }
    }
    return;
  }

  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    switch (spec.kind) {
      case AttributeSpec::Kind::normal: {
        auto rng = stream_rng(config.seed, tag, i);
        v = spec.a + spec.b * draw_normal(rng);
        for (const auto& [l, load] : spec.latent_loadings) v += load * latents[i].at(l);
        break;
      }
      case AttributeSpec::Kind::lognormal: {
        auto rng = stream_rng(config.seed, tag, i);
        double z = spec.a + spec.b * draw_normal(rng);
        for (const auto& [l, load] : spec.latent_loadings) z += load * latents[i].at(l);
        v = std::exp(z);
        break;
      }
      case AttributeSpec::Kind::uniform: {
        auto rng = stream_rng(config.seed, tag, i);
        v = spec.a + (spec.b - spec.a) * draw_uniform(rng);
        for (const auto& [l, load] : spec.latent_loadings) v += load * latents[i].at(l);
        break;
      }
      case AttributeSpec::Kind::constant:
        v = spec.a;
        break;
      case AttributeSpec::Kind::bucket_value: {
        double src = units[i].attributes.at(spec.source);
        auto idx = static_cast<long long>(std::llround(src));
        if (idx < 0 || idx >= static_cast<long long>(spec.values.size())) {
          throw config_error("attribute '" + spec.name + "': source bucket " +
                             std::to_string(idx) + " out of range");
        }
        auto b = static_cast<std::size_t>(idx);
        v = spec.values[b];
        if (!spec.scales.empty() || spec.jitter > 0) {
          auto rng = stream_rng(config.seed, tag, i);
          if (!spec.scales.empty()) v += spec.scales[b] * draw_normal(rng);
          if (spec.jitter > 0) v += spec.jitter * (2.0 * draw_uniform(rng) - 1.0);
        }
        if (spec.exp_transform) v = std::exp(v);
        break;
      }
      case AttributeSpec::Kind::rank_bucket:
        break;  // handled above
    }
    if (spec.round_values) v = std::nearbyint(v);
    if (spec.clamp_min && v < *spec.clamp_min) v = *spec.clamp_min;
    if (spec.clamp_max && v > *spec.clamp_max) v = *spec.clamp_max;
    units[i].attributes[spec.name] = v;
  }
}

}  // namespace

void assign_markers(std::vector<GroundTruthUnit>& units,
                    const std::vector<MarkerRule>& rules,
                    std::size_t bestseller_size) {
  for (auto& u : units) {
    for (const auto& rule : rules) {
      if (marker_rule_matches(rule, u.attributes.at(rule.attribute))) {
        u.markers.insert(rule.keyword);
      }
    }
  }
  if (bestseller_size == 0) return;
  if (bestseller_size > units.size()) {
    throw config_error("bestseller size exceeds population size");
  }
  std::vector<std::size_t> order(units.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double va = units[a].attributes.at("views");
    double vb = units[b].attributes.at("views");
    if (va != vb) return va > vb;
    return units[a].id < units[b].id;
  });
  for (std::size_t k = 0; k < bestseller_size; ++k) {
    units[order[k]].markers.insert("bestseller");
  }
}

void build_link_graph(std::vector<GroundTruthUnit>& units, const LinkRule& rule) {
  for (auto& u : units) u.out_links.clear();
  if (rule.neighbors == 0) return;
  if (rule.neighbors >= units.size()) {
    throw config_error("links: neighbors must be < population size");
  }
  auto moments = attribute_moments(units);
  const std::size_t n = units.size();
  const std::size_t d = rule.attributes.size();
  std::vector<double> z(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      z[i * d + k] = standardized(units[i], rule.attributes[k], moments);
    }
  }
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t other = 0; other < n; ++other) {
      if (other == i) continue;
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        double diff = z[i * d + k] - z[other * d + k];
        sq += diff * diff;
      }
      dist.emplace_back(sq, other);
    }
    auto closer = [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return units[a.second].id < units[b.second].id;
    };
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(rule.neighbors),
                      dist.end(), closer);
    for (std::size_t k = 0; k < rule.neighbors; ++k) {
      units[i].out_links.push_back(units[dist[k].second].id);
    }
  }
}

std::vector<double> unit_hazards(const GroundTruthLedger& ledger) {
  auto moments = attribute_moments(ledger.units);
  const auto& lm = ledger.config.lifetime;
  std::vector<double> hazards;
  hazards.reserve(ledger.units.size());
  for (const auto& u : ledger.units) {
    double log_rel = 0.0;
    for (const auto& [attr, coef] : lm.coefficients) {
      log_rel += coef * standardized(u, attr, moments);
    }
    hazards.push_back(lm.baseline_hazard * std::exp(log_rel));
  }
  return hazards;
}

GroundTruthLedger generate_population(const PopulationConfig& config) {
  validate(config);
  GroundTruthLedger ledger;
  ledger.config = config;
  ledger.units.resize(config.size);

  for (std::size_t i = 0; i < config.size; ++i) {
    ledger.units[i].id = format_id(config.id_start + i, config.id_width);
  }

  std::vector<std::map<std::string, double>> latents(config.size);
  for (const auto& name : config.latents) {
    for (std::size_t i = 0; i < config.size; ++i) {
      auto rng = stream_rng(config.seed, "latent:" + name, i);
      latents[i][name] = draw_normal(rng);
    }
  }
  for (const auto& spec : config.attributes) {
    draw_attribute(config, spec, ledger.units, latents);
  }

  for (std::size_t i = 0; i < config.size; ++i) {
    if (config.creation_window > 0) {
      auto rng = stream_rng(config.seed, "created", i);
      ledger.units[i].created_at = config.creation_window * draw_uniform(rng);
    } else {
      ledger.units[i].created_at = 0.0;
    }
  }

  auto moments = attribute_moments(ledger.units);
  for (std::size_t i = 0; i < config.size; ++i) {
    auto& u = ledger.units[i];
    if (config.never_removed_fraction > 0) {
      auto rng = stream_rng(config.seed, "immortal", i);
      if (draw_uniform(rng) < config.never_removed_fraction) continue;
    }
    double log_rel = 0.0;
    for (const auto& [attr, coef] : config.lifetime.coefficients) {
      log_rel += coef * standardized(u, attr, moments);
    }
    double hazard = config.lifetime.baseline_hazard * std::exp(log_rel);
    auto rng = stream_rng(config.seed, "lifetime", i);
    u.removed_at = u.created_at - std::log(draw_open_uniform(rng)) / hazard;
  }

  assign_markers(ledger.units, config.markers, config.bestseller_size);
  build_link_graph(ledger.units, config.links);

  const auto& rel = config.relevance;
  for (std::size_t i = 0; i < config.size; ++i) {
    auto rng = stream_rng(config.seed, "relevance", i);
    ledger.units[i].base_relevance =
        rel.base_low + (rel.base_high - rel.base_low) * draw_uniform(rng);
  }
  for (const auto& aff : rel.affinities) {
    for (std::size_t i = 0; i < config.size; ++i) {
      auto& u = ledger.units[i];
      double offset = 0.0;
      if (aff.sigma > 0) {
        auto rng = stream_rng(config.seed, "affinity:" + aff.value, i);
        offset = aff.sigma * draw_normal(rng);
      }
      for (const auto& [attr, tilt] : aff.tilt) {
        offset += tilt * standardized(u, attr, moments);
      }
      u.affinity[aff.value] = offset;
    }
  }

  ledger.aggregates = compute_aggregates(ledger.units);
  ledger.rebuild_index();
  return ledger;
}

}  // namespace scrapelab::sitegen
