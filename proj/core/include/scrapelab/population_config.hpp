// population_config.hpp
// Generative description of a synthetic site population: attribute
// distributions, a proportional-hazards lifetime model, marker rules, link
// topology, and search relevance. Everything downstream (server, scraper,
// experiments) is a function of this config plus a seed.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scrapelab/common.hpp"

#include <nlohmann/json_fwd.hpp>

namespace scrapelab {

// One numeric attribute of a unit. Distributions:
//   normal      value = a + b*eps                  (a=mean, b=stddev)
//   lognormal   value = exp(a + b*eps)             (a,b on the log scale)
//   uniform     value = a + (b-a)*u
//   constant    value = a
//   rank_bucket value = bucket index assigned by ranking `source` descending
//               and splitting into groups sized by `weights` (largest-
//               remainder allocation, so group sizes are exact)
//   bucket_value value = values[b] + scales[b]*eps + jitter*(2u-1) where b is
//               the bucket index read from `source`; with exp_transform the
//               result is exponentiated, giving a per-bucket lognormal
// Chaining rank_bucket into bucket_value is how finite mixtures are written:
// the rank_bucket fixes exact component sizes and the bucket_value draws each
// component's distribution. Latent loadings add shared Gaussian factors (on
// the log scale for lognormal), which is how cross-attribute correlation is
// injected.
struct AttributeSpec {
  enum class Kind { normal, lognormal, uniform, constant, rank_bucket, bucket_value };

  std::string name;
  Kind kind = Kind::normal;
  double a = 0.0;
  double b = 0.0;
  std::map<std::string, double> latent_loadings;
  bool round_values = false;
  std::optional<double> clamp_min;
  std::optional<double> clamp_max;
  std::string source;             // rank_bucket / bucket_value
  std::vector<double> weights;    // rank_bucket
  std::vector<double> values;     // bucket_value
  std::vector<double> scales;     // bucket_value; empty means no normal part
  double jitter = 0.0;            // bucket_value
  bool exp_transform = false;     // bucket_value
};

// Removal intensity per unit: lambda_i = baseline * exp(sum_a coef_a * z_a)
// where z_a is the population-standardized value of attribute a.
struct LifetimeModel {
  double baseline_hazard = 0.0;
  std::map<std::string, double> coefficients;
};

// Threshold predicate attaching a keyword marker to matching units.
struct MarkerRule {
  std::string keyword;
  std::string attribute;
  std::string op;  // one of == != >= <= > <
  double value = 0.0;
};

// Each unit links to its `neighbors` nearest peers by Euclidean distance on
// the listed standardized attributes.
struct LinkRule {
  std::size_t neighbors = 0;
  std::vector<std::string> attributes;
};

// Per-profile-dimension relevance offset: offset = sigma*eps + sum tilt_a*z_a.
// `value` is the dimension key a request resolves to, e.g. "browser:safari".
struct AffinitySpec {
  std::string value;
  double sigma = 0.0;
  std::map<std::string, double> tilt;
};

struct RelevanceSpec {
  double base_low = 0.0;   // base relevance drawn uniform in [low, high]
  double base_high = 1.0;
  std::vector<AffinitySpec> affinities;
};

struct PopulationConfig {
  std::size_t size = 0;
  std::uint64_t seed = 0;
  int id_width = 9;
  std::uint64_t id_start = 100000000;
  Seconds creation_window = 0.0;
  std::vector<std::string> latents;
  std::vector<AttributeSpec> attributes;
  LifetimeModel lifetime;
  double never_removed_fraction = 0.0;
  std::vector<MarkerRule> markers;
  std::size_t bestseller_size = 0;  // 0 disables the bestseller marker
  LinkRule links;
  RelevanceSpec relevance;
};

// Throws config_error naming the offending field.
void validate(const PopulationConfig& config);

PopulationConfig population_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const PopulationConfig& config);
PopulationConfig load_population_config(const std::string& path);

bool marker_rule_matches(const MarkerRule& rule, double value);

}  // namespace scrapelab
