// stats.hpp
// Estimators for quantifying sampling bias: coverage, mean differences with
// uncertainty, survival fits over interval-censored removal observations, and
// the inverse-survivorship weights that undo loss-driven bias.

#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "scrapelab/common.hpp"

namespace scrapelab::stats {

// |observed ∩ reference| / |reference|. Empty reference is an error.
double coverage(const std::set<std::string>& observed,
                const std::set<std::string>& reference);

struct MeanDiff {
  std::string variable;
  double estimate = 0.0;   // mean(a) - mean(b)
  double std_error = 0.0;
  double ci_low = 0.0;     // 95%, Welch-Satterthwaite degrees of freedom
  double ci_high = 0.0;
  double df = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  bool log_adjusted = false;
};

// Welch two-sample comparison (unequal variances). With log_adjust both
// sides are log1p-transformed first; a negative input is then an error.
// Requires at least two values on each side.
MeanDiff mean_diff(std::span<const double> a, std::span<const double> b,
                   const std::string& variable, bool log_adjust = false);

// One-sample counterpart: sample mean minus a known reference mean, with a
// t-based interval from the sample alone.
MeanDiff mean_vs_reference(std::span<const double> sample, double reference_mean,
                           const std::string& variable);

struct SurvivalObservation {
  double duration = 0.0;
  bool event = false;  // false: censored
};

struct KaplanMeierStep {
  double time = 0.0;
  double survival = 0.0;  // S(t) for t at and after this step
  std::size_t at_risk = 0;
  std::size_t deaths = 0;
};

struct SurvivalFit {
  enum class Kind { kaplan_meier, exponential };
  Kind kind = Kind::kaplan_meier;
  std::vector<KaplanMeierStep> steps;  // kaplan_meier only
  double lambda = 0.0;                 // exponential only
  std::size_t events = 0;
  double exposure = 0.0;               // total observed time
  double log_likelihood = 0.0;         // exponential only

  // Step function for the product-limit fit, exp(-lambda t) otherwise.
  double survival(double t) const;
};

// Product-limit estimator. Ties: deaths at a time are counted while the
// tied censored observations are still in the risk set.
SurvivalFit fit_kaplan_meier(std::span<const SurvivalObservation> observations);

// Constant-hazard MLE: lambda = events / exposure. Zero events is an error.
SurvivalFit fit_exponential(std::span<const SurvivalObservation> observations);

struct PhObservation {
  double duration = 0.0;
  bool event = false;
  std::vector<double> covariates;
};

// Exponential regression with covariate-dependent log hazard:
//   log lambda_i = intercept + sum_k coef_k * (x_ik - center_k) / scale_k.
// Centering and scaling use the fitting data's moments and are frozen into
// the fit so hazard() takes raw covariate values.
struct PhFit {
  std::vector<std::string> covariate_names;
  double intercept = 0.0;
  std::vector<double> coefficients;
  std::vector<double> centers;
  std::vector<double> scales;
  std::size_t events = 0;
  double log_likelihood = 0.0;
  int iterations = 0;

  double log_hazard(std::span<const double> raw_covariates) const;
  double hazard(std::span<const double> raw_covariates) const;
};

// Newton iteration on the concave exponential log likelihood. Requires at
// least one event and non-degenerate covariates.
PhFit fit_exponential_ph(std::span<const PhObservation> observations,
                         std::vector<std::string> covariate_names);

struct WeightVector {
  // unit id -> 1 / estimated probability of surviving the lag
  std::map<std::string, double> weights;
  std::size_t excluded = 0;  // units skipped for missing covariates
};

// Inverse-survivorship weights w = exp(lambda_i * lag) from a fitted hazard
// model. Units whose covariate vector has a NaN or the wrong length are
// excluded and counted. Every returned weight is finite and >= 1.
WeightVector hazard_weights(
    const PhFit& fit,
    const std::vector<std::pair<std::string, std::vector<double>>>& units,
    Seconds lag);

// Same weights from precomputed per-unit hazards.
WeightVector hazard_weights(const std::map<std::string, double>& hazard_by_unit,
                            Seconds lag);

// sum(w*x)/sum(w). Sizes must match; weights must be positive and finite.
double weighted_mean(std::span<const double> values, std::span<const double> weights);

struct CrossValidation {
  double size_ratio = 0.0;  // sample n / claimed population size
  std::vector<MeanDiff> attribute_diffs;
  std::vector<std::string> skipped;  // attributes absent on either side
};

// Compares per-attribute sample means against a site's self-reported
// aggregate means. Attributes missing on either side are listed, not errors.
CrossValidation cross_validate(
    const std::map<std::string, std::vector<double>>& sample_values,
    std::size_t sample_size, std::size_t claimed_population,
    const std::map<std::string, double>& claimed_means);

// Student's t upper quantile helper used for the 95% intervals.
double t_quantile_975(double df);

}  // namespace scrapelab::stats
