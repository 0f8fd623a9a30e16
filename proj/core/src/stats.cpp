#include "scrapelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace scrapelab::stats {

namespace {

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

// Sample variance, ddof = 1.
double variance_of(std::span<const double> xs, double mean) {
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

std::vector<double> log1p_all(std::span<const double> xs,
                              const std::string& variable) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) {
    if (x < 0) {
      throw config_error("variable '" + variable +
                         "': negative value under log adjustment");
    }
    out.push_back(std::log1p(x));
  }
  return out;
}

}  // namespace

double t_quantile_975(double df) {
  boost::math::students_t_distribution<double> dist(df);
  return boost::math::quantile(dist, 0.975);
}

double coverage(const std::set<std::string>& observed,
                const std::set<std::string>& reference) {
  if (reference.empty()) throw config_error("coverage: empty reference set");
  std::size_t hit = 0;
  for (const auto& id : observed) {
    if (reference.count(id)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(reference.size());
}

MeanDiff mean_diff(std::span<const double> a, std::span<const double> b,
                   const std::string& variable, bool log_adjust) {
  if (a.size() < 2 || b.size() < 2) {
    throw config_error("mean_diff '" + variable +
                       "': need at least two values per side");
  }
  std::vector<double> ta, tb;
  if (log_adjust) {
    ta = log1p_all(a, variable);
    tb = log1p_all(b, variable);
    a = ta;
    b = tb;
  }
  MeanDiff d;
  d.variable = variable;
  d.log_adjusted = log_adjust;
  d.n_a = a.size();
  d.n_b = b.size();
  double ma = mean_of(a), mb = mean_of(b);
  double va = variance_of(a, ma), vb = variance_of(b, mb);
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  d.estimate = ma - mb;
  double sa = va / na, sb = vb / nb;
  d.std_error = std::sqrt(sa + sb);
  if (d.std_error == 0.0) {
    // Both samples constant: the difference is exact.
    d.df = na + nb - 2.0;
    d.ci_low = d.ci_high = d.estimate;
    return d;
  }
  d.df = (sa + sb) * (sa + sb) /
         (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  double t = t_quantile_975(d.df);
  d.ci_low = d.estimate - t * d.std_error;
  d.ci_high = d.estimate + t * d.std_error;
  return d;
}

MeanDiff mean_vs_reference(std::span<const double> sample, double reference_mean,
                           const std::string& variable) {
  if (sample.size() < 2) {
    throw config_error("mean_vs_reference '" + variable +
                       "': need at least two values");
  }
  MeanDiff d;
  d.variable = variable;
  d.n_a = sample.size();
  d.n_b = 0;
  double m = mean_of(sample);
  double v = variance_of(sample, m);
  double n = static_cast<double>(sample.size());
  d.estimate = m - reference_mean;
  d.std_error = std::sqrt(v / n);
  d.df = n - 1.0;
  if (d.std_error == 0.0) {
    d.ci_low = d.ci_high = d.estimate;
    return d;
  }
  double t = t_quantile_975(d.df);
  d.ci_low = d.estimate - t * d.std_error;
  d.ci_high = d.estimate + t * d.std_error;
  return d;
}

double SurvivalFit::survival(double t) const {
  if (kind == Kind::exponential) return std::exp(-lambda * t);
  double s = 1.0;
  for (const auto& step : steps) {
    if (step.time > t) break;
    s = step.survival;
  }
  return s;
}

SurvivalFit fit_kaplan_meier(std::span<const SurvivalObservation> observations) {
  if (observations.empty()) throw config_error("fit_kaplan_meier: no observations");
  std::vector<SurvivalObservation> sorted(observations.begin(), observations.end());
  for (const auto& o : sorted) {
    if (o.duration < 0 || !std::isfinite(o.duration)) {
      throw config_error("fit_kaplan_meier: durations must be finite and >= 0");
    }
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& x, const auto& y) { return x.duration < y.duration; });

  SurvivalFit fit;
  fit.kind = SurvivalFit::Kind::kaplan_meier;
  double s = 1.0;
  std::size_t at_risk = sorted.size();
  std::size_t i = 0;
  while (i < sorted.size()) {
    double t = sorted[i].duration;
    std::size_t deaths = 0, leaving = 0;
    while (i < sorted.size() && sorted[i].duration == t) {
      if (sorted[i].event) ++deaths;
      ++leaving;
      ++i;
    }
    if (deaths > 0) {
      s *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
      fit.steps.push_back({t, s, at_risk, deaths});
      fit.events += deaths;
    }
    at_risk -= leaving;
  }
  for (const auto& o : sorted) fit.exposure += o.duration;
  return fit;
}

SurvivalFit fit_exponential(std::span<const SurvivalObservation> observations) {
  if (observations.empty()) throw config_error("fit_exponential: no observations");
  SurvivalFit fit;
  fit.kind = SurvivalFit::Kind::exponential;
  for (const auto& o : observations) {
    if (o.duration < 0 || !std::isfinite(o.duration)) {
      throw config_error("fit_exponential: durations must be finite and >= 0");
    }
    fit.exposure += o.duration;
    if (o.event) ++fit.events;
  }
  if (fit.events == 0) {
    throw config_error("fit_exponential: no removal events observed");
  }
  if (fit.exposure <= 0) {
    throw config_error("fit_exponential: zero total exposure");
  }
  fit.lambda = static_cast<double>(fit.events) / fit.exposure;
  fit.log_likelihood =
      static_cast<double>(fit.events) * std::log(fit.lambda) -
      fit.lambda * fit.exposure;
  return fit;
}

namespace {

// Solves A x = b in place by Gaussian elimination with partial pivoting.
// Dimensions here are tiny (intercept + a few covariates).
std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                 std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    if (std::fabs(a[pivot][col]) < 1e-300) {
      throw config_error("hazard fit: singular information matrix");
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) acc -= a[ri][c] * x[c];
    x[ri] = acc / a[ri][ri];
  }
  return x;
}

}  // namespace

double PhFit::log_hazard(std::span<const double> raw_covariates) const {
  if (raw_covariates.size() != coefficients.size()) {
    throw config_error("hazard: covariate count mismatch");
  }
  double eta = intercept;
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    eta += coefficients[k] * (raw_covariates[k] - centers[k]) / scales[k];
  }
  return eta;
}

double PhFit::hazard(std::span<const double> raw_covariates) const {
  return std::exp(log_hazard(raw_covariates));
}

PhFit fit_exponential_ph(std::span<const PhObservation> observations,
                         std::vector<std::string> covariate_names) {
  const std::size_t p = covariate_names.size();
  if (observations.empty()) throw config_error("hazard fit: no observations");
  std::size_t events = 0;
  double exposure = 0.0;
  for (const auto& o : observations) {
    if (o.covariates.size() != p) {
      throw config_error("hazard fit: observation has " +
                         std::to_string(o.covariates.size()) + " covariates, expected " +
                         std::to_string(p));
    }
    if (o.duration < 0 || !std::isfinite(o.duration)) {
      throw config_error("hazard fit: durations must be finite and >= 0");
    }
    for (double c : o.covariates) {
      if (!std::isfinite(c)) throw config_error("hazard fit: non-finite covariate");
    }
    if (o.event) ++events;
    exposure += o.duration;
  }
  if (events == 0) throw config_error("hazard fit: no removal events observed");
  if (exposure <= 0) throw config_error("hazard fit: zero total exposure");

  PhFit fit;
  fit.covariate_names = std::move(covariate_names);
  fit.events = events;
  fit.centers.assign(p, 0.0);
  fit.scales.assign(p, 1.0);
  const double n = static_cast<double>(observations.size());
  for (std::size_t k = 0; k < p; ++k) {
    double m = 0.0;
    for (const auto& o : observations) m += o.covariates[k];
    m /= n;
    double ss = 0.0;
    for (const auto& o : observations) {
      double d = o.covariates[k] - m;
      ss += d * d;
    }
    double sd = std::sqrt(ss / n);
    if (sd == 0.0) {
      throw config_error("hazard fit: covariate '" + fit.covariate_names[k] +
                         "' is constant");
    }
    fit.centers[k] = m;
    fit.scales[k] = sd;
  }

  // Standardized design with leading intercept column.
  std::vector<std::vector<double>> x(observations.size(),
                                     std::vector<double>(p + 1, 1.0));
  for (std::size_t i = 0; i < observations.size(); ++i) {
    for (std::size_t k = 0; k < p; ++k) {
      x[i][k + 1] =
          (observations[i].covariates[k] - fit.centers[k]) / fit.scales[k];
    }
  }

  std::vector<double> theta(p + 1, 0.0);
  theta[0] = std::log(static_cast<double>(events) / exposure);

  auto log_lik = [&](const std::vector<double>& th) {
    double ll = 0.0;
    for (std::size_t i = 0; i < observations.size(); ++i) {
      double eta = 0.0;
      for (std::size_t k = 0; k <= p; ++k) eta += th[k] * x[i][k];
      if (observations[i].event) ll += eta;
      ll -= observations[i].duration * std::exp(eta);
    }
    return ll;
  };

  double current = log_lik(theta);
  int iterations = 0;
  for (; iterations < 100; ++iterations) {
    std::vector<double> grad(p + 1, 0.0);
    std::vector<std::vector<double>> info(p + 1, std::vector<double>(p + 1, 0.0));
    for (std::size_t i = 0; i < observations.size(); ++i) {
      double eta = 0.0;
      for (std::size_t k = 0; k <= p; ++k) eta += theta[k] * x[i][k];
      double mu = observations[i].duration * std::exp(eta);
      double g = (observations[i].event ? 1.0 : 0.0) - mu;
      for (std::size_t k = 0; k <= p; ++k) {
        grad[k] += g * x[i][k];
        for (std::size_t l = 0; l <= p; ++l) info[k][l] += mu * x[i][k] * x[i][l];
      }
    }
    std::vector<double> step = solve_linear(info, grad);
    double max_step = 0.0;
    for (double s : step) max_step = std::max(max_step, std::fabs(s));
    // Backtracking keeps the concave objective climbing even from a poor
    // start.
    double scale = 1.0;
    std::vector<double> candidate(p + 1);
    double next = current;
    for (int half = 0; half < 30; ++half) {
      for (std::size_t k = 0; k <= p; ++k) candidate[k] = theta[k] + scale * step[k];
      next = log_lik(candidate);
      if (next >= current - 1e-12) break;
      scale *= 0.5;
    }
    theta = candidate;
    current = next;
    if (max_step * scale < 1e-10) break;
  }

  fit.intercept = theta[0];
  fit.coefficients.assign(theta.begin() + 1, theta.end());
  fit.log_likelihood = current;
  fit.iterations = iterations + 1;
  return fit;
}

WeightVector hazard_weights(
    const PhFit& fit,
    const std::vector<std::pair<std::string, std::vector<double>>>& units,
    Seconds lag) {
  if (lag < 0) throw config_error("hazard_weights: lag must be >= 0");
  WeightVector out;
  for (const auto& [id, cov] : units) {
    bool usable = cov.size() == fit.coefficients.size();
    for (double c : cov) {
      if (!std::isfinite(c)) usable = false;
    }
    if (!usable) {
      out.excluded += 1;
      continue;
    }
    double exponent = std::min(fit.hazard(cov) * lag, 700.0);
    out.weights[id] = std::exp(exponent);
  }
  return out;
}

WeightVector hazard_weights(const std::map<std::string, double>& hazard_by_unit,
                            Seconds lag) {
  if (lag < 0) throw config_error("hazard_weights: lag must be >= 0");
  WeightVector out;
  for (const auto& [id, lambda] : hazard_by_unit) {
    if (!std::isfinite(lambda) || lambda < 0) {
      out.excluded += 1;
      continue;
    }
    double exponent = std::min(lambda * lag, 700.0);
    out.weights[id] = std::exp(exponent);
  }
  return out;
}

double weighted_mean(std::span<const double> values,
                     std::span<const double> weights) {
  if (values.size() != weights.size()) {
    throw config_error("weighted_mean: size mismatch");
  }
  if (values.empty()) throw config_error("weighted_mean: empty input");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double w = weights[i];
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw config_error("weighted_mean: weights must be positive and finite");
    }
    num += w * values[i];
    den += w;
  }
  return num / den;
}

CrossValidation cross_validate(
    const std::map<std::string, std::vector<double>>& sample_values,
    std::size_t sample_size, std::size_t claimed_population,
    const std::map<std::string, double>& claimed_means) {
  if (claimed_population == 0) {
    throw config_error("cross_validate: claimed population size is zero");
  }
  CrossValidation cv;
  cv.size_ratio =
      static_cast<double>(sample_size) / static_cast<double>(claimed_population);
  for (const auto& [attr, claimed] : claimed_means) {
    auto it = sample_values.find(attr);
    if (it == sample_values.end() || it->second.size() < 2) {
      cv.skipped.push_back(attr);
      continue;
    }
    cv.attribute_diffs.push_back(mean_vs_reference(it->second, claimed, attr));
  }
  for (const auto& [attr, _] : sample_values) {
    if (!claimed_means.count(attr)) cv.skipped.push_back(attr);
  }
  return cv;
}

}  // namespace scrapelab::stats
