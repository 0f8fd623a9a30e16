// Microbenchmarks for the hot paths: population generation, page rendering
// and parsing, search ranking, and the survival fits behind the reweighting.

#include <benchmark/benchmark.h>

#include <random>

#include "scrapelab/experiments.hpp"
#include "scrapelab/html.hpp"
#include "scrapelab/site_model.hpp"

using namespace scrapelab;

namespace {

PopulationConfig bench_population(std::size_t size) {
  PopulationConfig pc;
  pc.size = size;
  pc.seed = 1234;
  pc.id_width = 9;
  pc.id_start = 1000;
  pc.creation_window = 0.0;
  auto spec = [](std::string name, AttributeSpec::Kind kind, double a, double b) {
    AttributeSpec s;
    s.name = std::move(name);
    s.kind = kind;
    s.a = a;
    s.b = b;
    return s;
  };
  pc.attributes.push_back(spec("rating", AttributeSpec::Kind::normal, 0.0, 5.0));
  pc.attributes.push_back(spec("views", AttributeSpec::Kind::lognormal, 3.5, 1.2));
  auto tier = spec("tier", AttributeSpec::Kind::rank_bucket, 0, 0);
  tier.source = "rating";
  tier.weights = {0.25, 0.75};
  pc.attributes.push_back(tier);
  pc.lifetime.baseline_hazard = 1e-7;
  pc.lifetime.coefficients = {{"rating", -0.5}};
  pc.never_removed_fraction = 0.1;
  pc.markers = {{"hot", "rating", ">=", 3.0}};
  pc.links.neighbors = 6;
  pc.links.attributes = {"rating", "views"};
  return pc;
}

void BM_GeneratePopulation(benchmark::State& state) {
  auto config = bench_population(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto ledger = sitegen::generate_population(config);
    benchmark::DoNotOptimize(ledger.units.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeneratePopulation)->Arg(1000)->Arg(10000);

void BM_RenderUnitPage(benchmark::State& state) {
  auto ledger = sitegen::generate_population(bench_population(100));
  const auto& unit = ledger.units.front();
  for (auto _ : state) {
    auto page = webserve::render_unit_page(unit);
    benchmark::DoNotOptimize(page.data());
  }
}
BENCHMARK(BM_RenderUnitPage);

void BM_ParseUnitPage(benchmark::State& state) {
  auto ledger = sitegen::generate_population(bench_population(100));
  auto page = webserve::render_unit_page(ledger.units.front());
  for (auto _ : state) {
    auto parsed = scraper::parse_page(page);
    benchmark::DoNotOptimize(parsed.attributes);
  }
}
BENCHMARK(BM_ParseUnitPage);

void BM_MarkerSearch(benchmark::State& state) {
  auto ledger = sitegen::generate_population(
      bench_population(static_cast<std::size_t>(state.range(0))));
  webserve::SiteModel model(std::move(ledger), {});
  InProcessClient client(model);
  auto profile = scraper::RequestProfile::benchmark();
  for (auto _ : state) {
    auto frame = scraper::index_marker(client, "hot", profile, 0.0);
    benchmark::DoNotOptimize(frame.entries.data());
  }
}
BENCHMARK(BM_MarkerSearch)->Arg(1000)->Arg(10000);

std::vector<stats::SurvivalObservation> simulated_durations(std::size_t n) {
  std::mt19937_64 rng(77);
  std::exponential_distribution<double> life(0.01);
  std::bernoulli_distribution censored(0.3);
  std::vector<stats::SurvivalObservation> obs(n);
  for (auto& o : obs) {
    double d = life(rng);
    bool c = censored(rng);
    o = {c ? d * 0.6 : d, !c};
  }
  return obs;
}

void BM_KaplanMeier(benchmark::State& state) {
  auto obs = simulated_durations(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto fit = stats::fit_kaplan_meier(obs);
    benchmark::DoNotOptimize(fit.steps.data());
  }
}
BENCHMARK(BM_KaplanMeier)->Arg(1000)->Arg(10000);

void BM_ExponentialPhFit(benchmark::State& state) {
  auto obs = simulated_durations(static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 rng(78);
  std::normal_distribution<double> cov(0.0, 1.0);
  std::vector<stats::PhObservation> ph(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    ph[i].duration = obs[i].duration;
    ph[i].event = obs[i].event;
    ph[i].covariates = {cov(rng), cov(rng)};
  }
  for (auto _ : state) {
    auto fit = stats::fit_exponential_ph(ph, {"a", "b"});
    benchmark::DoNotOptimize(fit.coefficients.data());
  }
}
BENCHMARK(BM_ExponentialPhFit)->Arg(2000);

void BM_WelchMeanDiff(benchmark::State& state) {
  std::mt19937_64 rng(79);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> a(10000), b(8000);
  for (auto& x : a) x = noise(rng);
  for (auto& x : b) x = 0.4 + noise(rng);
  for (auto _ : state) {
    auto diff = stats::mean_diff(a, b, "v", false);
    benchmark::DoNotOptimize(diff.estimate);
  }
}
BENCHMARK(BM_WelchMeanDiff);

}  // namespace

BENCHMARK_MAIN();
