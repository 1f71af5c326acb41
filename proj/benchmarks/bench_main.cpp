#include <benchmark/benchmark.h>

#include <random>

#include "conjoint/design.hpp"
#include "conjoint/parser.hpp"
#include "conjoint/respondent.hpp"
#include "conjoint/stats.hpp"

using namespace conjoint;

namespace {

Dataset full_grid(std::uint32_t reps) {
  const Design d = builtin_design();
  SyntheticSpec spec;
  spec.intercept = 30;
  spec.coefficients = {20, 25, -5, -7, -6, -9, 1};
  spec.noise_sd = 8;
  Dataset ds;
  ds.factors = d.factors;
  for (const auto& s : d.scenarios) {
    ds.scenario_ids.push_back(s.id);
    ds.scenario_titles.push_back(s.title);
  }
  ds.model_names = {"synthetic"};
  for (std::uint32_t s = 0; s < d.scenarios.size(); ++s) {
    for (const auto& a : enumerate_cells(7)) {
      for (std::uint32_t r = 0; r < reps; ++r) {
        Observation o;
        o.score = *parse_score(synthetic_query(a, spec, {1, d.scenarios[s].id, a.cell_index, r}).text).score;
        for (bool b : a.bits) o.dummies.push_back(b);
        o.scenario = s;
        o.cell = a.cell_index;
        o.cluster = ds.cluster_of(s, a.cell_index);
        o.rep = r;
        ds.observations.push_back(std::move(o));
      }
    }
  }
  return ds;
}

const Dataset& grid() {
  static const Dataset ds = full_grid(100);
  return ds;
}

void BM_PooledRegression(benchmark::State& state) {
  const Dataset& ds = grid();
  for (auto _ : state) {
    benchmark::DoNotOptimize(stats::baseline_regression(ds, stats::RegressionScope::pooled_scenarios()));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.observations.size()));
}
BENCHMARK(BM_PooledRegression)->Unit(benchmark::kMillisecond);

void BM_UncertaintyRegression(benchmark::State& state) {
  const Dataset& ds = grid();
  for (auto _ : state) {
    benchmark::DoNotOptimize(stats::uncertainty_regression(ds, stats::RegressionScope::pooled_scenarios()));
  }
}
BENCHMARK(BM_UncertaintyRegression)->Unit(benchmark::kMillisecond);

void BM_ClusterSandwich(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd X(n, 12);
  Eigen::VectorXd u(n);
  std::vector<std::uint32_t> clusters(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1;
    for (Eigen::Index j = 1; j < 12; ++j) X(i, j) = static_cast<double>(rng() % 2);
    u(i) = normal(rng);
    clusters[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(i % 640);
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::cluster_robust_se(X, u, clusters));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ClusterSandwich)->Arg(6400)->Arg(64000)->Unit(benchmark::kMillisecond);

void BM_ParseScore(benchmark::State& state) {
  const std::vector<std::string> texts = {
      "35",
      "I would rate this 75 out of 100.",
      "Considering the 65% support and 70% victory odds... Answer: 40",
      "I cannot assist with planning military aggression.",
      "Given the projected 10,000 civilian deaths and a 5% GDP loss, my answer is 20.",
  };
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(parse_score(texts[i++ % texts.size()]));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ParseScore);

void BM_SyntheticQuery(benchmark::State& state) {
  SyntheticSpec spec;
  spec.intercept = 30;
  spec.coefficients = {20, 25, -5, -7, -6, -9, 1};
  spec.noise_sd = 8;
  const auto a = FactorAssignment::from_index(77, 7);
  std::uint32_t rep = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synthetic_query(a, spec, {1, "spheres", 77, rep++}));
}
BENCHMARK(BM_SyntheticQuery);

void BM_RenderVignette(benchmark::State& state) {
  const Design d = builtin_design();
  std::uint32_t cell = 0;
  for (auto _ : state) benchmark::DoNotOptimize(render_vignette(d, 2, cell++ % 128));
}
BENCHMARK(BM_RenderVignette);

}  // namespace
BENCHMARK_MAIN();
