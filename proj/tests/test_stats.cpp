#include "conjoint/error.hpp"
#include "conjoint/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "support.hpp"

using namespace conjoint;
using namespace conjoint::stats;

namespace {

const std::vector<double> kTruth = {20, 25, -5, -7, -6, -9, 1};

std::vector<std::size_t> all_factors(const Dataset& ds) {
  std::vector<std::size_t> r(ds.factor_count());
  std::iota(r.begin(), r.end(), 0);
  return r;
}

struct RandomInstance {
  Eigen::MatrixXd X;
  Eigen::VectorXd u;
  std::vector<std::uint32_t> clusters;
};

RandomInstance random_instance(std::mt19937_64& rng, Eigen::Index n, Eigen::Index k, std::uint32_t g) {
  std::normal_distribution<double> normal;
  RandomInstance r;
  r.X.resize(n, k);
  r.u.resize(n);
  r.clusters.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    r.X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < k; ++j) r.X(i, j) = normal(rng);
    r.u(i) = normal(rng) * (1.0 + std::abs(r.X(i, std::min<Eigen::Index>(1, k - 1))));
    // every cluster gets at least one row
    r.clusters[static_cast<std::size_t>(i)] = i < g ? static_cast<std::uint32_t>(i) : static_cast<std::uint32_t>(rng() % g);
  }
  return r;
}

// Difference in means computed from raw observations.
double diff_in_means(const Dataset& ds, std::size_t factor) {
  double hi = 0, lo = 0;
  std::size_t nh = 0, nl = 0;
  for (const auto& o : ds.observations) {
    if (o.dummies[factor]) {
      hi += o.score;
      ++nh;
    } else {
      lo += o.score;
      ++nl;
    }
  }
  return hi / static_cast<double>(nh) - lo / static_cast<double>(nl);
}

}  // namespace

TEST_CASE("fit_ols agrees with the normal equations") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = random_instance(rng, 60, 4, 10);
    Eigen::VectorXd y = inst.X * Eigen::Vector4d(1, 2, -3, 0.5) + inst.u;
    const OlsFit fit = fit_ols(inst.X, y);
    CHECK(testing::max_rel_diff(fit.beta, testing::normal_equations(inst.X, y)) < 1e-10);
    CHECK(testing::max_rel_diff(fit.xtx_inverse, testing::gauss_jordan_inverse(inst.X.transpose() * inst.X)) < 1e-10);
    CHECK(fit.r_squared >= 0.0);
    CHECK(fit.r_squared <= 1.0);
    CHECK(testing::max_rel_diff(fit.residuals, y - inst.X * fit.beta) < 1e-12);
  }
}

TEST_CASE("fit_ols edge cases") {
  Eigen::MatrixXd X(6, 3);
  X << 1, 0, 0, 1, 1, 0, 1, 0, 1, 1, 1, 1, 1, 0, 0, 1, 1, 1;
  SUBCASE("constant response") {
    const OlsFit f = fit_ols(X, Eigen::VectorXd::Constant(6, 42));
    CHECK(f.beta(0) == doctest::Approx(42));
    CHECK(std::abs(f.beta(1)) < 1e-12);
    CHECK(std::abs(f.beta(2)) < 1e-12);
    CHECK(f.ssr < 1e-20);
  }
  SUBCASE("noiseless line") {
    const Eigen::VectorXd y = X * Eigen::Vector3d(10, 20, -5);
    const OlsFit f = fit_ols(X, y);
    CHECK(f.beta(0) == doctest::Approx(10));
    CHECK(f.beta(1) == doctest::Approx(20));
    CHECK(f.beta(2) == doctest::Approx(-5));
    CHECK(f.r_squared == doctest::Approx(1.0));
  }
  SUBCASE("rank deficiency names the column") {
    Eigen::MatrixXd bad(6, 4);
    bad << X, X.col(1);
    try {
      fit_ols(bad, Eigen::VectorXd::Ones(6), {"const", "a", "b", "a_copy"});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::singular_design);
      const std::string what = e.what();
      CHECK((what.find("a_copy") != std::string::npos || what.find("\"a\"") != std::string::npos ||
             what.find("a,") != std::string::npos || what.find(" a") != std::string::npos));
    }
  }
  SUBCASE("too few rows") {
    CHECK_THROWS_AS(fit_ols(X.topRows(3), Eigen::VectorXd::Ones(3)), Error);
  }
}

TEST_CASE("sandwich matches the brute-force triple loop") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 30 + static_cast<Eigen::Index>(rng() % 471);
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng() % 6);
    const std::uint32_t g = 2 + static_cast<std::uint32_t>(rng() % 24);
    auto inst = random_instance(rng, n, k, g);
    const ClusterCovariance v = cluster_robust_se(inst.X, inst.u, inst.clusters);
    CHECK(v.n_clusters == g);
    CHECK(testing::max_rel_diff(v.covariance, testing::brute_sandwich(inst.X, inst.u, inst.clusters)) < 1e-10);
  }
}

TEST_CASE("200 rows in 10 clusters") {
  std::mt19937_64 rng(200);
  auto inst = random_instance(rng, 200, 5, 10);
  const ClusterCovariance v = cluster_robust_se(inst.X, inst.u, inst.clusters);
  CHECK(testing::max_rel_diff(v.covariance, testing::brute_sandwich(inst.X, inst.u, inst.clusters)) < 1e-10);
  CHECK(v.correction == doctest::Approx(10.0 / 9.0 * 199.0 / 195.0));
}

TEST_CASE("singleton clusters reduce to HC1") {
  std::mt19937_64 rng(20);
  auto inst = random_instance(rng, 20, 3, 20);
  std::iota(inst.clusters.begin(), inst.clusters.end(), 0u);
  const ClusterCovariance v = cluster_robust_se(inst.X, inst.u, inst.clusters);
  const Eigen::MatrixXd bread = testing::gauss_jordan_inverse(inst.X.transpose() * inst.X);
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(3, 3);
  for (Eigen::Index i = 0; i < 20; ++i) meat += inst.u(i) * inst.u(i) * inst.X.row(i).transpose() * inst.X.row(i);
  const Eigen::MatrixXd hc1 = 20.0 / (20.0 - 3.0) * bread * meat * bread;
  CHECK(testing::max_rel_diff(v.covariance, hc1) < 1e-10);
}

TEST_CASE("sandwich degenerate inputs") {
  std::mt19937_64 rng(1);
  auto inst = random_instance(rng, 40, 3, 4);
  const ClusterCovariance zero = cluster_robust_se(inst.X, Eigen::VectorXd::Zero(40), inst.clusters);
  CHECK(zero.se.cwiseAbs().maxCoeff() == 0.0);
  std::fill(inst.clusters.begin(), inst.clusters.end(), 7u);
  try {
    cluster_robust_se(inst.X, inst.u, inst.clusters);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degrees_of_freedom);
  }
}

TEST_CASE("regression coefficients equal differences in means on a balanced design") {
  const Dataset ds = testing::synthetic_dataset(testing::linear_spec(30, kTruth, 8), 20, 3);
  for (auto scope : {RegressionScope::pooled_scenarios(), RegressionScope::single("spheres")}) {
    const FitResult fit = baseline_regression(ds, scope);
    if (scope.kind == RegressionScope::Kind::pooled_scenarios) {
      for (std::size_t j = 0; j < 7; ++j) {
        const double oracle = diff_in_means(ds, j);
        CHECK(std::abs(fit.coefficients(static_cast<Eigen::Index>(j)) - oracle) <= 1e-9 * (1 + std::abs(oracle)));
        CHECK(amce_oracle(ds, j) == doctest::Approx(oracle).epsilon(1e-12));
      }
    }
  }
  RegressionSpec plain;
  plain.regressors = all_factors(ds);
  const FitResult no_fe = fit_regression(ds, plain);
  for (std::size_t j = 0; j < 7; ++j) {
    CHECK(std::abs(no_fe.coefficients(static_cast<Eigen::Index>(j)) - amce_oracle(ds, j)) <= 1e-9 * (1 + std::abs(amce_oracle(ds, j))));
  }
}

TEST_CASE("noiseless recovery") {
  std::vector<double> coef(7, 0.0);
  coef[0] = 20;
  const Dataset ds = testing::synthetic_dataset(testing::linear_spec(30, coef, 0), 3, 1);
  const FitResult fit = baseline_regression(ds, RegressionScope::pooled_scenarios());
  CHECK(fit.intercept == doctest::Approx(30));
  CHECK(fit.coefficients(0) == doctest::Approx(20));
  for (Eigen::Index j = 1; j < 7; ++j) CHECK(std::abs(fit.coefficients(j)) < 1e-9);
  CHECK(fit.se.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.n_obs == 1920);
  CHECK(fit.n_clusters == 640);
  CHECK(fit.n_params == 12);
  CHECK(fit.fe_labels.size() == 4);
}

TEST_CASE("noise 5 over the full grid stays within 3 SEs of the truth") {
  const Dataset ds = testing::synthetic_dataset(testing::linear_spec(50, {10, 12, -5, -7, -6, -9, 1}, 5), 100, 21);
  const FitResult fit = baseline_regression(ds, RegressionScope::pooled_scenarios());
  CHECK(fit.n_obs == 64000);
  const std::vector<double> truth = {10, 12, -5, -7, -6, -9, 1};
  for (Eigen::Index j = 0; j < 7; ++j) {
    CAPTURE(j);
    CHECK(std::abs(fit.coefficients(j) - truth[static_cast<std::size_t>(j)]) < 3 * fit.se(j));
  }
  for (std::size_t s = 0; s < 5; ++s) {
    const FitResult one = baseline_regression(ds, RegressionScope::single(ds.scenario_ids[s]));
    CHECK(one.n_obs == 12800);
    CHECK(one.n_clusters == 128);
  }
}

TEST_CASE("p-values use t with G-1 degrees of freedom and stars follow") {
  const Dataset ds = testing::synthetic_dataset(testing::linear_spec(50, {3, 0.3, 0, 0, 0.5, -1, 0}, 10), 10, 8);
  const FitResult fit = baseline_regression(ds, RegressionScope::single("preemptive"));
  for (Eigen::Index j = 0; j < 7; ++j) {
    const double t = fit.coefficients(j) / fit.se(j);
    CHECK(fit.t_stats(j) == doctest::Approx(t));
    CHECK(fit.p_values(j) == doctest::Approx(two_sided_p(t, 127)));
    const double p = fit.p_values(j);
    const std::string expected = p < 0.01 ? "***" : p < 0.05 ? "**" : p < 0.1 ? "*" : "";
    CHECK(fit.stars[static_cast<std::size_t>(j)] == expected);
  }
  CHECK(two_sided_p(0.0, 10) == doctest::Approx(1.0));
  CHECK(two_sided_p(2.228138851986, 10) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(two_sided_p(-1.959963984540, 1e9) == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("permutation invariance") {
  Dataset ds = testing::synthetic_dataset(testing::linear_spec(40, kTruth, 9), 6, 4);
  const FitResult a = baseline_regression(ds, RegressionScope::pooled_scenarios());
  const UncertaintyFit ua = uncertainty_regression(ds, RegressionScope::pooled_scenarios());
  std::mt19937_64 rng(99);
  std::shuffle(ds.observations.begin(), ds.observations.end(), rng);
  const FitResult b = baseline_regression(ds, RegressionScope::pooled_scenarios());
  const UncertaintyFit ub = uncertainty_regression(ds, RegressionScope::pooled_scenarios());
  CHECK(testing::max_rel_diff(a.coefficients, b.coefficients) < 1e-12);
  CHECK(testing::max_rel_diff(a.se, b.se) < 1e-12);
  CHECK(testing::max_rel_diff(a.p_values, b.p_values) < 1e-12);
  CHECK(std::abs(a.intercept - b.intercept) < 1e-12 * std::abs(a.intercept));
  CHECK(std::abs(a.r_squared - b.r_squared) < 1e-12);
  CHECK(a.stars == b.stars);
  CHECK(testing::max_rel_diff(ua.fit.coefficients, ub.fit.coefficients) < 1e-12);
  CHECK(testing::max_rel_diff(ua.fit.se, ub.fit.se) < 1e-12);
}

TEST_CASE("scale equivariance at k = 10") {
  const Dataset ds = testing::synthetic_dataset(testing::linear_spec(40, kTruth, 6), 5, 12);
  Dataset scaled = ds;
  for (auto& o : scaled.observations) o.score *= 10;
  const FitResult a = baseline_regression(ds, RegressionScope::pooled_scenarios());
  const FitResult b = baseline_regression(scaled, RegressionScope::pooled_scenarios());
  CHECK(testing::max_rel_diff(a.coefficients * 10, b.coefficients) < 1e-12);
  CHECK(testing::max_rel_diff(a.se * 10, b.se) < 1e-12);
  CHECK(testing::max_rel_diff(a.t_stats, b.t_stats) < 1e-10);
  CHECK(testing::max_rel_diff(a.p_values, b.p_values) < 1e-9);
  CHECK(a.stars == b.stars);
  CHECK(a.r_squared == doctest::Approx(b.r_squared).epsilon(1e-12));
  const UncertaintyFit ua = uncertainty_regression(ds, RegressionScope::pooled_scenarios());
  const UncertaintyFit ub = uncertainty_regression(scaled, RegressionScope::pooled_scenarios());
  for (std::size_t c = 0; c < ua.cells.size(); ++c) CHECK(ub.cells[c].sd == doctest::Approx(10 * ua.cells[c].sd));
  CHECK(testing::max_rel_diff(ua.fit.coefficients * 10, ub.fit.coefficients) < 1e-10);
}

TEST_CASE("scope errors") {
  Dataset ds = testing::synthetic_dataset(testing::linear_spec(40, kTruth, 6), 2, 1);
  CHECK_THROWS_AS(baseline_regression(ds, RegressionScope::single("nope")), Error);
  ds.model_names.push_back("other");
  for (std::size_t i = 0; i < ds.observations.size(); i += 2) ds.observations[i].model = 1;
  try {
    baseline_regression(ds, RegressionScope::single("preemptive"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_scope);
  }
}

TEST_CASE("model fixed effects") {
  Dataset ds = testing::synthetic_dataset(testing::linear_spec(40, kTruth, 0), 4, 1);
  // keep one scenario and relabel reps 2..3 as a second model shifted by +6
  std::vector<Observation> kept;
  for (auto o : ds.observations) {
    if (o.scenario != 0) continue;
    if (o.rep >= 2) {
      o.model = 1;
      o.score += 6;
    }
    kept.push_back(o);
  }
  ds.observations = kept;
  ds.scenario_ids.resize(1);
  ds.scenario_titles.resize(1);
  ds.model_names = {"m1", "m2"};
  const FitResult fit = baseline_regression(ds, RegressionScope::pooled_models());
  REQUIRE(fit.fe_labels.size() == 1);
  CHECK(fit.fe_labels[0] == "m2");
  CHECK(fit.fe_coefficients(0) == doctest::Approx(6));
  CHECK(fit.coefficients(1) == doctest::Approx(25));
}

TEST_CASE("uncertainty regression") {
  SUBCASE("zero noise") {
    const Dataset ds = testing::synthetic_dataset(testing::linear_spec(40, kTruth, 0), 3, 1);
    const UncertaintyFit u = uncertainty_regression(ds, RegressionScope::pooled_scenarios());
    CHECK(u.cells.size() == 640);
    for (const auto& c : u.cells) CHECK(c.sd == 0.0);
    CHECK(u.fit.coefficients.cwiseAbs().maxCoeff() == 0.0);
    CHECK(u.fit.n_obs == 640);
    CHECK(u.fit.degenerate_clustering);
  }
  SUBCASE("heteroskedastic in victory") {
    SyntheticSpec s = testing::linear_spec(50, std::vector<double>(7, 0.0), 2);
    s.noise_sd_shift = {3, 0, 0, 0, 0, 0, 0};
    const Dataset ds = testing::synthetic_dataset(s, 100, 5);
    const UncertaintyFit u = uncertainty_regression(ds, RegressionScope::pooled_scenarios());
    CHECK(u.fit.coefficients(0) == doctest::Approx(3).epsilon(0.1));
    for (Eigen::Index j = 1; j < 7; ++j) CHECK(std::abs(u.fit.coefficients(j)) < 0.3);
  }
  SUBCASE("intercept near the expected sample sd") {
    const Dataset ds = testing::synthetic_dataset(testing::linear_spec(50, std::vector<double>(7, 0.0), 6), 100, 6);
    const UncertaintyFit u = uncertainty_regression(ds, RegressionScope::pooled_scenarios());
    // E[s] = c4(n) sigma with c4(100) ~ 0.9975; integer rounding adds 1/12 variance
    const double expected = 0.9975 * std::sqrt(36.0 + 1.0 / 12);
    CHECK(u.fit.intercept == doctest::Approx(expected).epsilon(0.1));
  }
  SUBCASE("single run per cell") {
    const Dataset ds = testing::synthetic_dataset(testing::linear_spec(40, kTruth, 3), 1, 1);
    try {
      uncertainty_regression(ds, RegressionScope::pooled_scenarios());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::insufficient_replication);
    }
  }
}

TEST_CASE("split regression") {
  SUBCASE("no interaction: halves agree") {
    const Dataset ds = testing::synthetic_dataset(testing::linear_spec(50, {10, 12, -5, -7, -6, -9, 1}, 5), 40, 2);
    const std::size_t domestic = 1;
    const FitResult hi = split_regression(ds, domestic, true);
    const FitResult lo = split_regression(ds, domestic, false);
    CHECK(hi.n_obs == ds.observations.size() / 2);
    CHECK(hi.terms.size() == 6);
    CHECK_THROWS_AS(hi.term_index("domestic"), Error);
    for (const auto& id : hi.terms) {
      const auto a = static_cast<Eigen::Index>(hi.term_index(id));
      const auto b = static_cast<Eigen::Index>(lo.term_index(id));
      const double combined = std::sqrt(hi.se(a) * hi.se(a) + lo.se(b) * lo.se(b));
      CHECK(std::abs(hi.coefficients(a) - lo.coefficients(b)) < 3 * combined);
    }
  }
  SUBCASE("interaction shows up as a gap") {
    SyntheticSpec s = testing::linear_spec(45, {10, 12, -5, -7, -6, -9, 1}, 5);
    s.interactions.push_back({0, 1, 10});
    const Dataset ds = testing::synthetic_dataset(s, 40, 3);
    const FitResult hi = split_regression(ds, 1, true);
    const FitResult lo = split_regression(ds, 1, false);
    const auto v = static_cast<Eigen::Index>(hi.term_index("victory"));
    CHECK(hi.coefficients(v) - lo.coefficients(v) == doctest::Approx(10).epsilon(0.05));
  }
}

TEST_CASE("amce oracle") {
  const Dataset flat = testing::synthetic_dataset(testing::linear_spec(30, std::vector<double>(7, 0.0), 0), 1, 1);
  CHECK(amce_oracle(flat, 3) == 0.0);
  std::vector<double> coef(7, 0.0);
  coef[4] = 7;
  const Dataset shifted = testing::synthetic_dataset(testing::linear_spec(30, coef, 0), 1, 1);
  CHECK(amce_oracle(shifted, 4) == doctest::Approx(7));
  Dataset half = shifted;
  std::erase_if(half.observations, [](const Observation& o) { return o.dummies[4] == 1; });
  CHECK_THROWS_AS(amce_oracle(half, 4), Error);
}

TEST_CASE("summary statistics") {
  SUBCASE("constant") {
    const std::vector<int> v(50, 30);
    const SummaryRow r = summarize_scores(v, "c");
    CHECK(r.mean == 30);
    CHECK(r.std_dev == 0);
    CHECK(r.median == 30);
    CHECK(r.pct_over_50 == 0);
  }
  SUBCASE("symmetric pair") {
    const std::vector<int> v{0, 100};
    const SummaryRow r = summarize_scores(v, "p");
    CHECK(r.mean == 50);
    CHECK(r.pct_over_50 == 50.0);
    CHECK(r.median == 0);
  }
  SUBCASE("grouping and the pooled row") {
    const Dataset ds = testing::synthetic_dataset(testing::linear_spec(30, kTruth, 8), 4, 2);
    const auto rows = summarize(ds, GroupBy::scenario);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].group == ds.scenario_titles[0]);
    CHECK(rows[5].group == "Pooled sample");
    CHECK(rows[5].n == ds.observations.size());
    CHECK(summarize(ds, GroupBy::pooled).size() == 1);
    Dataset empty = ds;
    empty.observations.clear();
    CHECK(summarize(empty, GroupBy::scenario).empty());

    // group means are the weighted combination of cell means
    const CellMeans cm = cell_means(ds);
    for (std::uint32_t s = 0; s < 5; ++s) {
      double sum = 0;
      std::size_t n = 0;
      for (const auto& c : cm.cells) {
        if (c.scenario != s) continue;
        sum += c.mean * static_cast<double>(c.n);
        n += c.n;
      }
      CHECK(rows[s].mean == doctest::Approx(sum / static_cast<double>(n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cell means") {
  SUBCASE("constant") {
    const CellMeans cm = cell_means(testing::synthetic_dataset(testing::linear_spec(30, std::vector<double>(7, 0.0), 0), 2, 1));
    CHECK(cm.cells.size() == 640);
    CHECK(cm.max_mean == 30);
    CHECK(cm.min_mean == 30);
  }
  SUBCASE("linear formula") {
    const Dataset ds = testing::synthetic_dataset(testing::linear_spec(40, kTruth, 0), 2, 1);
    const CellMeans cm = cell_means(ds);
    for (const auto& c : cm.cells) {
      double expected = 40;
      const auto a = FactorAssignment::from_index(c.cell, 7);
      for (std::size_t j = 0; j < 7; ++j) expected += a.high(j) ? kTruth[j] : 0.0;
      CHECK(c.mean == doctest::Approx(std::clamp(expected, 0.0, 100.0)));
    }
    CHECK(cm.max_mean == 86);
    CHECK(cm.min_mean == 13);
  }
}

TEST_CASE("histogram") {
  SUBCASE("empty") {
    Dataset ds = testing::synthetic_dataset(testing::linear_spec(30, std::vector<double>(7, 0.0), 0), 1, 1);
    ds.observations.clear();
    const ConditionalHistogram h = histogram(ds, 0);
    CHECK(h.bins.size() == 20);
    for (const auto& b : h.bins) CHECK(b.count_high + b.count_low == 0);
  }
  SUBCASE("constant 30") {
    const ConditionalHistogram h = histogram(testing::synthetic_dataset(testing::linear_spec(30, std::vector<double>(7, 0.0), 0), 1, 1), 2);
    for (const auto& b : h.bins) {
      const bool home = b.start == 30;
      CHECK(b.share_high == (home ? 1.0 : 0.0));
      CHECK(b.share_low == (home ? 1.0 : 0.0));
    }
  }
  SUBCASE("shares normalize and 100 lands in the last bin") {
    const Dataset ds = testing::synthetic_dataset(testing::linear_spec(50, {60, 0, 0, 0, 0, 0, 0}, 15), 5, 3);
    const ConditionalHistogram h = histogram(ds, 0, 10);
    REQUIRE(h.bins.size() == 10);
    double hi = 0, lo = 0;
    std::size_t total = 0;
    for (const auto& b : h.bins) {
      hi += b.share_high;
      lo += b.share_low;
      total += b.count_high + b.count_low;
    }
    CHECK(std::abs(hi - 1.0) < 1e-12);
    CHECK(std::abs(lo - 1.0) < 1e-12);
    CHECK(total == ds.observations.size());
    std::size_t hundreds = 0;
    for (const auto& o : ds.observations) hundreds += o.score == 100 && o.dummies[0];
    CHECK(hundreds > 0);
    CHECK(h.bins.back().count_high >= hundreds);
    CHECK(h.bins.back().end == 100);
  }
  SUBCASE("bin width must divide 100") {
    CHECK_THROWS_AS(histogram(testing::synthetic_dataset(testing::linear_spec(30, std::vector<double>(7, 0.0), 0), 1, 1), 0, 7), Error);
  }
}
