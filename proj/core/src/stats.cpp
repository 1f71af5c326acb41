#include "conjoint/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "conjoint/error.hpp"
#include "conjoint/report.hpp"

namespace conjoint::stats {

namespace {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

template <typename Range>
MeanSd mean_sd(const Range& values) {
  MeanSd out;
  const std::size_t n = std::size(values);
  if (n == 0) return out;
  CompensatedSum s;
  for (auto v : values) s.add(static_cast<double>(v));
  out.mean = s.value() / static_cast<double>(n);
  if (n > 1) {
    CompensatedSum ss;
    for (auto v : values) {
      const double d = static_cast<double>(v) - out.mean;
      ss.add(d * d);
    }
    out.sd = std::sqrt(ss.value() / static_cast<double>(n - 1));
  }
  return out;
}

std::set<std::uint32_t> distinct_models(const Dataset& ds) {
  std::set<std::uint32_t> s;
  for (const auto& o : ds.observations) s.insert(o.model);
  return s;
}

std::set<std::uint32_t> distinct_scenarios(const Dataset& ds) {
  std::set<std::uint32_t> s;
  for (const auto& o : ds.observations) s.insert(o.scenario);
  return s;
}

std::vector<std::size_t> all_factors(const Dataset& ds) {
  std::vector<std::size_t> v(ds.factor_count());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = j;
  return v;
}

}  // namespace

// --- summaries -------------------------------------------------------------

SummaryRow summarize_scores(std::span<const int> scores, std::string group) {
  SummaryRow row;
  row.group = std::move(group);
  row.n = scores.size();
  if (scores.empty()) return row;
  std::vector<int> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const MeanSd ms = mean_sd(sorted);
  row.mean = ms.mean;
  row.std_dev = ms.sd;
  row.median = sorted[(sorted.size() - 1) / 2];
  row.min = sorted.front();
  row.max = sorted.back();
  const auto over = std::count_if(sorted.begin(), sorted.end(), [](int s) { return s > 50; });
  row.pct_over_50 = 100.0 * static_cast<double>(over) / static_cast<double>(sorted.size());
  return row;
}

std::vector<SummaryRow> summarize(const Dataset& dataset, GroupBy group_by) {
  std::vector<SummaryRow> rows;
  if (dataset.observations.empty()) return rows;
  if (group_by != GroupBy::pooled) {
    const bool by_scenario = group_by == GroupBy::scenario;
    const std::size_t groups = by_scenario ? dataset.scenario_ids.size() : dataset.model_names.size();
    std::vector<std::vector<int>> scores(groups);
    for (const auto& o : dataset.observations) scores.at(by_scenario ? o.scenario : o.model).push_back(o.score);
    for (std::size_t g = 0; g < groups; ++g) {
      if (scores[g].empty()) continue;
      const std::string label = by_scenario ? dataset.scenario_titles[g] : dataset.model_names[g];
      rows.push_back(summarize_scores(scores[g], label));
    }
  }
  std::vector<int> all;
  all.reserve(dataset.observations.size());
  for (const auto& o : dataset.observations) all.push_back(o.score);
  rows.push_back(summarize_scores(all, "Pooled sample"));
  return rows;
}

// --- least squares ---------------------------------------------------------

OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const std::vector<std::string>& column_names) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (y.size() != n) throw Error(ErrorCode::invalid_input, "response length does not match design rows");
  if (k == 0 || n <= k) {
    throw Error(ErrorCode::degrees_of_freedom,
                "need more observations than parameters (n=" + std::to_string(n) + ", K=" + std::to_string(k) + ")");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < k) {
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = qr.rank(); i < k; ++i) {
      const Eigen::Index col = perm(i);
      if (!names.empty()) names += ", ";
      names += col < static_cast<Eigen::Index>(column_names.size()) ? column_names[col] : "column " + std::to_string(col);
    }
    throw Error(ErrorCode::singular_design, "design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                                                " of " + std::to_string(k) + "); dependent columns: " + names);
  }
  OlsFit fit;
  fit.beta = qr.solve(y);
  fit.residuals = y - X * fit.beta;
  // Exact fit: clear round-off so SEs come out as exact zeros.
  const double tol = 256.0 * std::numeric_limits<double>::epsilon() * (1.0 + y.cwiseAbs().maxCoeff());
  if (fit.residuals.cwiseAbs().maxCoeff() <= tol) {
    fit.residuals.setZero();
    for (Eigen::Index j = 0; j < k; ++j) {
      if (std::abs(fit.beta(j)) <= tol) fit.beta(j) = 0.0;
    }
  }

  const Eigen::MatrixXd r =qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd permuted = r_inv * r_inv.transpose();
  fit.xtx_inverse = qr.colsPermutation() * permuted * qr.colsPermutation().transpose();

  CompensatedSum ys;
  for (Eigen::Index i = 0; i < n; ++i) ys.add(y(i));
  const double ybar = ys.value() / static_cast<double>(n);
  CompensatedSum sst, ssr;
  for (Eigen::Index i = 0; i < n; ++i) {
    sst.add((y(i) - ybar) * (y(i) - ybar));
    ssr.add(fit.residuals(i) * fit.residuals(i));
  }
  fit.sst = sst.value();
  fit.ssr = ssr.value();
  if (fit.sst > 0.0) {
    fit.r_squared = std::clamp(1.0 - fit.ssr / fit.sst, 0.0, 1.0);
  } else {
    fit.r_squared = fit.ssr == 0.0 ? 1.0 : 0.0;
  }
  return fit;
}

ClusterCovariance cluster_robust_se(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                                    std::span<const std::uint32_t> cluster_ids,
                                    const Eigen::MatrixXd& xtx_inverse) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (residuals.size() != n || static_cast<Eigen::Index>(cluster_ids.size()) != n) {
    throw Error(ErrorCode::invalid_input, "cluster ids and residuals must cover every row");
  }
  std::vector<std::uint32_t> ids(cluster_ids.begin(), cluster_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const std::size_t g = ids.size();
  if (g < 2) {
    throw Error(ErrorCode::degrees_of_freedom,
                "cluster-robust inference needs at least 2 clusters, got " + std::to_string(g));
  }
  if (n <= k) throw Error(ErrorCode::degrees_of_freedom, "need more observations than parameters");

  // Per-cluster score sums X_g' u_g, accumulated in row order.
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g), k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto slot = std::lower_bound(ids.begin(), ids.end(), cluster_ids[i]) - ids.begin();
    scores.row(slot) += X.row(i) * residuals(i);
  }
  const Eigen::MatrixXd meat = scores.transpose() * scores;

  ClusterCovariance out;
  out.n_clusters = g;
  const double gd = static_cast<double>(g);
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  out.correction = gd / (gd - 1.0) * (nd - 1.0) / (nd - kd);
  out.covariance = out.correction * (xtx_inverse * meat * xtx_inverse);
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  out.se = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

ClusterCovariance cluster_robust_se(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                                    std::span<const std::uint32_t> cluster_ids) {
  const Eigen::Index k = X.cols();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < k) throw Error(ErrorCode::singular_design, "design matrix is rank deficient");
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd bread =
      qr.colsPermutation() * (r_inv * r_inv.transpose()) * qr.colsPermutation().transpose();
  return cluster_robust_se(X, residuals, cluster_ids, bread);
}

double two_sided_p(double t, double dof) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(dof);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
}

// --- regressions -----------------------------------------------------------

std::size_t FitResult::term_index(std::string_view id) const {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i] == id) return i;
  }
  throw Error(ErrorCode::invalid_input, "fit has no term '" + std::string(id) + "'");
}

FitResult fit_rows(const RegressionRows& rows, const std::vector<Factor>& factors,
                   const std::vector<std::size_t>& regressors, FixedEffects fixed_effects,
                   const std::vector<std::string>& group_labels) {
  const std::size_t n = rows.response.size();
  std::vector<std::uint32_t> fe_groups;
  if (fixed_effects != FixedEffects::none) {
    std::set<std::uint32_t> present(rows.groups.begin(), rows.groups.end());
    // The first group in design order is the reference, absorbed by the intercept.
    fe_groups.assign(std::next(present.begin(), present.empty() ? 0 : 1), present.end());
  }
  const std::size_t p = regressors.size();
  const std::size_t k = 1 + p + fe_groups.size();

  std::vector<std::string> names;
  names.reserve(k);
  names.push_back("(intercept)");
  for (auto j : regressors) names.push_back(factors.at(j).id);
  for (auto g : fe_groups) names.push_back("fe:" + group_labels.at(g));

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    y(r) = rows.response[i];
    X(r, 0) = 1.0;
    for (std::size_t c = 0; c < p; ++c) X(r, static_cast<Eigen::Index>(1 + c)) = rows.dummies[i][regressors[c]];
    for (std::size_t c = 0; c < fe_groups.size(); ++c) {
      if (rows.groups[i] == fe_groups[c]) X(r, static_cast<Eigen::Index>(1 + p + c)) = 1.0;
    }
  }

  const OlsFit ols = fit_ols(X, y, names);
  const ClusterCovariance cov = cluster_robust_se(X, ols.residuals, rows.clusters, ols.xtx_inverse);
  const double dof = static_cast<double>(cov.n_clusters) - 1.0;

  FitResult fit;
  fit.fixed_effects = fixed_effects;
  fit.n_obs = n;
  fit.n_clusters = cov.n_clusters;
  fit.n_params = k;
  fit.r_squared = ols.r_squared;
  fit.residuals = ols.residuals;
  fit.covariance = cov.covariance;
  fit.degenerate_clustering = cov.n_clusters == n;
  fit.intercept = ols.beta(0);
  fit.intercept_se = cov.se(0);
  const auto pi = static_cast<Eigen::Index>(p);
  fit.coefficients = ols.beta.segment(1, pi);
  fit.se = cov.se.segment(1, pi);
  fit.t_stats.resize(pi);
  fit.p_values.resize(pi);
  for (Eigen::Index c = 0; c < pi; ++c) {
    const double b = fit.coefficients(c);
    const double s = fit.se(c);
    double t;
    if (s > 0.0) {
      t = b / s;
    } else {
      t = b == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), b);
    }
    fit.t_stats(c) = t;
    fit.p_values(c) = two_sided_p(t, dof);
    fit.stars.push_back(report::star(fit.p_values(c)));
    fit.terms.push_back(factors[regressors[static_cast<std::size_t>(c)]].id);
    fit.term_labels.push_back(factors[regressors[static_cast<std::size_t>(c)]].name() + ", high");
  }
  fit.fe_coefficients = ols.beta.tail(static_cast<Eigen::Index>(fe_groups.size()));
  for (auto g : fe_groups) fit.fe_labels.push_back(group_labels.at(g));
  return fit;
}

FitResult fit_regression(const Dataset& dataset, const RegressionSpec& spec) {
  if (spec.sample_filter) {
    if (spec.sample_filter->factor >= dataset.factor_count()) {
      throw Error(ErrorCode::invalid_input, "sample filter refers to an unknown factor");
    }
    if (std::find(spec.regressors.begin(), spec.regressors.end(), spec.sample_filter->factor) !=
        spec.regressors.end()) {
      throw Error(ErrorCode::invalid_input, "a factor used to split the sample cannot also be a regressor");
    }
  }
  for (auto j : spec.regressors) {
    if (j >= dataset.factor_count()) throw Error(ErrorCode::invalid_input, "regressor refers to an unknown factor");
  }
  RegressionRows rows;
  rows.response.reserve(dataset.observations.size());
  for (const auto& o : dataset.observations) {
    if (spec.scenario && o.scenario != *spec.scenario) continue;
    if (spec.model && o.model != *spec.model) continue;
    if (spec.sample_filter && (o.dummies[spec.sample_filter->factor] != 0) != spec.sample_filter->high) continue;
    rows.response.push_back(o.score);
    rows.dummies.push_back(o.dummies);
    rows.groups.push_back(spec.fixed_effects == FixedEffects::model ? o.model : o.scenario);
    rows.clusters.push_back(o.cluster);
  }
  const auto& labels = spec.fixed_effects == FixedEffects::model ? dataset.model_names : dataset.scenario_titles;
  return fit_rows(rows, dataset.factors, spec.regressors, spec.fixed_effects, labels);
}

namespace {

RegressionSpec spec_for_scope(const Dataset& dataset, const RegressionScope& scope) {
  RegressionSpec spec;
  spec.regressors = all_factors(dataset);
  const auto models = distinct_models(dataset);
  const auto scenarios = distinct_scenarios(dataset);
  switch (scope.kind) {
    case RegressionScope::Kind::scenario: {
      if (models.size() > 1) throw Error(ErrorCode::invalid_scope, "per-scenario scope requires a single model");
      auto it = std::find(dataset.scenario_ids.begin(), dataset.scenario_ids.end(), scope.scenario_id);
      if (it == dataset.scenario_ids.end()) {
        throw Error(ErrorCode::invalid_scope, "scenario '" + scope.scenario_id + "' is not in the dataset");
      }
      spec.scenario = static_cast<std::uint32_t>(it - dataset.scenario_ids.begin());
      break;
    }
    case RegressionScope::Kind::pooled_scenarios:
      if (models.size() > 1) {
        throw Error(ErrorCode::invalid_scope, "pooled-scenarios scope requires a single model");
      }
      spec.fixed_effects = scenarios.size() > 1 ? FixedEffects::scenario : FixedEffects::none;
      break;
    case RegressionScope::Kind::pooled_models:
      if (scenarios.size() > 1) {
        throw Error(ErrorCode::invalid_scope, "pooled-models scope requires a single scenario");
      }
      spec.fixed_effects = models.size() > 1 ? FixedEffects::model : FixedEffects::none;
      break;
  }
  return spec;
}

}  // namespace

FitResult baseline_regression(const Dataset& dataset, const RegressionScope& scope) {
  return fit_regression(dataset, spec_for_scope(dataset, scope));
}

UncertaintyFit uncertainty_regression(const Dataset& dataset, const RegressionScope& scope) {
  const RegressionSpec spec = spec_for_scope(dataset, scope);
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<int>> by_cell;  // (model, cluster)
  std::map<std::pair<std::uint32_t, std::uint32_t>, const Observation*> exemplar;
  for (const auto& o : dataset.observations) {
    if (spec.scenario && o.scenario != *spec.scenario) continue;
    by_cell[{o.model, o.cluster}].push_back(o.score);
    exemplar.try_emplace({o.model, o.cluster}, &o);
  }
  std::string thin;
  for (const auto& [key, scores] : by_cell) {
    if (scores.size() < 2) {
      const Observation* o = exemplar.at(key);
      if (!thin.empty()) thin += ", ";
      thin += dataset.scenario_ids[o->scenario] + "/" + std::to_string(o->cell);
    }
  }
  if (!thin.empty()) {
    throw Error(ErrorCode::insufficient_replication, "cells with fewer than 2 runs: " + thin);
  }

  UncertaintyFit out;
  RegressionRows rows;
  for (const auto& [key, scores] : by_cell) {
    const Observation* o = exemplar.at(key);
    const MeanSd ms = mean_sd(scores);
    out.cells.push_back({o->cluster, o->scenario, o->model, o->cell, scores.size(), ms.mean, ms.sd});
    rows.response.push_back(ms.sd);
    rows.dummies.push_back(o->dummies);
    rows.groups.push_back(spec.fixed_effects == FixedEffects::model ? o->model : o->scenario);
    rows.clusters.push_back(o->cluster);
  }
  const auto& labels = spec.fixed_effects == FixedEffects::model ? dataset.model_names : dataset.scenario_titles;
  out.fit = fit_rows(rows, dataset.factors, spec.regressors, spec.fixed_effects, labels);
  return out;
}

FitResult split_regression(const Dataset& dataset, std::size_t split_factor, bool high) {
  if (split_factor >= dataset.factor_count()) throw Error(ErrorCode::invalid_input, "unknown split factor");
  RegressionSpec spec = spec_for_scope(dataset, RegressionScope::pooled_scenarios());
  spec.regressors.erase(std::remove(spec.regressors.begin(), spec.regressors.end(), split_factor),
                        spec.regressors.end());
  spec.sample_filter = SampleFilter{split_factor, high};
  return fit_regression(dataset, spec);
}

double amce_oracle(const Dataset& dataset, std::size_t factor) {
  if (factor >= dataset.factor_count()) throw Error(ErrorCode::invalid_input, "unknown factor");
  CompensatedSum high_sum, low_sum;
  std::size_t high_n = 0, low_n = 0;
  for (const auto& o : dataset.observations) {
    if (o.dummies[factor]) {
      high_sum.add(o.score);
      ++high_n;
    } else {
      low_sum.add(o.score);
      ++low_n;
    }
  }
  if (high_n == 0 || low_n == 0) {
    throw Error(ErrorCode::undefined_oracle, "factor '" + dataset.factors[factor].id + "' has an empty level");
  }
  return high_sum.value() / static_cast<double>(high_n) - low_sum.value() / static_cast<double>(low_n);
}

// --- distributions ---------------------------------------------------------

ConditionalHistogram histogram(const Dataset& dataset, std::size_t factor, int bin_width) {
  if (bin_width <= 0 || 100 % bin_width != 0) {
    throw Error(ErrorCode::invalid_input, "bin width must divide 100");
  }
  if (factor >= dataset.factor_count()) throw Error(ErrorCode::invalid_input, "unknown factor");
  ConditionalHistogram h;
  h.factor_id = dataset.factors[factor].id;
  h.bin_width = bin_width;
  const int bins = 100 / bin_width;
  for (int b = 0; b < bins; ++b) h.bins.push_back({b * bin_width, (b + 1) * bin_width});
  std::size_t high_n = 0, low_n = 0;
  for (const auto& o : dataset.observations) {
    const auto b = static_cast<std::size_t>(std::min(o.score / bin_width, bins - 1));
    if (o.dummies[factor]) {
      ++h.bins[b].count_high;
      ++high_n;
    } else {
      ++h.bins[b].count_low;
      ++low_n;
    }
  }
  for (auto& bin : h.bins) {
    bin.share_high = high_n ? static_cast<double>(bin.count_high) / static_cast<double>(high_n) : 0.0;
    bin.share_low = low_n ? static_cast<double>(bin.count_low) / static_cast<double>(low_n) : 0.0;
  }
  return h;
}

CellMeans cell_means(const Dataset& dataset) {
  std::map<std::uint32_t, std::vector<int>> by_cluster;
  std::map<std::uint32_t, const Observation*> exemplar;
  for (const auto& o : dataset.observations) {
    by_cluster[o.cluster].push_back(o.score);
    exemplar.try_emplace(o.cluster, &o);
  }
  CellMeans out;
  for (const auto& [cluster, scores] : by_cluster) {
    const Observation* o = exemplar.at(cluster);
    const MeanSd ms = mean_sd(scores);
    out.cells.push_back({cluster, o->scenario, o->model, o->cell, scores.size(), ms.mean, ms.sd});
  }
  if (!out.cells.empty()) {
    auto [lo, hi] = std::minmax_element(out.cells.begin(), out.cells.end(),
                                        [](const CellStat& a, const CellStat& b) { return a.mean < b.mean; });
    out.min_mean = lo->mean;
    out.max_mean = hi->mean;
  }
  return out;
}

}  // namespace conjoint::stats
