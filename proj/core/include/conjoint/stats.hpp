#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conjoint/store.hpp"

namespace conjoint::stats {

// --- summaries -------------------------------------------------------------

enum class GroupBy { scenario, model, pooled };

struct SummaryRow {
  std::string group;
  std::size_t n = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // sample (n-1) denominator
  int median = 0;        // lower middle element for even n
  int min = 0;
  int max = 0;
  double pct_over_50 = 0.0;  // share strictly above 50, in percent
};

// One row per group in dataset order, followed by a "Pooled sample" row.
// GroupBy::pooled yields only the pooled row. Empty data yields no rows.
std::vector<SummaryRow> summarize(const Dataset& dataset, GroupBy group_by);
SummaryRow summarize_scores(std::span<const int> scores, std::string group);

// --- least squares ---------------------------------------------------------

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  double ssr = 0.0;
  double sst = 0.0;
  double r_squared = 0.0;
  Eigen::MatrixXd xtx_inverse;  // (X'X)^-1 from the QR factor, reused as the sandwich bread
};

/// Least squares via column-pivoting Householder QR. X must carry its own
/// intercept column. Throws Error(singular_design) naming the dependent
/// columns when X is rank deficient, Error(degrees_of_freedom) when n <= K.
OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const std::vector<std::string>& column_names = {});

struct ClusterCovariance {
  Eigen::MatrixXd covariance;
  Eigen::VectorXd se;
  std::size_t n_clusters = 0;
  double correction = 1.0;  // G/(G-1) * (N-1)/(N-K)
};

/// One-way cluster-robust sandwich covariance
///   V = c (X'X)^-1 [sum_g (X_g' u_g)(X_g' u_g)'] (X'X)^-1.
ClusterCovariance cluster_robust_se(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                                    std::span<const std::uint32_t> cluster_ids);

ClusterCovariance cluster_robust_se(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                                    std::span<const std::uint32_t> cluster_ids,
                                    const Eigen::MatrixXd& xtx_inverse);

// --- regressions -----------------------------------------------------------

enum class FixedEffects { none, scenario, model };

struct SampleFilter {
  std::size_t factor = 0;
  bool high = true;
};

struct RegressionSpec {
  std::vector<std::size_t> regressors;  // factor indices, design order
  FixedEffects fixed_effects = FixedEffects::none;
  std::optional<SampleFilter> sample_filter;
  std::optional<std::uint32_t> scenario;  // restrict to one scenario slot
  std::optional<std::uint32_t> model;     // restrict to one model slot
};

struct FitResult {
  std::vector<std::string> terms;  // factor ids of the regressors
  std::vector<std::string> term_labels;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd se;
  Eigen::VectorXd t_stats;
  Eigen::VectorXd p_values;
  std::vector<std::string> stars;
  double intercept = 0.0;
  double intercept_se = 0.0;
  std::vector<std::string> fe_labels;  // non-reference groups
  Eigen::VectorXd fe_coefficients;
  FixedEffects fixed_effects = FixedEffects::none;
  std::size_t n_obs = 0;
  std::size_t n_clusters = 0;
  std::size_t n_params = 0;
  double r_squared = 0.0;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd covariance;  // full, column order: intercept, regressors, fixed effects
  bool degenerate_clustering = false;  // every cluster holds a single row

  std::size_t term_index(std::string_view id) const;
};

// Fits score on the requested dummies with reference-category fixed effects,
// clustering on vignette, t(G-1) p-values.
FitResult fit_regression(const Dataset& dataset, const RegressionSpec& spec);

// Lower level: any response over an arbitrary row set.
struct RegressionRows {
  std::vector<double> response;
  std::vector<std::vector<std::uint8_t>> dummies;
  std::vector<std::uint32_t> groups;  // fixed-effect group per row (ignored for FixedEffects::none)
  std::vector<std::uint32_t> clusters;
};

FitResult fit_rows(const RegressionRows& rows, const std::vector<Factor>& factors,
                   const std::vector<std::size_t>& regressors, FixedEffects fixed_effects,
                   const std::vector<std::string>& group_labels);

struct RegressionScope {
  enum class Kind { scenario, pooled_scenarios, pooled_models };
  Kind kind = Kind::pooled_scenarios;
  std::string scenario_id;  // for Kind::scenario

  static RegressionScope single(std::string scenario_id) { return {Kind::scenario, std::move(scenario_id)}; }
  static RegressionScope pooled_scenarios() { return {Kind::pooled_scenarios, {}}; }
  static RegressionScope pooled_models() { return {Kind::pooled_models, {}}; }
};

FitResult baseline_regression(const Dataset& dataset, const RegressionScope& scope);

struct CellStat {
  std::uint32_t cluster = 0;
  std::uint32_t scenario = 0;
  std::uint32_t model = 0;
  std::uint32_t cell = 0;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample sd across the cell's runs
};

struct UncertaintyFit {
  FitResult fit;
  std::vector<CellStat> cells;
};

// Regresses the per-cell sample sd on the dummies, one row per vignette.
// Error(insufficient_replication) if any cell has fewer than two runs.
UncertaintyFit uncertainty_regression(const Dataset& dataset, const RegressionScope& scope);

// Pooled regression on the half where split_factor == level, without that factor.
FitResult split_regression(const Dataset& dataset, std::size_t split_factor, bool high);

// mean(score | factor high) - mean(score | factor low), by direct accumulation.
double amce_oracle(const Dataset& dataset, std::size_t factor);

// --- distributions ---------------------------------------------------------

struct HistogramBin {
  int start = 0;
  int end = 0;  // exclusive, except that the last bin also holds 100
  std::size_t count_high = 0;
  std::size_t count_low = 0;
  double share_high = 0.0;
  double share_low = 0.0;
};

struct ConditionalHistogram {
  std::string factor_id;
  int bin_width = 5;
  std::vector<HistogramBin> bins;
};

ConditionalHistogram histogram(const Dataset& dataset, std::size_t factor, int bin_width = 5);

struct CellMeans {
  std::vector<CellStat> cells;  // per vignette, ascending cluster id
  double max_mean = 0.0;
  double min_mean = 0.0;
};

CellMeans cell_means(const Dataset& dataset);

// Two-sided p-value of t under Student-t with dof degrees of freedom.
double two_sided_p(double t, double dof);

}  // namespace conjoint::stats
