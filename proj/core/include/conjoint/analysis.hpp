#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "conjoint/stats.hpp"

namespace conjoint {

struct AnalysisOptions {
  int bin_width = 5;
  // Factor ids to split on; empty picks domestic/victory/condemnation when
  // present, otherwise the first three factors.
  std::vector<std::string> split_factors;
};

struct LabeledFit {
  std::string label;
  stats::FitResult fit;
};

/// Every estimate the report needs, computed in one pass over a dataset.
/// Datasets pooling several models must hold a single scenario; those are
/// summarized and regressed per model with model fixed effects when pooled.
struct Analysis {
  bool by_model = false;
  std::vector<stats::SummaryRow> summary;
  std::vector<LabeledFit> baseline;
  std::vector<LabeledFit> uncertainty;
  std::optional<std::string> uncertainty_skipped;  // reason, when replication is insufficient
  std::vector<LabeledFit> splits;
  std::vector<std::pair<std::string, double>> amce;  // difference-in-means per factor, pooled
  std::vector<stats::ConditionalHistogram> histograms;
  stats::CellMeans cells;
};

Analysis analyze(const Dataset& dataset, const AnalysisOptions& options = {});

// Full-precision machine-readable form.
std::string analysis_to_json(const Analysis& analysis, const Dataset& dataset);

// tables/{summary,baseline,uncertainty,split}.{md,csv}, tables/cell_means.csv,
// figures/fig1_<factor>.csv. Returns the paths written, in a fixed order.
std::vector<std::filesystem::path> write_report(const Analysis& analysis, const Dataset& dataset,
                                                const std::filesystem::path& out_dir);

}  // namespace conjoint
