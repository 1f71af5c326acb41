#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace conjoint::stats {
struct FitResult;
struct SummaryRow;
struct ConditionalHistogram;
}  // namespace conjoint::stats

namespace conjoint::report {

// "***" p<0.01, "**" p<0.05, "*" p<0.1, "" otherwise. Error(invalid_input) outside [0,1].
std::string star(double p_value);

// Four significant digits; exact zero prints as "0.000".
std::string format_estimate(double value);

// "64,000"
std::string format_count(std::size_t n);

struct TableArtifact {
  std::string title;
  std::vector<std::string> column_labels;  // first entry labels the row-name column
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footnotes;
  std::vector<std::vector<std::string>> csv_rows;  // first row is the header

  std::string markdown() const;
  std::string csv() const;
};

struct RegressionLayout {
  std::string title;
  std::string dependent_variable;
  std::vector<std::string> terms;        // factor ids; empty takes the first fit's terms
  std::vector<std::string> term_labels;  // parallel to terms; empty takes the fits' labels
  bool allow_missing_terms = false;      // blank cells where a fit lacks a term
  std::vector<std::string> notes;        // extra footnotes, e.g. the fixed-effects statement
};

inline constexpr const char* kClusterFootnote = "Standard errors clustered on vignette in parentheses.";
inline constexpr const char* kStarFootnote = "*** p<0.01, ** p<0.05, * p<0.1";

/// One column per fit: coefficient with stars, SE in parentheses on the next
/// row, then Observations and R-squared. Error(layout) if a fit's terms do not
/// follow the layout.
TableArtifact render_regression_table(const std::vector<stats::FitResult>& fits,
                                      const std::vector<std::string>& column_labels,
                                      const RegressionLayout& layout);

TableArtifact render_summary_table(const std::vector<stats::SummaryRow>& rows,
                                   const std::string& title = "Summary statistics");

// Writes fig1_<factor>.csv per histogram into dir; returns the number of files.
std::size_t emit_histogram_data(const std::vector<stats::ConditionalHistogram>& histograms,
                                const std::filesystem::path& dir);

// Writes <dir>/<stem>.md and <dir>/<stem>.csv.
void write_table(const TableArtifact& table, const std::filesystem::path& dir, const std::string& stem);

}  // namespace conjoint::report
