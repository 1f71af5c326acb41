#include "conjoint/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "conjoint/error.hpp"
#include "conjoint/stats.hpp"

namespace conjoint::report {

std::string star(double p_value) {
  if (!(p_value >= 0.0 && p_value <= 1.0)) {
    throw Error(ErrorCode::invalid_input, "p-value " + std::to_string(p_value) + " outside [0, 1]");
  }
  if (p_value < 0.01) return "***";
  if (p_value < 0.05) return "**";
  if (p_value < 0.1) return "*";
  return "";
}

std::string format_estimate(double value) {
  if (value == 0.0) return "0.000";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", value);
  return buf;
}

std::string format_count(std::size_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i != 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

namespace {

std::string full_precision(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string shortest(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string md_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else out.push_back(c);
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed on " + path.string());
}

}  // namespace

std::string TableArtifact::markdown() const {
  std::string out = "### " + title + "\n\n|";
  for (const auto& c : column_labels) out += " " + md_escape(c) + " |";
  out += "\n|";
  for (std::size_t i = 0; i < column_labels.size(); ++i) out += i == 0 ? " :--- |" : " ---: |";
  out += "\n";
  for (const auto& row : rows) {
    out += "|";
    for (const auto& cell : row) out += " " + md_escape(cell) + " |";
    out += "\n";
  }
  if (!footnotes.empty()) {
    out += "\n";
    for (const auto& f : footnotes) out += f + "\n\n";
    out.pop_back();
  }
  return out;
}

std::string TableArtifact::csv() const {
  std::string out;
  for (const auto& row : csv_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += csv_field(row[i]);
    }
    out += "\n";
  }
  return out;
}

TableArtifact render_regression_table(const std::vector<stats::FitResult>& fits,
                                      const std::vector<std::string>& column_labels,
                                      const RegressionLayout& layout) {
  if (fits.empty()) throw Error(ErrorCode::layout, "no fits to render");
  if (column_labels.size() != fits.size()) throw Error(ErrorCode::layout, "one column label per fit required");

  std::vector<std::string> terms = layout.terms.empty() ? fits.front().terms : layout.terms;
  std::vector<std::string> labels = layout.term_labels;
  if (labels.empty()) {
    for (const auto& t : terms) {
      std::string label = t;
      for (const auto& f : fits) {
        for (std::size_t i = 0; i < f.terms.size(); ++i) {
          if (f.terms[i] == t) label = f.term_labels[i];
        }
      }
      labels.push_back(label);
    }
  }
  if (labels.size() != terms.size()) throw Error(ErrorCode::layout, "term labels do not match terms");

  // position[f][t]: index of layout term t in fit f, or -1.
  std::vector<std::vector<long>> position(fits.size(), std::vector<long>(terms.size(), -1));
  for (std::size_t f = 0; f < fits.size(); ++f) {
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < fits[f].terms.size(); ++i) {
      while (cursor < terms.size() && terms[cursor] != fits[f].terms[i]) ++cursor;
      if (cursor == terms.size()) {
        throw Error(ErrorCode::layout, "fit '" + column_labels[f] + "' has term '" + fits[f].terms[i] +
                                           "' out of layout order");
      }
      position[f][cursor++] = static_cast<long>(i);
    }
    if (!layout.allow_missing_terms && fits[f].terms.size() != terms.size()) {
      throw Error(ErrorCode::layout, "fit '" + column_labels[f] + "' does not share the regressor list");
    }
  }

  TableArtifact t;
  t.title = layout.title;
  t.column_labels.push_back(layout.dependent_variable);
  t.column_labels.insert(t.column_labels.end(), column_labels.begin(), column_labels.end());
  t.csv_rows.push_back({"column", "term", "estimate", "std_error", "stars"});

  for (std::size_t r = 0; r < terms.size(); ++r) {
    std::vector<std::string> coef_row{labels[r]};
    std::vector<std::string> se_row{""};
    for (std::size_t f = 0; f < fits.size(); ++f) {
      const long i = position[f][r];
      if (i < 0) {
        coef_row.emplace_back();
        se_row.emplace_back();
        continue;
      }
      const std::string b = format_estimate(fits[f].coefficients(i));
      const std::string s = format_estimate(fits[f].se(i));
      const std::string& stars = fits[f].stars[static_cast<std::size_t>(i)];
      coef_row.push_back(b + stars);
      se_row.push_back("(" + s + ")");
      t.csv_rows.push_back({column_labels[f], terms[r], full_precision(fits[f].coefficients(i)),
                             full_precision(fits[f].se(i)), stars});
    }
    t.rows.push_back(std::move(coef_row));
    t.rows.push_back(std::move(se_row));
  }
  std::vector<std::string> n_row{"Observations"};
  std::vector<std::string> r2_row{"R-squared"};
  for (std::size_t f = 0; f < fits.size(); ++f) {
    n_row.push_back(format_count(fits[f].n_obs));
    r2_row.push_back(fixed(fits[f].r_squared, 3));
    t.csv_rows.push_back({column_labels[f], "Observations", std::to_string(fits[f].n_obs), "", ""});
    t.csv_rows.push_back({column_labels[f], "R-squared", full_precision(fits[f].r_squared), "", ""});
  }
  t.rows.push_back(std::move(n_row));
  t.rows.push_back(std::move(r2_row));

  t.footnotes.push_back(kClusterFootnote);
  for (const auto& note : layout.notes) t.footnotes.push_back(note);
  bool degenerate = false;
  for (const auto& f : fits) degenerate = degenerate || f.degenerate_clustering;
  if (degenerate) t.footnotes.push_back("Each vignette contributes a single row, so clusters are singletons.");
  t.footnotes.push_back(kStarFootnote);
  return t;
}

TableArtifact render_summary_table(const std::vector<stats::SummaryRow>& rows, const std::string& title) {
  TableArtifact t;
  t.title = title;
  t.column_labels = {"", "Mean", "Std. dev", "Median", "Min", "Max", "% of observations >50"};
  t.csv_rows.push_back({"group", "n", "mean", "std_dev", "median", "min", "max", "pct_over_50"});
  for (const auto& r : rows) {
    t.rows.push_back({r.group, fixed(r.mean, 1), fixed(r.std_dev, 1), std::to_string(r.median),
                      std::to_string(r.min), std::to_string(r.max), fixed(r.pct_over_50, 1)});
    t.csv_rows.push_back({r.group, std::to_string(r.n), full_precision(r.mean), full_precision(r.std_dev),
                          std::to_string(r.median), std::to_string(r.min), std::to_string(r.max),
                          full_precision(r.pct_over_50)});
  }
  return t;
}

std::size_t emit_histogram_data(const std::vector<stats::ConditionalHistogram>& histograms,
                                const std::filesystem::path& dir) {
  if (histograms.empty()) throw Error(ErrorCode::invalid_input, "no histograms to emit");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& h : histograms) {
    std::string text = "bin_start,bin_end,share_high,share_low,count_high,count_low\n";
    for (const auto& b : h.bins) {
      text += std::to_string(b.start) + "," + std::to_string(b.end) + "," + shortest(b.share_high) + "," +
              shortest(b.share_low) + "," + std::to_string(b.count_high) + "," + std::to_string(b.count_low) + "\n";
    }
    write_file(dir / ("fig1_" + h.factor_id + ".csv"), text);
  }
  return histograms.size();
}

void write_table(const TableArtifact& table, const std::filesystem::path& dir, const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / (stem + ".md"), table.markdown());
  write_file(dir / (stem + ".csv"), table.csv());
}

}  // namespace conjoint::report
