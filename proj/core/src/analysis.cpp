#include "conjoint/analysis.hpp"

#include <fstream>
#include <set>

#include "conjoint/error.hpp"
#include "conjoint/report.hpp"
#include "json_io.hpp"

namespace conjoint {

using detail::Json;

namespace {

constexpr const char* kDependentVariable = "Dep. var: invasion score, 0-100, 100 = definitely invade, 0 = definitely not";
constexpr const char* kUncertaintyVariable = "Dep. var: std. deviation of the invasion score across runs";

std::set<std::uint32_t> present(const Dataset& ds, bool models) {
  std::set<std::uint32_t> s;
  for (const auto& o : ds.observations) s.insert(models ? o.model : o.scenario);
  return s;
}

std::vector<std::size_t> resolve_split_factors(const Dataset& ds, const AnalysisOptions& options) {
  std::vector<std::size_t> out;
  auto index_of = [&](const std::string& id) -> std::size_t {
    for (std::size_t j = 0; j < ds.factors.size(); ++j) {
      if (ds.factors[j].id == id) return j;
    }
    return Design::npos;
  };
  if (!options.split_factors.empty()) {
    for (const auto& id : options.split_factors) {
      const std::size_t j = index_of(id);
      if (j == Design::npos) throw Error(ErrorCode::invalid_input, "unknown split factor '" + id + "'");
      out.push_back(j);
    }
    return out;
  }
  for (const char* id : {"domestic", "victory", "condemnation"}) {
    if (const std::size_t j = index_of(id); j != Design::npos) out.push_back(j);
  }
  if (out.empty()) {
    for (std::size_t j = 0; j < std::min<std::size_t>(3, ds.factors.size()); ++j) out.push_back(j);
  }
  return out;
}

// Restricts a multi-model dataset to one model, keeping slot numbering.
Dataset only_model(const Dataset& ds, std::uint32_t model) {
  Dataset out = ds;
  out.observations.clear();
  for (const auto& o : ds.observations) {
    if (o.model == model) out.observations.push_back(o);
  }
  return out;
}

Json fit_to_json(const LabeledFit& lf) {
  const auto& f = lf.fit;
  Json terms = Json::array();
  for (std::size_t i = 0; i < f.terms.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    terms.push_back({{"term", f.terms[i]},
                     {"label", f.term_labels[i]},
                     {"estimate", f.coefficients(e)},
                     {"std_error", f.se(e)},
                     {"t", f.t_stats(e)},
                     {"p", f.p_values(e)},
                     {"stars", f.stars[i]}});
  }
  Json fe = Json::array();
  for (std::size_t i = 0; i < f.fe_labels.size(); ++i) {
    fe.push_back({{"group", f.fe_labels[i]}, {"estimate", f.fe_coefficients(static_cast<Eigen::Index>(i))}});
  }
  const char* fe_kind = f.fixed_effects == stats::FixedEffects::scenario ? "scenario"
                        : f.fixed_effects == stats::FixedEffects::model  ? "model"
                                                                         : "none";
  return {{"label", lf.label},
          {"terms", terms},
          {"intercept", f.intercept},
          {"intercept_std_error", f.intercept_se},
          {"fixed_effects", fe_kind},
          {"fixed_effect_estimates", fe},
          {"n_obs", f.n_obs},
          {"n_clusters", f.n_clusters},
          {"n_params", f.n_params},
          {"r_squared", f.r_squared},
          {"degenerate_clustering", f.degenerate_clustering}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed on " + path.string());
}

std::vector<stats::FitResult> fits_of(const std::vector<LabeledFit>& v) {
  std::vector<stats::FitResult> out;
  for (const auto& lf : v) out.push_back(lf.fit);
  return out;
}

std::vector<std::string> labels_of(const std::vector<LabeledFit>& v) {
  std::vector<std::string> out;
  for (const auto& lf : v) out.push_back(lf.label);
  return out;
}

}  // namespace

Analysis analyze(const Dataset& dataset, const AnalysisOptions& options) {
  if (dataset.observations.empty()) throw Error(ErrorCode::invalid_input, "dataset has no scored observations");
  Analysis a;
  const auto models = present(dataset, true);
  const auto scenarios = present(dataset, false);
  a.by_model = models.size() > 1;
  if (a.by_model && scenarios.size() > 1) {
    throw Error(ErrorCode::invalid_scope,
                "datasets pooling several models must hold a single scenario; analyze one model at a time");
  }

  a.summary = stats::summarize(dataset, a.by_model ? stats::GroupBy::model : stats::GroupBy::scenario);

  if (a.by_model) {
    for (auto m : models) {
      const Dataset sub = only_model(dataset, m);
      a.baseline.push_back({dataset.model_names[m], stats::baseline_regression(sub, stats::RegressionScope::pooled_scenarios())});
    }
    a.baseline.push_back({"Pooled", stats::baseline_regression(dataset, stats::RegressionScope::pooled_models())});
  } else {
    for (auto s : scenarios) {
      a.baseline.push_back({dataset.scenario_titles[s],
                            stats::baseline_regression(dataset, stats::RegressionScope::single(dataset.scenario_ids[s]))});
    }
    if (scenarios.size() > 1) {
      a.baseline.push_back({"Pooled", stats::baseline_regression(dataset, stats::RegressionScope::pooled_scenarios())});
    }
  }

  try {
    if (a.by_model) {
      for (auto m : models) {
        const Dataset sub = only_model(dataset, m);
        a.uncertainty.push_back({dataset.model_names[m],
                                 stats::uncertainty_regression(sub, stats::RegressionScope::pooled_scenarios()).fit});
      }
      a.uncertainty.push_back({"Pooled", stats::uncertainty_regression(dataset, stats::RegressionScope::pooled_models()).fit});
    } else {
      for (auto s : scenarios) {
        a.uncertainty.push_back(
            {dataset.scenario_titles[s],
             stats::uncertainty_regression(dataset, stats::RegressionScope::single(dataset.scenario_ids[s])).fit});
      }
      if (scenarios.size() > 1) {
        a.uncertainty.push_back(
            {"Pooled", stats::uncertainty_regression(dataset, stats::RegressionScope::pooled_scenarios()).fit});
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::insufficient_replication && e.code() != ErrorCode::degrees_of_freedom) throw;
    a.uncertainty.clear();
    a.uncertainty_skipped = e.what();
  }

  if (!a.by_model) {
    for (std::size_t j : resolve_split_factors(dataset, options)) {
      const std::string& name = dataset.factors[j].name();
      a.splits.push_back({name + " high", stats::split_regression(dataset, j, true)});
      a.splits.push_back({name + " low", stats::split_regression(dataset, j, false)});
    }
  }

  for (std::size_t j = 0; j < dataset.factor_count(); ++j) {
    a.amce.emplace_back(dataset.factors[j].id, stats::amce_oracle(dataset, j));
    a.histograms.push_back(stats::histogram(dataset, j, options.bin_width));
  }
  a.cells = stats::cell_means(dataset);
  return a;
}

std::string analysis_to_json(const Analysis& a, const Dataset& ds) {
  Json summary = Json::array();
  for (const auto& r : a.summary) {
    summary.push_back({{"group", r.group}, {"n", r.n}, {"mean", r.mean}, {"std_dev", r.std_dev},
                       {"median", r.median}, {"min", r.min}, {"max", r.max}, {"pct_over_50", r.pct_over_50}});
  }
  auto fits = [](const std::vector<LabeledFit>& v) {
    Json out = Json::array();
    for (const auto& lf : v) out.push_back(fit_to_json(lf));
    return out;
  };
  Json amce = Json::object();
  for (const auto& [id, v] : a.amce) amce[id] = v;
  Json cells = Json::array();
  for (const auto& c : a.cells.cells) {
    cells.push_back({{"scenario", ds.scenario_ids[c.scenario]}, {"cell", c.cell}, {"n", c.n},
                     {"mean", c.mean}, {"sd", c.sd}});
  }
  Json models = ds.model_names;
  Json j = {{"design_hash", ds.design_hash},
            {"models", models},
            {"scenarios", ds.scenario_ids},
            {"n_observations", ds.observations.size()},
            {"grouped_by", a.by_model ? "model" : "scenario"},
            {"summary", summary},
            {"baseline", fits(a.baseline)},
            {"uncertainty", fits(a.uncertainty)},
            {"uncertainty_skipped", a.uncertainty_skipped ? Json(*a.uncertainty_skipped) : Json(nullptr)},
            {"splits", fits(a.splits)},
            {"difference_in_means", amce},
            {"cell_means", {{"max", a.cells.max_mean}, {"min", a.cells.min_mean}, {"cells", cells}}}};
  return j.dump(2);
}

std::vector<std::filesystem::path> write_report(const Analysis& a, const Dataset& ds,
                                                const std::filesystem::path& out_dir) {
  const auto tables = out_dir / "tables";
  const auto figures = out_dir / "figures";
  std::vector<std::filesystem::path> written;
  auto emit = [&](const report::TableArtifact& t, const std::string& stem) {
    report::write_table(t, tables, stem);
    written.push_back(tables / (stem + ".md"));
    written.push_back(tables / (stem + ".csv"));
  };

  emit(report::render_summary_table(a.summary, a.by_model ? "Summary statistics by model"
                                                           : "Summary statistics by scenario"),
       "summary");

  const std::string fe_note = a.by_model ? "Pooled regression uses model fixed effects."
                                         : "Pooled regression uses scenario fixed effects.";
  {
    report::RegressionLayout layout;
    layout.title = "Baseline regression";
    layout.dependent_variable = kDependentVariable;
    if (a.baseline.size() > 1) layout.notes.push_back(fe_note);
    emit(report::render_regression_table(fits_of(a.baseline), labels_of(a.baseline), layout), "baseline");
  }
  if (!a.uncertainty.empty()) {
    report::RegressionLayout layout;
    layout.title = "Uncertainty regression";
    layout.dependent_variable = kUncertaintyVariable;
    if (a.uncertainty.size() > 1) layout.notes.push_back(fe_note);
    emit(report::render_regression_table(fits_of(a.uncertainty), labels_of(a.uncertainty), layout), "uncertainty");
  }
  if (!a.splits.empty()) {
    report::RegressionLayout layout;
    layout.title = "Regression split by sample";
    layout.dependent_variable = kDependentVariable;
    for (const auto& f : ds.factors) {
      layout.terms.push_back(f.id);
      layout.term_labels.push_back(f.name() + ", high");
    }
    layout.allow_missing_terms = true;
    if (ds.scenario_ids.size() > 1) layout.notes.push_back("All regressions are pooled and use scenario fixed effects.");
    emit(report::render_regression_table(fits_of(a.splits), labels_of(a.splits), layout), "split");
  }

  {
    std::string text = "scenario,cell_index,n,mean,sd\n";
    char buf[96];
    for (const auto& c : a.cells.cells) {
      std::snprintf(buf, sizeof buf, ",%u,%zu,%.6f,%.6f\n", c.cell, c.n, c.mean, c.sd);
      text += ds.scenario_ids[c.scenario] + buf;
    }
    write_text(tables / "cell_means.csv", text);
    written.push_back(tables / "cell_means.csv");
  }

  report::emit_histogram_data(a.histograms, figures);
  for (const auto& h : a.histograms) written.push_back(figures / ("fig1_" + h.factor_id + ".csv"));
  return written;
}

}  // namespace conjoint
