#include "conjoint/analysis.hpp"
#include "conjoint/error.hpp"

#include <doctest.h>
#include <json.hpp>

#include "support.hpp"

using namespace conjoint;

namespace {

const std::vector<double> kTruth = {20, 25, -5, -7, -6, -9, 1};

}  // namespace

TEST_CASE("analysis over five scenarios") {
  const Dataset ds = testing::synthetic_dataset(testing::linear_spec(50, kTruth, 5), 4, 1);
  const Analysis a = analyze(ds);
  CHECK(!a.by_model);
  CHECK(a.summary.size() == 6);
  REQUIRE(a.baseline.size() == 6);
  CHECK(a.baseline.back().label == "Pooled");
  CHECK(a.baseline.back().fit.fixed_effects == stats::FixedEffects::scenario);
  CHECK(a.uncertainty.size() == 6);
  CHECK(!a.uncertainty_skipped);
  REQUIRE(a.splits.size() == 6);
  CHECK_THROWS_AS(a.splits[0].fit.term_index("domestic"), Error);
  CHECK_THROWS_AS(a.splits[2].fit.term_index("victory"), Error);
  CHECK_THROWS_AS(a.splits[4].fit.term_index("condemnation"), Error);
  CHECK(a.amce.size() == 7);
  CHECK(a.histograms.size() == 7);

  const auto j = nlohmann::json::parse(analysis_to_json(a, ds));
  CHECK(j["n_observations"] == 2560);
  CHECK(j["baseline"].size() == 6);
  CHECK(j["baseline"][5]["terms"][0]["term"] == "victory");
  CHECK(j["baseline"][5]["terms"][0]["estimate"].get<double>() == a.baseline[5].fit.coefficients(0));
  CHECK(j["uncertainty_skipped"].is_null());
  CHECK(j["difference_in_means"].size() == 7);
}

TEST_CASE("one rep per cell skips the uncertainty regression") {
  const Dataset ds = testing::synthetic_dataset(testing::linear_spec(50, kTruth, 5), 1, 1);
  const Analysis a = analyze(ds);
  CHECK(a.uncertainty.empty());
  CHECK(a.uncertainty_skipped);
}

TEST_CASE("several models need a single scenario") {
  Dataset ds = testing::synthetic_dataset(testing::linear_spec(50, kTruth, 5), 4, 1);
  ds.model_names.push_back("second");
  for (auto& o : ds.observations) o.model = o.rep % 2;
  CHECK_THROWS_AS(analyze(ds), Error);

  std::erase_if(ds.observations, [](const Observation& o) { return o.scenario != 0; });
  const Analysis a = analyze(ds);
  CHECK(a.by_model);
  REQUIRE(a.baseline.size() == 3);
  CHECK(a.baseline[2].fit.fixed_effects == stats::FixedEffects::model);
  CHECK(a.summary.size() == 3);
  CHECK(a.splits.empty());
}

TEST_CASE("report directory layout") {
  const auto dir = testing::scratch_dir("analysis_report");
  const Dataset ds = testing::synthetic_dataset(testing::linear_spec(50, kTruth, 5), 3, 1);
  const auto files = write_report(analyze(ds), ds, dir);
  for (const char* rel : {"tables/summary.md", "tables/summary.csv", "tables/baseline.md", "tables/baseline.csv",
                          "tables/uncertainty.md", "tables/uncertainty.csv", "tables/split.md", "tables/split.csv",
                          "tables/cell_means.csv", "figures/fig1_victory.csv", "figures/fig1_window.csv"}) {
    CAPTURE(rel);
    CHECK(std::filesystem::exists(dir / rel));
  }
  CHECK(files.size() == 16);
  const std::string md = testing::slurp(dir / "tables/baseline.md");
  CHECK(md.find("Pooled regression uses scenario fixed effects.") != std::string::npos);
}

TEST_CASE("empty dataset cannot be analyzed") {
  Dataset ds = testing::synthetic_dataset(testing::linear_spec(50, kTruth, 5), 1, 1);
  ds.observations.clear();
  CHECK_THROWS_AS(analyze(ds), Error);
}
