#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "conjoint/parser.hpp"

namespace testing {

using namespace conjoint;

SyntheticSpec linear_spec(double intercept, std::vector<double> coefficients, double noise_sd) {
  SyntheticSpec s;
  s.intercept = intercept;
  s.coefficients = std::move(coefficients);
  s.noise_sd = noise_sd;
  return s;
}

Dataset synthetic_dataset(const SyntheticSpec& spec, std::uint32_t reps, std::int64_t seed, const Design& design) {
  Dataset ds;
  ds.factors = design.factors;
  for (const auto& s : design.scenarios) {
    ds.scenario_ids.push_back(s.id);
    ds.scenario_titles.push_back(s.title);
  }
  ds.model_names = {"synthetic"};
  ds.experiments = {{"synthetic-test", "synthetic", reps, seed}};
  ds.design_hash = design_hash(design);
  const auto cells = enumerate_cells(design.factors.size());
  for (std::uint32_t s = 0; s < design.scenarios.size(); ++s) {
    for (const auto& a : cells) {
      CellBalance balance{"synthetic-test", "synthetic", design.scenarios[s].id, a.cell_index, 0, 0, 0};
      for (std::uint32_t r = 0; r < reps; ++r) {
        const RawResponse resp = synthetic_query(a, spec, {seed, design.scenarios[s].id, a.cell_index, r});
        const ParseOutcome p = parse_score(resp.text);
        if (p.kind != ParseKind::score) {
          ++balance.refused;
          continue;
        }
        ++balance.ok;
        Observation o;
        o.score = *p.score;
        for (bool b : a.bits) o.dummies.push_back(b ? 1 : 0);
        o.scenario = s;
        o.cell = a.cell_index;
        o.cluster = ds.cluster_of(s, a.cell_index);
        o.rep = r;
        ds.observations.push_back(std::move(o));
      }
      ds.balance_report.push_back(balance);
    }
  }
  return ds;
}

Eigen::MatrixXd gauss_jordan_inverse(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    if (a(pivot, col) == 0.0) throw std::runtime_error("singular");
    a.row(col).swap(a.row(pivot));
    inv.row(col).swap(inv.row(pivot));
    const double d = a(col, col);
    a.row(col) /= d;
    inv.row(col) /= d;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      a.row(r) -= f * a.row(col);
      inv.row(r) -= f * inv.row(col);
    }
  }
  return inv;
}

Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  return gauss_jordan_inverse(X.transpose() * X) * (X.transpose() * y);
}

Eigen::MatrixXd brute_sandwich(const Eigen::MatrixXd& X, const Eigen::VectorXd& u,
                               const std::vector<std::uint32_t>& clusters) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) xtx(a, b) += X(i, a) * X(i, b);
    }
  }
  const Eigen::MatrixXd bread = gauss_jordan_inverse(xtx);

  std::map<std::uint32_t, Eigen::VectorXd> scores;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto [it, fresh] = scores.try_emplace(clusters[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(k));
    for (Eigen::Index a = 0; a < k; ++a) it->second(a) += X(i, a) * u(i);
  }
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  for (const auto& [g, s] : scores) {
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) meat(a, b) += s(a) * s(b);
    }
  }
  const double G = static_cast<double>(scores.size());
  const double c = G / (G - 1.0) * (static_cast<double>(n) - 1.0) / static_cast<double>(n - k);
  return c * bread * meat * bread;
}

double max_rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  if (scale == 0.0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("conjoint_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace testing
