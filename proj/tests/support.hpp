#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "conjoint/design.hpp"
#include "conjoint/respondent.hpp"
#include "conjoint/store.hpp"

namespace testing {

// Complete balanced dataset drawn straight from the synthetic respondent.
conjoint::Dataset synthetic_dataset(const conjoint::SyntheticSpec& spec, std::uint32_t reps,
                                    std::int64_t seed,
                                    const conjoint::Design& design = conjoint::builtin_design());

conjoint::SyntheticSpec linear_spec(double intercept, std::vector<double> coefficients, double noise_sd);

// Dense inverse by Gauss-Jordan with partial pivoting.
Eigen::MatrixXd gauss_jordan_inverse(Eigen::MatrixXd a);

// Normal-equation least squares.
Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// c (X'X)^-1 [sum_g s_g s_g'] (X'X)^-1 with explicit loops over rows and clusters.
Eigen::MatrixXd brute_sandwich(const Eigen::MatrixXd& X, const Eigen::VectorXd& u,
                               const std::vector<std::uint32_t>& clusters);

double max_rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

std::string slurp(const std::filesystem::path& path);

}  // namespace testing
