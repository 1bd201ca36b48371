#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "supeval/supervisors.hpp"

namespace supeval {

/// Declares a synthetic test case: inliers and outliers drawn from two
/// isotropic Gaussians with known separability. inlier_error_rate is the
/// probability that a generated inlier carries prediction_correct = false.
/// n_train = 0 means "use n_inliers training rows".
struct GaussianCaseSpec {
  int dim = 1;
  double inlier_mean = 0.0;
  double inlier_sigma = 1.0;
  double outlier_mean = 2.0;
  double outlier_sigma = 1.0;
  std::int64_t n_train = 0;
  std::int64_t n_inliers = 1;
  std::int64_t n_outliers = 1;
  double inlier_error_rate = 0.0;
  std::uint64_t seed = 0;
};

struct GeneratedCase {
  FeatureMatrix train;  // drawn from the inlier distribution
  FeatureMatrix test;   // inlier rows first, then outlier rows
  std::vector<bool> is_outlier;
  std::vector<std::optional<bool>> correctness;  // set for inliers only
};

/// Draws the case deterministically from the seed. The generator is
/// MT19937-64 with an explicit Box-Muller transform and bit-level uniform
/// doubles, so outputs are identical across platforms and standard
/// libraries. Throws InvalidParameter on a malformed spec.
GeneratedCase generate_gaussian_case(const GaussianCaseSpec& spec);

/// Reference AUROC for two equal-variance 1-D Gaussians whose coordinate is
/// used directly as the anomaly score: Phi(delta_mu / (sigma * sqrt(2))).
double analytic_auroc_1d(double delta_mu, double sigma);

}  // namespace supeval
