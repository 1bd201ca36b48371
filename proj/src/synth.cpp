#include "supeval/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace supeval {

namespace {

// std::normal_distribution and friends are implementation-defined, so the
// draw sequence is spelled out here: uniforms come straight from the top 53
// bits of MT19937-64 output and normals from the Box-Muller transform.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]; keeps the log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

std::string row_id(const char* prefix, std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%06lld", prefix,
                static_cast<long long>(index));
  return buf;
}

void check_spec(const GaussianCaseSpec& spec) {
  if (spec.dim < 1) {
    throw Error(ErrorCode::InvalidParameter, "dim must be >= 1");
  }
  if (!(spec.inlier_sigma > 0.0) || !(spec.outlier_sigma > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "sigma must be > 0");
  }
  if (spec.n_inliers < 1 || spec.n_outliers < 1) {
    throw Error(ErrorCode::InvalidParameter,
                "need at least one inlier and one outlier");
  }
  if (spec.n_train < 0) {
    throw Error(ErrorCode::InvalidParameter, "n_train must be >= 0");
  }
  if (!(spec.inlier_error_rate >= 0.0 && spec.inlier_error_rate <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter,
                "inlier_error_rate must lie in [0, 1]");
  }
}

}  // namespace

GeneratedCase generate_gaussian_case(const GaussianCaseSpec& spec) {
  check_spec(spec);
  PortableRng rng(spec.seed);
  const std::size_t dim = static_cast<std::size_t>(spec.dim);
  const std::int64_t n_train =
      spec.n_train > 0 ? spec.n_train : spec.n_inliers;

  auto draw_rows = [&](std::int64_t count, double mean, double sigma,
                       const char* prefix, std::vector<std::string>& ids,
                       std::vector<double>& values) {
    for (std::int64_t i = 0; i < count; ++i) {
      ids.push_back(row_id(prefix, i));
      for (std::size_t j = 0; j < dim; ++j) {
        values.push_back(mean + sigma * rng.normal());
      }
    }
  };

  std::vector<std::string> train_ids;
  std::vector<double> train_values;
  train_ids.reserve(static_cast<std::size_t>(n_train));
  train_values.reserve(static_cast<std::size_t>(n_train) * dim);
  draw_rows(n_train, spec.inlier_mean, spec.inlier_sigma, "tr_", train_ids,
            train_values);

  const std::size_t n_test =
      static_cast<std::size_t>(spec.n_inliers + spec.n_outliers);
  std::vector<std::string> test_ids;
  std::vector<double> test_values;
  test_ids.reserve(n_test);
  test_values.reserve(n_test * dim);
  std::vector<bool> is_outlier;
  is_outlier.reserve(n_test);
  std::vector<std::optional<bool>> correctness;
  correctness.reserve(n_test);

  for (std::int64_t i = 0; i < spec.n_inliers; ++i) {
    test_ids.push_back(row_id("in_", i));
    for (std::size_t j = 0; j < dim; ++j) {
      test_values.push_back(spec.inlier_mean + spec.inlier_sigma * rng.normal());
    }
    is_outlier.push_back(false);
    correctness.emplace_back(!rng.bernoulli(spec.inlier_error_rate));
  }
  draw_rows(spec.n_outliers, spec.outlier_mean, spec.outlier_sigma, "out_",
            test_ids, test_values);
  for (std::int64_t i = 0; i < spec.n_outliers; ++i) {
    is_outlier.push_back(true);
    correctness.emplace_back(std::nullopt);
  }

  return GeneratedCase{
      FeatureMatrix(std::move(train_ids), std::move(train_values), dim),
      FeatureMatrix(std::move(test_ids), std::move(test_values), dim),
      std::move(is_outlier), std::move(correctness)};
}

double analytic_auroc_1d(double delta_mu, double sigma) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "sigma must be > 0");
  }
  // Phi(delta_mu / (sigma * sqrt(2))) via erf.
  const double z = delta_mu / (sigma * std::numbers::sqrt2);
  return 0.5 * (1.0 + std::erf(z / std::numbers::sqrt2));
}

}  // namespace supeval
