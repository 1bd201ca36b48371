#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "supeval/core.hpp"
#include "supeval/metrics.hpp"
#include "supeval/supervisors.hpp"
#include "supeval/synth.hpp"
#include "test_util.hpp"

using namespace supeval;
using testutil::near;

TEST_CASE("generation is bytewise deterministic for a fixed seed") {
  GaussianCaseSpec spec;
  spec.dim = 3;
  spec.n_train = 40;
  spec.n_inliers = 25;
  spec.n_outliers = 15;
  spec.inlier_error_rate = 0.2;
  spec.seed = 999;

  const GeneratedCase a = generate_gaussian_case(spec);
  const GeneratedCase b = generate_gaussian_case(spec);
  CHECK(a.train.values() == b.train.values());
  CHECK(a.train.row_ids() == b.train.row_ids());
  CHECK(a.test.values() == b.test.values());
  CHECK(a.is_outlier == b.is_outlier);
  CHECK(a.correctness == b.correctness);

  spec.seed = 1000;
  const GeneratedCase c = generate_gaussian_case(spec);
  CHECK(a.test.values() != c.test.values());
}

TEST_CASE("class counts and dimensions follow the declared case") {
  GaussianCaseSpec spec;
  spec.dim = 2;
  spec.n_train = 7;
  spec.n_inliers = 11;
  spec.n_outliers = 5;
  spec.seed = 1;

  const GeneratedCase g = generate_gaussian_case(spec);
  CHECK(g.train.rows() == 7);
  CHECK(g.train.cols() == 2);
  CHECK(g.test.rows() == 16);
  CHECK(g.test.cols() == 2);

  std::int64_t outliers = 0;
  for (std::size_t i = 0; i < g.is_outlier.size(); ++i) {
    if (g.is_outlier[i]) {
      ++outliers;
      CHECK_FALSE(g.correctness[i].has_value());
    } else {
      CHECK(g.correctness[i].has_value());
    }
  }
  CHECK(outliers == 5);
}

TEST_CASE("n_train defaults to the inlier count when zero") {
  GaussianCaseSpec spec;
  spec.n_inliers = 9;
  spec.n_outliers = 2;
  spec.seed = 5;
  const GeneratedCase g = generate_gaussian_case(spec);
  CHECK(g.train.rows() == 9);
}

TEST_CASE("error rate zero marks every inlier correct") {
  GaussianCaseSpec spec;
  spec.n_inliers = 50;
  spec.n_outliers = 3;
  spec.inlier_error_rate = 0.0;
  spec.seed = 2;
  const GeneratedCase g = generate_gaussian_case(spec);
  for (std::size_t i = 0; i < g.is_outlier.size(); ++i) {
    if (!g.is_outlier[i]) CHECK(*g.correctness[i]);
  }
}

TEST_CASE("error rate one marks every inlier incorrect") {
  GaussianCaseSpec spec;
  spec.n_inliers = 50;
  spec.n_outliers = 3;
  spec.inlier_error_rate = 1.0;
  spec.seed = 3;
  const GeneratedCase g = generate_gaussian_case(spec);
  for (std::size_t i = 0; i < g.is_outlier.size(); ++i) {
    if (!g.is_outlier[i]) CHECK_FALSE(*g.correctness[i]);
  }
}

TEST_CASE("intermediate error rates land near their expectation") {
  GaussianCaseSpec spec;
  spec.n_inliers = 4000;
  spec.n_outliers = 1;
  spec.inlier_error_rate = 0.3;
  spec.seed = 4;
  const GeneratedCase g = generate_gaussian_case(spec);
  std::int64_t wrong = 0;
  std::int64_t inliers = 0;
  for (std::size_t i = 0; i < g.is_outlier.size(); ++i) {
    if (g.is_outlier[i]) continue;
    ++inliers;
    if (!*g.correctness[i]) ++wrong;
  }
  const double rate = static_cast<double>(wrong) / static_cast<double>(inliers);
  CHECK(near(rate, 0.3, 0.03));
}

TEST_CASE("invalid specs are rejected") {
  GaussianCaseSpec spec;
  spec.n_inliers = 1;
  spec.n_outliers = 1;

  GaussianCaseSpec bad = spec;
  bad.inlier_sigma = 0.0;
  CHECK_THROWS_AS(generate_gaussian_case(bad), Error);
  bad = spec;
  bad.outlier_sigma = -1.0;
  CHECK_THROWS_AS(generate_gaussian_case(bad), Error);
  bad = spec;
  bad.dim = 0;
  CHECK_THROWS_AS(generate_gaussian_case(bad), Error);
  bad = spec;
  bad.n_inliers = 0;
  CHECK_THROWS_AS(generate_gaussian_case(bad), Error);
  bad = spec;
  bad.inlier_error_rate = 1.5;
  CHECK_THROWS_AS(generate_gaussian_case(bad), Error);
}

TEST_CASE("analytic_auroc_1d evaluates the normal CDF formula") {
  CHECK(near(analytic_auroc_1d(0.0, 1.0), 0.5));
  CHECK(near(analytic_auroc_1d(2.0, 1.0), 0.9213503964748575, 1e-12));
  CHECK(analytic_auroc_1d(50.0, 1.0) > 0.999999);
  CHECK(near(analytic_auroc_1d(-2.0, 1.0), 1.0 - 0.9213503964748575, 1e-12));
  CHECK(near(analytic_auroc_1d(2.0, 2.0), analytic_auroc_1d(1.0, 1.0)));
  CHECK_THROWS_AS(analytic_auroc_1d(1.0, 0.0), Error);
}

TEST_CASE("empirical AUROC converges to the analytic value at 20k per class") {
  GaussianCaseSpec spec;
  spec.outlier_mean = 2.0;
  spec.n_train = 1;
  spec.n_inliers = 20000;
  spec.n_outliers = 20000;
  spec.seed = 20260823;

  const GeneratedCase g = generate_gaussian_case(spec);
  const auto samples =
      score_matrix(RawValueRule{}, g.test, g.is_outlier, g.correctness);
  const double empirical = auroc(roc_curve(validate_samples(samples)));
  CHECK(std::fabs(empirical - analytic_auroc_1d(2.0, 1.0)) <= 0.01);
}
