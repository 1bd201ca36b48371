#pragma once

// Deterministic helpers for the unit and acceptance suites. Generators use
// only the fully specified mt19937_64 output stream (no distribution
// adapters) so every test instance is reproducible everywhere.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "supeval/core.hpp"

namespace testutil {

class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

struct InstanceOptions {
  bool tie_heavy = false;
  bool with_correctness = false;
  double inlier_error_rate = 0.0;
};

// A random two-class sample set with 1..250 members per class.
inline std::vector<supeval::ScoredSample> make_instance(
    std::uint64_t seed, const InstanceOptions& options) {
  TestRng rng(seed);
  const std::uint64_t n_in = 1 + rng.below(250);
  const std::uint64_t n_out = 1 + rng.below(250);
  std::vector<supeval::ScoredSample> samples;
  samples.reserve(n_in + n_out);
  for (std::uint64_t i = 0; i < n_in + n_out; ++i) {
    supeval::ScoredSample s;
    s.is_outlier = i >= n_in;
    s.sample_id = (s.is_outlier ? "o" : "i") + std::to_string(i);
    if (options.tie_heavy) {
      s.anomaly_score =
          static_cast<double>(rng.below(8)) / 4.0 + (s.is_outlier ? 0.25 : 0);
    } else {
      s.anomaly_score = rng.normal() + (s.is_outlier ? 1.0 : 0.0);
    }
    if (!s.is_outlier && options.with_correctness) {
      s.prediction_correct = rng.uniform() >= options.inlier_error_rate;
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

// Cycles through tie-free/tie-heavy and flagged/unflagged variants so a
// seed range covers every combination the acceptance gate calls for.
inline std::vector<supeval::ScoredSample> make_varied_instance(
    std::uint64_t seed) {
  InstanceOptions options;
  options.tie_heavy = seed % 2 == 1;
  options.with_correctness = seed % 3 != 0;
  const double rates[] = {0.0, 0.1, 0.5};
  options.inlier_error_rate = rates[seed % 3];
  return make_instance(seed, options);
}

inline bool near(double a, double b, double tol = 1e-12) {
  return std::fabs(a - b) <= tol;
}

}  // namespace testutil
