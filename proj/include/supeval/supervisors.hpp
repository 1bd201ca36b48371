#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "supeval/core.hpp"

namespace supeval {

/// Row-major matrix of finite feature values with one id per row. Carrier
/// for whatever a supervisor consumes: class-probability vectors, raw
/// logits, embeddings, or synthetic coordinates.
class FeatureMatrix {
 public:
  /// Validates shape (rows * cols values, rows >= 1, cols >= 1) and
  /// finiteness. Throws LengthMismatch / NonFiniteScore / InvalidParameter.
  FeatureMatrix(std::vector<std::string> row_ids, std::vector<double> values,
                std::size_t cols);

  std::size_t rows() const { return row_ids_.size(); }
  std::size_t cols() const { return cols_; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }

 private:
  std::vector<std::string> row_ids_;
  std::vector<double> values_;
  std::size_t cols_;
};

/// A vector of class probabilities: entries nonnegative, summing to 1
/// within 1e-6. Construction throws NotAProbability otherwise.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> p);
  const std::vector<double>& values() const { return p_; }
  std::size_t size() const { return p_.size(); }

 private:
  std::vector<double> p_;
};

/// Numerically stable softmax (max subtraction) over raw final-layer
/// outputs. Adding a constant to every logit leaves the result unchanged.
ProbabilityVector softmax(std::span<const double> logits);

/// The confidence-based anomaly score 1 - max_i p_i: 0 for a one-hot
/// prediction, up to 1 - 1/D for a uniform one.
double softmax_max_score(const ProbabilityVector& p);

struct GaussianNllParams {
  std::vector<double> mean;
  std::vector<double> variance;        // population form, floored at 1e-9
  std::vector<std::size_t> floored_dims;  // dimensions where the floor applied
};

struct KnnParams {
  int k = 1;
  std::vector<double> train;  // row-major, retained training rows
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct LinearReconParams {
  std::vector<double> mean;
  std::vector<double> components;  // m rows of length cols, orthonormal
  std::vector<double> component_variances;
  std::size_t m = 0;
  std::size_t cols = 0;
};

/// An anomaly scorer fitted on inlier training data only. Immutable after
/// fitting; scoring is pure and safe to run concurrently over rows.
class FittedScorer {
 public:
  enum class Kind { kGaussianNll, kKnnDist, kLinearRecon };

  Kind kind() const;
  std::size_t dims() const;
  /// Scores one feature row with whichever rule was fitted.
  double score(std::span<const double> x) const;

  const GaussianNllParams& gaussian_params() const;
  const KnnParams& knn_params() const;
  const LinearReconParams& linear_recon_params() const;

  explicit FittedScorer(GaussianNllParams p) : params_(std::move(p)) {}
  explicit FittedScorer(KnnParams p) : params_(std::move(p)) {}
  explicit FittedScorer(LinearReconParams p) : params_(std::move(p)) {}

 private:
  std::variant<GaussianNllParams, KnnParams, LinearReconParams> params_;
};

/// Diagonal-Gaussian density fit: per-dimension mean and population
/// variance (divisor N), variances floored at 1e-9 so constant features
/// keep the NLL finite. Requires N >= 2 (TooFewSamples).
FittedScorer fit_gaussian_nll(const FeatureMatrix& train);

/// Negative log likelihood under the fitted diagonal Gaussian:
/// sum_d [ ln(2 pi sigma_d^2)/2 + (x_d - mu_d)^2 / (2 sigma_d^2) ].
double gaussian_nll_score(const FittedScorer& scorer,
                          std::span<const double> x);

/// Retains the training rows; scores are exact brute-force distances.
/// Requires 1 <= k <= N_train (KTooLarge).
FittedScorer fit_knn(const FeatureMatrix& train, int k);

/// Euclidean distance from x to its k-th nearest training row.
double knn_distance_score(const FittedScorer& scorer,
                          std::span<const double> x);

/// Linear-reconstruction fit: training mean plus the top-m orthonormal
/// principal directions of the centered data (deterministic eigensolve;
/// each direction's first nonzero coordinate is made positive). Rank
/// deficiency is fine: surplus directions carry zero variance. Requires
/// m >= 1, m < D, N >= 2.
FittedScorer fit_linear_recon(const FeatureMatrix& train, int m);

/// Squared Euclidean norm of the residual after projecting the centered
/// query onto the fitted subspace; zero for any query inside it.
double linear_recon_score(const FittedScorer& scorer,
                          std::span<const double> x);

/// Scoring rule for rows that already are (or can be turned into)
/// probability vectors.
struct SoftmaxMaxRule {
  bool from_logits = false;  // apply softmax() to each row first
};

/// Scoring rule for 1-D features: the coordinate itself is the anomaly
/// score. Used for synthetic cases whose separability is known analytically.
struct RawValueRule {};

/// Applies the scorer row-wise and assembles ScoredSamples preserving
/// row ids. labels must have one entry per row; correctness may be empty
/// (no flags) or one entry per row. Throws LengthMismatch otherwise.
std::vector<ScoredSample> score_matrix(
    const FittedScorer& scorer, const FeatureMatrix& features,
    const std::vector<bool>& is_outlier,
    const std::vector<std::optional<bool>>& correctness);

std::vector<ScoredSample> score_matrix(
    SoftmaxMaxRule rule, const FeatureMatrix& features,
    const std::vector<bool>& is_outlier,
    const std::vector<std::optional<bool>>& correctness);

std::vector<ScoredSample> score_matrix(
    RawValueRule rule, const FeatureMatrix& features,
    const std::vector<bool>& is_outlier,
    const std::vector<std::optional<bool>>& correctness);

}  // namespace supeval
