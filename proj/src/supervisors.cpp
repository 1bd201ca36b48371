#include "supeval/supervisors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace supeval {

namespace {

constexpr double kVarianceFloor = 1e-9;
constexpr double kProbabilitySumTolerance = 1e-6;

void check_dims(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": expected " + std::to_string(expected) +
                    " dimensions, got " + std::to_string(got));
  }
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::vector<std::string> row_ids,
                             std::vector<double> values, std::size_t cols)
    : row_ids_(std::move(row_ids)), values_(std::move(values)), cols_(cols) {
  if (row_ids_.empty() || cols_ == 0) {
    throw Error(ErrorCode::InvalidParameter,
                "feature matrix needs at least one row and one column");
  }
  if (values_.size() != row_ids_.size() * cols_) {
    throw Error(ErrorCode::LengthMismatch,
                "feature matrix is not rectangular: " +
                    std::to_string(values_.size()) + " values for " +
                    std::to_string(row_ids_.size()) + "x" +
                    std::to_string(cols_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::NonFiniteScore,
                  "non-finite feature value in row '" + row_ids_[i / cols_] +
                      "'");
    }
  }
}

ProbabilityVector::ProbabilityVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) {
    throw Error(ErrorCode::NotAProbability, "empty probability vector");
  }
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0)) {
      throw Error(ErrorCode::NotAProbability,
                  "negative or non-finite probability entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw Error(ErrorCode::NotAProbability,
                "probabilities sum to " + std::to_string(sum));
  }
}

ProbabilityVector softmax(std::span<const double> logits) {
  if (logits.empty()) {
    throw Error(ErrorCode::InvalidParameter, "softmax over empty vector");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return ProbabilityVector(std::move(p));
}

double softmax_max_score(const ProbabilityVector& p) {
  return 1.0 - *std::max_element(p.values().begin(), p.values().end());
}

FittedScorer::Kind FittedScorer::kind() const {
  if (std::holds_alternative<GaussianNllParams>(params_)) {
    return Kind::kGaussianNll;
  }
  if (std::holds_alternative<KnnParams>(params_)) return Kind::kKnnDist;
  return Kind::kLinearRecon;
}

std::size_t FittedScorer::dims() const {
  switch (kind()) {
    case Kind::kGaussianNll: return gaussian_params().mean.size();
    case Kind::kKnnDist: return knn_params().cols;
    case Kind::kLinearRecon: return linear_recon_params().cols;
  }
  return 0;
}

double FittedScorer::score(std::span<const double> x) const {
  switch (kind()) {
    case Kind::kGaussianNll: return gaussian_nll_score(*this, x);
    case Kind::kKnnDist: return knn_distance_score(*this, x);
    case Kind::kLinearRecon: return linear_recon_score(*this, x);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown scorer kind");
}

const GaussianNllParams& FittedScorer::gaussian_params() const {
  if (const auto* p = std::get_if<GaussianNllParams>(&params_)) return *p;
  throw Error(ErrorCode::InvalidParameter, "scorer is not GAUSSIAN_NLL");
}

const KnnParams& FittedScorer::knn_params() const {
  if (const auto* p = std::get_if<KnnParams>(&params_)) return *p;
  throw Error(ErrorCode::InvalidParameter, "scorer is not KNN_DIST");
}

const LinearReconParams& FittedScorer::linear_recon_params() const {
  if (const auto* p = std::get_if<LinearReconParams>(&params_)) return *p;
  throw Error(ErrorCode::InvalidParameter, "scorer is not LINEAR_RECON");
}

FittedScorer fit_gaussian_nll(const FeatureMatrix& train) {
  const std::size_t n = train.rows();
  const std::size_t d = train.cols();
  if (n < 2) {
    throw Error(ErrorCode::TooFewSamples,
                "gaussian fit needs at least 2 training rows");
  }

  GaussianNllParams params;
  params.mean.assign(d, 0.0);
  params.variance.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = train.row(i);
    for (std::size_t j = 0; j < d; ++j) params.mean[j] += row[j];
  }
  for (double& m : params.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = train.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double delta = row[j] - params.mean[j];
      params.variance[j] += delta * delta;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    params.variance[j] /= static_cast<double>(n);
    if (params.variance[j] < kVarianceFloor) {
      params.variance[j] = kVarianceFloor;
      params.floored_dims.push_back(j);
    }
  }
  return FittedScorer(std::move(params));
}

double gaussian_nll_score(const FittedScorer& scorer,
                          std::span<const double> x) {
  const auto& p = scorer.gaussian_params();
  check_dims(p.mean.size(), x.size(), "gaussian_nll_score");
  double nll = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double delta = x[j] - p.mean[j];
    nll += 0.5 * std::log(2.0 * std::numbers::pi * p.variance[j]) +
           delta * delta / (2.0 * p.variance[j]);
  }
  return nll;
}

FittedScorer fit_knn(const FeatureMatrix& train, int k) {
  if (k < 1) {
    throw Error(ErrorCode::InvalidParameter, "k must be >= 1");
  }
  if (static_cast<std::size_t>(k) > train.rows()) {
    throw Error(ErrorCode::KTooLarge,
                "k = " + std::to_string(k) + " exceeds training rows (" +
                    std::to_string(train.rows()) + ")");
  }
  KnnParams params;
  params.k = k;
  params.train = train.values();
  params.rows = train.rows();
  params.cols = train.cols();
  return FittedScorer(std::move(params));
}

double knn_distance_score(const FittedScorer& scorer,
                          std::span<const double> x) {
  const auto& p = scorer.knn_params();
  check_dims(p.cols, x.size(), "knn_distance_score");
  std::vector<double> sq(p.rows);
  for (std::size_t i = 0; i < p.rows; ++i) {
    const double* row = p.train.data() + i * p.cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < p.cols; ++j) {
      const double delta = x[j] - row[j];
      acc += delta * delta;
    }
    sq[i] = acc;
  }
  auto kth = sq.begin() + (p.k - 1);
  std::nth_element(sq.begin(), kth, sq.end());
  return std::sqrt(*kth);
}

FittedScorer fit_linear_recon(const FeatureMatrix& train, int m) {
  const std::size_t n = train.rows();
  const std::size_t d = train.cols();
  if (n < 2) {
    throw Error(ErrorCode::TooFewSamples,
                "linear reconstruction fit needs at least 2 training rows");
  }
  if (m < 1 || static_cast<std::size_t>(m) >= d) {
    throw Error(ErrorCode::InvalidParameter,
                "component count must satisfy 1 <= m < feature dimension");
  }

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      data(train.values().data(), static_cast<Eigen::Index>(n),
           static_cast<Eigen::Index>(d));
  const Eigen::VectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean.transpose();
  const Eigen::MatrixXd covariance =
      centered.transpose() * centered / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidParameter,
                "eigendecomposition of the training covariance failed");
  }

  LinearReconParams params;
  params.m = static_cast<std::size_t>(m);
  params.cols = d;
  params.mean.assign(mean.data(), mean.data() + d);
  params.components.reserve(params.m * d);
  params.component_variances.reserve(params.m);
  // Eigen returns eigenvalues ascending; take the top m, largest first.
  for (int c = 0; c < m; ++c) {
    const auto col = static_cast<Eigen::Index>(d) - 1 - c;
    Eigen::VectorXd direction = solver.eigenvectors().col(col);
    for (Eigen::Index j = 0; j < direction.size(); ++j) {
      if (std::abs(direction[j]) > 1e-12) {
        if (direction[j] < 0.0) direction = -direction;
        break;
      }
    }
    params.components.insert(params.components.end(), direction.data(),
                             direction.data() + d);
    params.component_variances.push_back(
        std::max(solver.eigenvalues()[col], 0.0));
  }
  return FittedScorer(std::move(params));
}

double linear_recon_score(const FittedScorer& scorer,
                          std::span<const double> x) {
  const auto& p = scorer.linear_recon_params();
  check_dims(p.cols, x.size(), "linear_recon_score");
  std::vector<double> residual(p.cols);
  for (std::size_t j = 0; j < p.cols; ++j) residual[j] = x[j] - p.mean[j];
  for (std::size_t c = 0; c < p.m; ++c) {
    const double* direction = p.components.data() + c * p.cols;
    double coeff = 0.0;
    for (std::size_t j = 0; j < p.cols; ++j) {
      coeff += residual[j] * direction[j];
    }
    for (std::size_t j = 0; j < p.cols; ++j) {
      residual[j] -= coeff * direction[j];
    }
  }
  double score = 0.0;
  for (double r : residual) score += r * r;
  return score;
}

namespace {

template <typename ScoreFn>
std::vector<ScoredSample> assemble(
    const FeatureMatrix& features, const std::vector<bool>& is_outlier,
    const std::vector<std::optional<bool>>& correctness, ScoreFn&& score_row) {
  if (is_outlier.size() != features.rows()) {
    throw Error(ErrorCode::LengthMismatch,
                "labels: " + std::to_string(is_outlier.size()) +
                    " entries for " + std::to_string(features.rows()) +
                    " feature rows");
  }
  if (!correctness.empty() && correctness.size() != features.rows()) {
    throw Error(ErrorCode::LengthMismatch,
                "correctness: " + std::to_string(correctness.size()) +
                    " entries for " + std::to_string(features.rows()) +
                    " feature rows");
  }
  std::vector<ScoredSample> samples;
  samples.reserve(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    ScoredSample s;
    s.sample_id = features.row_ids()[i];
    s.anomaly_score = score_row(features.row(i));
    s.is_outlier = is_outlier[i];
    if (!correctness.empty()) s.prediction_correct = correctness[i];
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace

std::vector<ScoredSample> score_matrix(
    const FittedScorer& scorer, const FeatureMatrix& features,
    const std::vector<bool>& is_outlier,
    const std::vector<std::optional<bool>>& correctness) {
  return assemble(features, is_outlier, correctness,
                  [&](std::span<const double> row) { return scorer.score(row); });
}

std::vector<ScoredSample> score_matrix(
    SoftmaxMaxRule rule, const FeatureMatrix& features,
    const std::vector<bool>& is_outlier,
    const std::vector<std::optional<bool>>& correctness) {
  return assemble(features, is_outlier, correctness,
                  [&](std::span<const double> row) {
                    if (rule.from_logits) {
                      return softmax_max_score(softmax(row));
                    }
                    return softmax_max_score(
                        ProbabilityVector({row.begin(), row.end()}));
                  });
}

std::vector<ScoredSample> score_matrix(
    RawValueRule, const FeatureMatrix& features,
    const std::vector<bool>& is_outlier,
    const std::vector<std::optional<bool>>& correctness) {
  if (features.cols() != 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "raw-value scoring requires exactly one feature column");
  }
  return assemble(features, is_outlier, correctness,
                  [](std::span<const double> row) { return row[0]; });
}

}  // namespace supeval
