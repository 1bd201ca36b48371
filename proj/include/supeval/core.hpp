#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace supeval {

enum class ErrorCode {
  EmptyClass,
  NonFiniteScore,
  DuplicateId,
  MissingCorrectness,
  NotAProbability,
  TooFewSamples,
  DimensionMismatch,
  KTooLarge,
  LengthMismatch,
  InvalidParameter,
  ParseError,
  SchemaError,
  IoError,
};

const char* to_string(ErrorCode code);

/// Library-wide error type. code() identifies which contract was violated so
/// callers (notably the CLI) can map failures onto exit codes without string
/// matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// One record-level problem found during sample validation.
struct Diagnostic {
  ErrorCode code;
  std::string sample_id;  // empty for set-level problems such as EmptyClass
  std::string detail;
};

/// Thrown by validate_samples(); carries one Diagnostic per offending record
/// so ingestion failures can be reported all at once.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// One evaluated data point. The anomaly score is unitless with higher values
/// meaning "less like the training data"; the outlier class is the positive
/// class everywhere in this library. prediction_correct describes the
/// supervised model's verdict on the sample and is meaningful for inliers
/// only: an outlier counts as mispredicted no matter what the flag says.
struct ScoredSample {
  std::string sample_id;
  double anomaly_score = 0.0;
  bool is_outlier = false;
  std::optional<bool> prediction_correct;
};

/// True when the sample counts as a prediction error in risk computations.
inline bool counts_as_error(const ScoredSample& s) {
  return s.is_outlier || !s.prediction_correct.value_or(true);
}

/// Confusion-matrix statistics realized at one concrete threshold. A sample
/// is flagged as positive iff anomaly_score >= threshold. precision is
/// defined as 1 when nothing is flagged.
struct OperatingPoint {
  double threshold = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;
  double fpr = 0.0;
  double tpr = 0.0;
  double precision = 1.0;
  double recall = 0.0;
  double fnr = 1.0;

  static OperatingPoint from_counts(double threshold, std::int64_t tp,
                                    std::int64_t fp, std::int64_t tn,
                                    std::int64_t fn);
};

enum class CurveKind { kRoc, kPr, kRiskCoverage };

/// For ROC points t is the flagging threshold (x = fpr, y = tpr), for PR
/// points likewise (x = recall, y = precision), and for risk-coverage points
/// t is the accepted-set size k (x = coverage, y = risk).
struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

struct Curve {
  CurveKind kind = CurveKind::kRoc;
  std::vector<CurvePoint> points;
};

/// Pooled histogram of anomaly scores, split per class. bin_edges has one
/// more entry than the count vectors; bins are [edge_i, edge_i+1) except the
/// right-most which is closed on both sides. When every score is identical
/// the histogram degenerates to a single synthetic bin around that value and
/// degenerate_range is set.
struct ScoreDistribution {
  std::vector<double> bin_edges;
  std::vector<std::int64_t> inlier_counts;
  std::vector<std::int64_t> outlier_counts;
  bool degenerate_range = false;
};

struct SampleCounts {
  std::int64_t inliers = 0;
  std::int64_t outliers = 0;
};

/// Everything one evaluation produces: the seven scalar metrics plus the
/// curves they were read off from. cbpl is absent (N/A) when no baseline
/// accuracy was supplied or when risk cannot be computed; the risk-coverage
/// curve and risk_at_min_coverage are absent when any inlier lacks a
/// prediction_correct flag.
struct MetricsReport {
  std::string case_name;
  std::string supervisor_name;
  std::string model_id;

  double auroc = 0.0;
  double auprc = 0.0;
  double tpr05 = 0.0;
  double p95 = 0.0;
  double fnr95 = 0.0;
  std::optional<double> cbpl;
  double cbfad = 0.0;
  std::optional<double> risk_at_min_coverage;

  Curve roc;
  Curve pr;
  std::optional<Curve> risk_coverage;
  ScoreDistribution distribution;

  SampleCounts sample_counts;
  std::optional<double> baseline_accuracy;
};

/// A sample set that passed validate_samples(): finite scores, unique ids,
/// at least one sample in each class. Immutable once constructed.
class ValidatedSamples {
 public:
  const std::vector<ScoredSample>& samples() const { return samples_; }
  std::int64_t inlier_count() const { return inliers_; }
  std::int64_t outlier_count() const { return outliers_; }
  std::size_t size() const { return samples_.size(); }
  /// Risk-coverage metrics are only defined when this holds.
  bool all_inliers_have_correctness() const { return inliers_flagged_; }

 private:
  friend ValidatedSamples validate_samples(std::vector<ScoredSample> samples);
  ValidatedSamples(std::vector<ScoredSample> samples, std::int64_t inliers,
                   std::int64_t outliers, bool inliers_flagged)
      : samples_(std::move(samples)),
        inliers_(inliers),
        outliers_(outliers),
        inliers_flagged_(inliers_flagged) {}

  std::vector<ScoredSample> samples_;
  std::int64_t inliers_ = 0;
  std::int64_t outliers_ = 0;
  bool inliers_flagged_ = false;
};

/// Checks every record (finite score, unique id) and the set as a whole (at
/// least one inlier and one outlier). Throws ValidationError listing every
/// offending record otherwise.
ValidatedSamples validate_samples(std::vector<ScoredSample> samples);

}  // namespace supeval
