#include "supeval/core.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace supeval {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::NonFiniteScore: return "NonFiniteScore";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MissingCorrectness: return "MissingCorrectness";
    case ErrorCode::NotAProbability: return "NotAProbability";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

namespace {

std::string summarize(const std::vector<Diagnostic>& diagnostics) {
  std::ostringstream out;
  out << diagnostics.size() << " validation problem(s)";
  for (const auto& d : diagnostics) {
    out << "\n  " << to_string(d.code);
    if (!d.sample_id.empty()) out << " [" << d.sample_id << "]";
    out << ": " << d.detail;
  }
  return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : Error(diagnostics.empty() ? ErrorCode::InvalidParameter
                                : diagnostics.front().code,
            summarize(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

OperatingPoint OperatingPoint::from_counts(double threshold, std::int64_t tp,
                                           std::int64_t fp, std::int64_t tn,
                                           std::int64_t fn) {
  OperatingPoint p;
  p.threshold = threshold;
  p.tp = tp;
  p.fp = fp;
  p.tn = tn;
  p.fn = fn;
  const std::int64_t outliers = tp + fn;
  const std::int64_t inliers = fp + tn;
  p.tpr = outliers > 0 ? static_cast<double>(tp) / outliers : 0.0;
  p.fpr = inliers > 0 ? static_cast<double>(fp) / inliers : 0.0;
  p.recall = p.tpr;
  p.fnr = 1.0 - p.tpr;
  p.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 1.0;
  return p;
}

ValidatedSamples validate_samples(std::vector<ScoredSample> samples) {
  std::vector<Diagnostic> problems;
  std::unordered_set<std::string> seen;
  seen.reserve(samples.size());
  std::int64_t inliers = 0;
  std::int64_t outliers = 0;
  bool inliers_flagged = true;

  for (const auto& s : samples) {
    if (!std::isfinite(s.anomaly_score)) {
      problems.push_back({ErrorCode::NonFiniteScore, s.sample_id,
                          "anomaly score is not finite"});
    }
    if (!seen.insert(s.sample_id).second) {
      problems.push_back(
          {ErrorCode::DuplicateId, s.sample_id, "sample id appears twice"});
    }
    if (s.is_outlier) {
      ++outliers;
    } else {
      ++inliers;
      if (!s.prediction_correct.has_value()) inliers_flagged = false;
    }
  }
  if (inliers == 0) {
    problems.push_back({ErrorCode::EmptyClass, "",
                        "no inlier samples; FPR-based metrics undefined"});
  }
  if (outliers == 0) {
    problems.push_back({ErrorCode::EmptyClass, "",
                        "no outlier samples; TPR-based metrics undefined"});
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));

  return ValidatedSamples(std::move(samples), inliers, outliers,
                          inliers_flagged);
}

}  // namespace supeval
