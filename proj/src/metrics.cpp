#include "supeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace supeval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct TieGroup {
  double score;
  std::int64_t outliers;
  std::int64_t inliers;
};

// Distinct score values in descending order, with per-class counts.
std::vector<TieGroup> tie_groups_descending(const ValidatedSamples& vs) {
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(vs.size());
  for (const auto& s : vs.samples()) {
    scored.emplace_back(s.anomaly_score, s.is_outlier);
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<TieGroup> groups;
  for (const auto& [score, is_outlier] : scored) {
    if (groups.empty() || groups.back().score != score) {
      groups.push_back({score, 0, 0});
    }
    if (is_outlier) {
      ++groups.back().outliers;
    } else {
      ++groups.back().inliers;
    }
  }
  return groups;
}

void require_kind(const Curve& curve, CurveKind kind, const char* op) {
  if (curve.kind != kind) {
    throw Error(ErrorCode::InvalidParameter,
                std::string(op) + " requires a curve of the matching kind");
  }
  if (curve.points.empty()) {
    throw Error(ErrorCode::InvalidParameter,
                std::string(op) + " requires a non-empty curve");
  }
}

void require_unit_range(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter,
                std::string(name) + " must lie in [0, 1]");
  }
}

// Indices of vs.samples() in acceptance order: ascending score, ties broken
// by ascending sample_id. This is the deterministic order in which a
// supervisor sweeping its threshold upward admits samples.
std::vector<std::size_t> acceptance_order(const ValidatedSamples& vs) {
  std::vector<std::size_t> order(vs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& samples = vs.samples();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = samples[a];
    const auto& sb = samples[b];
    if (sa.anomaly_score != sb.anomaly_score) {
      return sa.anomaly_score < sb.anomaly_score;
    }
    return sa.sample_id < sb.sample_id;
  });
  return order;
}

}  // namespace

Curve roc_curve(const ValidatedSamples& samples) {
  const auto groups = tie_groups_descending(samples);
  const double n_out = static_cast<double>(samples.outlier_count());
  const double n_in = static_cast<double>(samples.inlier_count());

  Curve curve{CurveKind::kRoc, {}};
  curve.points.reserve(groups.size() + 1);
  curve.points.push_back({0.0, 0.0, kInf});
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (const auto& g : groups) {
    tp += g.outliers;
    fp += g.inliers;
    curve.points.push_back({fp / n_in, tp / n_out, g.score});
  }
  return curve;
}

Curve pr_curve(const ValidatedSamples& samples) {
  const auto groups = tie_groups_descending(samples);
  const double n_out = static_cast<double>(samples.outlier_count());

  Curve curve{CurveKind::kPr, {}};
  curve.points.reserve(groups.size() + 1);
  curve.points.push_back({0.0, 1.0, kInf});  // nothing flagged
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (const auto& g : groups) {
    tp += g.outliers;
    fp += g.inliers;
    curve.points.push_back(
        {tp / n_out, static_cast<double>(tp) / (tp + fp), g.score});
  }
  return curve;
}

ScoreDistribution score_distribution(const ValidatedSamples& samples,
                                     int bin_count) {
  if (bin_count < 1) {
    throw Error(ErrorCode::InvalidParameter, "bin_count must be >= 1");
  }
  double lo = kInf;
  double hi = -kInf;
  for (const auto& s : samples.samples()) {
    lo = std::min(lo, s.anomaly_score);
    hi = std::max(hi, s.anomaly_score);
  }

  ScoreDistribution dist;
  if (lo == hi) {
    dist.degenerate_range = true;
    dist.bin_edges = {lo - 0.5, lo + 0.5};
    dist.inlier_counts = {samples.inlier_count()};
    dist.outlier_counts = {samples.outlier_count()};
    return dist;
  }

  const double width = hi - lo;
  dist.bin_edges.resize(static_cast<std::size_t>(bin_count) + 1);
  dist.bin_edges.front() = lo;
  dist.bin_edges.back() = hi;
  for (int i = 1; i < bin_count; ++i) {
    dist.bin_edges[static_cast<std::size_t>(i)] = lo + width * i / bin_count;
  }
  const bool strictly_increasing =
      std::adjacent_find(dist.bin_edges.begin(), dist.bin_edges.end(),
                         [](double a, double b) { return a >= b; }) ==
      dist.bin_edges.end();
  if (!strictly_increasing) {
    // Range too narrow for this many distinct edges; collapse to one bin.
    dist.degenerate_range = true;
    dist.bin_edges = {lo, hi};
    dist.inlier_counts = {samples.inlier_count()};
    dist.outlier_counts = {samples.outlier_count()};
    return dist;
  }

  dist.inlier_counts.assign(static_cast<std::size_t>(bin_count), 0);
  dist.outlier_counts.assign(static_cast<std::size_t>(bin_count), 0);
  for (const auto& s : samples.samples()) {
    auto bin = static_cast<std::int64_t>((s.anomaly_score - lo) / width *
                                         bin_count);
    bin = std::clamp<std::int64_t>(bin, 0, bin_count - 1);
    auto& counts = s.is_outlier ? dist.outlier_counts : dist.inlier_counts;
    ++counts[static_cast<std::size_t>(bin)];
  }
  return dist;
}

Curve risk_coverage_curve(const ValidatedSamples& samples) {
  if (!samples.all_inliers_have_correctness()) {
    for (const auto& s : samples.samples()) {
      if (!s.is_outlier && !s.prediction_correct.has_value()) {
        throw Error(ErrorCode::MissingCorrectness,
                    "inlier '" + s.sample_id +
                        "' lacks a prediction_correct flag; risk undefined");
      }
    }
  }
  const auto order = acceptance_order(samples);
  const double n = static_cast<double>(samples.size());

  Curve curve{CurveKind::kRiskCoverage, {}};
  curve.points.reserve(order.size());
  std::int64_t errors = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (counts_as_error(samples.samples()[order[i]])) ++errors;
    const double k = static_cast<double>(i + 1);
    curve.points.push_back({k / n, errors / k, k});
  }
  return curve;
}

double auroc(const Curve& roc) {
  require_kind(roc, CurveKind::kRoc, "auroc");
  double area = 0.0;
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    const auto& a = roc.points[i - 1];
    const auto& b = roc.points[i];
    area += (b.x - a.x) * (a.y + b.y) / 2.0;
  }
  return area;
}

double auprc(const Curve& pr) {
  require_kind(pr, CurveKind::kPr, "auprc");
  double area = 0.0;
  double prev_recall = 0.0;
  for (const auto& p : pr.points) {
    area += (p.x - prev_recall) * p.y;
    prev_recall = p.x;
  }
  return area;
}

double tpr_at_fpr(const Curve& roc, double fpr_cap) {
  require_kind(roc, CurveKind::kRoc, "tpr_at_fpr");
  require_unit_range(fpr_cap, "fpr_cap");
  double best = 0.0;
  for (const auto& p : roc.points) {
    if (p.x <= fpr_cap) best = std::max(best, p.y);
  }
  return best;
}

double precision_at_recall(const Curve& pr, double recall_floor) {
  require_kind(pr, CurveKind::kPr, "precision_at_recall");
  require_unit_range(recall_floor, "recall_floor");
  double best = 0.0;
  for (const auto& p : pr.points) {
    if (p.x >= recall_floor) best = std::max(best, p.y);
  }
  return best;
}

double fnr_at_fpr(const Curve& roc, double fpr_floor) {
  require_kind(roc, CurveKind::kRoc, "fnr_at_fpr");
  require_unit_range(fpr_floor, "fpr_floor");
  double best_fpr = kInf;
  double best_tpr = 0.0;
  for (const auto& p : roc.points) {
    if (p.x < fpr_floor) continue;
    if (p.x < best_fpr) {
      best_fpr = p.x;
      best_tpr = p.y;
    } else if (p.x == best_fpr) {
      best_tpr = std::max(best_tpr, p.y);
    }
  }
  return 1.0 - best_tpr;
}

double cbpl(const Curve& risk_coverage, double baseline_accuracy) {
  require_kind(risk_coverage, CurveKind::kRiskCoverage, "cbpl");
  require_unit_range(baseline_accuracy, "baseline_accuracy");
  const double target_risk = 1.0 - baseline_accuracy;
  double best = 0.0;
  for (const auto& p : risk_coverage.points) {
    if (p.y <= target_risk) best = std::max(best, p.x);
  }
  return best;
}

double cbfad(const ValidatedSamples& samples) {
  double min_outlier = kInf;
  for (const auto& s : samples.samples()) {
    if (s.is_outlier) min_outlier = std::min(min_outlier, s.anomaly_score);
  }
  std::int64_t below = 0;
  for (const auto& s : samples.samples()) {
    if (s.anomaly_score < min_outlier) ++below;
  }
  return static_cast<double>(below) / static_cast<double>(samples.size());
}

MetricsReport evaluate_case(const ValidatedSamples& samples,
                            const EvaluateOptions& options) {
  if (options.baseline_accuracy) {
    require_unit_range(*options.baseline_accuracy, "baseline_accuracy");
  }

  MetricsReport report;
  report.roc = roc_curve(samples);
  report.pr = pr_curve(samples);
  report.distribution = score_distribution(samples, options.bin_count);

  report.auroc = auroc(report.roc);
  report.auprc = auprc(report.pr);
  report.tpr05 = tpr_at_fpr(report.roc);
  report.p95 = precision_at_recall(report.pr);
  report.fnr95 = fnr_at_fpr(report.roc);
  report.cbfad = cbfad(samples);

  if (samples.all_inliers_have_correctness()) {
    report.risk_coverage = risk_coverage_curve(samples);
    report.risk_at_min_coverage = report.risk_coverage->points.front().y;
    if (options.baseline_accuracy) {
      report.cbpl = cbpl(*report.risk_coverage, *options.baseline_accuracy);
    }
  }

  report.sample_counts = {samples.inlier_count(), samples.outlier_count()};
  report.baseline_accuracy = options.baseline_accuracy;
  return report;
}

}  // namespace supeval
