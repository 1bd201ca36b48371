#pragma once

#include <optional>

#include "supeval/core.hpp"

namespace supeval {

// Threshold sweeps treat samples with identical scores as one atomic tie
// group: the whole group enters or leaves the flagged set together. This
// makes every curve independent of input order and makes the trapezoidal
// AUROC coincide with the Mann-Whitney statistic (ties counted 1/2).

/// ROC curve: the (0,0) point for a threshold above every score, then one
/// point per distinct score value in descending threshold order. The last
/// point (threshold = minimum score) is always (1,1). O(N log N).
Curve roc_curve(const ValidatedSamples& samples);

/// PR curve: the empty-flag point (recall 0, precision 1), then one point
/// per distinct score value in descending threshold order, which sorts
/// points by nondecreasing recall. The last point flags everything and has
/// recall 1, precision = outlier fraction.
Curve pr_curve(const ValidatedSamples& samples);

/// Equal-width histogram of the pooled scores over [min, max]. Bins are
/// half-open [a, b) except the right-most, which is closed; when min == max
/// the result is a single synthetic bin with degenerate_range set.
ScoreDistribution score_distribution(const ValidatedSamples& samples,
                                     int bin_count);

/// Risk-coverage curve: N points for accepted-set sizes k = 1..N, where the
/// accepted set holds the k samples with the lowest anomaly score (ties
/// broken by ascending sample_id). Risk is the error fraction among the
/// accepted: any outlier counts as an error, as does an inlier with
/// prediction_correct == false. Throws MissingCorrectness when an inlier
/// lacks the flag.
Curve risk_coverage_curve(const ValidatedSamples& samples);

/// Trapezoidal area under a ROC curve.
double auroc(const Curve& roc);

/// Average-precision form of the area under a PR curve: sum of
/// (recall_i - recall_{i-1}) * precision_i over points in curve order, with
/// recall_0 = 0. No interpolation between points.
double auprc(const Curve& pr);

/// Maximum TPR over realizable operating points with fpr <= fpr_cap.
/// Only thresholds that actually occur count; no interpolation.
double tpr_at_fpr(const Curve& roc, double fpr_cap = 0.05);

/// Maximum precision over realizable operating points with
/// recall >= recall_floor.
double precision_at_recall(const Curve& pr, double recall_floor = 0.95);

/// FNR (= 1 - TPR) at the realizable operating point with the smallest
/// fpr >= fpr_floor; among points sharing that fpr, the one with the
/// highest TPR.
double fnr_at_fpr(const Curve& roc, double fpr_floor = 0.95);

/// Largest coverage k/N whose accepted-set risk stays within the model's
/// baseline error rate 1 - baseline_accuracy; 0 when no k qualifies. The
/// risk-coverage curve need not be monotone, so every k is inspected.
double cbpl(const Curve& risk_coverage, double baseline_accuracy);

/// Fraction of samples scoring strictly below the minimum outlier score:
/// the largest coverage whose accepted set provably contains no outlier.
double cbfad(const ValidatedSamples& samples);

struct EvaluateOptions {
  std::optional<double> baseline_accuracy;
  int bin_count = 50;
};

/// Runs every curve and scalar metric over one validated sample set.
/// Risk-family results (risk-coverage curve, risk_at_min_coverage, cbpl) are
/// omitted when any inlier lacks a prediction_correct flag; cbpl is
/// additionally N/A when no baseline accuracy is given. Case and supervisor
/// names are left empty for the caller to fill in.
MetricsReport evaluate_case(const ValidatedSamples& samples,
                            const EvaluateOptions& options = {});

}  // namespace supeval
