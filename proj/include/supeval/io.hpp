#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "supeval/core.hpp"
#include "supeval/supervisors.hpp"
#include "supeval/synth.hpp"

namespace supeval {

// ---------------------------------------------------------------------------
// Score and feature CSV files
//
// Score files:   sample_id,anomaly_score[,prediction_correct]
// Feature files: sample_id,f0,f1,...[,prediction_correct]
//
// UTF-8, LF newlines, no quoting. prediction_correct is true/false
// (case-insensitive) or empty for "no flag". Scores round-trip exactly:
// they are written as shortest-round-trip decimals and parsed bit-exactly.
// ---------------------------------------------------------------------------

/// Parses one score file; every sample gets the given class label.
/// Throws ParseError (with line number), NonFiniteScore, DuplicateId.
std::vector<ScoredSample> read_score_csv(const std::filesystem::path& path,
                                         bool is_outlier);

void write_score_csv(const std::filesystem::path& path,
                     std::span<const ScoredSample> samples);

struct FeatureCsv {
  FeatureMatrix features;
  std::vector<std::optional<bool>> correctness;  // empty when column absent
};

FeatureCsv read_feature_csv(const std::filesystem::path& path);

void write_feature_csv(const std::filesystem::path& path,
                       const FeatureMatrix& features,
                       const std::vector<std::optional<bool>>& correctness);

// ---------------------------------------------------------------------------
// Case manifests
// ---------------------------------------------------------------------------

enum class SupervisorRule {
  kRawValue,
  kSoftmaxMax,
  kGaussianNll,
  kKnnDist,
  kLinearRecon,
};

const char* to_string(SupervisorRule rule);

struct ScoreFileInputs {
  std::filesystem::path inlier_csv;
  std::filesystem::path outlier_csv;
};

struct FeatureInputs {
  std::optional<std::filesystem::path> train_csv;  // required for fitted rules
  std::filesystem::path inlier_csv;
  std::filesystem::path outlier_csv;
  SupervisorRule rule = SupervisorRule::kRawValue;
  bool from_logits = false;  // softmax_max only
  int k = 1;                 // knn only
  int m = 1;                 // linear_recon only
};

struct SyntheticInputs {
  GaussianCaseSpec spec;
  SupervisorRule rule = SupervisorRule::kRawValue;
  int k = 1;
  int m = 1;
};

/// One declared inlier/outlier test case. model_id records the model under
/// supervision, which must stay fixed across supervisors within a case for
/// their reports to be comparable.
struct CaseManifest {
  std::string case_name;
  std::string supervisor_name;
  std::string model_id;
  std::variant<ScoreFileInputs, FeatureInputs, SyntheticInputs> input;
  std::optional<double> baseline_accuracy;
  int bin_count = 50;
  std::optional<std::filesystem::path> output_dir;
  std::filesystem::path base_dir;  // manifest location; relative paths resolve here
};

/// Strict, fail-closed manifest parsing: unknown keys are rejected with a
/// SchemaError naming the offending path, exactly one input variant must be
/// present, and rule-specific parameters are only accepted with their rule.
/// The machine-readable schema ships in schemas/manifest.schema.json.
CaseManifest read_manifest(const std::filesystem::path& path);

/// Parses a standalone synthetic-case spec file whose top-level object uses
/// the same layout as the manifest's "synthetic" input variant.
SyntheticInputs read_synthetic_spec(const std::filesystem::path& path);

/// Runs a manifest end to end: ingest or generate, score, validate,
/// evaluate. Fills in the case/supervisor/model names from the manifest.
MetricsReport run_case(const CaseManifest& manifest);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Provenance recorded alongside a report. The timestamp is the manifest
/// file's modification time, not the run time, so re-evaluating an unchanged
/// manifest yields byte-identical output.
struct ReportMeta {
  std::string tool_version;
  std::string manifest_sha256;
  std::string manifest_mtime;  // ISO-8601 UTC
};

ReportMeta report_meta_for_manifest(const std::filesystem::path& manifest_path);

struct ReportFile {
  MetricsReport report;
  ReportMeta meta;
};

/// Writes dir/report.json plus a one-row dir/table.csv and returns the
/// written document. Numbers are serialized with full round-trip precision;
/// output is deterministic. The JSON layout is described by
/// schemas/report.schema.json.
ReportFile write_report(const MetricsReport& report, const ReportMeta& meta,
                        const std::filesystem::path& dir);

ReportFile read_report(const std::filesystem::path& path);

/// Comparison matrix with the fixed column order
/// supervisor,case,AUROC,AUPRC,TPR05,P95,FNR95,CBPL,CBFAD; rows sorted by
/// (case, supervisor); absent CBPL rendered as N/A. Throws DuplicateId when
/// two reports share the same (supervisor, case) pair.
std::string render_table_csv(std::span<const ReportFile> reports);

// ---------------------------------------------------------------------------
// Plots
// ---------------------------------------------------------------------------

struct PlotLayout {
  double width = 640.0;
  double height = 480.0;
  double margin_left = 70.0;
  double margin_right = 20.0;
  double margin_top = 40.0;
  double margin_bottom = 60.0;
};

/// Emits roc.svg, pr.svg, distribution.svg and, when the report carries a
/// risk-coverage curve, risk_coverage.svg. Output is deterministic (no
/// timestamps, fixed-precision coordinates). Returns the written paths.
std::vector<std::filesystem::path> emit_plots(const MetricsReport& report,
                                              const std::filesystem::path& dir,
                                              const PlotLayout& layout = {});

// ---------------------------------------------------------------------------
// Small utilities
// ---------------------------------------------------------------------------

std::string sha256_hex_of_file(const std::filesystem::path& path);
std::string file_mtime_iso8601(const std::filesystem::path& path);

}  // namespace supeval
