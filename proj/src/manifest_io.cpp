#include <algorithm>
#include <fstream>
#include <initializer_list>

#include "json.hpp"
#include "supeval/io.hpp"
#include "supeval/metrics.hpp"

namespace supeval {

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, path + ": " + what);
}

// Every object is checked against an explicit key list so that a typo in an
// evaluation config fails loudly instead of being ignored.
void reject_unknown_keys(const json& object, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : object.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      schema_fail(path + "/" + key, "unknown key");
    }
  }
}

const json* find(const json& object, const char* key) {
  const auto it = object.find(key);
  return it == object.end() ? nullptr : &*it;
}

std::string get_string(const json& object, const std::string& path,
                       const char* key) {
  const json* v = find(object, key);
  if (!v) schema_fail(path + "/" + key, "missing required key");
  if (!v->is_string()) schema_fail(path + "/" + key, "expected a string");
  return v->get<std::string>();
}

double get_number(const json& object, const std::string& path, const char* key,
                  double fallback, bool required) {
  const json* v = find(object, key);
  if (!v) {
    if (required) schema_fail(path + "/" + key, "missing required key");
    return fallback;
  }
  if (!v->is_number()) schema_fail(path + "/" + key, "expected a number");
  return v->get<double>();
}

std::int64_t get_integer(const json& object, const std::string& path,
                         const char* key, std::int64_t fallback,
                         bool required) {
  const json* v = find(object, key);
  if (!v) {
    if (required) schema_fail(path + "/" + key, "missing required key");
    return fallback;
  }
  if (!v->is_number_integer()) {
    schema_fail(path + "/" + key, "expected an integer");
  }
  return v->get<std::int64_t>();
}

bool get_bool(const json& object, const std::string& path, const char* key,
              bool fallback) {
  const json* v = find(object, key);
  if (!v) return fallback;
  if (!v->is_boolean()) schema_fail(path + "/" + key, "expected a boolean");
  return v->get<bool>();
}

SupervisorRule parse_rule(const json& object, const std::string& path,
                          SupervisorRule fallback) {
  const json* v = find(object, "rule");
  if (!v) return fallback;
  if (!v->is_string()) schema_fail(path + "/rule", "expected a string");
  const std::string name = v->get<std::string>();
  if (name == "raw") return SupervisorRule::kRawValue;
  if (name == "softmax_max") return SupervisorRule::kSoftmaxMax;
  if (name == "gaussian_nll") return SupervisorRule::kGaussianNll;
  if (name == "knn") return SupervisorRule::kKnnDist;
  if (name == "linear_recon") return SupervisorRule::kLinearRecon;
  schema_fail(path + "/rule", "unknown rule '" + name + "'");
}

bool is_fitted_rule(SupervisorRule rule) {
  return rule == SupervisorRule::kGaussianNll ||
         rule == SupervisorRule::kKnnDist ||
         rule == SupervisorRule::kLinearRecon;
}

// Rule parameters are fail-closed too: k only makes sense for knn, m for
// linear_recon, from_logits for softmax_max.
void check_rule_params(const json& object, const std::string& path,
                       SupervisorRule rule) {
  if (find(object, "k") && rule != SupervisorRule::kKnnDist) {
    schema_fail(path + "/k", "only valid for rule knn");
  }
  if (find(object, "m") && rule != SupervisorRule::kLinearRecon) {
    schema_fail(path + "/m", "only valid for rule linear_recon");
  }
  if (find(object, "from_logits") && rule != SupervisorRule::kSoftmaxMax) {
    schema_fail(path + "/from_logits", "only valid for rule softmax_max");
  }
}

GaussianCaseSpec parse_gaussian_spec(const json& object,
                                     const std::string& path) {
  GaussianCaseSpec spec;
  spec.dim = static_cast<int>(get_integer(object, path, "dim", 1, false));
  spec.inlier_mean = get_number(object, path, "inlier_mean", 0.0, false);
  spec.inlier_sigma = get_number(object, path, "inlier_sigma", 1.0, false);
  spec.outlier_mean = get_number(object, path, "outlier_mean", 2.0, false);
  spec.outlier_sigma = get_number(object, path, "outlier_sigma", 1.0, false);
  spec.n_train = get_integer(object, path, "n_train", 0, false);
  spec.n_inliers = get_integer(object, path, "n_inliers", 0, true);
  spec.n_outliers = get_integer(object, path, "n_outliers", 0, true);
  spec.inlier_error_rate =
      get_number(object, path, "inlier_error_rate", 0.0, false);
  if (spec.dim < 1) schema_fail(path + "/dim", "must be >= 1");
  if (!(spec.inlier_sigma > 0.0)) {
    schema_fail(path + "/inlier_sigma", "must be > 0");
  }
  if (!(spec.outlier_sigma > 0.0)) {
    schema_fail(path + "/outlier_sigma", "must be > 0");
  }
  if (spec.n_train < 0) schema_fail(path + "/n_train", "must be >= 0");
  if (spec.n_inliers < 1) schema_fail(path + "/n_inliers", "must be >= 1");
  if (spec.n_outliers < 1) schema_fail(path + "/n_outliers", "must be >= 1");
  if (!(spec.inlier_error_rate >= 0.0 && spec.inlier_error_rate <= 1.0)) {
    schema_fail(path + "/inlier_error_rate", "must be in [0, 1]");
  }
  const json* seed = find(object, "seed");
  if (!seed) schema_fail(path + "/seed", "missing required key");
  if (!seed->is_number_integer() && !seed->is_number_unsigned()) {
    schema_fail(path + "/seed", "expected an integer");
  }
  if (seed->is_number_integer() && seed->get<std::int64_t>() < 0) {
    schema_fail(path + "/seed", "must be non-negative");
  }
  spec.seed = seed->get<std::uint64_t>();
  return spec;
}

FeatureInputs parse_feature_inputs(const json& object,
                                   const std::string& path) {
  reject_unknown_keys(object, path,
                      {"train_csv", "inlier_csv", "outlier_csv", "rule",
                       "from_logits", "k", "m"});
  FeatureInputs inputs;
  inputs.inlier_csv = get_string(object, path, "inlier_csv");
  inputs.outlier_csv = get_string(object, path, "outlier_csv");
  inputs.rule = parse_rule(object, path, SupervisorRule::kRawValue);
  check_rule_params(object, path, inputs.rule);
  inputs.from_logits = get_bool(object, path, "from_logits", false);
  inputs.k = static_cast<int>(get_integer(object, path, "k", 1, false));
  inputs.m = static_cast<int>(get_integer(object, path, "m", 1, false));
  if (const json* train = find(object, "train_csv")) {
    if (!train->is_string()) schema_fail(path + "/train_csv", "expected a string");
    inputs.train_csv = train->get<std::string>();
  }
  if (is_fitted_rule(inputs.rule) && !inputs.train_csv) {
    schema_fail(path + "/train_csv",
                "required for rule " + std::string(to_string(inputs.rule)));
  }
  if (!is_fitted_rule(inputs.rule) && inputs.train_csv) {
    schema_fail(path + "/train_csv",
                "not used by rule " + std::string(to_string(inputs.rule)));
  }
  return inputs;
}

SyntheticInputs parse_synthetic_inputs(const json& object,
                                       const std::string& path) {
  reject_unknown_keys(object, path,
                      {"dim", "inlier_mean", "inlier_sigma", "outlier_mean",
                       "outlier_sigma", "n_train", "n_inliers", "n_outliers",
                       "inlier_error_rate", "seed", "rule", "k", "m"});
  SyntheticInputs inputs;
  inputs.spec = parse_gaussian_spec(object, path);
  inputs.rule = parse_rule(object, path, SupervisorRule::kRawValue);
  check_rule_params(object, path, inputs.rule);
  inputs.k = static_cast<int>(get_integer(object, path, "k", 1, false));
  inputs.m = static_cast<int>(get_integer(object, path, "m", 1, false));
  if (inputs.rule == SupervisorRule::kSoftmaxMax) {
    schema_fail(path + "/rule",
                "softmax_max cannot score Gaussian synthetic features");
  }
  return inputs;
}

}  // namespace

const char* to_string(SupervisorRule rule) {
  switch (rule) {
    case SupervisorRule::kRawValue: return "raw";
    case SupervisorRule::kSoftmaxMax: return "softmax_max";
    case SupervisorRule::kGaussianNll: return "gaussian_nll";
    case SupervisorRule::kKnnDist: return "knn";
    case SupervisorRule::kLinearRecon: return "linear_recon";
  }
  return "unknown";
}

CaseManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError,
                "cannot open manifest '" + path.string() + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                path.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) schema_fail("/", "manifest must be a JSON object");

  reject_unknown_keys(doc, "",
                      {"case_name", "supervisor_name", "model_id", "input",
                       "baseline_accuracy", "bin_count", "output_dir"});

  CaseManifest manifest;
  manifest.case_name = get_string(doc, "", "case_name");
  manifest.supervisor_name = get_string(doc, "", "supervisor_name");
  manifest.model_id = get_string(doc, "", "model_id");
  if (manifest.case_name.empty()) schema_fail("/case_name", "must not be empty");
  if (manifest.supervisor_name.empty()) {
    schema_fail("/supervisor_name", "must not be empty");
  }

  const json* input = find(doc, "input");
  if (!input) schema_fail("/input", "missing required key");
  if (!input->is_object()) schema_fail("/input", "expected an object");
  reject_unknown_keys(*input, "/input",
                      {"score_files", "features", "synthetic"});
  if (input->size() != 1) {
    schema_fail("/input",
                "exactly one of score_files, features, synthetic required");
  }

  if (const json* sf = find(*input, "score_files")) {
    if (!sf->is_object()) schema_fail("/input/score_files", "expected an object");
    reject_unknown_keys(*sf, "/input/score_files", {"inlier_csv", "outlier_csv"});
    ScoreFileInputs inputs;
    inputs.inlier_csv = get_string(*sf, "/input/score_files", "inlier_csv");
    inputs.outlier_csv = get_string(*sf, "/input/score_files", "outlier_csv");
    manifest.input = std::move(inputs);
  } else if (const json* f = find(*input, "features")) {
    if (!f->is_object()) schema_fail("/input/features", "expected an object");
    manifest.input = parse_feature_inputs(*f, "/input/features");
  } else {
    const json* s = find(*input, "synthetic");
    if (!s->is_object()) schema_fail("/input/synthetic", "expected an object");
    manifest.input = parse_synthetic_inputs(*s, "/input/synthetic");
  }

  if (find(doc, "baseline_accuracy")) {
    const double b = get_number(doc, "", "baseline_accuracy", 0.0, true);
    if (!(b >= 0.0 && b <= 1.0)) {
      schema_fail("/baseline_accuracy", "must lie in [0, 1]");
    }
    manifest.baseline_accuracy = b;
  }
  manifest.bin_count =
      static_cast<int>(get_integer(doc, "", "bin_count", 50, false));
  if (manifest.bin_count < 1) schema_fail("/bin_count", "must be >= 1");
  if (find(doc, "output_dir")) {
    manifest.output_dir = get_string(doc, "", "output_dir");
  }

  manifest.base_dir = path.has_parent_path() ? path.parent_path()
                                             : std::filesystem::path(".");
  return manifest;
}

SyntheticInputs read_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError,
                "cannot open spec '" + path.string() + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                path.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) schema_fail("/", "spec must be a JSON object");
  return parse_synthetic_inputs(doc, "");
}

namespace {

std::filesystem::path resolve(const CaseManifest& manifest,
                              const std::filesystem::path& p) {
  return p.is_absolute() ? p : manifest.base_dir / p;
}

std::vector<ScoredSample> score_features(
    SupervisorRule rule, bool from_logits, int k, int m,
    const FeatureMatrix* train, const FeatureMatrix& features,
    const std::vector<bool>& labels,
    const std::vector<std::optional<bool>>& correctness) {
  switch (rule) {
    case SupervisorRule::kRawValue:
      return score_matrix(RawValueRule{}, features, labels, correctness);
    case SupervisorRule::kSoftmaxMax:
      return score_matrix(SoftmaxMaxRule{from_logits}, features, labels,
                          correctness);
    case SupervisorRule::kGaussianNll:
      return score_matrix(fit_gaussian_nll(*train), features, labels,
                          correctness);
    case SupervisorRule::kKnnDist:
      return score_matrix(fit_knn(*train, k), features, labels, correctness);
    case SupervisorRule::kLinearRecon:
      return score_matrix(fit_linear_recon(*train, m), features, labels,
                          correctness);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown supervisor rule");
}

std::vector<ScoredSample> ingest(const CaseManifest& manifest) {
  if (const auto* sf = std::get_if<ScoreFileInputs>(&manifest.input)) {
    auto samples = read_score_csv(resolve(manifest, sf->inlier_csv), false);
    auto outliers = read_score_csv(resolve(manifest, sf->outlier_csv), true);
    samples.insert(samples.end(), std::make_move_iterator(outliers.begin()),
                   std::make_move_iterator(outliers.end()));
    return samples;
  }

  if (const auto* fi = std::get_if<FeatureInputs>(&manifest.input)) {
    std::optional<FeatureCsv> train;
    if (fi->train_csv) {
      train = read_feature_csv(resolve(manifest, *fi->train_csv));
    }
    const FeatureCsv inliers = read_feature_csv(resolve(manifest, fi->inlier_csv));
    const FeatureCsv outliers =
        read_feature_csv(resolve(manifest, fi->outlier_csv));

    auto samples = score_features(
        fi->rule, fi->from_logits, fi->k, fi->m,
        train ? &train->features : nullptr, inliers.features,
        std::vector<bool>(inliers.features.rows(), false), inliers.correctness);
    auto outlier_samples = score_features(
        fi->rule, fi->from_logits, fi->k, fi->m,
        train ? &train->features : nullptr, outliers.features,
        std::vector<bool>(outliers.features.rows(), true),
        outliers.correctness);
    samples.insert(samples.end(),
                   std::make_move_iterator(outlier_samples.begin()),
                   std::make_move_iterator(outlier_samples.end()));
    return samples;
  }

  const auto& synth = std::get<SyntheticInputs>(manifest.input);
  const GeneratedCase generated = generate_gaussian_case(synth.spec);
  return score_features(synth.rule, false, synth.k, synth.m, &generated.train,
                        generated.test, generated.is_outlier,
                        generated.correctness);
}

}  // namespace

MetricsReport run_case(const CaseManifest& manifest) {
  const ValidatedSamples validated = validate_samples(ingest(manifest));
  EvaluateOptions options;
  options.baseline_accuracy = manifest.baseline_accuracy;
  options.bin_count = manifest.bin_count;
  MetricsReport report = evaluate_case(validated, options);
  report.case_name = manifest.case_name;
  report.supervisor_name = manifest.supervisor_name;
  report.model_id = manifest.model_id;
  return report;
}

}  // namespace supeval
