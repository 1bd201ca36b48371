#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "supeval/io.hpp"
#include "supeval/version.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;

struct CaseJob {
  fs::path manifest_path;
  supeval::CaseManifest manifest;
  fs::path out_dir;
};

fs::path case_out_dir(const CaseJob& job, const std::optional<fs::path>& out,
                      bool single) {
  if (job.manifest.output_dir) {
    const fs::path& d = *job.manifest.output_dir;
    return d.is_absolute() ? d : job.manifest.base_dir / d;
  }
  if (!out) {
    throw supeval::Error(supeval::ErrorCode::InvalidParameter,
                         "--out is required (manifest '" +
                             job.manifest_path.string() +
                             "' names no output_dir)");
  }
  if (single) return *out;
  return *out / (job.manifest.case_name + "__" +
                 job.manifest.supervisor_name);
}

int run_evaluate(const std::vector<std::string>& manifest_args,
                 const std::optional<fs::path>& out, int parallel) {
  std::vector<CaseJob> jobs;
  jobs.reserve(manifest_args.size());
  for (const std::string& arg : manifest_args) {
    CaseJob job;
    job.manifest_path = arg;
    job.manifest = supeval::read_manifest(job.manifest_path);
    jobs.push_back(std::move(job));
  }
  for (CaseJob& job : jobs) {
    job.out_dir = case_out_dir(job, out, jobs.size() == 1);
  }

  std::vector<supeval::ReportFile> results(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());
  std::atomic<std::size_t> next{0};
  const int workers =
      std::max(1, std::min<int>(parallel, static_cast<int>(jobs.size())));

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        const CaseJob& job = jobs[i];
        supeval::ReportFile result;
        result.report = supeval::run_case(job.manifest);
        result.meta = supeval::report_meta_for_manifest(job.manifest_path);
        supeval::write_report(result.report, result.meta, job.out_dir);
        supeval::emit_plots(result.report, job.out_dir);
        results[i] = std::move(result);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  bool internal_failure = false;
  bool any_failure = false;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!failures[i]) continue;
    any_failure = true;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const supeval::Error& e) {
      std::cerr << jobs[i].manifest_path.string() << ": error: " << e.what()
                << '\n';
    } catch (const std::exception& e) {
      std::cerr << jobs[i].manifest_path.string()
                << ": internal error: " << e.what() << '\n';
      internal_failure = true;
    }
  }
  if (any_failure) return internal_failure ? kExitInternal : kExitValidation;

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!results[i].report.risk_coverage) {
      std::cerr << "note: " << results[i].report.case_name << '/'
                << results[i].report.supervisor_name
                << ": risk-coverage plot skipped (inlier correctness flags "
                   "absent)\n";
    }
  }
  std::cout << supeval::render_table_csv(results);
  return kExitOk;
}

int run_score(const std::string& rule_name, const std::optional<fs::path>& train,
              const fs::path& features_path, const fs::path& out, int k, int m,
              bool logits) {
  using supeval::SupervisorRule;
  SupervisorRule rule;
  if (rule_name == "softmax_max") rule = SupervisorRule::kSoftmaxMax;
  else if (rule_name == "gaussian_nll") rule = SupervisorRule::kGaussianNll;
  else if (rule_name == "knn") rule = SupervisorRule::kKnnDist;
  else if (rule_name == "linear_recon") rule = SupervisorRule::kLinearRecon;
  else {
    throw supeval::Error(supeval::ErrorCode::InvalidParameter,
                         "unknown rule '" + rule_name + "'");
  }

  const bool fitted = rule != SupervisorRule::kSoftmaxMax;
  if (fitted && !train) {
    throw supeval::Error(supeval::ErrorCode::InvalidParameter,
                         "--train is required for rule " + rule_name);
  }
  if (!fitted && train) {
    throw supeval::Error(supeval::ErrorCode::InvalidParameter,
                         "--train is not used by rule " + rule_name);
  }

  const supeval::FeatureCsv data = supeval::read_feature_csv(features_path);
  const std::vector<bool> labels(data.features.rows(), false);
  std::vector<supeval::ScoredSample> samples;
  switch (rule) {
    case SupervisorRule::kSoftmaxMax:
      samples = supeval::score_matrix(supeval::SoftmaxMaxRule{logits},
                                      data.features, labels, data.correctness);
      break;
    case SupervisorRule::kGaussianNll: {
      const supeval::FeatureCsv t = supeval::read_feature_csv(*train);
      samples = supeval::score_matrix(supeval::fit_gaussian_nll(t.features),
                                      data.features, labels, data.correctness);
      break;
    }
    case SupervisorRule::kKnnDist: {
      const supeval::FeatureCsv t = supeval::read_feature_csv(*train);
      samples = supeval::score_matrix(supeval::fit_knn(t.features, k),
                                      data.features, labels, data.correctness);
      break;
    }
    case SupervisorRule::kLinearRecon: {
      const supeval::FeatureCsv t = supeval::read_feature_csv(*train);
      samples =
          supeval::score_matrix(supeval::fit_linear_recon(t.features, m),
                                data.features, labels, data.correctness);
      break;
    }
    default:
      throw supeval::Error(supeval::ErrorCode::InvalidParameter,
                           "unsupported rule");
  }
  supeval::write_score_csv(out, samples);
  return kExitOk;
}

void collect_reports(const fs::path& arg, std::vector<fs::path>& found) {
  if (fs::is_directory(arg)) {
    std::vector<fs::path> hits;
    for (const auto& entry : fs::recursive_directory_iterator(arg)) {
      if (entry.is_regular_file() &&
          entry.path().filename() == "report.json") {
        hits.push_back(entry.path());
      }
    }
    std::sort(hits.begin(), hits.end());
    found.insert(found.end(), hits.begin(), hits.end());
    return;
  }
  found.push_back(arg);
}

int run_compare(const std::vector<std::string>& report_args,
                const fs::path& out) {
  std::vector<fs::path> paths;
  for (const std::string& arg : report_args) collect_reports(arg, paths);
  if (paths.empty()) {
    throw supeval::Error(supeval::ErrorCode::InvalidParameter,
                         "no report.json files found");
  }
  std::vector<supeval::ReportFile> reports;
  reports.reserve(paths.size());
  for (const fs::path& p : paths) reports.push_back(supeval::read_report(p));
  const std::string table = supeval::render_table_csv(reports);

  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream file(out, std::ios::binary);
  if (!file) {
    throw supeval::Error(supeval::ErrorCode::IoError,
                         "cannot write '" + out.string() + "'");
  }
  file << table;
  if (!file) {
    throw supeval::Error(supeval::ErrorCode::IoError,
                         "write failed for '" + out.string() + "'");
  }
  std::cout << table;
  return kExitOk;
}

int run_gen_synthetic(const fs::path& spec_path, const fs::path& out) {
  using nlohmann::json;
  const supeval::SyntheticInputs inputs =
      supeval::read_synthetic_spec(spec_path);
  const supeval::GeneratedCase generated =
      supeval::generate_gaussian_case(inputs.spec);

  fs::create_directories(out);
  supeval::write_feature_csv(out / "train.csv", generated.train, {});

  // Split the generated test block back into per-class files so the emitted
  // manifest can use the features input variant directly.
  const std::size_t rows = generated.test.rows();
  std::vector<std::string> inlier_ids, outlier_ids;
  std::vector<double> inlier_values, outlier_values;
  std::vector<std::optional<bool>> inlier_flags;
  const std::size_t cols = generated.test.cols();
  std::int64_t correct = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = generated.test.row(r);
    if (generated.is_outlier[r]) {
      outlier_ids.push_back(generated.test.row_ids()[r]);
      outlier_values.insert(outlier_values.end(), row.begin(), row.end());
    } else {
      inlier_ids.push_back(generated.test.row_ids()[r]);
      inlier_values.insert(inlier_values.end(), row.begin(), row.end());
      inlier_flags.push_back(generated.correctness[r]);
      if (generated.correctness[r].value_or(false)) ++correct;
    }
  }
  const supeval::FeatureMatrix inliers(std::move(inlier_ids),
                                       std::move(inlier_values), cols);
  const supeval::FeatureMatrix outliers(std::move(outlier_ids),
                                        std::move(outlier_values), cols);
  supeval::write_feature_csv(out / "inliers.csv", inliers, inlier_flags);
  supeval::write_feature_csv(out / "outliers.csv", outliers, {});

  const char* rule_name = supeval::to_string(inputs.rule);
  json features{{"train_csv", "train.csv"},
                {"inlier_csv", "inliers.csv"},
                {"outlier_csv", "outliers.csv"},
                {"rule", rule_name}};
  if (inputs.rule == supeval::SupervisorRule::kRawValue) {
    features.erase("train_csv");
  }
  if (inputs.rule == supeval::SupervisorRule::kKnnDist) {
    features["k"] = inputs.k;
  }
  if (inputs.rule == supeval::SupervisorRule::kLinearRecon) {
    features["m"] = inputs.m;
  }

  json manifest{
      {"case_name",
       "gaussian-dim" + std::to_string(inputs.spec.dim) + "-seed" +
           std::to_string(inputs.spec.seed)},
      {"supervisor_name", rule_name},
      {"model_id", "synthetic-gaussian"},
      {"baseline_accuracy",
       static_cast<double>(correct) /
           static_cast<double>(inliers.rows())},
      {"input", json{{"features", features}}},
  };

  std::ofstream file(out / "manifest.json", std::ios::binary);
  if (!file) {
    throw supeval::Error(supeval::ErrorCode::IoError,
                         "cannot write '" + (out / "manifest.json").string() +
                             "'");
  }
  file << manifest.dump(2) << '\n';
  if (!file) {
    throw supeval::Error(supeval::ErrorCode::IoError,
                         "write failed for '" +
                             (out / "manifest.json").string() + "'");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluation harness for DNN supervisors (anomaly detectors)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", supeval::kVersion);

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "Run one or more case manifests and write reports + plots");
  std::vector<std::string> manifest_args;
  std::string eval_out;
  int parallel = 1;
  evaluate->add_option("--manifest", manifest_args, "Case manifest JSON path")
      ->required()
      ->take_all();
  evaluate->add_option("--out", eval_out,
                       "Output directory (per-case subdirectories when "
                       "several manifests are given)");
  evaluate->add_option("--parallel", parallel,
                       "Evaluate up to N manifests concurrently")
      ->check(CLI::PositiveNumber);

  // score
  auto* score = app.add_subcommand(
      "score", "Apply a supervisor rule to a feature CSV and write scores");
  std::string rule_name;
  std::string train_arg;
  std::string features_arg;
  std::string score_out;
  int k = 1;
  int m = 1;
  bool logits = false;
  score->add_option("--rule", rule_name, "Supervisor rule")
      ->required()
      ->check(CLI::IsMember(
          {"softmax_max", "gaussian_nll", "knn", "linear_recon"}));
  score->add_option("--train", train_arg, "Training feature CSV");
  score->add_option("--features", features_arg, "Feature CSV to score")
      ->required();
  score->add_option("--out", score_out, "Output score CSV path")->required();
  score->add_option("--k", k, "Neighbor count for rule knn")
      ->check(CLI::PositiveNumber);
  score->add_option("--m", m, "Component count for rule linear_recon")
      ->check(CLI::PositiveNumber);
  score->add_flag("--logits", logits,
                  "Treat softmax_max inputs as logits, not probabilities");

  // compare
  auto* compare = app.add_subcommand(
      "compare", "Merge evaluation reports into one comparison table");
  std::vector<std::string> report_args;
  std::string compare_out;
  compare
      ->add_option("--reports", report_args,
                   "report.json files or directories to scan")
      ->required()
      ->take_all();
  compare->add_option("--out", compare_out, "Output table.csv path")
      ->required();

  // gen-synthetic
  auto* gen = app.add_subcommand(
      "gen-synthetic", "Materialize a synthetic Gaussian case spec");
  std::string spec_arg;
  std::string gen_out;
  gen->add_option("--spec", spec_arg, "Synthetic case spec JSON")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*evaluate) {
      std::optional<fs::path> out;
      if (!eval_out.empty()) out = eval_out;
      return run_evaluate(manifest_args, out, parallel);
    }
    if (*score) {
      std::optional<fs::path> train;
      if (!train_arg.empty()) train = train_arg;
      return run_score(rule_name, train, features_arg, score_out, k, m,
                       logits);
    }
    if (*compare) return run_compare(report_args, compare_out);
    if (*gen) return run_gen_synthetic(spec_arg, gen_out);
  } catch (const supeval::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
