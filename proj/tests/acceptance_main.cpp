// Acceptance gate: one self-contained check per release criterion, each
// printing a single PASS/FAIL line with the measured numbers. Exits nonzero
// when any criterion fails.
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "supeval/io.hpp"
#include "supeval/metrics.hpp"
#include "supeval/synth.hpp"
#include "supeval/version.hpp"
#include "test_util.hpp"

using namespace supeval;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("[%d/7] %-28s %s  (%s)\n", index, name, pass ? "PASS" : "FAIL",
              detail.c_str());
  if (!pass) ++g_failures;
}

std::string format(const char* fmt, ...) {
  char buffer[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buffer, sizeof buffer, fmt, args);
  va_end(args);
  return buffer;
}

struct DiffTracker {
  double max_abs = 0.0;
  bool all_finite = true;

  void add(double got, double want) {
    if (!std::isfinite(got) || !std::isfinite(want)) {
      if (std::isinf(got) && std::isinf(want) && (got > 0) == (want > 0)) {
        return;
      }
      all_finite = false;
      return;
    }
    max_abs = std::max(max_abs, std::abs(got - want));
  }
  bool within(double tol) const { return all_finite && max_abs <= tol; }
};

// --- 1: every metric equals a brute-force oracle on random instances -------

void criterion_oracle_equivalence() {
  const auto start = Clock::now();
  const int instances = 200;
  const double tol = 1e-12;
  DiffTracker diff;
  int mismatched_shapes = 0;

  for (int seed = 1; seed <= instances; ++seed) {
    const std::vector<ScoredSample> raw = testutil::make_varied_instance(seed);
    const ValidatedSamples samples = validate_samples(raw);

    const Curve roc = roc_curve(samples);
    const Curve pr = pr_curve(samples);
    diff.add(auroc(roc), oracle::auroc(raw));
    diff.add(auprc(pr), oracle::auprc(raw));
    diff.add(tpr_at_fpr(roc, 0.05), oracle::tpr_at_fpr(raw, 0.05));
    diff.add(precision_at_recall(pr, 0.95),
             oracle::precision_at_recall(raw, 0.95));
    diff.add(fnr_at_fpr(roc, 0.95), oracle::fnr_at_fpr(raw, 0.95));
    diff.add(cbfad(samples), oracle::cbfad(raw));

    const auto points = oracle::operating_points(raw);
    if (roc.points.size() != points.size() ||
        pr.points.size() != points.size()) {
      ++mismatched_shapes;
      continue;
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      diff.add(roc.points[i].x, points[i].fpr);
      diff.add(roc.points[i].y, points[i].tpr);
      diff.add(roc.points[i].t, points[i].threshold);
      diff.add(pr.points[i].x, points[i].recall);
      diff.add(pr.points[i].y, points[i].precision);
    }

    if (samples.all_inliers_have_correctness()) {
      const Curve risk = risk_coverage_curve(samples);
      const auto oracle_risk = oracle::risk_coverage(raw);
      if (risk.points.size() != oracle_risk.size()) {
        ++mismatched_shapes;
        continue;
      }
      for (std::size_t i = 0; i < oracle_risk.size(); ++i) {
        diff.add(risk.points[i].x, oracle_risk[i].x);
        diff.add(risk.points[i].y, oracle_risk[i].y);
      }
      diff.add(cbpl(risk, 0.85), oracle::cbpl(raw, 0.85));
    }
  }

  const double elapsed = seconds_since(start);
  const bool pass = diff.within(tol) && mismatched_shapes == 0 &&
                    elapsed < 30.0;
  report(1, "oracle equivalence", pass,
         format("%d instances, max |delta| %.3g, %d shape mismatches, %.2f s",
                instances, diff.max_abs, mismatched_shapes, elapsed));
}

// --- 2: the hand-worked examples reproduce ---------------------------------

void criterion_worked_examples() {
  const std::vector<ScoredSample> worked = {
      {"i1", 0.1, false, {}}, {"i2", 0.2, false, {}}, {"i3", 0.3, false, {}},
      {"o1", 0.25, true, {}}, {"o2", 0.4, true, {}},
  };
  const ValidatedSamples ws = validate_samples(worked);
  const Curve roc = roc_curve(ws);
  const Curve pr = pr_curve(ws);

  DiffTracker tight;
  tight.add(auroc(roc), 5.0 / 6.0);
  tight.add(auprc(pr), 5.0 / 6.0);
  bool exact = tpr_at_fpr(roc, 0.05) == 0.5 &&
               precision_at_recall(pr, 0.95) == 2.0 / 3.0 &&
               fnr_at_fpr(roc, 0.95) == 0.0;

  const std::vector<ScoredSample> risk_set = {
      {"i1", 0.1, false, true},  {"i2", 0.2, false, true},
      {"i3", 0.3, false, false}, {"i4", 0.35, false, true},
      {"o1", 0.32, true, {}},    {"o2", 0.5, true, {}},
  };
  const ValidatedSamples rs = validate_samples(risk_set);
  const Curve risk = risk_coverage_curve(rs);
  const double expected_risks[] = {0.0, 0.0, 1.0 / 3.0, 0.5, 2.0 / 5.0, 0.5};
  bool risks_exact = risk.points.size() == 6;
  if (risks_exact) {
    for (int i = 0; i < 6; ++i) {
      risks_exact = risks_exact && risk.points[i].y == expected_risks[i];
    }
  }
  exact = exact && risks_exact && cbfad(rs) == 0.5 &&
          cbpl(risk, 0.75) == 1.0 / 3.0;

  const bool pass = exact && tight.within(1e-15);
  report(2, "worked examples", pass,
         format("AUROC %.17g, AUPRC %.17g, area |delta| %.3g, "
                "point values %s",
                auroc(roc), auprc(pr), tight.max_abs,
                exact ? "exact" : "NOT exact"));
}

// --- 3: synthetic Gaussian case matches the closed-form AUROC --------------

void criterion_analytic_calibration() {
  const auto start = Clock::now();
  GaussianCaseSpec spec;
  spec.dim = 1;
  spec.outlier_mean = 2.0;
  spec.n_train = 1;
  spec.n_inliers = 20000;
  spec.n_outliers = 20000;
  spec.seed = 20260823;

  const GeneratedCase generated = generate_gaussian_case(spec);
  const std::vector<ScoredSample> scored =
      score_matrix(RawValueRule{}, generated.test, generated.is_outlier,
                   generated.correctness);
  const MetricsReport result = evaluate_case(validate_samples(scored));
  const double expected = analytic_auroc_1d(2.0, 1.0);
  const double delta = std::abs(result.auroc - expected);
  const double elapsed = seconds_since(start);
  const bool pass = delta <= 0.01 && elapsed < 5.0;
  report(3, "analytic calibration", pass,
         format("AUROC %.6f vs %.6f, |delta| %.5f <= 0.01, %.2f s",
                result.auroc, expected, delta, elapsed));
}

// --- 4: invariance properties hold over seeded random instances ------------

void criterion_invariances() {
  const int instances = 100;
  const double tol = 1e-12;
  int monotone_fail = 0, swap_fail = 0, full_cov_fail = 0, prefix_fail = 0;

  for (int seed = 1; seed <= instances; ++seed) {
    testutil::InstanceOptions options;
    options.tie_heavy = seed % 2 == 1;
    options.with_correctness = true;
    options.inlier_error_rate = 0.2;
    const std::vector<ScoredSample> raw =
        testutil::make_instance(seed * 31 + 7, options);
    const ValidatedSamples samples = validate_samples(raw);
    const Curve roc = roc_curve(samples);
    const Curve pr = pr_curve(samples);
    const Curve risk = risk_coverage_curve(samples);

    // monotone transform: exp((x + 1) / 3) preserves score order
    std::vector<ScoredSample> warped = raw;
    for (ScoredSample& s : warped) {
      s.anomaly_score = std::exp((s.anomaly_score + 1.0) / 3.0);
    }
    const ValidatedSamples wv = validate_samples(warped);
    const Curve wroc = roc_curve(wv);
    const Curve wpr = pr_curve(wv);
    DiffTracker m;
    m.add(auroc(wroc), auroc(roc));
    m.add(auprc(wpr), auprc(pr));
    m.add(tpr_at_fpr(wroc, 0.05), tpr_at_fpr(roc, 0.05));
    m.add(precision_at_recall(wpr, 0.95), precision_at_recall(pr, 0.95));
    m.add(fnr_at_fpr(wroc, 0.95), fnr_at_fpr(roc, 0.95));
    m.add(cbfad(wv), cbfad(samples));
    m.add(cbpl(risk_coverage_curve(wv), 0.8), cbpl(risk, 0.8));
    if (!m.within(tol)) ++monotone_fail;

    // label swap: AUROC of the negated problem is the complement
    std::vector<ScoredSample> swapped = raw;
    for (ScoredSample& s : swapped) {
      s.is_outlier = !s.is_outlier;
      s.prediction_correct.reset();
    }
    const double dual = auroc(roc_curve(validate_samples(swapped)));
    if (std::abs(dual - (1.0 - auroc(roc))) > tol) ++swap_fail;

    // full coverage accepts everything: risk = overall error fraction
    std::size_t errors = 0;
    for (const ScoredSample& s : raw) {
      if (counts_as_error(s)) ++errors;
    }
    const CurvePoint& last = risk.points.back();
    if (std::abs(last.x - 1.0) > tol ||
        std::abs(last.y - double(errors) / double(raw.size())) > tol) {
      ++full_cov_fail;
    }

    // the CBFAD prefix holds no outlier and is maximal
    const double c = cbfad(samples);
    std::vector<ScoredSample> sorted = raw;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScoredSample& a, const ScoredSample& b) {
                return a.anomaly_score < b.anomaly_score;
              });
    double min_outlier = std::numeric_limits<double>::infinity();
    for (const ScoredSample& s : raw) {
      if (s.is_outlier) min_outlier = std::min(min_outlier, s.anomaly_score);
    }
    const auto k = static_cast<std::size_t>(
        std::llround(c * double(raw.size())));
    bool ok = std::abs(c - double(k) / double(raw.size())) <= tol;
    for (std::size_t i = 0; ok && i < k; ++i) {
      ok = !sorted[i].is_outlier && sorted[i].anomaly_score < min_outlier;
    }
    if (ok && k < raw.size()) ok = sorted[k].anomaly_score >= min_outlier;
    if (!ok) ++prefix_fail;
  }

  const bool pass = monotone_fail + swap_fail + full_cov_fail + prefix_fail ==
                    0;
  report(4, "invariance suite", pass,
         format("%d instances: monotone %d, label swap %d, full coverage %d, "
                "zero-outlier prefix %d failures",
                instances, monotone_fail, swap_fail, full_cov_fail,
                prefix_fail));
}

// --- 5: table rows are complete; CBPL is N/A exactly without a baseline ----

std::vector<std::string> csv_cells(const std::string& row) {
  std::vector<std::string> cells;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

void criterion_table_structure() {
  // seed chosen so the instance carries inlier correctness flags and the
  // baseline-present row therefore has a numeric CBPL cell
  const std::vector<ScoredSample> raw = testutil::make_varied_instance(100);
  bool pass = true;
  std::string note;

  for (const bool with_baseline : {true, false}) {
    EvaluateOptions options;
    if (with_baseline) options.baseline_accuracy = 0.9;
    MetricsReport r = evaluate_case(validate_samples(raw), options);
    r.case_name = "structural";
    r.supervisor_name = "probe";
    r.model_id = "m";
    ReportFile file{r, {kVersion, std::string(64, '0'), "1970-01-01T00:00:00Z"}};
    const std::vector<ReportFile> files{file};
    const std::string table = render_table_csv(files);

    std::stringstream ss(table);
    std::string header, row;
    std::getline(ss, header);
    std::getline(ss, row);
    if (header != "supervisor,case,AUROC,AUPRC,TPR05,P95,FNR95,CBPL,CBFAD") {
      pass = false;
      note = "bad header";
      break;
    }
    const auto cells = csv_cells(row);
    if (cells.size() != 9) {
      pass = false;
      note = "row has " + std::to_string(cells.size()) + " cells";
      break;
    }
    const bool has_flags =
        validate_samples(raw).all_inliers_have_correctness();
    const bool expect_na = !(with_baseline && has_flags);
    if ((cells[7] == "N/A") != expect_na) {
      pass = false;
      note = "CBPL cell '" + cells[7] + "' with baseline " +
             (with_baseline ? "present" : "absent");
      break;
    }
    for (std::size_t i = 2; i < cells.size(); ++i) {
      if (i == 7 && expect_na) continue;
      if (cells[i].find_first_not_of("0123456789.") != std::string::npos) {
        pass = false;
        note = "non-numeric cell " + cells[i];
      }
    }
  }

  // heavily overlapping synthetic scores still match the oracle
  GaussianCaseSpec spec;
  spec.outlier_mean = 0.5;
  spec.n_train = 1;
  spec.n_inliers = 2000;
  spec.n_outliers = 2000;
  spec.seed = 5;
  const GeneratedCase overlap = generate_gaussian_case(spec);
  const auto scored = score_matrix(RawValueRule{}, overlap.test,
                                   overlap.is_outlier, overlap.correctness);
  const double got = auroc(roc_curve(validate_samples(scored)));
  const double want = oracle::auroc(scored);
  if (std::abs(got - want) > 1e-12) {
    pass = false;
    note = format("overlap AUROC %.17g vs oracle %.17g", got, want);
  }

  report(5, "table structure", pass,
         pass ? format("9-cell row, CBPL N/A iff baseline absent, overlap "
                       "AUROC %.4f = oracle",
                       got)
              : note);
}

// --- 6: evaluate is bytewise deterministic ---------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void criterion_determinism() {
  const char* bin = std::getenv("SUPEVAL_BIN");
  if (bin == nullptr) {
    report(6, "determinism", false, "SUPEVAL_BIN not set; cannot run the CLI");
    return;
  }
  const fs::path dir =
      fs::temp_directory_path() /
      ("supeval_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  {
    std::ofstream m(dir / "manifest.json");
    m << R"({
  "case_name": "determinism", "supervisor_name": "raw",
  "model_id": "synthetic-gaussian", "baseline_accuracy": 0.9,
  "input": {"synthetic": {"n_inliers": 300, "n_outliers": 150,
                          "outlier_mean": 1.5, "inlier_error_rate": 0.1,
                          "seed": 77}}
})";
  }
  const auto run = [&](const char* sub) {
    const std::string cmd = std::string(bin) + " evaluate --manifest " +
                            (dir / "manifest.json").string() + " --out " +
                            (dir / sub).string() + " > " +
                            (dir / (std::string(sub) + ".stdout")).string() +
                            " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const int rc1 = run("a");
  const int rc2 = run("b");

  bool pass = rc1 == 0 && rc2 == 0;
  std::string mismatch;
  int compared = 0;
  if (pass) {
    for (const char* name :
         {"report.json", "table.csv", "roc.svg", "pr.svg", "distribution.svg",
          "risk_coverage.svg"}) {
      if (!fs::exists(dir / "a" / name) || !fs::exists(dir / "b" / name)) {
        pass = false;
        mismatch = std::string(name) + " missing";
        break;
      }
      if (slurp(dir / "a" / name) != slurp(dir / "b" / name)) {
        pass = false;
        mismatch = std::string(name) + " differs";
        break;
      }
      ++compared;
    }
    if (pass &&
        slurp(dir / "a.stdout") != slurp(dir / "b.stdout")) {
      pass = false;
      mismatch = "stdout differs";
    }
  } else {
    mismatch = format("exit codes %d / %d", rc1, rc2);
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  report(6, "determinism", pass,
         pass ? format("two runs, %d artifacts bytewise identical", compared)
              : mismatch);
}

// --- 7: a million ingested samples evaluate quickly and lean ---------------

std::vector<ScoredSample> make_bulk(std::size_t n, std::uint64_t seed) {
  testutil::TestRng rng(seed);
  std::vector<ScoredSample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ScoredSample s;
    const bool outlier = i % 2 == 1;
    s.sample_id = (outlier ? "o" : "i") + std::to_string(i);
    s.anomaly_score = rng.normal() + (outlier ? 1.0 : 0.0);
    s.is_outlier = outlier;
    if (!outlier) s.prediction_correct = rng.uniform() >= 0.1;
    samples.push_back(std::move(s));
  }
  return samples;
}

double time_evaluate(const ValidatedSamples& samples) {
  EvaluateOptions options;
  options.baseline_accuracy = 0.9;
  const auto start = Clock::now();
  const MetricsReport r = evaluate_case(samples, options);
  double elapsed = seconds_since(start);
  if (r.auroc < 0.0) std::abort();  // keep the result observable
  return elapsed;
}

void criterion_performance() {
  const std::size_t small_n = 125000, big_n = 1000000;
  const std::vector<ScoredSample> small_raw = make_bulk(small_n, 1234);
  const std::vector<ScoredSample> big_raw = make_bulk(big_n, 1234);
  const ValidatedSamples small = validate_samples(small_raw);
  const ValidatedSamples big = validate_samples(big_raw);

  const double t_small = std::min(time_evaluate(small), time_evaluate(small));
  const double t_big = time_evaluate(big);

  struct rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  const double peak_mib = double(usage.ru_maxrss) / 1024.0;

  // 8x the data: O(N log N) predicts ~9.4x, quadratic would be 64x
  const double ratio = t_big / std::max(t_small, 1e-3);
  const bool pass = t_big < 5.0 && peak_mib < 1024.0 && ratio < 20.0;
  report(7, "performance at scale", pass,
         format("1M samples in %.2f s (limit 5), peak RSS %.0f MiB "
                "(limit 1024), 8x-data time ratio %.1f (limit 20)",
                t_big, peak_mib, ratio));
}

}  // namespace

int main() {
  std::printf("acceptance gate, tool version %s\n", kVersion);
  criterion_oracle_equivalence();
  criterion_worked_examples();
  criterion_analytic_calibration();
  criterion_invariances();
  criterion_table_structure();
  criterion_determinism();
  criterion_performance();
  if (g_failures == 0) {
    std::printf("all 7 criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) FAILED\n", g_failures);
  return 1;
}
