#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "supeval/io.hpp"
#include "supeval/version.hpp"

namespace supeval {

namespace {

using nlohmann::json;

constexpr const char* kReportSchemaId = "supeval-report-v1";

// Metric numbers are serialized with 17 significant digits so that parsing
// them back reproduces the exact double; the report writer is hand-rolled to
// keep that guarantee and the byte layout under our control.
std::string num17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string threshold_token(double t) {
  if (std::isinf(t)) return t > 0 ? "\"inf\"" : "\"-inf\"";
  return num17(t);
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x",
                        static_cast<unsigned>(static_cast<unsigned char>(c)));
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void write_curve(std::ostream& os, const Curve& curve, const char* indent) {
  if (curve.points.empty()) {
    os << "[]";
    return;
  }
  os << "[\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const CurvePoint& p = curve.points[i];
    os << indent << "  [" << num17(p.x) << ", " << num17(p.y) << ", "
       << threshold_token(p.t) << ']';
    if (i + 1 < curve.points.size()) os << ',';
    os << '\n';
  }
  os << indent << ']';
}

template <typename T, typename Fmt>
void write_array(std::ostream& os, const std::vector<T>& values, Fmt fmt) {
  os << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ", ";
    os << fmt(values[i]);
  }
  os << ']';
}

std::string report_json(const MetricsReport& report, const ReportMeta& meta) {
  std::ostringstream os;
  os << "{\n";
  if (report.baseline_accuracy) {
    os << "  \"baseline_accuracy\": " << num17(*report.baseline_accuracy)
       << ",\n";
  }
  os << "  \"case_name\": \"" << json_escape(report.case_name) << "\",\n";
  os << "  \"curves\": {\n";
  os << "    \"pr\": ";
  write_curve(os, report.pr, "    ");
  os << ",\n";
  if (report.risk_coverage) {
    os << "    \"risk_coverage\": ";
    write_curve(os, *report.risk_coverage, "    ");
    os << ",\n";
  }
  os << "    \"roc\": ";
  write_curve(os, report.roc, "    ");
  os << "\n  },\n";

  const ScoreDistribution& d = report.distribution;
  os << "  \"distribution\": {\n";
  os << "    \"bin_edges\": ";
  write_array(os, d.bin_edges, num17);
  os << ",\n";
  os << "    \"degenerate_range\": " << (d.degenerate_range ? "true" : "false")
     << ",\n";
  os << "    \"inlier_counts\": ";
  write_array(os, d.inlier_counts,
              [](std::int64_t v) { return std::to_string(v); });
  os << ",\n";
  os << "    \"outlier_counts\": ";
  write_array(os, d.outlier_counts,
              [](std::int64_t v) { return std::to_string(v); });
  os << "\n  },\n";

  os << "  \"manifest_mtime\": \"" << json_escape(meta.manifest_mtime)
     << "\",\n";
  os << "  \"manifest_sha256\": \"" << json_escape(meta.manifest_sha256)
     << "\",\n";

  os << "  \"metrics\": {\n";
  os << "    \"auprc\": " << num17(report.auprc) << ",\n";
  os << "    \"auroc\": " << num17(report.auroc) << ",\n";
  os << "    \"cbfad\": " << num17(report.cbfad) << ",\n";
  os << "    \"cbpl\": " << (report.cbpl ? num17(*report.cbpl) : "null")
     << ",\n";
  os << "    \"fnr95\": " << num17(report.fnr95) << ",\n";
  os << "    \"p95\": " << num17(report.p95) << ",\n";
  if (report.risk_at_min_coverage) {
    os << "    \"risk_at_min_coverage\": "
       << num17(*report.risk_at_min_coverage) << ",\n";
  }
  os << "    \"tpr05\": " << num17(report.tpr05) << "\n  },\n";

  os << "  \"model_id\": \"" << json_escape(report.model_id) << "\",\n";
  os << "  \"sample_counts\": {\n";
  os << "    \"inliers\": " << report.sample_counts.inliers << ",\n";
  os << "    \"outliers\": " << report.sample_counts.outliers << "\n  },\n";
  os << "  \"schema\": \"" << kReportSchemaId << "\",\n";
  os << "  \"supervisor_name\": \"" << json_escape(report.supervisor_name)
     << "\",\n";
  os << "  \"tool_version\": \"" << json_escape(meta.tool_version) << "\"\n";
  os << "}\n";
  return os.str();
}

[[noreturn]] void report_fail(const std::filesystem::path& path,
                              const std::string& what) {
  throw Error(ErrorCode::SchemaError, path.string() + ": " + what);
}

double require_number(const json& v, const std::filesystem::path& path,
                      const std::string& where) {
  if (!v.is_number()) report_fail(path, where + ": expected a number");
  return v.get<double>();
}

std::string require_string(const json& v, const std::filesystem::path& path,
                           const std::string& where) {
  if (!v.is_string()) report_fail(path, where + ": expected a string");
  return v.get<std::string>();
}

const json& require_key(const json& object, const std::filesystem::path& path,
                        const std::string& where, const char* key) {
  const auto it = object.find(key);
  if (it == object.end()) {
    report_fail(path, where + "/" + key + ": missing required key");
  }
  return *it;
}

Curve parse_curve(const json& v, CurveKind kind,
                  const std::filesystem::path& path, const std::string& where) {
  if (!v.is_array()) report_fail(path, where + ": expected an array");
  Curve curve;
  curve.kind = kind;
  curve.points.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& entry = v[i];
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!entry.is_array() || entry.size() != 3) {
      report_fail(path, at + ": expected an [x, y, t] triple");
    }
    CurvePoint p;
    p.x = require_number(entry[0], path, at);
    p.y = require_number(entry[1], path, at);
    if (entry[2].is_string()) {
      const std::string t = entry[2].get<std::string>();
      if (t == "inf" || t == "+inf") {
        p.t = std::numeric_limits<double>::infinity();
      } else if (t == "-inf") {
        p.t = -std::numeric_limits<double>::infinity();
      } else {
        report_fail(path, at + ": unrecognized threshold '" + t + "'");
      }
    } else {
      p.t = require_number(entry[2], path, at);
    }
    curve.points.push_back(p);
  }
  return curve;
}

std::vector<double> parse_double_array(const json& v,
                                       const std::filesystem::path& path,
                                       const std::string& where) {
  if (!v.is_array()) report_fail(path, where + ": expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(
        require_number(v[i], path, where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::int64_t> parse_count_array(const json& v,
                                            const std::filesystem::path& path,
                                            const std::string& where) {
  if (!v.is_array()) report_fail(path, where + ": expected an array");
  std::vector<std::int64_t> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!v[i].is_number_integer() && !v[i].is_number_unsigned()) {
      report_fail(path, at + ": expected an integer");
    }
    out.push_back(v[i].get<std::int64_t>());
  }
  return out;
}

void check_known_keys(const json& object, const std::filesystem::path& path,
                      const std::string& where,
                      std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : object.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      report_fail(path, where + "/" + key + ": unknown key");
    }
  }
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::string table_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

ReportMeta report_meta_for_manifest(const std::filesystem::path& manifest_path) {
  ReportMeta meta;
  meta.tool_version = kVersion;
  meta.manifest_sha256 = sha256_hex_of_file(manifest_path);
  meta.manifest_mtime = file_mtime_iso8601(manifest_path);
  return meta;
}

ReportFile write_report(const MetricsReport& report, const ReportMeta& meta,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) {
      throw Error(ErrorCode::IoError,
                  "cannot write '" + (dir / "report.json").string() + "'");
    }
    out << report_json(report, meta);
    if (!out) {
      throw Error(ErrorCode::IoError,
                  "write failed for '" + (dir / "report.json").string() + "'");
    }
  }
  ReportFile self{report, meta};
  std::ofstream table(dir / "table.csv", std::ios::binary);
  if (!table) {
    throw Error(ErrorCode::IoError,
                "cannot write '" + (dir / "table.csv").string() + "'");
  }
  table << render_table_csv({&self, 1});
  if (!table) {
    throw Error(ErrorCode::IoError,
                "write failed for '" + (dir / "table.csv").string() + "'");
  }
  return self;
}

ReportFile read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open report '" + path.string() + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                path.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) report_fail(path, "report must be a JSON object");
  check_known_keys(doc, path, "",
                   {"baseline_accuracy", "case_name", "curves", "distribution",
                    "manifest_mtime", "manifest_sha256", "metrics", "model_id",
                    "sample_counts", "schema", "supervisor_name",
                    "tool_version"});

  const std::string schema =
      require_string(require_key(doc, path, "", "schema"), path, "/schema");
  if (schema != kReportSchemaId) {
    report_fail(path, "/schema: expected \"" + std::string(kReportSchemaId) +
                          "\", got \"" + schema + "\"");
  }

  ReportFile file;
  MetricsReport& r = file.report;
  r.case_name = require_string(require_key(doc, path, "", "case_name"), path,
                               "/case_name");
  r.supervisor_name = require_string(
      require_key(doc, path, "", "supervisor_name"), path, "/supervisor_name");
  r.model_id =
      require_string(require_key(doc, path, "", "model_id"), path, "/model_id");

  if (const auto it = doc.find("baseline_accuracy"); it != doc.end()) {
    r.baseline_accuracy = require_number(*it, path, "/baseline_accuracy");
  }

  const json& metrics = require_key(doc, path, "", "metrics");
  if (!metrics.is_object()) report_fail(path, "/metrics: expected an object");
  check_known_keys(metrics, path, "/metrics",
                   {"auprc", "auroc", "cbfad", "cbpl", "fnr95", "p95",
                    "risk_at_min_coverage", "tpr05"});
  r.auprc = require_number(require_key(metrics, path, "/metrics", "auprc"),
                           path, "/metrics/auprc");
  r.auroc = require_number(require_key(metrics, path, "/metrics", "auroc"),
                           path, "/metrics/auroc");
  r.cbfad = require_number(require_key(metrics, path, "/metrics", "cbfad"),
                           path, "/metrics/cbfad");
  const json& cbpl = require_key(metrics, path, "/metrics", "cbpl");
  if (!cbpl.is_null()) {
    r.cbpl = require_number(cbpl, path, "/metrics/cbpl");
  }
  r.fnr95 = require_number(require_key(metrics, path, "/metrics", "fnr95"),
                           path, "/metrics/fnr95");
  r.p95 = require_number(require_key(metrics, path, "/metrics", "p95"), path,
                         "/metrics/p95");
  if (const auto it = metrics.find("risk_at_min_coverage");
      it != metrics.end()) {
    r.risk_at_min_coverage =
        require_number(*it, path, "/metrics/risk_at_min_coverage");
  }
  r.tpr05 = require_number(require_key(metrics, path, "/metrics", "tpr05"),
                           path, "/metrics/tpr05");

  const json& curves = require_key(doc, path, "", "curves");
  if (!curves.is_object()) report_fail(path, "/curves: expected an object");
  check_known_keys(curves, path, "/curves", {"pr", "risk_coverage", "roc"});
  r.pr = parse_curve(require_key(curves, path, "/curves", "pr"), CurveKind::kPr,
                     path, "/curves/pr");
  r.roc = parse_curve(require_key(curves, path, "/curves", "roc"),
                      CurveKind::kRoc, path, "/curves/roc");
  if (const auto it = curves.find("risk_coverage"); it != curves.end()) {
    r.risk_coverage = parse_curve(*it, CurveKind::kRiskCoverage, path,
                                  "/curves/risk_coverage");
  }

  const json& dist = require_key(doc, path, "", "distribution");
  if (!dist.is_object()) report_fail(path, "/distribution: expected an object");
  check_known_keys(
      dist, path, "/distribution",
      {"bin_edges", "degenerate_range", "inlier_counts", "outlier_counts"});
  r.distribution.bin_edges =
      parse_double_array(require_key(dist, path, "/distribution", "bin_edges"),
                         path, "/distribution/bin_edges");
  const json& degenerate =
      require_key(dist, path, "/distribution", "degenerate_range");
  if (!degenerate.is_boolean()) {
    report_fail(path, "/distribution/degenerate_range: expected a boolean");
  }
  r.distribution.degenerate_range = degenerate.get<bool>();
  r.distribution.inlier_counts = parse_count_array(
      require_key(dist, path, "/distribution", "inlier_counts"), path,
      "/distribution/inlier_counts");
  r.distribution.outlier_counts = parse_count_array(
      require_key(dist, path, "/distribution", "outlier_counts"), path,
      "/distribution/outlier_counts");

  const json& counts = require_key(doc, path, "", "sample_counts");
  if (!counts.is_object()) {
    report_fail(path, "/sample_counts: expected an object");
  }
  check_known_keys(counts, path, "/sample_counts", {"inliers", "outliers"});
  const json& inliers = require_key(counts, path, "/sample_counts", "inliers");
  const json& outliers =
      require_key(counts, path, "/sample_counts", "outliers");
  if (!inliers.is_number_integer() && !inliers.is_number_unsigned()) {
    report_fail(path, "/sample_counts/inliers: expected an integer");
  }
  if (!outliers.is_number_integer() && !outliers.is_number_unsigned()) {
    report_fail(path, "/sample_counts/outliers: expected an integer");
  }
  r.sample_counts.inliers = inliers.get<std::int64_t>();
  r.sample_counts.outliers = outliers.get<std::int64_t>();

  file.meta.tool_version = require_string(
      require_key(doc, path, "", "tool_version"), path, "/tool_version");
  file.meta.manifest_sha256 = require_string(
      require_key(doc, path, "", "manifest_sha256"), path, "/manifest_sha256");
  file.meta.manifest_mtime = require_string(
      require_key(doc, path, "", "manifest_mtime"), path, "/manifest_mtime");
  return file;
}

std::string render_table_csv(std::span<const ReportFile> reports) {
  std::vector<const ReportFile*> ordered;
  ordered.reserve(reports.size());
  for (const ReportFile& f : reports) ordered.push_back(&f);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ReportFile* a, const ReportFile* b) {
                     if (a->report.case_name != b->report.case_name) {
                       return a->report.case_name < b->report.case_name;
                     }
                     return a->report.supervisor_name <
                            b->report.supervisor_name;
                   });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->report.case_name == ordered[i - 1]->report.case_name &&
        ordered[i]->report.supervisor_name ==
            ordered[i - 1]->report.supervisor_name) {
      throw Error(ErrorCode::DuplicateId,
                  "duplicate (supervisor, case) pair: (" +
                      ordered[i]->report.supervisor_name + ", " +
                      ordered[i]->report.case_name + ")");
    }
  }

  std::string out =
      "supervisor,case,AUROC,AUPRC,TPR05,P95,FNR95,CBPL,CBFAD\n";
  for (const ReportFile* f : ordered) {
    const MetricsReport& r = f->report;
    out += csv_cell(r.supervisor_name);
    out += ',';
    out += csv_cell(r.case_name);
    out += ',';
    out += table_number(r.auroc);
    out += ',';
    out += table_number(r.auprc);
    out += ',';
    out += table_number(r.tpr05);
    out += ',';
    out += table_number(r.p95);
    out += ',';
    out += table_number(r.fnr95);
    out += ',';
    out += r.cbpl ? table_number(*r.cbpl) : "N/A";
    out += ',';
    out += table_number(r.cbfad);
    out += '\n';
  }
  return out;
}

}  // namespace supeval
