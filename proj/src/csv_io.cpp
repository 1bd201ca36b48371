#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "supeval/io.hpp"
#include "text_util.hpp"

namespace supeval {

namespace {

using detail::ascii_lower;
using detail::format_double;
using detail::parse_double;

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
  throw Error(ErrorCode::ParseError,
              path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

// Reads lines, tolerating a trailing CR; returns false at EOF.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::optional<bool> parse_correctness(const std::filesystem::path& path,
                                      std::size_t line_no,
                                      const std::string& field) {
  if (field.empty()) return std::nullopt;
  const std::string lower = ascii_lower(field);
  if (lower == "true") return true;
  if (lower == "false") return false;
  parse_fail(path, line_no,
             "prediction_correct must be true, false or empty, got '" + field +
                 "'");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  }
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  }
  return out;
}

}  // namespace

std::vector<ScoredSample> read_score_csv(const std::filesystem::path& path,
                                         bool is_outlier) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!next_line(in, line)) {
    parse_fail(path, 1, "missing header");
  }
  const auto header = split_fields(line);
  const bool has_correctness =
      header.size() == 3 && header[2] == "prediction_correct";
  if (!(header.size() == 2 || has_correctness) || header[0] != "sample_id" ||
      header[1] != "anomaly_score") {
    parse_fail(path, 1,
               "expected header sample_id,anomaly_score[,prediction_correct]");
  }

  std::vector<ScoredSample> samples;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      parse_fail(path, line_no,
                 "expected " + std::to_string(header.size()) +
                     " fields, got " + std::to_string(fields.size()));
    }
    ScoredSample s;
    s.sample_id = fields[0];
    if (s.sample_id.empty()) parse_fail(path, line_no, "empty sample_id");
    if (!seen.insert(s.sample_id).second) {
      throw Error(ErrorCode::DuplicateId,
                  path.string() + ":" + std::to_string(line_no) +
                      ": duplicate sample_id '" + s.sample_id + "'");
    }
    const auto score = parse_double(fields[1]);
    if (!score) {
      parse_fail(path, line_no, "malformed anomaly_score '" + fields[1] + "'");
    }
    if (!std::isfinite(*score)) {
      throw Error(ErrorCode::NonFiniteScore,
                  path.string() + ":" + std::to_string(line_no) +
                      ": non-finite anomaly_score for '" + s.sample_id + "'");
    }
    s.anomaly_score = *score;
    s.is_outlier = is_outlier;
    if (has_correctness) {
      s.prediction_correct = parse_correctness(path, line_no, fields[2]);
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

void write_score_csv(const std::filesystem::path& path,
                     std::span<const ScoredSample> samples) {
  bool any_flag = false;
  for (const auto& s : samples) {
    if (s.prediction_correct.has_value()) any_flag = true;
  }
  std::ofstream out = open_output(path);
  out << "sample_id,anomaly_score";
  if (any_flag) out << ",prediction_correct";
  out << "\n";
  for (const auto& s : samples) {
    out << s.sample_id << "," << format_double(s.anomaly_score);
    if (any_flag) {
      out << ",";
      if (s.prediction_correct.has_value()) {
        out << (*s.prediction_correct ? "true" : "false");
      }
    }
    out << "\n";
  }
}

FeatureCsv read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!next_line(in, line)) {
    parse_fail(path, 1, "missing header");
  }
  const auto header = split_fields(line);
  const bool has_correctness =
      header.size() >= 2 && header.back() == "prediction_correct";
  const std::size_t dims = header.size() - 1 - (has_correctness ? 1 : 0);
  if (header.empty() || header[0] != "sample_id" || dims == 0) {
    parse_fail(path, 1, "expected header sample_id,f0,f1,...");
  }
  for (std::size_t j = 0; j < dims; ++j) {
    if (header[j + 1] != "f" + std::to_string(j)) {
      parse_fail(path, 1,
                 "feature column " + std::to_string(j + 1) +
                     " must be named f" + std::to_string(j));
    }
  }

  std::vector<std::string> ids;
  std::vector<double> values;
  std::vector<std::optional<bool>> correctness;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      parse_fail(path, line_no,
                 "expected " + std::to_string(header.size()) +
                     " fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) parse_fail(path, line_no, "empty sample_id");
    if (!seen.insert(fields[0]).second) {
      throw Error(ErrorCode::DuplicateId,
                  path.string() + ":" + std::to_string(line_no) +
                      ": duplicate sample_id '" + fields[0] + "'");
    }
    ids.push_back(fields[0]);
    for (std::size_t j = 0; j < dims; ++j) {
      const auto value = parse_double(fields[j + 1]);
      if (!value || !std::isfinite(*value)) {
        parse_fail(path, line_no,
                   "malformed feature value '" + fields[j + 1] + "'");
      }
      values.push_back(*value);
    }
    if (has_correctness) {
      correctness.push_back(
          parse_correctness(path, line_no, fields.back()));
    }
  }
  if (ids.empty()) parse_fail(path, line_no + 1, "no data rows");
  return FeatureCsv{FeatureMatrix(std::move(ids), std::move(values), dims),
                    std::move(correctness)};
}

void write_feature_csv(const std::filesystem::path& path,
                       const FeatureMatrix& features,
                       const std::vector<std::optional<bool>>& correctness) {
  if (!correctness.empty() && correctness.size() != features.rows()) {
    throw Error(ErrorCode::LengthMismatch,
                "correctness entries do not match feature rows");
  }
  std::ofstream out = open_output(path);
  out << "sample_id";
  for (std::size_t j = 0; j < features.cols(); ++j) out << ",f" << j;
  if (!correctness.empty()) out << ",prediction_correct";
  out << "\n";
  for (std::size_t i = 0; i < features.rows(); ++i) {
    out << features.row_ids()[i];
    for (double v : features.row(i)) out << "," << format_double(v);
    if (!correctness.empty()) {
      out << ",";
      if (correctness[i].has_value()) {
        out << (*correctness[i] ? "true" : "false");
      }
    }
    out << "\n";
  }
}

}  // namespace supeval
