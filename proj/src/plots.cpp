#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "supeval/io.hpp"

namespace supeval {

namespace {

constexpr const char* kInlierColor = "#1f77b4";
constexpr const char* kOutlierColor = "#d62728";
constexpr const char* kGridColor = "#999999";
constexpr std::size_t kMaxPolylinePoints = 4096;

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Shared frame for all four charts: white background, title, axis box,
// five ticks per axis, axis captions.
class ChartCanvas {
 public:
  ChartCanvas(const PlotLayout& layout, std::string title,
              std::string subtitle, double x_lo, double x_hi, double y_lo,
              double y_hi)
      : layout_(layout), x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi) {
    const int w = layout_.width;
    const int h = layout_.height;
    os_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
        << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h
        << "\">\n";
    os_ << "<rect width=\"" << w << "\" height=\"" << h
        << "\" fill=\"#ffffff\"/>\n";
    os_ << "<text x=\"" << px(w / 2.0)
        << "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\" font-weight=\"bold\">"
        << xml_escape(title) << "</text>\n";
    if (!subtitle.empty()) {
      os_ << "<text x=\"" << px(w / 2.0)
          << "\" y=\"33\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"11\" fill=\"#555555\">"
          << xml_escape(subtitle) << "</text>\n";
    }
  }

  double map_x(double v) const {
    return layout_.margin_left +
           (v - x_lo_) / (x_hi_ - x_lo_) * plot_width();
  }
  double map_y(double v) const {
    return layout_.height - layout_.margin_bottom -
           (v - y_lo_) / (y_hi_ - y_lo_) * plot_height();
  }
  double plot_width() const {
    return static_cast<double>(layout_.width - layout_.margin_left -
                               layout_.margin_right);
  }
  double plot_height() const {
    return static_cast<double>(layout_.height - layout_.margin_top -
                               layout_.margin_bottom);
  }

  void axes(const std::string& x_label, const std::string& y_label) {
    const double left = layout_.margin_left;
    const double right = layout_.width - layout_.margin_right;
    const double top = layout_.margin_top;
    const double bottom = layout_.height - layout_.margin_bottom;
    os_ << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\""
        << px(right - left) << "\" height=\"" << px(bottom - top)
        << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = x_lo_ + (x_hi_ - x_lo_) * i / 4.0;
      const double fy = y_lo_ + (y_hi_ - y_lo_) * i / 4.0;
      const double tx = map_x(fx);
      const double ty = map_y(fy);
      os_ << "<line x1=\"" << px(tx) << "\" y1=\"" << px(bottom) << "\" x2=\""
          << px(tx) << "\" y2=\"" << px(bottom + 5)
          << "\" stroke=\"#333333\"/>\n";
      os_ << "<text x=\"" << px(tx) << "\" y=\"" << px(bottom + 18)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"11\">"
          << tick_label(fx) << "</text>\n";
      os_ << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(ty)
          << "\" x2=\"" << px(left) << "\" y2=\"" << px(ty)
          << "\" stroke=\"#333333\"/>\n";
      os_ << "<text x=\"" << px(left - 8) << "\" y=\"" << px(ty + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"11\">"
          << tick_label(fy) << "</text>\n";
    }
    os_ << "<text x=\"" << px((left + right) / 2.0) << "\" y=\""
        << px(bottom + 38)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << xml_escape(x_label) << "</text>\n";
    os_ << "<text x=\"18\" y=\"" << px((top + bottom) / 2.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\" transform=\"rotate(-90 18 "
        << px((top + bottom) / 2.0) << ")\">" << xml_escape(y_label)
        << "</text>\n";
  }

  void diagonal() {
    os_ << "<line x1=\"" << px(map_x(x_lo_)) << "\" y1=\"" << px(map_y(y_lo_))
        << "\" x2=\"" << px(map_x(x_hi_)) << "\" y2=\"" << px(map_y(y_hi_))
        << "\" stroke=\"" << kGridColor
        << "\" stroke-dasharray=\"4 4\"/>\n";
  }

  // Long curves are thinned to a fixed point budget before plotting; the
  // final point is always kept so curve endpoints stay exact.
  void polyline(const std::vector<CurvePoint>& points, const char* color) {
    if (points.empty()) return;
    std::size_t stride = 1;
    if (points.size() > kMaxPolylinePoints) {
      stride = (points.size() + kMaxPolylinePoints - 1) / kMaxPolylinePoints;
    }
    os_ << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < points.size(); i += stride) {
      if (!first) os_ << ' ';
      os_ << px(map_x(points[i].x)) << ',' << px(map_y(points[i].y));
      first = false;
    }
    if ((points.size() - 1) % stride != 0) {
      os_ << ' ' << px(map_x(points.back().x)) << ','
          << px(map_y(points.back().y));
    }
    os_ << "\"/>\n";
  }

  void bar(double x0, double x1, double value, const char* color) {
    if (value <= y_lo_) return;
    const double top = map_y(value);
    const double bottom = map_y(y_lo_);
    os_ << "<rect x=\"" << px(map_x(x0)) << "\" y=\"" << px(top)
        << "\" width=\"" << px(map_x(x1) - map_x(x0)) << "\" height=\""
        << px(bottom - top) << "\" fill=\"" << color
        << "\" fill-opacity=\"0.55\"/>\n";
  }

  void legend_entry(int slot, const std::string& label, const char* color) {
    const double x = layout_.width - layout_.margin_right - 120.0;
    const double y = layout_.margin_top + 10.0 + 16.0 * slot;
    os_ << "<rect x=\"" << px(x) << "\" y=\"" << px(y)
        << "\" width=\"12\" height=\"12\" fill=\"" << color
        << "\" fill-opacity=\"0.55\"/>\n";
    os_ << "<text x=\"" << px(x + 17) << "\" y=\"" << px(y + 10)
        << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << xml_escape(label) << "</text>\n";
  }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

 private:
  PlotLayout layout_;
  double x_lo_, x_hi_, y_lo_, y_hi_;
  std::ostringstream os_;
};

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  }
  out << body;
  if (!out) {
    throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
  }
}

std::string subtitle_for(const MetricsReport& report) {
  return report.case_name + " / " + report.supervisor_name;
}

std::string render_roc(const MetricsReport& report, const PlotLayout& layout) {
  ChartCanvas c(layout, "ROC curve", subtitle_for(report), 0, 1, 0, 1);
  c.axes("false positive rate", "true positive rate");
  c.diagonal();
  c.polyline(report.roc.points, kInlierColor);
  return c.finish();
}

std::string render_pr(const MetricsReport& report, const PlotLayout& layout) {
  ChartCanvas c(layout, "Precision-recall curve", subtitle_for(report), 0, 1,
                0, 1);
  c.axes("recall", "precision");
  c.polyline(report.pr.points, kInlierColor);
  return c.finish();
}

std::string render_risk_coverage(const MetricsReport& report,
                                 const PlotLayout& layout) {
  ChartCanvas c(layout, "Risk-coverage curve", subtitle_for(report), 0, 1, 0,
                1);
  c.axes("coverage", "risk");
  c.polyline(report.risk_coverage->points, kInlierColor);
  return c.finish();
}

std::string render_distribution(const MetricsReport& report,
                                const PlotLayout& layout) {
  const ScoreDistribution& d = report.distribution;
  const double x_lo = d.bin_edges.front();
  const double x_hi = d.bin_edges.back();
  std::int64_t peak = 1;
  for (const std::int64_t v : d.inlier_counts) peak = std::max(peak, v);
  for (const std::int64_t v : d.outlier_counts) peak = std::max(peak, v);

  ChartCanvas c(layout, "Anomaly-score distribution", subtitle_for(report),
                x_lo, x_hi, 0, static_cast<double>(peak));
  c.axes("anomaly score", "samples per bin");
  for (std::size_t i = 0; i < d.inlier_counts.size(); ++i) {
    c.bar(d.bin_edges[i], d.bin_edges[i + 1],
          static_cast<double>(d.inlier_counts[i]), kInlierColor);
    c.bar(d.bin_edges[i], d.bin_edges[i + 1],
          static_cast<double>(d.outlier_counts[i]), kOutlierColor);
  }
  c.legend_entry(0, "inliers", kInlierColor);
  c.legend_entry(1, "outliers", kOutlierColor);
  return c.finish();
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const MetricsReport& report,
                                              const std::filesystem::path& dir,
                                              const PlotLayout& layout) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  written.push_back(dir / "roc.svg");
  write_file(written.back(), render_roc(report, layout));
  written.push_back(dir / "pr.svg");
  write_file(written.back(), render_pr(report, layout));
  written.push_back(dir / "distribution.svg");
  write_file(written.back(), render_distribution(report, layout));
  if (report.risk_coverage) {
    written.push_back(dir / "risk_coverage.svg");
    write_file(written.back(), render_risk_coverage(report, layout));
  }
  return written;
}

}  // namespace supeval
