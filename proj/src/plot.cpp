#include "peerlab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "peerlab/errors.hpp"

namespace peerlab::harness {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

}  // namespace

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  if (window < 1) throw DomainError("smoothing window must be >= 1");
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) sum -= values[i - static_cast<std::size_t>(window)];
    const std::size_t n = std::min(i + 1, static_cast<std::size_t>(window));
    out[i] = sum / static_cast<double>(n);
  }
  return out;
}

SeriesStats aggregate_series(const std::vector<MetricTable>& tables, const std::string& column, int window,
                             std::string label) {
  if (tables.empty()) throw DomainError("no tables to aggregate");
  for (const auto& t : tables) {
    if (t.columns != tables.front().columns) throw Error("CSV schemas differ");
  }
  std::vector<std::vector<std::pair<double, double>>> per_seed;
  std::size_t length = std::numeric_limits<std::size_t>::max();
  for (const auto& t : tables) {
    per_seed.push_back(t.series(column));
    length = std::min(length, per_seed.back().size());
  }

  SeriesStats stats;
  stats.label = std::move(label);
  const double n = static_cast<double>(per_seed.size());
  for (std::size_t k = 0; k < length; ++k) {
    double x = 0.0;
    double mean = 0.0;
    for (const auto& s : per_seed) {
      x += s[k].first;
      mean += s[k].second;
    }
    x /= n;
    mean /= n;
    double ss = 0.0;
    for (const auto& s : per_seed) ss += (s[k].second - mean) * (s[k].second - mean);
    stats.x.push_back(x);
    stats.mean.push_back(mean);
    stats.std.push_back(std::sqrt(ss / n));
  }
  stats.mean = moving_average(stats.mean, window);
  stats.std = moving_average(stats.std, window);
  return stats;
}

std::string render_svg(const std::vector<SeriesStats>& series, const PlotOptions& options) {
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double half = options.band_scale * s.std[i];
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.mean[i] - half);
      y_max = std::max(y_max, s.mean[i] + half);
    }
  }
  if (!std::isfinite(x_min)) {
    x_min = 0.0;
    x_max = 1.0;
    y_min = 0.0;
    y_max = 1.0;
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * plot_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  const std::string title = options.title.empty() ? options.column : options.title;
  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << escape(title) << "</text>\n";
  svg << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(plot_w) << "\" height=\""
      << num(plot_h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x_min + (x_max - x_min) * t / 4.0;
    const double fy = y_min + (y_max - y_min) * t / 4.0;
    svg << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << label_num(fx) << "</text>\n";
    svg << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(fy) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label_num(fy) << "</text>\n";
  }
  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 10)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">env_step</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    const char* color = kPalette[s % std::size(kPalette)];
    std::ostringstream band;
    std::ostringstream line;
    for (std::size_t i = 0; i < ser.x.size(); ++i) {
      band << num(px(ser.x[i])) << "," << num(py(ser.mean[i] + options.band_scale * ser.std[i])) << " ";
      line << (i ? " " : "") << num(px(ser.x[i])) << "," << num(py(ser.mean[i]));
    }
    for (std::size_t i = ser.x.size(); i-- > 0;) {
      band << num(px(ser.x[i])) << "," << num(py(ser.mean[i] - options.band_scale * ser.std[i])) << " ";
    }
    svg << "<polygon points=\"" << band.str() << "\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    svg << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
    const double ly = kTop + 16.0 + 18.0 * static_cast<double>(s);
    svg << "<line x1=\"" << num(kWidth - kRight + 12) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
        << num(kWidth - kRight + 32) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << num(kWidth - kRight + 36) << "\" y=\"" << num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(ser.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void plot(const std::vector<std::filesystem::path>& csv_paths, const std::filesystem::path& out_path,
          const PlotOptions& options) {
  if (csv_paths.empty()) throw DomainError("plot needs at least one CSV");
  // One series per directory, in first-seen order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<MetricTable>> groups;
  std::vector<std::string> reference_columns;
  for (const auto& path : csv_paths) {
    MetricTable table = read_metrics_csv(path);
    if (reference_columns.empty()) {
      reference_columns = table.columns;
    } else if (table.columns != reference_columns) {
      throw Error("CSV schema of " + path.string() + " differs from " + csv_paths.front().string());
    }
    table.column_index(options.column);
    std::string key = path.parent_path().filename().string();
    if (key.empty()) key = ".";
    if (!groups.contains(key)) order.push_back(key);
    groups[key].push_back(std::move(table));
  }
  std::vector<SeriesStats> series;
  for (const auto& key : order) series.push_back(aggregate_series(groups[key], options.column, options.window, key));

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write " + out_path.string());
  out << render_svg(series, options);
}

}  // namespace peerlab::harness
