#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "peerlab/experiment.hpp"

namespace peerlab::harness {

struct PlotOptions {
  std::string column;
  int window = 10;           // trailing moving-average length; 1 disables smoothing
  double band_scale = 1.0;   // shaded band is mean +/- band_scale * std
  std::string title;
};

/// Across-seed statistics of one column. Logged points are aligned by their
/// ordinal position (the k-th logged value of every seed), truncated to the
/// shortest run; x is the mean env_step of the aligned points.
struct SeriesStats {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std;  // population std across seeds
};

SeriesStats aggregate_series(const std::vector<MetricTable>& tables, const std::string& column, int window,
                             std::string label = {});

std::vector<double> moving_average(const std::vector<double>& values, int window);

std::string render_svg(const std::vector<SeriesStats>& series, const PlotOptions& options);

/// Reads the CSVs, groups them into one series per parent directory, and
/// writes a standalone SVG line chart with a shaded std band per series.
void plot(const std::vector<std::filesystem::path>& csv_paths, const std::filesystem::path& out_path,
          const PlotOptions& options);

}  // namespace peerlab::harness
