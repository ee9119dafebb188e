#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "peerlab/config.hpp"

namespace peerlab::harness {

inline constexpr std::string_view kMetricsSchema = "peerlab-metrics v1";

/// One CSV log record. Unset optionals are written as blank fields.
struct MetricRow {
  std::uint64_t seed = 0;
  long env_step = 0;
  long episode = 0;
  std::optional<double> eval_return;
  std::optional<double> pe_loss;
  std::optional<double> peer_loss;
  std::optional<double> mean_similarity;
  std::optional<double> mean_bound;
  std::optional<double> mean_drd;
  std::optional<double> cosine_similarity;
  std::optional<double> q_gap;
  std::optional<long> steps_to_goal;
  std::optional<int> degenerate_rep_count;

  bool has_payload() const;
};

/// Column names, in file order.
const std::vector<std::string>& metric_columns();

std::string format_row(const MetricRow& row);

/// A parsed metrics CSV: named columns with blank cells as nullopt.
struct MetricTable {
  std::string schema_line;
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
  bool failed = false;
  std::string failure;

  /// Index of a column; throws Error naming the column when absent.
  std::size_t column_index(const std::string& name) const;
  /// Non-blank values of a column, in row order.
  std::vector<double> values(const std::string& name) const;
  /// (env_step, value) pairs for the non-blank cells of a column.
  std::vector<std::pair<double, double>> series(const std::string& name) const;
};

MetricTable read_metrics_csv(const std::filesystem::path& path);

struct SeedResult {
  std::uint64_t seed = 0;
  std::filesystem::path csv_path;
  std::vector<double> evaluations;
  double final_score = 0.0;  // mean of the last ten evaluations
  bool failed = false;
  std::string failure;
};

struct ExperimentSummary {
  std::vector<SeedResult> seeds;
  double mean = 0.0;  // across non-failed seeds
  double std = 0.0;   // population standard deviation across non-failed seeds
  std::filesystem::path summary_path;
};

/// Trains and logs one seed; writes <output_dir>/seed_<seed>.csv. Numeric
/// failures finalize the CSV with a "# FAILED" marker instead of throwing.
SeedResult run_seed(const ExperimentConfig& config, std::uint64_t seed, std::ostream* log = nullptr);

/// Runs every seed (config.jobs at a time) and writes summary.json.
ExperimentSummary run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Mean of the last `count` entries (all entries when fewer).
double tail_mean(const std::vector<double>& values, std::size_t count);

}  // namespace peerlab::harness
