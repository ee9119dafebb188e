// peerlab: run PEER experiments and plot their logs.
//
//   peerlab run --config <path> [--set key=value ...]
//   peerlab plot --column <name> --out <path> [--window N] [--band K] <csv...>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "peerlab/config.hpp"
#include "peerlab/errors.hpp"
#include "peerlab/experiment.hpp"
#include "peerlab/platform.hpp"
#include "peerlab/plot.hpp"

int main(int argc, char** argv) {
  peerlab::tune_allocator();
  CLI::App app{"Value-function representation regularization experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool print_config = false;
  auto* run = app.add_subcommand("run", "Train every configured seed and write CSV logs plus summary.json");
  run->add_option("--config", config_path, "flat key = value config file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", overrides, "override a config key (key=value); repeatable");
  run->add_flag("--print-config", print_config, "print the resolved config before running");

  std::string column;
  std::string out_path;
  std::vector<std::string> csvs;
  peerlab::harness::PlotOptions options;
  auto* plot = app.add_subcommand("plot", "Render mean +/- std curves of a CSV column as SVG");
  plot->add_option("--column", column, "column to plot")->required();
  plot->add_option("--out", out_path, "output SVG path")->required();
  plot->add_option("--window", options.window, "moving-average window")->check(CLI::PositiveNumber);
  plot->add_option("--band", options.band_scale, "band half-width in standard deviations")
      ->check(CLI::NonNegativeNumber);
  plot->add_option("--title", options.title, "chart title");
  plot->add_option("csv", csvs, "metric CSVs; one series per parent directory")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto config = peerlab::harness::parse_config(config_path, overrides);
      if (print_config) std::cout << peerlab::harness::to_config_text(config);
      const auto summary = peerlab::harness::run_experiment(config, &std::cerr);
      std::cout << "mean " << summary.mean << " std " << summary.std << " (" << summary.summary_path.string() << ")\n";
      for (const auto& s : summary.seeds) {
        if (s.failed) return 2;
      }
    } else if (*plot) {
      options.column = column;
      std::vector<std::filesystem::path> paths(csvs.begin(), csvs.end());
      peerlab::harness::plot(paths, out_path, options);
    }
  } catch (const peerlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
