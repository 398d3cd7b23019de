#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsc/config.hpp"

namespace dsc::cli {

inline constexpr std::string_view kSubcommands[] = {"sample", "simulate", "sweep", "analyze", "meanfield", "pde"};

struct DispatchOptions {
  std::filesystem::path out_dir = ".";
  unsigned jobs = 1;
  /// Sweep CSV consumed by `analyze`; defaults to <out_dir>/sweep.csv.
  std::optional<std::filesystem::path> input;
};

/// Runs one subcommand and writes its artifacts plus manifest.json into
/// options.out_dir. Returns 0 on success; on failure prints a diagnostic to
/// `err` and returns nonzero.
int dispatch(std::string_view subcommand, const ExperimentConfig& config, const DispatchOptions& options,
             std::ostream& out, std::ostream& err);

/// `step,concentration` for run.steps draws of sensor 0's sample stream.
std::string sample_csv(const ExperimentConfig& config);

/// `step,n_active,n_passive,n_faulty,messages,detections` for one run.
std::string simulate_csv(const ExperimentConfig& config);

struct SweepPoint {
  std::size_t index = 0;
  std::vector<std::string> values;  ///< one per sweep axis
  ExperimentConfig config;
};

/// Cartesian product of the sweep axes, last axis varying fastest. A config
/// without axes yields a single point.
std::vector<SweepPoint> sweep_grid(const ExperimentConfig& config);

struct SweepOutput {
  std::string csv;        ///< one row per (point, seed)
  std::string grid_json;  ///< grid manifest
};

SweepOutput run_sweep(const ExperimentConfig& config, unsigned jobs);

/// Calibration and scaling report for a sweep CSV.
std::string analyze_json(std::string_view sweep_csv);

std::string meanfield_json(const ExperimentConfig& config);

struct PdeOutput {
  std::string csv;  ///< `step,time,front_position`
  std::optional<double> speed;
  double fisher_speed = 0.0;  ///< 2 sqrt(b D) of the local model
};

PdeOutput run_pde(const ExperimentConfig& config);

}  // namespace dsc::cli
