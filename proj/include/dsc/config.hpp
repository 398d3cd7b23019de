#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsc/environment.hpp"
#include "dsc/netsim.hpp"
#include "dsc/sensor.hpp"

namespace dsc::cli {

struct RunSettings {
  std::size_t steps = 500;
  std::size_t n_seeds = 50;
  double tail_fraction = 0.25;

  friend bool operator==(const RunSettings&, const RunSettings&) = default;
};

struct MeanFieldSettings {
  double g = 0.7;
  double nu = 1.0;
  double t_detect = 100.0;  ///< detection time budget T, steps
  double v_star = 0.0;      ///< advection speed for the synchronisation check, m/step

  friend bool operator==(const MeanFieldSettings&, const MeanFieldSettings&) = default;
};

/// Reaction-diffusion run driven by the `pde` subcommand.
struct PdeSettings {
  std::size_t nx = 400;
  std::size_t ny = 100;
  double dx = 10.0;
  std::optional<double> diffusivity;  ///< default r*^2 / tau*
  std::optional<double> density;      ///< sensors per cell, default n dx^2 / S
  std::optional<double> alpha;        ///< per-cell contact rate, default from the sensor model
  std::optional<double> dt;           ///< default 0.9 of the stability limit
  double t_end = 150.0;
  std::size_t seed_columns = 5;
  double seed_fraction = 0.5;  ///< active fraction in the seeded columns
  std::optional<double> level;  ///< default half the local steady active fraction

  friend bool operator==(const PdeSettings&, const PdeSettings&) = default;
};

struct SweepAxis {
  std::string path;  ///< "section.key"
  std::vector<std::string> values;

  friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

struct ExperimentConfig {
  environment::ConcentrationModel environment;
  sensor::SensorSpec sensor;
  /// When set, sensor.c_star is c_star_ratio * environment.c0.
  std::optional<double> c_star_ratio;
  netsim::NetworkConfig network;
  RunSettings run;
  MeanFieldSettings meanfield;
  PdeSettings pde;
  std::vector<SweepAxis> sweep;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// "section.key" -> value, applied on top of the file contents.
using Overrides = std::map<std::string, std::string>;

/// Parses INI text (see README for the grammar), applies overrides and
/// defaults, and validates. Throws ConfigError.
ExperimentConfig parse_config(std::string_view text, const Overrides& overrides = {});

/// Canonical INI text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Collects DSC_<SECTION>_<KEY>=value entries (e.g. DSC_SENSOR_R_STAR=40)
/// from a list of NAME=VALUE strings.
Overrides overrides_from_environment(std::span<const std::string> environ_entries);

/// Copy of `config` with one "section.key" set to `value`, revalidated.
ExperimentConfig with_parameter(const ExperimentConfig& config, const std::string& path, const std::string& value);

/// 17-significant-digit, locale-independent rendering.
std::string format_double(double value);

}  // namespace dsc::cli
