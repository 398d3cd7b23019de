#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dsc/environment.hpp"
#include "dsc/sensor.hpp"

namespace dsc::netsim {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct NetworkConfig {
  std::size_t n = 400;
  double width = 1000.0;   ///< meters
  double height = 1000.0;  ///< meters
  double delta = 0.0;      ///< permanently active fraction
  /// Steps between reshuffles of the permanent set; nullopt never reshuffles.
  std::optional<std::uint64_t> rotation_period;
  std::size_t initial_active = 10;
  std::uint64_t seed = 1;
  double failure_rate = 0.0;  ///< per-step probability of turning faulty
  bool single_shot = false;        ///< at most one broadcast per activation
  bool refresh_on_detect = false;  ///< a detection restarts the own timer

  double area() const { return width * height; }
  double density() const { return static_cast<double>(n) / area(); }
  /// ceil(delta * n), robust to representation error in delta.
  std::size_t permanent_count() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

void validate(const NetworkConfig& config);

enum class Kind : std::uint8_t { Passive, Active, Faulty };

struct SensorState {
  Kind kind = Kind::Passive;
  std::uint32_t remaining = 0;  ///< active steps left, in [1, tau_star] while Active
  bool permanent = false;
  bool has_broadcast = false;   ///< used by single_shot
};

struct SimRecord {
  std::uint64_t step = 0;
  std::size_t n_active = 0;
  std::size_t n_passive = 0;
  std::size_t n_faulty = 0;
  std::size_t messages_sent = 0;
  std::size_t detections = 0;

  friend bool operator==(const SimRecord&, const SimRecord&) = default;
};

/// n i.i.d. uniform points in [0, width] x [0, height]. Point i depends only
/// on (seed, i).
std::vector<Point> place_sensors(const NetworkConfig& config);

/// Uniform-grid spatial hash for fixed-radius queries.
class SpatialGrid {
 public:
  SpatialGrid(std::span<const Point> positions, double cell_size);

  /// Indices j != index with distance <= radius, ascending. radius must not
  /// exceed the cell size.
  std::vector<std::size_t> neighbors_within(std::size_t index, double radius) const;

 private:
  std::span<const Point> positions_;
  double cell_size_;
  double min_x_ = 0.0;
  double min_y_ = 0.0;
  std::size_t cols_ = 1;
  std::size_t rows_ = 1;
  std::vector<std::size_t> cell_start_;  // CSR offsets, size cols*rows+1
  std::vector<std::size_t> cell_items_;

  std::size_t cell_of(double coord, double origin, std::size_t count) const;
};

std::vector<std::size_t> neighbors_within(std::span<const Point> positions, std::size_t index, double r_star);

/// Synchronous agent-based simulation of the wake-up protocol.
///
/// One step: active sensors sample the environment and broadcast on
/// detection; timers of sensors that were active decrement and expire;
/// messages are delivered and wake passive recipients; sensors may fail;
/// the permanent set is reshuffled on schedule; counts are recorded.
class Simulation {
 public:
  Simulation(const NetworkConfig& config, const sensor::SensorSpec& spec,
             const environment::ConcentrationModel& model);

  SimRecord step();

  /// Counts for the current state; messages and detections refer to the
  /// last executed step.
  SimRecord record() const;

  std::uint64_t time() const { return time_; }
  std::span<const SensorState> states() const { return states_; }
  std::span<const Point> positions() const { return positions_; }
  std::span<const std::size_t> neighbors(std::size_t index) const;

 private:
  NetworkConfig config_;
  sensor::SensorSpec spec_;
  environment::ConcentrationModel model_;
  std::vector<Point> positions_;
  std::vector<std::size_t> adjacency_start_;
  std::vector<std::size_t> adjacency_;
  std::vector<SensorState> states_;
  std::vector<std::uint8_t> received_;
  std::vector<std::uint8_t> detected_;
  std::uint64_t time_ = 0;
  std::size_t last_messages_ = 0;
  std::size_t last_detections_ = 0;

  void activate(SensorState& s) const;
  void assign_permanent_set(std::uint64_t epoch);
};

/// Trajectory from the initial state (record 0) through `steps` updates.
std::vector<SimRecord> run(const NetworkConfig& config, const sensor::SensorSpec& spec,
                           const environment::ConcentrationModel& model, std::size_t steps);

std::vector<double> active_fraction(std::span<const SimRecord> records, std::size_t n);

struct EnsembleResult {
  std::vector<double> mean;  ///< per-step mean of n_active / n
  std::vector<double> std;   ///< per-step population standard deviation
  std::vector<std::vector<double>> members;  ///< per-seed n_active / n, seed order
};

/// Runs seeds config.seed, config.seed + 1, ... and merges them in seed
/// order. `jobs` worker threads; results do not depend on it.
EnsembleResult ensemble_run(const NetworkConfig& config, const sensor::SensorSpec& spec,
                            const environment::ConcentrationModel& model, std::size_t steps,
                            std::size_t n_seeds, unsigned jobs = 1);

}  // namespace dsc::netsim
