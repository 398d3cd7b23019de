#include "dsc/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dsc/error.hpp"
#include "dsc/parallel.hpp"
#include "dsc/rng.hpp"

namespace dsc::netsim {

using rng::CounterRng;
using rng::Purpose;
using rng::stream_id;

std::size_t NetworkConfig::permanent_count() const {
  const double exact = delta * static_cast<double>(n);
  const double nearest = std::round(exact);
  if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(exact));
}

void validate(const NetworkConfig& c) {
  if (c.n < 1) throw DomainError("network needs at least one sensor");
  if (!(c.width > 0.0 && c.height > 0.0)) throw DomainError("region width and height must be > 0");
  if (!std::isfinite(c.density())) throw DomainError("sensor density must be finite");
  if (!(c.delta >= 0.0 && c.delta <= 1.0)) throw DomainError("delta must lie in [0, 1]");
  if (c.rotation_period && *c.rotation_period < 1) throw DomainError("rotation_period must be >= 1");
  if (c.initial_active > c.n) throw DomainError("initial_active exceeds n");
  if (c.permanent_count() + c.initial_active > c.n) {
    throw DomainError("ceil(delta * n) + initial_active must not exceed n");
  }
  if (!(c.failure_rate >= 0.0 && c.failure_rate <= 1.0)) throw DomainError("failure_rate must lie in [0, 1]");
}

std::vector<Point> place_sensors(const NetworkConfig& config) {
  std::vector<Point> points(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    CounterRng rng(config.seed, stream_id(Purpose::Placement, i));
    points[i].x = config.width * rng.uniform();
    points[i].y = config.height * rng.uniform();
  }
  return points;
}

// ---------------------------------------------------------------------------
// SpatialGrid

SpatialGrid::SpatialGrid(std::span<const Point> positions, double cell_size)
    : positions_(positions), cell_size_(cell_size) {
  if (!(cell_size > 0.0)) throw DomainError("grid cell size must be > 0");
  if (positions.empty()) {
    cell_start_.assign(2, 0);
    return;
  }
  double max_x = positions[0].x, max_y = positions[0].y;
  min_x_ = max_x;
  min_y_ = max_y;
  for (const Point& p : positions) {
    min_x_ = std::min(min_x_, p.x);
    min_y_ = std::min(min_y_, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  // Coarser cells keep memory bounded for tiny radii; queries stay exact.
  const double budget = 4.0 * static_cast<double>(positions.size()) + 64.0;
  while (((max_x - min_x_) / cell_size_ + 1.0) * ((max_y - min_y_) / cell_size_ + 1.0) > budget) cell_size_ *= 2.0;
  cols_ = static_cast<std::size_t>((max_x - min_x_) / cell_size_) + 1;
  rows_ = static_cast<std::size_t>((max_y - min_y_) / cell_size_) + 1;

  std::vector<std::size_t> cell_of_point(positions.size());
  cell_start_.assign(cols_ * rows_ + 1, 0);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const std::size_t cell =
        cell_of(positions[i].y, min_y_, rows_) * cols_ + cell_of(positions[i].x, min_x_, cols_);
    cell_of_point[i] = cell;
    ++cell_start_[cell + 1];
  }
  std::partial_sum(cell_start_.begin(), cell_start_.end(), cell_start_.begin());
  cell_items_.resize(positions.size());
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < positions.size(); ++i) cell_items_[fill[cell_of_point[i]]++] = i;
}

std::size_t SpatialGrid::cell_of(double coord, double origin, std::size_t count) const {
  const auto cell = static_cast<std::size_t>((coord - origin) / cell_size_);
  return std::min(cell, count - 1);
}

std::vector<std::size_t> SpatialGrid::neighbors_within(std::size_t index, double radius) const {
  if (index >= positions_.size()) throw DomainError("sensor index out of range");
  if (radius > cell_size_) throw DomainError("query radius exceeds grid cell size");
  const Point& p = positions_[index];
  const std::size_t cx = cell_of(p.x, min_x_, cols_);
  const std::size_t cy = cell_of(p.y, min_y_, rows_);
  const double r2 = radius * radius;

  std::vector<std::size_t> out;
  for (std::size_t y = (cy == 0 ? 0 : cy - 1); y <= std::min(cy + 1, rows_ - 1); ++y) {
    for (std::size_t x = (cx == 0 ? 0 : cx - 1); x <= std::min(cx + 1, cols_ - 1); ++x) {
      const std::size_t cell = y * cols_ + x;
      for (std::size_t k = cell_start_[cell]; k < cell_start_[cell + 1]; ++k) {
        const std::size_t j = cell_items_[k];
        if (j == index) continue;
        const double dx = positions_[j].x - p.x;
        const double dy = positions_[j].y - p.y;
        if (dx * dx + dy * dy <= r2) out.push_back(j);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> neighbors_within(std::span<const Point> positions, std::size_t index, double r_star) {
  return SpatialGrid(positions, r_star).neighbors_within(index, r_star);
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

// Uniformly chooses min(k, candidates.size()) entries by partial Fisher-Yates.
std::vector<std::size_t> choose(std::vector<std::size_t> candidates, std::size_t k, CounterRng rng) {
  k = std::min(k, candidates.size());
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(k);
  return candidates;
}

// Selection substream 0 picks the initial active set; epoch e of the
// permanent set uses substream e + 1.
constexpr std::uint64_t kInitialActiveStream = 0;

}  // namespace

Simulation::Simulation(const NetworkConfig& config, const sensor::SensorSpec& spec,
                       const environment::ConcentrationModel& model)
    : config_(config), spec_(spec), model_(model) {
  validate(config_);
  sensor::validate(spec_);
  environment::validate(model_);

  positions_ = place_sensors(config_);
  const SpatialGrid grid(positions_, spec_.r_star);
  adjacency_start_.reserve(config_.n + 1);
  adjacency_start_.push_back(0);
  for (std::size_t i = 0; i < config_.n; ++i) {
    const auto nbrs = grid.neighbors_within(i, spec_.r_star);
    adjacency_.insert(adjacency_.end(), nbrs.begin(), nbrs.end());
    adjacency_start_.push_back(adjacency_.size());
  }

  states_.assign(config_.n, SensorState{});
  received_.assign(config_.n, 0);
  detected_.assign(config_.n, 0);

  assign_permanent_set(0);

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < config_.n; ++i) {
    if (!states_[i].permanent) candidates.push_back(i);
  }
  const CounterRng pick(config_.seed, stream_id(Purpose::Selection, kInitialActiveStream));
  for (std::size_t i : choose(std::move(candidates), config_.initial_active, pick)) activate(states_[i]);
}

std::span<const std::size_t> Simulation::neighbors(std::size_t index) const {
  return std::span<const std::size_t>(adjacency_).subspan(adjacency_start_[index],
                                                          adjacency_start_[index + 1] - adjacency_start_[index]);
}

void Simulation::activate(SensorState& s) const {
  s.kind = Kind::Active;
  s.remaining = spec_.tau_star;
  s.has_broadcast = false;
}

void Simulation::assign_permanent_set(std::uint64_t epoch) {
  const std::size_t k = config_.permanent_count();
  if (k == 0) return;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < config_.n; ++i) {
    states_[i].permanent = false;
    if (states_[i].kind != Kind::Faulty) candidates.push_back(i);
  }
  const CounterRng pick(config_.seed, stream_id(Purpose::Selection, epoch + 1));
  for (std::size_t i : choose(std::move(candidates), k, pick)) {
    SensorState& s = states_[i];
    s.permanent = true;
    if (s.kind == Kind::Passive) activate(s);
  }
}

SimRecord Simulation::step() {
  const std::uint64_t t = ++time_;
  std::fill(received_.begin(), received_.end(), 0);
  std::fill(detected_.begin(), detected_.end(), 0);
  last_messages_ = 0;
  last_detections_ = 0;

  // Sense and broadcast.
  for (std::size_t i = 0; i < config_.n; ++i) {
    SensorState& s = states_[i];
    if (s.kind != Kind::Active) continue;
    const double u = CounterRng::uniform_at(config_.seed, stream_id(Purpose::Sample, i), t);
    if (sensor::read(spec_, environment::quantile(model_, u)) == 0) continue;
    detected_[i] = 1;
    ++last_detections_;
    if (config_.single_shot && s.has_broadcast) continue;
    s.has_broadcast = true;
    ++last_messages_;
    for (std::size_t j : neighbors(i)) received_[j] = 1;
  }

  // Timers of sensors active during this step.
  for (std::size_t i = 0; i < config_.n; ++i) {
    SensorState& s = states_[i];
    if (s.kind != Kind::Active) continue;
    if (config_.refresh_on_detect && detected_[i]) {
      s.remaining = spec_.tau_star;
    } else if (--s.remaining == 0) {
      if (s.permanent) {
        activate(s);
      } else {
        s.kind = Kind::Passive;
        s.has_broadcast = false;
      }
    }
  }

  // Messages sent during step t wake passive sensors for step t + 1.
  for (std::size_t i = 0; i < config_.n; ++i) {
    if (received_[i] && states_[i].kind == Kind::Passive) activate(states_[i]);
  }

  if (config_.failure_rate > 0.0) {
    for (std::size_t i = 0; i < config_.n; ++i) {
      SensorState& s = states_[i];
      if (s.kind == Kind::Faulty) continue;
      if (CounterRng::uniform_at(config_.seed, stream_id(Purpose::Failure, i), t) < config_.failure_rate) {
        s = SensorState{Kind::Faulty, 0, false, false};
      }
    }
  }

  if (config_.rotation_period && t % *config_.rotation_period == 0) {
    assign_permanent_set(t / *config_.rotation_period);
  }

  return record();
}

SimRecord Simulation::record() const {
  SimRecord r;
  r.step = time_;
  for (const SensorState& s : states_) {
    switch (s.kind) {
      case Kind::Active: ++r.n_active; break;
      case Kind::Passive: ++r.n_passive; break;
      case Kind::Faulty: ++r.n_faulty; break;
    }
  }
  r.messages_sent = last_messages_;
  r.detections = last_detections_;
  return r;
}

std::vector<SimRecord> run(const NetworkConfig& config, const sensor::SensorSpec& spec,
                           const environment::ConcentrationModel& model, std::size_t steps) {
  if (steps < 1) throw DomainError("run needs at least one step");
  Simulation sim(config, spec, model);
  std::vector<SimRecord> records;
  records.reserve(steps + 1);
  records.push_back(sim.record());
  for (std::size_t t = 0; t < steps; ++t) records.push_back(sim.step());
  return records;
}

std::vector<double> active_fraction(std::span<const SimRecord> records, std::size_t n) {
  std::vector<double> out(records.size());
  std::transform(records.begin(), records.end(), out.begin(), [n](const SimRecord& r) {
    return static_cast<double>(r.n_active) / static_cast<double>(n);
  });
  return out;
}

EnsembleResult ensemble_run(const NetworkConfig& config, const sensor::SensorSpec& spec,
                            const environment::ConcentrationModel& model, std::size_t steps,
                            std::size_t n_seeds, unsigned jobs) {
  if (n_seeds < 1) throw DomainError("ensemble needs at least one seed");
  EnsembleResult result;
  result.members.resize(n_seeds);
  parallel_for(n_seeds, jobs, [&](std::size_t k) {
    NetworkConfig member = config;
    member.seed = config.seed + k;
    result.members[k] = active_fraction(run(member, spec, model, steps), config.n);
  });

  const std::size_t length = steps + 1;
  result.mean.assign(length, 0.0);
  result.std.assign(length, 0.0);
  for (std::size_t t = 0; t < length; ++t) {
    double sum = 0.0;
    for (const auto& m : result.members) sum += m[t];
    const double mean = sum / static_cast<double>(n_seeds);
    double sq = 0.0;
    for (const auto& m : result.members) sq += (m[t] - mean) * (m[t] - mean);
    result.mean[t] = mean;
    result.std[t] = std::sqrt(sq / static_cast<double>(n_seeds));
  }
  return result;
}

}  // namespace dsc::netsim
