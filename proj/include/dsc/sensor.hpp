#pragma once

#include <cstdint>

#include "dsc/environment.hpp"

namespace dsc::sensor {

/// Binary threshold sensor.
struct SensorSpec {
  double c_star = 0.0;      ///< detection threshold, concentration units
  std::uint32_t tau_star = 5;  ///< active period, steps
  double r_star = 40.0;     ///< communication range, meters

  friend bool operator==(const SensorSpec&, const SensorSpec&) = default;
};

void validate(const SensorSpec& spec);

/// 1 when c >= c_star (inclusive), otherwise 0.
int read(const SensorSpec& spec, double c);

/// Probability that a single reading crosses the threshold: 1 - F(c_star).
double detection_probability(const SensorSpec& spec, const environment::ConcentrationModel& model);

/// Threshold at which the detection probability is exactly 1/2.
///
/// Solves F(C*) = 1/2 in closed form:
///   C* = c0 (gamma - 2) / omega * ((2 omega)^(1 / (gamma - 1)) - 1).
/// Throws InfeasibleError when omega <= 1/2, since p never exceeds omega.
double optimal_threshold(const environment::ConcentrationModel& model);

}  // namespace dsc::sensor
