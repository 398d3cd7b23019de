#include "dsc/sensor.hpp"

#include <cmath>
#include <string>

#include "dsc/error.hpp"

namespace dsc::sensor {

void validate(const SensorSpec& spec) {
  if (!(spec.c_star >= 0.0)) throw DomainError("c_star must be >= 0");
  if (spec.tau_star < 1) throw DomainError("tau_star must be >= 1");
  if (!(spec.r_star > 0.0)) throw DomainError("r_star must be > 0");
}

int read(const SensorSpec& spec, double c) { return c >= spec.c_star ? 1 : 0; }

double detection_probability(const SensorSpec& spec, const environment::ConcentrationModel& model) {
  return environment::survival(model, spec.c_star);
}

double optimal_threshold(const environment::ConcentrationModel& m) {
  if (!(m.omega > 0.5)) {
    throw InfeasibleError("detection probability 1/2 is unreachable for omega = " + std::to_string(m.omega) +
                          " (requires omega > 1/2)");
  }
  const double growth = std::expm1(std::log(2.0 * m.omega) / (m.gamma - 1.0));
  return m.c0 * (m.gamma - 2.0) / m.omega * growth;
}

}  // namespace dsc::sensor
