#include "dsc/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsc/error.hpp"

namespace dsc::environment {

namespace {

void require_concentration(double c) {
  if (!(c >= 0.0)) {
    throw DomainError("concentration must be >= 0, got " + std::to_string(c));
  }
}

// Scale of the algebraic tail: C enters as omega / (gamma - 2) * C / c0.
double tail_argument(const ConcentrationModel& m, double c) {
  return m.omega / (m.gamma - 2.0) * c / m.c0;
}

}  // namespace

void validate(const ConcentrationModel& m) {
  if (!(m.c0 > 0.0)) throw DomainError("c0 must be > 0");
  if (!(m.gamma > 2.0)) throw DomainError("gamma must be > 2");
  if (!(m.omega >= 0.0 && m.omega <= 1.0)) throw DomainError("omega must lie in [0, 1]");
}

double atom_weight(const ConcentrationModel& m) { return 1.0 - m.omega; }

double pdf_continuous(const ConcentrationModel& m, double c) {
  require_concentration(c);
  const double prefactor = m.omega * m.omega / m.c0 * (m.gamma - 1.0) / (m.gamma - 2.0);
  return prefactor * std::exp(-m.gamma * std::log1p(tail_argument(m, c)));
}

double survival(const ConcentrationModel& m, double c) {
  require_concentration(c);
  return m.omega * std::exp((1.0 - m.gamma) * std::log1p(tail_argument(m, c)));
}

double cdf(const ConcentrationModel& m, double c) { return 1.0 - survival(m, c); }

double quantile(const ConcentrationModel& m, double u) {
  if (!(u >= 0.0 && u < 1.0)) {
    throw DomainError("quantile argument must lie in [0, 1), got " + std::to_string(u));
  }
  if (u < 1.0 - m.omega || m.omega == 0.0) return 0.0;
  const double tail = (1.0 - u) / m.omega;
  const double c = m.c0 * (m.gamma - 2.0) / m.omega * std::expm1(-std::log(tail) / (m.gamma - 1.0));
  return std::max(c, 0.0);
}

double sample(const ConcentrationModel& m, rng::CounterRng& rng) { return quantile(m, rng.uniform()); }

std::vector<double> time_series(const ConcentrationModel& m, std::size_t steps, rng::CounterRng& rng) {
  if (steps == 0) throw DomainError("time series needs at least one step");
  std::vector<double> series(steps);
  std::generate(series.begin(), series.end(), [&] { return sample(m, rng); });
  return series;
}

}  // namespace dsc::environment
