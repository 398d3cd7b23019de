#pragma once

#include <cstddef>
#include <vector>

#include "dsc/rng.hpp"

namespace dsc::environment {

/// Intermittent heavy-tailed concentration law.
///
/// With probability 1 - omega a reading is exactly zero; otherwise it
/// follows a continuous density with algebraic tail exponent gamma. The
/// overall mean is c0. The cdf used here is the one obtained by integrating
/// the density, F(C) = 1 - omega * (1 + omega / (gamma - 2) * C / c0)^(1 - gamma),
/// so that density, cdf and quantile form a consistent triple.
struct ConcentrationModel {
  double c0 = 150.0;
  double gamma = 26.0 / 3.0;
  double omega = 0.98;

  friend bool operator==(const ConcentrationModel&, const ConcentrationModel&) = default;
};

/// Throws DomainError unless c0 > 0, gamma > 2 and 0 <= omega <= 1.
void validate(const ConcentrationModel& model);

/// Weight of the point mass at zero, 1 - omega.
double atom_weight(const ConcentrationModel& model);

/// Continuous part of the density (the atom at zero is excluded).
double pdf_continuous(const ConcentrationModel& model, double c);

double cdf(const ConcentrationModel& model, double c);

/// 1 - cdf, computed without cancellation.
double survival(const ConcentrationModel& model, double c);

/// Inverse cdf on [0, 1). Returns 0 for u < 1 - omega.
double quantile(const ConcentrationModel& model, double u);

/// One inverse-transform draw.
double sample(const ConcentrationModel& model, rng::CounterRng& rng);

/// `steps` i.i.d. draws; throws DomainError when steps == 0.
std::vector<double> time_series(const ConcentrationModel& model, std::size_t steps, rng::CounterRng& rng);

}  // namespace dsc::environment
