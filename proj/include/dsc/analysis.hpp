#pragma once

#include <span>

#include "dsc/environment.hpp"

namespace dsc::analysis {

struct FitResult {
  double exponent = 0.0;
  double intercept = 0.0;  ///< natural-log scale
  double r_squared = 0.0;
};

struct Plateau {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and population std over the final tail_fraction of a trajectory.
///
/// With `stationarity_guard` the tail is rejected (NonStationaryError) when
/// its least-squares linear trend across the window exceeds twice the tail
/// std. Throws InsufficientDataError for trajectories shorter than 10.
Plateau extract_plateau(std::span<const double> trajectory, double tail_fraction = 0.25,
                        bool stationarity_guard = true);

/// Contact rate implied by an observed plateau: 1 / (tau* n (1 - plateau)).
double alpha_from_sim(double plateau, double tau_star, double n);

struct CalibrationPair {
  double alpha_sim = 0.0;
  double alpha_theory_unit = 0.0;  ///< alpha_theory evaluated at g = 1
};

/// Least-squares slope through the origin of alpha_sim on alpha_theory_unit.
double calibrate_g(std::span<const CalibrationPair> pairs);

/// Ordinary least squares on (ln x, ln y).
FitResult fit_power_law(std::span<const double> xs, std::span<const double> ys);

/// Kolmogorov-Smirnov statistic between the empirical cdf of `samples` and
/// the model cdf, including the point mass at zero.
double ks_distance(std::span<const double> samples, const environment::ConcentrationModel& model);

}  // namespace dsc::analysis
