#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dsc/environment.hpp"
#include "dsc/sensor.hpp"

namespace dsc::meanfield {

/// Derived quantities of the SIS mean-field model.
struct MeanFieldParams {
  double alpha = 0.0;  ///< contact rate, 1 / (step * sensor)
  double g = 1.0;      ///< calibration factor
  double r0 = 0.0;     ///< basic reproductive number alpha * tau * n
  double b = 0.0;      ///< net growth rate (r0 - 1) / tau
  double theta = 1.0;  ///< steady passive fraction; 1 / r0 above threshold, else 1
};

MeanFieldParams derive_params(double alpha, double g, double tau_star, double n);

/// alpha = g * pi * r*^2 * p / (tau* * S)
double alpha_theory(const sensor::SensorSpec& spec, double area, double p, double g);

/// R0 = g * p * n * pi * r*^2 / S. Independent of tau*.
double reproductive_number(double p, double n, double r_star, double area, double g);

/// Closed-form solution of z' = b z (1 - z) with z(0) = z0.
double logistic_solution(double z0, double b, double t);

struct SteadyState {
  double active_fraction = 0.0;
  double theta = 1.0;
};

/// Throws SubcriticalError when r0 <= 1.
SteadyState steady_state(double r0);

/// tau* / (r0 - 1). Throws SubcriticalError when r0 <= 1.
double relaxation_time(double r0, double tau_star);

struct InfoGainInputs {
  double theta = 1.0;
  double delta = 0.0;
  double p = 0.0;
  double tau_star = 5.0;
  double n = 400.0;
  double t_detect = 100.0;  ///< time budget T for detection, steps
  double area = 1e6;
  double r_star = 40.0;
};

struct InfoGainReport {
  bool dsc_superior = false;       ///< theta <= 1 - delta
  bool epidemic_within_t = false;  ///< delta p n T / tau* >= 1
  double delta_min = 0.0;          ///< tau* / (p n T)
  bool consistency = false;        ///< delta_min <= 1 - theta
  bool event_gain = false;         ///< theta < 1 - p
  double n_threshold_exact = 0.0;  ///< S / (pi r*^2) / (p (1 - p))
  std::uint64_t n_threshold = 0;   ///< smallest integer n above n_threshold_exact
  double n_star_exact = 0.0;       ///< (4 / pi) S / r*^2
  std::uint64_t n_star = 0;        ///< smallest integer n above n_star_exact
};

/// Information-gain conditions of dynamic collaboration against an
/// always-on benchmark. Throws DegenerateInputError when p is 0 or 1.
InfoGainReport info_gain_conditions(const InfoGainInputs& in);

struct SisProblem {
  double alpha = 0.0;
  double tau_star = 5.0;
  double n = 400.0;
  double nu = 1.0;  ///< packing exponent on N+ in the contact term, [0, 1]
  double y0 = 0.0;
  double t_end = 100.0;
  double dt = 1.0;  ///< output spacing
};

struct Trajectory {
  std::vector<double> t;
  std::vector<double> y;
};

/// RK4 integration of dN+/dt = alpha N+^nu (n - N+) - N+ / tau*, sampled at
/// multiples of dt. Each output interval is refined by step halving until
/// successive estimates agree to 1e-8 relative.
Trajectory integrate_sis(const SisProblem& problem);

/// Cell-centred fields of active and passive sensors per cell.
struct PdeGrid {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double dx = 1.0;           ///< meters
  double diffusivity = 0.0;  ///< m^2 / step
  std::vector<double> active;
  std::vector<double> passive;

  std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
  std::size_t cells() const { return nx * ny; }
};

struct PdeTrajectory {
  std::vector<double> times;
  std::vector<PdeGrid> frames;
};

/// Reaction-diffusion SIS on a grid: 5-point Laplacian, zero-flux walls,
/// three-stage strong-stability-preserving Runge-Kutta in time. alpha_field
/// holds the per-cell contact rate. tau_star may be +infinity (no decay).
/// A frame is stored every `save_every` steps plus the final state.
/// Throws StabilityError when dt > dx^2 / (4 D).
PdeTrajectory integrate_pde(const PdeGrid& initial, std::span<const double> alpha_field, double tau_star,
                            double t_end, double dt, std::size_t save_every = 1);

/// Per-cell contact rate for a spatially varying mean concentration. Each
/// cell uses alpha_theory with the cell area in place of the region area.
std::vector<double> alpha_field(std::size_t nx, std::size_t ny, double dx,
                                const std::function<double(double, double)>& c0_at,
                                const environment::ConcentrationModel& base, const sensor::SensorSpec& spec,
                                double g);

/// Right-most x where the column-averaged active fraction crosses `level`,
/// linearly interpolated between cell centres. nullopt when no column
/// reaches the level; nx * dx when every column does.
std::optional<double> front_position(const PdeGrid& frame, double level);

/// Least-squares slope of the front position against time over the central
/// half of the run. Throws NoFrontError when the level set is missing or
/// retreats inside the window.
double front_speed(const PdeTrajectory& trajectory, double level);

/// True iff alpha >= v*^2 tau* / r*^2.
bool synchronization_check(double alpha, double tau_star, double r_star, double v_star);

}  // namespace dsc::meanfield
