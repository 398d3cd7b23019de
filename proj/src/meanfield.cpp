#include "dsc/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dsc/error.hpp"
#include "dsc/ode.hpp"

namespace dsc::meanfield {

using std::numbers::pi;

MeanFieldParams derive_params(double alpha, double g, double tau_star, double n) {
  MeanFieldParams out;
  out.alpha = alpha;
  out.g = g;
  out.r0 = alpha * tau_star * n;
  out.b = (out.r0 - 1.0) / tau_star;
  out.theta = out.r0 > 1.0 ? 1.0 / out.r0 : 1.0;
  return out;
}

double alpha_theory(const sensor::SensorSpec& spec, double area, double p, double g) {
  if (!(area > 0.0)) throw DomainError("area must be > 0");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
  if (!(g > 0.0)) throw DomainError("g must be > 0");
  return g * pi * spec.r_star * spec.r_star * p / (static_cast<double>(spec.tau_star) * area);
}

double reproductive_number(double p, double n, double r_star, double area, double g) {
  if (!(area > 0.0)) throw DomainError("area must be > 0");
  return g * p * n * pi * r_star * r_star / area;
}

double logistic_solution(double z0, double b, double t) {
  if (!(z0 >= 0.0 && z0 <= 1.0)) throw DomainError("z0 must lie in [0, 1]");
  if (z0 == 0.0) return 0.0;
  return z0 / ((1.0 - z0) * std::exp(-b * t) + z0);
}

SteadyState steady_state(double r0) {
  if (!(r0 > 1.0)) {
    throw SubcriticalError("no active steady state for R0 = " + std::to_string(r0) + " <= 1");
  }
  const double theta = 1.0 / r0;
  return {1.0 - theta, theta};
}

double relaxation_time(double r0, double tau_star) {
  if (!(r0 > 1.0)) {
    throw SubcriticalError("relaxation time diverges for R0 = " + std::to_string(r0) + " <= 1");
  }
  return tau_star / (r0 - 1.0);
}

namespace {

// Smallest integer strictly greater than x.
std::uint64_t first_integer_above(double x) { return static_cast<std::uint64_t>(std::floor(x)) + 1; }

}  // namespace

InfoGainReport info_gain_conditions(const InfoGainInputs& in) {
  if (!(in.p > 0.0 && in.p < 1.0)) {
    throw DegenerateInputError("information-gain conditions need 0 < p < 1, got p = " + std::to_string(in.p));
  }
  if (!(in.n > 0.0 && in.t_detect > 0.0 && in.tau_star > 0.0 && in.area > 0.0 && in.r_star > 0.0)) {
    throw DomainError("n, t_detect, tau_star, area and r_star must be > 0");
  }
  InfoGainReport r;
  r.dsc_superior = in.theta <= 1.0 - in.delta;
  r.epidemic_within_t = in.delta * in.p * in.n * in.t_detect / in.tau_star >= 1.0;
  r.delta_min = in.tau_star / (in.p * in.n * in.t_detect);
  r.consistency = r.delta_min <= 1.0 - in.theta;
  r.event_gain = in.theta < 1.0 - in.p;
  const double coverage = in.area / (pi * in.r_star * in.r_star);
  r.n_threshold_exact = coverage / (in.p * (1.0 - in.p));
  r.n_threshold = first_integer_above(r.n_threshold_exact);
  r.n_star_exact = 4.0 * coverage;
  r.n_star = first_integer_above(r.n_star_exact);
  return r;
}

// ---------------------------------------------------------------------------
// SIS ODE

Trajectory integrate_sis(const SisProblem& pr) {
  if (!(pr.dt > 0.0)) throw DomainError("dt must be > 0");
  if (!(pr.t_end >= 0.0)) throw DomainError("t_end must be >= 0");
  if (!(pr.nu >= 0.0 && pr.nu <= 1.0)) throw DomainError("nu must lie in [0, 1]");
  if (!(pr.y0 >= 0.0 && pr.y0 <= pr.n)) throw DomainError("y0 must lie in [0, n]");
  if (!(pr.tau_star > 0.0)) throw DomainError("tau_star must be > 0");

  const auto rhs = [&](double, double y) {
    const double infected = std::max(y, 0.0);
    const double contact = pr.nu == 1.0 ? infected : std::pow(infected, pr.nu);
    return pr.alpha * contact * (pr.n - y) - y / pr.tau_star;
  };

  constexpr double kRelTol = 1e-8;
  constexpr std::size_t kMaxSubsteps = std::size_t{1} << 20;
  const double abs_floor = 1e-12 * std::max(pr.n, 1.0);

  const auto intervals = static_cast<std::size_t>(std::floor(pr.t_end / pr.dt + 1e-9));
  Trajectory out;
  out.t.reserve(intervals + 1);
  out.y.reserve(intervals + 1);
  out.t.push_back(0.0);
  out.y.push_back(pr.y0);

  double y = pr.y0;
  std::size_t substeps = 1;
  for (std::size_t k = 0; k < intervals; ++k) {
    const double t = static_cast<double>(k) * pr.dt;
    double coarse = ode::rk4_advance(rhs, t, y, pr.dt, substeps);
    double fine = ode::rk4_advance(rhs, t, y, pr.dt, 2 * substeps);
    while (std::abs(fine - coarse) > kRelTol * std::max(std::abs(fine), abs_floor) &&
           2 * substeps < kMaxSubsteps) {
      substeps *= 2;
      coarse = fine;
      fine = ode::rk4_advance(rhs, t, y, pr.dt, 2 * substeps);
    }
    y = fine;
    if (substeps > 1 && std::abs(fine - coarse) < 1e-3 * kRelTol * std::max(std::abs(fine), abs_floor)) {
      substeps /= 2;
    }
    out.t.push_back(static_cast<double>(k + 1) * pr.dt);
    out.y.push_back(y);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reaction-diffusion

namespace {

struct Fields {
  std::vector<double> active;
  std::vector<double> passive;
};

class PdeOperator {
 public:
  PdeOperator(const PdeGrid& grid, std::span<const double> alpha, double decay)
      : nx_(grid.nx), ny_(grid.ny), coef_(grid.diffusivity / (grid.dx * grid.dx)), alpha_(alpha), decay_(decay) {}

  // out = u + h * L(u)
  void euler(const Fields& u, double h, Fields& out) const {
    for (std::size_t j = 0; j < ny_; ++j) {
      for (std::size_t i = 0; i < nx_; ++i) {
        const std::size_t c = j * nx_ + i;
        const double a = u.active[c];
        const double p = u.passive[c];
        const double reaction = alpha_[c] * a * p - decay_ * a;
        out.active[c] = a + h * (coef_ * laplacian(u.active, i, j) + reaction);
        out.passive[c] = p + h * (coef_ * laplacian(u.passive, i, j) - reaction);
      }
    }
  }

 private:
  std::size_t nx_, ny_;
  double coef_;
  std::span<const double> alpha_;
  double decay_;

  // Zero-flux walls: the ghost cell mirrors the boundary cell.
  double laplacian(const std::vector<double>& f, std::size_t i, std::size_t j) const {
    const std::size_t c = j * nx_ + i;
    const double centre = f[c];
    const double west = i > 0 ? f[c - 1] : centre;
    const double east = i + 1 < nx_ ? f[c + 1] : centre;
    const double south = j > 0 ? f[c - nx_] : centre;
    const double north = j + 1 < ny_ ? f[c + nx_] : centre;
    return (west - centre) + (east - centre) + (south - centre) + (north - centre);
  }
};

void blend(Fields& target, double w_target, const Fields& other, double w_other) {
  for (std::size_t c = 0; c < target.active.size(); ++c) {
    target.active[c] = w_target * target.active[c] + w_other * other.active[c];
    target.passive[c] = w_target * target.passive[c] + w_other * other.passive[c];
  }
}

PdeGrid make_frame(const PdeGrid& shape, const Fields& f) {
  PdeGrid frame{shape.nx, shape.ny, shape.dx, shape.diffusivity, f.active, f.passive};
  return frame;
}

}  // namespace

PdeTrajectory integrate_pde(const PdeGrid& initial, std::span<const double> alpha_field, double tau_star,
                            double t_end, double dt, std::size_t save_every) {
  const std::size_t cells = initial.cells();
  if (cells == 0) throw DomainError("grid must have at least one cell");
  if (initial.active.size() != cells || initial.passive.size() != cells || alpha_field.size() != cells) {
    throw DomainError("field sizes must equal nx * ny");
  }
  if (!(initial.dx > 0.0)) throw DomainError("dx must be > 0");
  if (!(initial.diffusivity >= 0.0)) throw DomainError("diffusivity must be >= 0");
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw DomainError("dt must be > 0 and t_end >= 0");
  if (!(tau_star > 0.0)) throw DomainError("tau_star must be > 0");
  if (save_every == 0) throw DomainError("save_every must be >= 1");
  for (std::size_t c = 0; c < cells; ++c) {
    if (!(initial.active[c] >= 0.0 && initial.passive[c] >= 0.0)) {
      throw DomainError("initial fields must be non-negative");
    }
  }
  if (initial.diffusivity > 0.0) {
    const double limit = initial.dx * initial.dx / (4.0 * initial.diffusivity);
    if (dt > limit) {
      throw StabilityError("dt = " + std::to_string(dt) + " exceeds the stability limit dx^2/(4D) = " +
                           std::to_string(limit));
    }
  }

  const double decay = std::isinf(tau_star) ? 0.0 : 1.0 / tau_star;
  const PdeOperator op(initial, alpha_field, decay);

  Fields u{initial.active, initial.passive};
  Fields stage = u;
  Fields scratch = u;

  PdeTrajectory out;
  out.times.push_back(0.0);
  out.frames.push_back(make_frame(initial, u));

  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  double t = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double h = std::min(dt, t_end - t);
    // Shu-Osher SSP-RK3: each stage is a convex combination of Euler steps.
    op.euler(u, h, stage);
    op.euler(stage, h, scratch);
    stage = u;
    blend(stage, 0.75, scratch, 0.25);
    op.euler(stage, h, scratch);
    blend(u, 1.0 / 3.0, scratch, 2.0 / 3.0);
    t = k == steps ? t_end : t + h;

    if (k % save_every == 0 || k == steps) {
      out.times.push_back(t);
      out.frames.push_back(make_frame(initial, u));
    }
  }
  return out;
}

std::vector<double> alpha_field(std::size_t nx, std::size_t ny, double dx,
                                const std::function<double(double, double)>& c0_at,
                                const environment::ConcentrationModel& base, const sensor::SensorSpec& spec,
                                double g) {
  std::vector<double> field(nx * ny);
  const double cell_area = dx * dx;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      environment::ConcentrationModel local = base;
      local.c0 = c0_at((static_cast<double>(i) + 0.5) * dx, (static_cast<double>(j) + 0.5) * dx);
      const double p = local.c0 > 0.0 ? sensor::detection_probability(spec, local) : 0.0;
      field[j * nx + i] = alpha_theory(spec, cell_area, p, g);
    }
  }
  return field;
}

std::optional<double> front_position(const PdeGrid& frame, double level) {
  std::vector<double> profile(frame.nx, 0.0);
  for (std::size_t i = 0; i < frame.nx; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < frame.ny; ++j) {
      const std::size_t c = frame.index(i, j);
      const double total = frame.active[c] + frame.passive[c];
      sum += total > 0.0 ? frame.active[c] / total : 0.0;
    }
    profile[i] = sum / static_cast<double>(frame.ny);
  }

  std::size_t last = frame.nx;
  for (std::size_t i = frame.nx; i-- > 0;) {
    if (profile[i] >= level) {
      last = i;
      break;
    }
  }
  if (last == frame.nx) return std::nullopt;
  if (last + 1 == frame.nx) return static_cast<double>(frame.nx) * frame.dx;
  const double fraction = (profile[last] - level) / (profile[last] - profile[last + 1]);
  return (static_cast<double>(last) + 0.5 + fraction) * frame.dx;
}

double front_speed(const PdeTrajectory& trajectory, double level) {
  if (trajectory.frames.size() < 2) throw NoFrontError("front speed needs at least two frames");
  const double t0 = trajectory.times.front();
  const double span = trajectory.times.back() - t0;
  const double lo = t0 + 0.25 * span;
  const double hi = t0 + 0.75 * span;

  std::vector<double> ts, xs;
  for (std::size_t k = 0; k < trajectory.frames.size(); ++k) {
    const double t = trajectory.times[k];
    if (t < lo || t > hi) continue;
    const auto x = front_position(trajectory.frames[k], level);
    if (!x) throw NoFrontError("level " + std::to_string(level) + " not reached at t = " + std::to_string(t));
    if (!xs.empty() && *x < xs.back() - 1e-9 * trajectory.frames[k].dx) {
      throw NoFrontError("front retreats at t = " + std::to_string(t));
    }
    ts.push_back(t);
    xs.push_back(*x);
  }
  if (ts.size() < 2) throw NoFrontError("fewer than two frames in the central half of the run");

  const double n = static_cast<double>(ts.size());
  double mt = 0.0, mx = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    mt += ts[k];
    mx += xs[k];
  }
  mt /= n;
  mx /= n;
  double stt = 0.0, stx = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    stt += (ts[k] - mt) * (ts[k] - mt);
    stx += (ts[k] - mt) * (xs[k] - mx);
  }
  return stx / stt;
}

bool synchronization_check(double alpha, double tau_star, double r_star, double v_star) {
  if (!(tau_star > 0.0 && r_star > 0.0 && v_star >= 0.0)) {
    throw DomainError("tau_star and r_star must be > 0 and v_star >= 0");
  }
  return alpha >= v_star * v_star * tau_star / (r_star * r_star);
}

}  // namespace dsc::meanfield
