// Acceptance suite. Usage: acceptance [criterion...]; with no arguments every
// criterion runs. Prints one PASS/FAIL line per criterion and exits nonzero
// if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dsc/analysis.hpp"
#include "dsc/cli.hpp"
#include "dsc/config.hpp"
#include "dsc/environment.hpp"
#include "dsc/error.hpp"
#include "dsc/meanfield.hpp"
#include "dsc/netsim.hpp"
#include "dsc/ode.hpp"
#include "dsc/rng.hpp"
#include "dsc/sensor.hpp"

using namespace dsc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Reference deployment: 400 sensors on a 1 km square, ten of them
// permanently awake with the set reshuffled every 50 steps.
const char* kScenario = R"(
[environment]
c0 = 150
gamma = 26/3
omega = 0.98

[sensor]
c_star_ratio = 1.03
tau_star = 5
r_star = 40

[network]
n = 400
width = 1000
height = 1000
delta = 0.025
rotation_period = 50
initial_active = 10
seed = 1

[run]
steps = 500
n_seeds = 50
tail_fraction = 0.25
)";

cli::ExperimentConfig scenario() { return cli::parse_config(kScenario); }

struct PointResult {
  cli::ExperimentConfig config;
  double p = 0.0;
  double plateau = 0.0;
  bool stationary = true;
};

PointResult ensemble_point(const cli::ExperimentConfig& c) {
  PointResult r;
  r.config = c;
  r.p = sensor::detection_probability(c.sensor, c.environment);
  const auto ens = netsim::ensemble_run(c.network, c.sensor, c.environment, c.run.steps, c.run.n_seeds);
  r.plateau = analysis::extract_plateau(ens.mean, c.run.tail_fraction, false).mean;
  try {
    analysis::extract_plateau(ens.mean, c.run.tail_fraction, true);
  } catch (const NonStationaryError&) {
    r.stationary = false;
  }
  return r;
}

std::vector<PointResult> sweep(const std::string& path, const std::vector<std::string>& values) {
  std::vector<PointResult> out;
  const auto base = scenario();
  for (const auto& v : values) out.push_back(ensemble_point(cli::with_parameter(base, path, v)));
  return out;
}

std::vector<PointResult> range_sweep() { return sweep("sensor.r_star", {"20", "27", "30", "40"}); }
std::vector<PointResult> threshold_sweep() {
  return sweep("sensor.c_star_ratio", {"1.00", "1.02", "1.05"});
}

std::string plateau_list(const std::vector<PointResult>& pts) {
  std::string s;
  for (const auto& p : pts) s += (s.empty() ? "" : " ") + fmt(p.plateau);
  return s;
}

bool supercritical(const PointResult& r) {
  const double floor = static_cast<double>(r.config.network.permanent_count()) /
                       static_cast<double>(r.config.network.n);
  return r.stationary && r.plateau > 2.0 * floor && r.plateau < 1.0;
}

double alpha_unit(const PointResult& r) {
  return meanfield::alpha_theory(r.config.sensor, r.config.network.area(), r.p, 1.0);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const environment::ConcentrationModel model{150.0, 26.0 / 3.0, 0.98};
  rng::CounterRng rng(1, rng::stream_id(rng::Purpose::Series, 0));
  const auto xs = environment::time_series(model, 1'000'000, rng);
  const double ks = analysis::ks_distance(xs, model);
  double zeros = 0.0, sum = 0.0;
  for (double x : xs) {
    zeros += x == 0.0;
    sum += x;
  }
  const double zero_frac = zeros / static_cast<double>(xs.size());
  const double mean = sum / static_cast<double>(xs.size());
  const double secs = seconds_since(t0);
  const bool pass = ks < 0.005 && std::abs(zero_frac - 0.02) <= 0.002 && std::abs(mean - 150.0) <= 1.5 && secs < 5.0;
  return {pass, "KS=" + fmt(ks) + " (<0.005), zero fraction=" + fmt(zero_frac) + " (0.02+-0.002), mean=" +
                    fmt(mean, 6) + " (150+-1%), " + fmt(secs, 3) + " s (<5)"};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double z0 : {0.01, 0.1, 0.5}) {
    for (double b : {-0.5, 0.0, 0.2, 1.0}) {
      auto f = [b](double, double z) { return b * z * (1.0 - z); };
      double z = z0;
      const double h = 0.01;
      for (int k = 1; k <= 5000; ++k) {
        z = ode::rk4_step(f, (k - 1) * h, z, h);
        worst = std::max(worst, std::abs(z - meanfield::logistic_solution(z0, b, k * h)));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-6 && secs < 1.0, "max |closed form - RK4| = " + fmt(worst, 3) + " over t in [0, 50] (<1e-6), " +
                                          fmt(secs, 3) + " s (<1)"};
}

Outcome criterion3() {
  auto scaled = [](double alpha, double tau, double n) {
    meanfield::SisProblem pr;
    pr.alpha = alpha;
    pr.tau_star = tau;
    pr.n = n;
    pr.y0 = 0.01 * n;
    pr.t_end = 20.0 * tau;
    pr.dt = 0.1 * tau;
    auto tr = meanfield::integrate_sis(pr);
    for (double& y : tr.y) y /= n;
    return tr.y;
  };
  const auto a = scaled(1e-3, 5.0, 400.0);     // R0 = 2
  const auto b = scaled(2.5e-4, 10.0, 800.0);  // R0 = 2
  const auto c = scaled(2.0 / 3000.0, 3.0, 1000.0);  // R0 = 2
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max({worst, std::abs(a[k] - b[k]), std::abs(a[k] - c[k])});
  }
  return {worst < 1e-6 && a.size() == b.size(),
          "max |n+ difference| across three R0=2 sets, 201 points of t/tau* = " + fmt(worst, 3) + " (<1e-6)"};
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto pts = range_sweep();
  const double secs = seconds_since(t0);
  bool monotone = true;
  for (std::size_t i = 1; i < pts.size(); ++i) monotone = monotone && pts[i].plateau >= pts[i - 1].plateau;
  const bool pass = pts[0].plateau < 0.05 && pts[3].plateau > 0.3 && monotone && secs < 60.0;
  return {pass, "plateaus r*=20,27,30,40: " + plateau_list(pts) + " (r*=20 <0.05, r*=40 >0.3, nondecreasing: " +
                    (monotone ? "yes" : "no") + "), " + fmt(secs, 3) + " s (<60)"};
}

Outcome criterion5() {
  const auto pts = threshold_sweep();
  const bool pass = pts[0].plateau >= pts[1].plateau && pts[1].plateau >= pts[2].plateau;
  return {pass, "plateaus C*/C0=1.00,1.02,1.05 at r*=40: " + plateau_list(pts) + " (nonincreasing)"};
}

Outcome criterion6() {
  auto pts = range_sweep();
  for (auto& p : threshold_sweep()) pts.push_back(p);
  std::vector<analysis::CalibrationPair> pairs;
  std::vector<const PointResult*> used;
  for (const auto& p : pts) {
    if (!supercritical(p)) continue;
    pairs.push_back({analysis::alpha_from_sim(p.plateau, p.config.sensor.tau_star, p.config.network.n), alpha_unit(p)});
    used.push_back(&p);
  }
  if (pairs.empty()) return {false, "no supercritical points"};
  const double g = analysis::calibrate_g(pairs);
  double worst = 0.0;
  for (const auto* p : used) {
    const double r0 = g * alpha_unit(*p) * p->config.sensor.tau_star * static_cast<double>(p->config.network.n);
    const double theory = r0 > 1.0 ? 1.0 - 1.0 / r0 : 0.0;
    worst = std::max(worst, std::abs(theory - p->plateau));
  }
  const bool pass = g >= 0.4 && g <= 1.0 && worst <= 0.15;
  return {pass, "g=" + fmt(g) + " over " + std::to_string(used.size()) + " supercritical points (in [0.4, 1.0]); max |theory - sim| plateau = " +
                    fmt(worst) + " (<=0.15)"};
}

Outcome criterion7() {
  const auto pts = sweep("sensor.c_star_ratio", {"1.00", "1.02", "1.04", "1.06", "1.08", "1.10"});
  std::vector<double> ps, alphas;
  for (const auto& p : pts) {
    if (!supercritical(p)) continue;
    ps.push_back(p.p);
    alphas.push_back(analysis::alpha_from_sim(p.plateau, p.config.sensor.tau_star, p.config.network.n));
  }
  if (ps.size() < 3) return {false, "fewer than three supercritical points"};
  const auto fit = analysis::fit_power_law(ps, alphas);
  const bool pass = fit.exponent >= 0.8 && fit.exponent <= 1.6;
  return {pass, "q=" + fmt(fit.exponent) + " (r^2=" + fmt(fit.r_squared, 3) + ") from " + std::to_string(ps.size()) +
                    " points over C*/C0 in [1.0, 1.1] (in [0.8, 1.6]); plateaus " + plateau_list(pts)};
}

Outcome criterion8() {
  const double r0 = meanfield::reproductive_number(0.5, 400, 40.0, 1e6, 1.0);
  meanfield::InfoGainInputs in;
  in.p = 0.5;
  in.n = 400;
  in.r_star = 40;
  in.area = 1e6;
  in.theta = meanfield::derive_params(r0 / (5.0 * 400.0), 1.0, 5.0, 400.0).theta;
  const auto report = meanfield::info_gain_conditions(in);
  const environment::ConcentrationModel model{150.0, 26.0 / 3.0, 0.98};
  const double c_opt = sensor::optimal_threshold(model);
  const double p_opt = sensor::detection_probability({c_opt, 5, 40.0}, model);
  const bool pass = std::abs(r0 - 1.00531) <= 1e-5 && report.n_star == 796 && std::abs(p_opt - 0.5) <= 1e-9;
  return {pass, "R0=" + fmt(r0, 8) + " (1.00531+-1e-5), N*=" + std::to_string(report.n_star) + " (796), p(C*opt)=" +
                    fmt(p_opt, 12) + " (0.5+-1e-9)"};
}

Outcome criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = cli::parse_config(R"(
[sensor]
c_star_ratio = 1.03
tau_star = 5
[pde]
nx = 400
ny = 100
dx = 10
diffusivity = 320
density = 1
alpha = 0.4
t_end = 150
seed_columns = 5
seed_fraction = 0.5
)");
  const auto front = cli::run_pde(cfg);

  // Without diffusion every cell follows its own SIS equation.
  meanfield::PdeGrid g;
  g.nx = 40;
  g.ny = 10;
  g.dx = 10.0;
  g.diffusivity = 0.0;
  for (std::size_t c = 0; c < g.cells(); ++c) {
    const double a = 0.001 + 0.002 * static_cast<double>(c % 37);
    g.active.push_back(a);
    g.passive.push_back(1.0 - a);
  }
  const std::vector<double> alpha(g.cells(), 0.4);
  const auto tr = meanfield::integrate_pde(g, alpha, 5.0, 50.0, 0.01, 100);
  double worst = 0.0;
  for (std::size_t c = 0; c < g.cells(); ++c) {
    meanfield::SisProblem pr;
    pr.alpha = 0.4;
    pr.tau_star = 5.0;
    pr.n = 1.0;
    pr.y0 = g.active[c];
    pr.t_end = 50.0;
    pr.dt = 1.0;
    const auto ode = meanfield::integrate_sis(pr);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      const auto idx = static_cast<std::size_t>(std::llround(tr.times[k]));
      worst = std::max(worst, std::abs(tr.frames[k].active[c] - ode.y[idx]));
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = front.speed && *front.speed >= 8.0 && *front.speed <= 32.0 && worst < 1e-6 && secs < 30.0;
  return {pass, "front speed=" + (front.speed ? fmt(*front.speed) : std::string("none")) +
                    " m/step (in [8, 32]; 2 sqrt(bD)=" + fmt(front.fisher_speed) + "), D=0 max |pde - ode|=" +
                    fmt(worst, 3) + " (<1e-6), " + fmt(secs, 3) + " s (<30)"};
}

std::map<std::string, std::string> directory_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

Outcome criterion10() {
  // Conservation on every step of the scenario, with and without failures.
  std::size_t checked = 0;
  bool conserved = true;
  auto c = scenario();
  for (double failure : {0.0, 0.002}) {
    c.network.failure_rate = failure;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      c.network.seed = seed;
      for (const auto& r : netsim::run(c.network, c.sensor, c.environment, c.run.steps)) {
        conserved = conserved && r.n_active + r.n_passive + r.n_faulty == c.network.n;
        ++checked;
      }
    }
  }

  // Two identical invocations write identical bytes.
  const auto base = fs::temp_directory_path() / "dsc_acceptance_c10";
  fs::remove_all(base);
  auto small = cli::parse_config(std::string(kScenario) + "\n[sweep]\nsensor.r_star = 20, 40\n");
  small.run.n_seeds = 4;
  bool identical = true;
  for (const char* sub : {"simulate", "sample", "sweep", "meanfield"}) {
    std::ostringstream out, err;
    cli::DispatchOptions a, b;
    a.out_dir = base / "a" / sub;
    b.out_dir = base / "b" / sub;
    b.jobs = 3;
    identical = identical && cli::dispatch(sub, small, a, out, err) == 0 && cli::dispatch(sub, small, b, out, err) == 0 &&
                directory_bytes(a.out_dir) == directory_bytes(b.out_dir);
  }
  fs::remove_all(base);

  // Spatial hash against brute force.
  std::size_t mismatches = 0;
  for (std::uint64_t layout = 0; layout < 100; ++layout) {
    rng::CounterRng rng(1000 + layout, 0);
    const std::size_t n = 2 + rng.below(400);
    const double r = 5.0 + 100.0 * rng.uniform();
    std::vector<netsim::Point> pts(n);
    for (auto& p : pts) p = {1000.0 * rng.uniform(), 1000.0 * rng.uniform()};
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> oracle;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) <= r) oracle.push_back(j);
      }
      mismatches += netsim::neighbors_within(pts, i, r) != oracle;
    }
  }
  const bool pass = conserved && identical && mismatches == 0;
  return {pass, "conservation on " + std::to_string(checked) + " records: " + (conserved ? "yes" : "no") +
                    "; repeated invocations byte-identical: " + (identical ? "yes" : "no") +
                    "; neighbour mismatches on 100 layouts: " + std::to_string(mismatches)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"environment law", criterion1},
      {"closed form vs numeric", criterion2},
      {"equal-R0 collapse", criterion3},
      {"epidemic dichotomy", criterion4},
      {"threshold ordering", criterion5},
      {"calibration", criterion6},
      {"scaling exponent", criterion7},
      {"mean-field numbers", criterion8},
      {"pde front", criterion9},
      {"conservation and determinism", criterion10},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);
  }

  bool all = true;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::printf("criterion %d: FAIL unknown criterion\n", id);
      all = false;
      continue;
    }
    Outcome o;
    try {
      o = criteria[id - 1].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d (%s): %s %s\n", id, criteria[id - 1].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
