#include "dsc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "dsc/analysis.hpp"
#include "dsc/environment.hpp"
#include "dsc/error.hpp"
#include "dsc/meanfield.hpp"
#include "dsc/netsim.hpp"
#include "dsc/rng.hpp"
#include "dsc/sensor.hpp"

#ifndef DSC_VERSION
#define DSC_VERSION "0.0.0"
#endif

namespace dsc::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw DegenerateInputError("column " + what + ": cannot parse '" + text + "'");
  }
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string manifest_json(std::string_view subcommand, const ExperimentConfig& config,
                          const std::vector<std::string>& outputs, const json& summary) {
  json m;
  m["tool"] = "dsc";
  m["version"] = DSC_VERSION;
  m["compiler"] = __VERSION__;
  m["subcommand"] = subcommand;
  m["seed"] = config.network.seed;
  m["config"] = serialize_config(config);
  m["outputs"] = outputs;
  if (!summary.is_null()) m["summary"] = summary;
  return m.dump(2) + "\n";
}

double detection_p(const ExperimentConfig& c) { return sensor::detection_probability(c.sensor, c.environment); }

}  // namespace

std::string sample_csv(const ExperimentConfig& config) {
  rng::CounterRng rng(config.network.seed, rng::stream_id(rng::Purpose::Series, 0));
  const auto series = environment::time_series(config.environment, config.run.steps, rng);
  std::string out = "step,concentration\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    out += std::to_string(t) + ',' + format_double(series[t]) + '\n';
  }
  return out;
}

std::string simulate_csv(const ExperimentConfig& config) {
  const auto records = netsim::run(config.network, config.sensor, config.environment, config.run.steps);
  std::string out = "step,n_active,n_passive,n_faulty,messages,detections\n";
  for (const auto& r : records) {
    out += join({std::to_string(r.step), std::to_string(r.n_active), std::to_string(r.n_passive),
                 std::to_string(r.n_faulty), std::to_string(r.messages_sent), std::to_string(r.detections)});
    out += '\n';
  }
  return out;
}

std::vector<SweepPoint> sweep_grid(const ExperimentConfig& config) {
  std::size_t total = 1;
  for (const auto& axis : config.sweep) {
    if (axis.values.empty()) throw ConfigError("sweep axis " + axis.path + " has no values");
    total *= axis.values.size();
  }
  std::vector<SweepPoint> points;
  points.reserve(total);
  for (std::size_t index = 0; index < total; ++index) {
    SweepPoint pt;
    pt.index = index;
    pt.config = config;
    pt.config.sweep.clear();
    std::size_t rem = index;
    pt.values.resize(config.sweep.size());
    for (std::size_t a = config.sweep.size(); a-- > 0;) {
      const auto& axis = config.sweep[a];
      pt.values[a] = axis.values[rem % axis.values.size()];
      rem /= axis.values.size();
    }
    for (std::size_t a = 0; a < config.sweep.size(); ++a) {
      pt.config = with_parameter(pt.config, config.sweep[a].path, pt.values[a]);
    }
    points.push_back(std::move(pt));
  }
  return points;
}

SweepOutput run_sweep(const ExperimentConfig& config, unsigned jobs) {
  const auto points = sweep_grid(config);
  std::vector<std::string> header = {"point", "seed"};
  for (const auto& axis : config.sweep) header.push_back(axis.path);
  for (const char* col : {"n", "n_permanent", "tau_star", "r_star", "area", "c_star", "p", "plateau_mean",
                          "plateau_std", "stationary"}) {
    header.emplace_back(col);
  }
  std::string csv = join(header) + '\n';

  json grid;
  grid["axes"] = json::array();
  for (const auto& axis : config.sweep) grid["axes"].push_back({{"path", axis.path}, {"values", axis.values}});
  grid["n_seeds"] = config.run.n_seeds;
  grid["steps"] = config.run.steps;
  grid["tail_fraction"] = config.run.tail_fraction;
  grid["points"] = json::array();

  for (const auto& pt : points) {
    const auto& c = pt.config;
    const auto ens = netsim::ensemble_run(c.network, c.sensor, c.environment, c.run.steps, c.run.n_seeds, jobs);
    bool stationary = true;
    try {
      analysis::extract_plateau(ens.mean, c.run.tail_fraction, true);
    } catch (const NonStationaryError&) {
      stationary = false;
    }
    const auto ensemble_plateau = analysis::extract_plateau(ens.mean, c.run.tail_fraction, false);
    const double p = detection_p(c);

    for (std::size_t k = 0; k < ens.members.size(); ++k) {
      const auto plateau = analysis::extract_plateau(ens.members[k], c.run.tail_fraction, false);
      std::vector<std::string> row = {std::to_string(pt.index), std::to_string(c.network.seed + k)};
      for (const auto& v : pt.values) row.push_back(v);
      row.push_back(std::to_string(c.network.n));
      row.push_back(std::to_string(c.network.permanent_count()));
      row.push_back(std::to_string(c.sensor.tau_star));
      row.push_back(format_double(c.sensor.r_star));
      row.push_back(format_double(c.network.area()));
      row.push_back(format_double(c.sensor.c_star));
      row.push_back(format_double(p));
      row.push_back(format_double(plateau.mean));
      row.push_back(format_double(plateau.std));
      row.emplace_back(stationary ? "true" : "false");
      csv += join(row) + '\n';
    }

    json entry;
    entry["point"] = pt.index;
    entry["values"] = pt.values;
    entry["p"] = p;
    entry["plateau_mean"] = ensemble_plateau.mean;
    entry["plateau_std"] = ensemble_plateau.std;
    entry["stationary"] = stationary;
    grid["points"].push_back(std::move(entry));
  }
  return {std::move(csv), grid.dump(2) + "\n"};
}

std::string analyze_json(std::string_view sweep_csv) {
  std::vector<std::string> lines;
  for (auto& line : split(sweep_csv, '\n')) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
  }
  if (lines.size() < 2) throw InsufficientDataError("sweep table has no data rows");

  const auto header = split(lines[0], ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"point", "seed", "n", "n_permanent", "tau_star", "r_star", "area", "p", "plateau_mean"}) {
    if (!col.count(need)) throw DegenerateInputError(std::string("sweep table lacks column ") + need);
  }
  std::vector<std::string> axes;
  for (std::size_t i = col["seed"] + 1; i < col["n"]; ++i) axes.push_back(header[i]);

  struct Point {
    std::vector<std::string> values;
    double n = 0, n_permanent = 0, tau = 0, r_star = 0, area = 0, p = 0;
    double plateau_sum = 0;
    std::size_t seeds = 0;
    bool stationary = true;
  };
  std::map<long long, Point> points;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split(lines[li], ',');
    if (cells.size() != header.size()) {
      throw DegenerateInputError("sweep table row " + std::to_string(li + 1) + " has " +
                                 std::to_string(cells.size()) + " fields, expected " +
                                 std::to_string(header.size()));
    }
    auto num = [&](const char* name) { return parse_number(cells[col[name]], name); };
    auto& pt = points[std::llround(num("point"))];
    if (pt.seeds == 0) {
      for (std::size_t i = col["seed"] + 1; i < col["n"]; ++i) pt.values.push_back(cells[i]);
      pt.n = num("n");
      pt.n_permanent = num("n_permanent");
      pt.tau = num("tau_star");
      pt.r_star = num("r_star");
      pt.area = num("area");
      pt.p = num("p");
    }
    pt.plateau_sum += num("plateau_mean");
    ++pt.seeds;
    if (col.count("stationary") && cells[col["stationary"]] == "false") pt.stationary = false;
  }

  // Calibrate over stationary points clearly above the floor set by the
  // permanently active sensors.
  std::vector<analysis::CalibrationPair> pairs;
  std::vector<double> fit_p, fit_alpha;
  std::set<double> distinct_p;
  struct Derived {
    double plateau = 0, alpha_s = std::numeric_limits<double>::quiet_NaN(), unit = 0;
    bool supercritical = false;
  };
  std::map<long long, Derived> derived;
  for (const auto& [id, pt] : points) {
    Derived d;
    d.plateau = pt.plateau_sum / static_cast<double>(pt.seeds);
    sensor::SensorSpec spec;
    spec.tau_star = static_cast<std::uint32_t>(std::llround(pt.tau));
    spec.r_star = pt.r_star;
    d.unit = meanfield::alpha_theory(spec, pt.area, pt.p, 1.0);
    d.supercritical = pt.stationary && d.plateau > 2.0 * pt.n_permanent / pt.n && d.plateau < 1.0;
    if (d.supercritical) {
      d.alpha_s = analysis::alpha_from_sim(d.plateau, pt.tau, pt.n);
      if (d.unit > 0.0) pairs.push_back({d.alpha_s, d.unit});
      if (pt.p > 0.0) {
        fit_p.push_back(pt.p);
        fit_alpha.push_back(d.alpha_s);
        distinct_p.insert(pt.p);
      }
    }
    derived[id] = d;
  }

  json report;
  report["axes"] = axes;
  report["points"] = points.size();
  report["calibration_points"] = pairs.size();
  std::optional<double> g;
  if (!pairs.empty()) g = analysis::calibrate_g(pairs);
  report["g"] = nullable(g);

  json scaling;
  scaling["x"] = "p";
  scaling["y"] = "alpha_s";
  scaling["fit_points"] = fit_p.size();
  if (distinct_p.size() >= 2 && fit_p.size() >= 3) {
    const auto fit = analysis::fit_power_law(fit_p, fit_alpha);
    scaling["q"] = fit.exponent;
    scaling["r_squared"] = fit.r_squared;
    scaling["note"] = "log-log least squares of alpha_s on p over the supercritical stationary points";
  } else {
    scaling["q"] = nullptr;
    scaling["r_squared"] = nullptr;
    scaling["note"] = "sweep does not vary p over at least two values at three supercritical points";
  }
  report["scaling"] = scaling;

  json per_point = json::array();
  for (const auto& [id, pt] : points) {
    const auto& d = derived[id];
    json e;
    e["point"] = id;
    json values = json::object();
    for (std::size_t a = 0; a < axes.size(); ++a) values[axes[a]] = pt.values[a];
    e["values"] = values;
    e["p"] = pt.p;
    e["plateau_sim"] = d.plateau;
    e["stationary"] = pt.stationary;
    e["supercritical"] = d.supercritical;
    e["alpha_s"] = d.supercritical ? json(d.alpha_s) : json(nullptr);
    if (g) {
      const double alpha = *g * d.unit;
      const double r0 = alpha * pt.tau * pt.n;
      e["alpha_theory"] = alpha;
      e["r0"] = r0;
      e["plateau_theory"] = r0 > 1.0 ? 1.0 - 1.0 / r0 : 0.0;
    } else {
      e["alpha_theory"] = nullptr;
      e["r0"] = nullptr;
      e["plateau_theory"] = nullptr;
    }
    per_point.push_back(std::move(e));
  }
  report["per_point"] = per_point;
  return report.dump(2) + "\n";
}

std::string meanfield_json(const ExperimentConfig& config) {
  const auto& c = config;
  const double p = detection_p(c);
  const double n = static_cast<double>(c.network.n);
  const double area = c.network.area();
  const double tau = c.sensor.tau_star;
  const double g = c.meanfield.g;
  const double alpha = meanfield::alpha_theory(c.sensor, area, p, g);
  const auto params = meanfield::derive_params(alpha, g, tau, n);
  const bool supercritical = params.r0 > 1.0;

  json m;
  m["p"] = p;
  m["g"] = g;
  m["alpha"] = alpha;
  m["r0"] = params.r0;
  m["supercritical"] = supercritical;
  m["theta"] = params.theta;
  m["active_fraction"] = 1.0 - params.theta;
  m["relaxation_time"] = supercritical ? json(meanfield::relaxation_time(params.r0, tau)) : json(nullptr);

  std::optional<double> c_opt;
  try {
    c_opt = sensor::optimal_threshold(c.environment);
  } catch (const InfeasibleError&) {
  }
  m["c_star_opt"] = nullable(c_opt);

  json cond;
  try {
    meanfield::InfoGainInputs in;
    in.theta = params.theta;
    in.delta = c.network.delta;
    in.p = p;
    in.tau_star = tau;
    in.n = n;
    in.t_detect = c.meanfield.t_detect;
    in.area = area;
    in.r_star = c.sensor.r_star;
    const auto r = meanfield::info_gain_conditions(in);
    m["delta_min"] = r.delta_min;
    m["n_threshold"] = r.n_threshold;
    m["n_star"] = r.n_star;
    cond["dsc_superior"] = r.dsc_superior;
    cond["epidemic_within_t"] = r.epidemic_within_t;
    cond["consistency"] = r.consistency;
    cond["event_gain"] = r.event_gain;
  } catch (const DegenerateInputError&) {
    m["delta_min"] = nullptr;
    m["n_threshold"] = nullptr;
    m["n_star"] = nullptr;
    cond["dsc_superior"] = nullptr;
    cond["epidemic_within_t"] = nullptr;
    cond["consistency"] = nullptr;
    cond["event_gain"] = nullptr;
  }
  cond["synchronization"] = meanfield::synchronization_check(alpha, tau, c.sensor.r_star, c.meanfield.v_star);
  m["conditions"] = cond;
  return m.dump(2) + "\n";
}

PdeOutput run_pde(const ExperimentConfig& config) {
  const auto& c = config;
  const auto& s = c.pde;
  const double tau = c.sensor.tau_star;
  const double diffusivity = s.diffusivity.value_or(c.sensor.r_star * c.sensor.r_star / tau);
  const double density = s.density.value_or(static_cast<double>(c.network.n) * s.dx * s.dx / c.network.area());
  const double alpha =
      s.alpha.value_or(meanfield::alpha_theory(c.sensor, s.dx * s.dx, detection_p(c), c.meanfield.g));
  const double r0_local = alpha * tau * density;
  const double level =
      s.level.value_or(r0_local > 1.0 ? 0.5 * (1.0 - 1.0 / r0_local) : 0.5 * s.seed_fraction);
  double dt = s.dt.value_or(0.0);
  if (!s.dt) dt = diffusivity > 0.0 ? 0.9 * s.dx * s.dx / (4.0 * diffusivity) : 0.1;
  dt = std::min(dt, s.t_end);
  const auto save_every = static_cast<std::size_t>(std::max(1LL, std::llround(1.0 / dt)));

  meanfield::PdeGrid grid;
  grid.nx = s.nx;
  grid.ny = s.ny;
  grid.dx = s.dx;
  grid.diffusivity = diffusivity;
  grid.active.assign(grid.cells(), 0.0);
  grid.passive.assign(grid.cells(), density);
  for (std::size_t j = 0; j < s.ny; ++j) {
    for (std::size_t i = 0; i < std::min(s.seed_columns, s.nx); ++i) {
      grid.active[grid.index(i, j)] = s.seed_fraction * density;
      grid.passive[grid.index(i, j)] = (1.0 - s.seed_fraction) * density;
    }
  }
  const std::vector<double> field(grid.cells(), alpha);
  const auto traj = meanfield::integrate_pde(grid, field, tau, s.t_end, dt, save_every);

  PdeOutput out;
  out.csv = "step,time,front_position\n";
  for (std::size_t f = 0; f < traj.frames.size(); ++f) {
    const auto pos = meanfield::front_position(traj.frames[f], level);
    out.csv += std::to_string(std::llround(traj.times[f] / dt)) + ',' + format_double(traj.times[f]) + ',' +
               (pos ? format_double(*pos) : std::string()) + '\n';
  }
  try {
    out.speed = meanfield::front_speed(traj, level);
  } catch (const NoFrontError&) {
  }
  const double b = (r0_local - 1.0) / tau;
  out.fisher_speed = b > 0.0 ? 2.0 * std::sqrt(b * diffusivity) : 0.0;
  return out;
}

int dispatch(std::string_view subcommand, const ExperimentConfig& config, const DispatchOptions& options,
             std::ostream& out, std::ostream& err) {
  try {
    fs::create_directories(options.out_dir);
    std::vector<std::string> outputs;
    json summary;
    auto emit = [&](const std::string& name, const std::string& contents) {
      write_file(options.out_dir / name, contents);
      outputs.push_back(name);
    };

    if (subcommand == "sample") {
      emit("sample.csv", sample_csv(config));
    } else if (subcommand == "simulate") {
      emit("simulate.csv", simulate_csv(config));
    } else if (subcommand == "sweep") {
      auto result = run_sweep(config, options.jobs);
      emit("sweep.csv", result.csv);
      emit("sweep_grid.json", result.grid_json);
    } else if (subcommand == "analyze") {
      const auto input = options.input.value_or(options.out_dir / "sweep.csv");
      const auto report = analyze_json(read_file(input));
      emit("analyze.json", report);
      out << report;
    } else if (subcommand == "meanfield") {
      const auto report = meanfield_json(config);
      emit("meanfield.json", report);
      out << report;
    } else if (subcommand == "pde") {
      const auto result = run_pde(config);
      emit("pde.csv", result.csv);
      summary["front_speed"] = nullable(result.speed);
      summary["fisher_speed"] = result.fisher_speed;
      out << "front_speed " << (result.speed ? format_double(*result.speed) : std::string("none"))
          << "\nfisher_speed " << format_double(result.fisher_speed) << '\n';
    } else {
      err << "dsc: unknown subcommand '" << subcommand << "'\n";
      return 2;
    }
    write_file(options.out_dir / "manifest.json", manifest_json(subcommand, config, outputs, summary));
    return 0;
  } catch (const std::exception& e) {
    err << "dsc " << subcommand << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace dsc::cli
