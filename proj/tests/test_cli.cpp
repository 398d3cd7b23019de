#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "dsc/cli.hpp"
#include "dsc/config.hpp"

using namespace dsc::cli;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const char* kBase =
    "[sensor]\nc_star_ratio = 1.03\n[network]\ndelta = 0.025\nrotation_period = 50\n"
    "[run]\nsteps = 120\nn_seeds = 3\n";

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char ch : s) n += ch == '\n';
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("dsc_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("sample and simulate tables") {
  const auto c = parse_config(kBase);
  const auto sample = sample_csv(c);
  CHECK(sample.rfind("step,concentration\n", 0) == 0);
  CHECK(count_lines(sample) == 121);
  CHECK(sample == sample_csv(c));

  const auto sim = simulate_csv(c);
  CHECK(sim.rfind("step,n_active,n_passive,n_faulty,messages,detections\n0,20,380,0,0,0\n", 0) == 0);
  CHECK(count_lines(sim) == 122);
  CHECK(sim == simulate_csv(c));
  CHECK(sim != simulate_csv(with_parameter(c, "network.seed", "2")));
}

TEST_CASE("sweep grid order") {
  const auto c = parse_config(std::string(kBase) + "[sweep]\nsensor.r_star = 20, 40\nsensor.c_star_ratio = 1, 1.05\n");
  const auto grid = sweep_grid(c);
  REQUIRE(grid.size() == 4);
  CHECK(grid[1].values == std::vector<std::string>{"20", "1.05"});
  CHECK(grid[2].values == std::vector<std::string>{"40", "1"});
  CHECK(grid[2].config.sensor.r_star == 40.0);
  CHECK(grid[2].config.sensor.c_star == 150.0);
  CHECK(grid[3].config.sweep.empty());
  CHECK(sweep_grid(parse_config(kBase)).size() == 1);
}

TEST_CASE("sweep rows, determinism and independence from grid layout") {
  const auto c = parse_config(std::string(kBase) + "[sweep]\nsensor.r_star = 20, 27, 30, 40\n");
  const auto a = run_sweep(c, 1);
  const auto b = run_sweep(c, 3);
  CHECK(a.csv == b.csv);
  CHECK(a.grid_json == b.grid_json);
  CHECK(count_lines(a.csv) == 1 + 4 * 3);
  CHECK(a.csv.rfind("point,seed,sensor.r_star,n,n_permanent,tau_star,r_star,area,c_star,p,plateau_mean,"
                    "plateau_std,stationary\n", 0) == 0);

  // The r* = 40 runs do not depend on the other grid points.
  const auto solo = run_sweep(parse_config(std::string(kBase) + "[sweep]\nsensor.r_star = 40\n"), 1);
  std::istringstream full(a.csv), single(solo.csv);
  std::string line, tail_full, tail_single;
  while (std::getline(full, line)) {
    if (line.rfind("3,", 0) == 0) tail_full += line.substr(line.find(',')) + "\n";
  }
  std::getline(single, line);
  while (std::getline(single, line)) tail_single += line.substr(line.find(',')) + "\n";
  CHECK(tail_full == tail_single);

  const auto report = json::parse(analyze_json(a.csv));
  CHECK(report["points"] == 4);
  CHECK(report["per_point"].size() == 4);
  CHECK(report["scaling"]["q"].is_null());
  CHECK(analyze_json(a.csv) == analyze_json(b.csv));
}

TEST_CASE("analyze fits a threshold sweep") {
  const auto c = parse_config(
      "[sensor]\nc_star_ratio = 1.03\n[network]\ndelta = 0.025\nrotation_period = 50\n[run]\nsteps = 400\n"
      "n_seeds = 8\n[sweep]\nsensor.c_star_ratio = 1.0, 1.05, 1.1\n");
  const auto report = json::parse(analyze_json(run_sweep(c, 1).csv));
  CHECK(report["g"].is_number());
  CHECK(report["calibration_points"] == 3);
  CHECK(report["scaling"]["q"].is_number());
  CHECK(report["per_point"][0]["plateau_theory"].is_number());
}

TEST_CASE("analyze rejects malformed tables") {
  CHECK_THROWS(analyze_json(""));
  CHECK_THROWS(analyze_json("point,seed\n0,1\n"));
  CHECK_THROWS(analyze_json("point,seed,n,n_permanent,tau_star,r_star,area,p,plateau_mean\n0,1,400\n"));
}

TEST_CASE("meanfield report") {
  const auto m = json::parse(meanfield_json(parse_config(kBase)));
  for (const char* key : {"p", "alpha", "r0", "theta", "n_star", "delta_min", "conditions"}) {
    CHECK(m.contains(key));
  }
  CHECK(m["n_star"] == 796);
  CHECK(m["p"].get<double>() == doctest::Approx(0.33250340634535518));

  const auto infeasible =
      json::parse(meanfield_json(parse_config("[environment]\nomega = 0.4\n[sensor]\nc_star = 10\n")));
  CHECK(infeasible["c_star_opt"].is_null());
  const auto certain = json::parse(meanfield_json(parse_config("[environment]\nomega = 1\n[sensor]\nc_star = 0\n")));
  CHECK(certain["conditions"]["event_gain"].is_null());
}

TEST_CASE("pde front") {
  const auto c = parse_config(
      "[sensor]\nc_star_ratio = 1.03\n[pde]\nnx = 200\nny = 4\ndiffusivity = 320\ndensity = 1\nalpha = 0.4\n"
      "t_end = 60\n");
  const auto out = run_pde(c);
  CHECK(out.fisher_speed == doctest::Approx(16.0));
  REQUIRE(out.speed.has_value());
  CHECK(*out.speed > 8.0);
  CHECK(*out.speed < 32.0);
  CHECK(out.csv.rfind("step,time,front_position\n0,0,50\n", 0) == 0);
}

TEST_CASE("dispatch writes artifacts and a manifest") {
  const auto c = parse_config(kBase);
  const auto dir = scratch("dispatch");
  std::ostringstream out, err;
  DispatchOptions opt;
  opt.out_dir = dir;
  REQUIRE(dispatch("simulate", c, opt, out, err) == 0);
  const auto first = slurp(dir / "simulate.csv");
  const auto manifest = slurp(dir / "manifest.json");
  REQUIRE(dispatch("simulate", c, opt, out, err) == 0);
  CHECK(slurp(dir / "simulate.csv") == first);
  CHECK(slurp(dir / "manifest.json") == manifest);

  const auto m = json::parse(manifest);
  CHECK(m["subcommand"] == "simulate");
  CHECK(m["seed"] == 1);
  CHECK(m["outputs"] == json::array({"simulate.csv"}));
  CHECK(parse_config(m["config"].get<std::string>()) == c);

  CHECK(dispatch("bogus", c, opt, out, err) != 0);
  std::ostringstream err2;
  opt.input = dir / "missing.csv";
  CHECK(dispatch("analyze", c, opt, out, err2) != 0);
  CHECK_FALSE(err2.str().empty());
  fs::remove_all(dir);
}
