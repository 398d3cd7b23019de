// Command-line front end for the distributed sensing simulator.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsc/cli.hpp"
#include "dsc/config.hpp"
#include "dsc/error.hpp"

extern char** environ;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string input;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dsc::ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic sensor collaboration simulator"};
  app.set_version_flag("--version", std::string(DSC_VERSION));
  app.require_subcommand(1);

  Options opt;
  const char* help[] = {
      "Draw a concentration time series",
      "Run one agent-based simulation",
      "Run ensembles over the configured parameter grid",
      "Calibrate the mean-field model against a sweep table",
      "Evaluate the mean-field model and its operating conditions",
      "Integrate the reaction-diffusion model and track the front",
  };
  std::size_t h = 0;
  for (auto name : dsc::cli::kSubcommands) {
    auto* sub = app.add_subcommand(std::string(name), help[h++]);
    sub->add_option("--config", opt.config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "Override network.seed");
    sub->add_option("--jobs", opt.jobs, "Worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));
    if (name == "analyze") sub->add_option("--input", opt.input, "Sweep CSV (default <out>/sweep.csv)");
  }

  CLI11_PARSE(app, argc, argv);

  const auto* chosen = app.get_subcommands().front();
  const std::string subcommand = chosen->get_name();
  try {
    std::vector<std::string> env;
    for (char** e = environ; e && *e; ++e) env.emplace_back(*e);
    auto overrides = dsc::cli::overrides_from_environment(env);
    if (opt.seed) overrides["network.seed"] = std::to_string(*opt.seed);

    const auto config = dsc::cli::parse_config(read_text(opt.config_path), overrides);
    dsc::cli::DispatchOptions dispatch;
    dispatch.out_dir = opt.out_dir;
    dispatch.jobs = opt.jobs;
    if (!opt.input.empty()) dispatch.input = opt.input;
    return dsc::cli::dispatch(subcommand, config, dispatch, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "dsc " << subcommand << ": " << e.what() << '\n';
    return 1;
  }
}
