// prefshape: run a preset or JSON config and write CSV + metadata.

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "prefshape/cli/driver.hpp"

namespace {

prefshape::cli::Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw prefshape::IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return prefshape::cli::Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw prefshape::ConfigError(path + ": invalid JSON: " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = prefshape::cli;

  CLI::App app{"Preference-shaping bandit simulations"};
  std::string preset_name, config_path, out_path;
  cli::Overrides o;
  std::size_t threads = 0;
  bool list = false;

  auto* preset_opt = app.add_option("--preset", preset_name, "Named experiment preset");
  auto* config_opt = app.add_option("--config", config_path, "JSON config file (or a run's .json sidecar)");
  preset_opt->excludes(config_opt);
  app.add_option("--seed", o.seed, "Base seed; replication r uses seed + r");
  app.add_option("--reps", o.replications, "Number of replications")->check(CLI::PositiveNumber);
  app.add_option("--horizon", o.horizon, "Steps per replication")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "Output CSV path (default: <name>.csv)");
  app.add_option("--policy", o.policy, "optimal | etc | ts | fixed:p,q | narm-ts | narm-optimal");
  app.add_option("--dynamics", o.dynamics, "did | cid")->check(CLI::IsMember({"did", "cid"}));
  app.add_option("--etc-m", o.etc_m, "ETC exploration length, or 'auto'");
  app.add_option("--etc-estimator", o.etc_estimator, "paper | unbiased")->check(CLI::IsMember({"paper", "unbiased"}));
  app.add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it");
  app.add_flag("--list-presets", list, "Print preset names and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (list) {
      for (const auto& name : cli::preset_names()) std::cout << name << '\n';
      return 0;
    }
    if (preset_name.empty() && config_path.empty()) {
      throw prefshape::ConfigError("one of --preset or --config is required");
    }
    const cli::Json base = preset_name.empty() ? load_json_file(config_path) : cli::preset_json(preset_name);
    const auto experiment = cli::parse_config(cli::apply_overrides(base, o));
    if (out_path.empty()) out_path = experiment.name + ".csv";
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

    for (const auto& note : experiment.notes) std::cerr << "note: " << note << '\n';
    const auto outputs = cli::run_experiment(experiment, out_path, threads);
    cli::print_outputs(std::cout, outputs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
