#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dcgle/dcgle.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int exit_config = 1;
constexpr int exit_numerical = 2;

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw dcgle::ConfigError("cannot read " + p.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_outputs(const std::vector<dcgle::CsvArtifact>& arts, const fs::path& dir, bool plots) {
  for (const auto& a : arts) {
    dcgle::write_artifact(a, dir);
    if (!plots) continue;
    const auto tag = dcgle::default_plot_tag(a);
    if (tag.empty()) continue;
    std::ofstream(dir / (a.name + ".plot.py"), std::ios::binary) << dcgle::emit_plot_script(a, tag);
  }
}

int run(const std::string& config_path, const std::string& out_override,
        const std::string& scenario_override, unsigned threads, bool certify) {
  dcgle::ScenarioConfig cfg;
  try {
    cfg = dcgle::parse_config(read_file(config_path));
    if (!scenario_override.empty()) cfg.scenario = scenario_override;
    if (!out_override.empty()) cfg.output = out_override;
    if (const char* seed = std::getenv("DCGLE_SEED")) {
      const std::string text = std::string("[simulation]\nseed = ") + seed + "\n";
      cfg.simulation.seed = dcgle::parse_config(text).simulation.seed;
    }
    if (cfg.scenario.empty()) throw dcgle::RangeError("scenario", "no scenario given");
    dcgle::validate(cfg);
  } catch (const dcgle::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  }

  const dcgle::RunOptions opt{threads, certify};
  std::vector<dcgle::CsvArtifact> arts;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  try {
    dcgle::run_scenario(cfg, arts, opt);
  } catch (const dcgle::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    dcgle::stamp_metadata(arts, cfg, opt, elapsed(), std::string(e.what()));
    try {
      write_outputs(arts, cfg.output, false);
    } catch (const std::exception& w) {
      std::cerr << "could not flush partial output: " << w.what() << '\n';
    }
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  }
  dcgle::stamp_metadata(arts, cfg, opt, elapsed(), std::nullopt);
  try {
    write_outputs(arts, cfg.output, cfg.plots);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return exit_numerical;
  }
  for (const auto& a : arts)
    std::cout << (fs::path(cfg.output) / (a.name + ".csv")).string() << "  (" << a.rows.size()
              << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plane waves of the delayed cubic-quintic Ginzburg-Landau equation"};
  app.require_subcommand(1);
  auto* run_cmd = app.add_subcommand("run", "Run the scenario described by a config file");
  std::string config, out, scenario;
  unsigned threads = 1;
  bool certify = false;
  run_cmd->add_option("config", config, "Config file")->required();
  run_cmd->add_option("--out", out, "Output directory (overrides the config)");
  run_cmd->add_option("--scenario", scenario, "Scenario name (overrides the config)");
  run_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--certify-roots", certify,
                    "Cross-check characteristic roots with an argument-principle count");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_config;
  }
  return run(config, out, scenario, threads, certify);
}
