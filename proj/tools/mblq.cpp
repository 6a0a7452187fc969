#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mblq/config.hpp"
#include "mblq/experiments.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct RunArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
  bool emit_plots = false;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mblq::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

int run(const std::string& kind, const RunArgs& args) {
  mblq::ExperimentConfig config;
  try {
    const std::string raw = args.config_path.empty() ? std::string() : read_text(args.config_path);
    config = mblq::validate_config(raw, kind);
    if (args.seed) config.master_seed = *args.seed;
    if (args.out) config.output_dir = *args.out;
    if (args.workers) {
      if (*args.workers == 0) throw mblq::ConfigError("key 'workers': must be >= 1");
      config.workers = *args.workers;
    }
    if (args.emit_plots) config.emit_plots = true;
  } catch (const mblq::ConfigError& e) {
    std::cerr << "mblq: config error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const mblq::RunManifest manifest = mblq::run_experiment(config);
    std::cout << "mblq: " << manifest.kind << " finished in " << manifest.wall_clock_seconds << " s; outputs in "
              << config.output_dir.string() << '\n';
    return 0;
  } catch (const mblq::ConfigError& e) {
    std::cerr << "mblq: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "mblq: run failed: " << e.what() << "\n      partial manifest: "
              << (config.output_dir / "manifest.json").string() << '\n';
    return kExitRuntime;
  }
}

int replay(const std::string& manifest_path, const std::string& out, std::size_t workers) {
  try {
    const mblq::ReplayReport report = mblq::replay_manifest(manifest_path, out, workers);
    if (report.reproduced) {
      std::cout << "mblq: replay reproduced " << report.manifest.checksums.size() << " files\n";
      return 0;
    }
    for (const auto& m : report.mismatches) std::cerr << "mblq: mismatch: " << m << '\n';
    return kExitRuntime;
  } catch (const mblq::ConfigError& e) {
    std::cerr << "mblq: config error in manifest: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "mblq: replay failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quench-sequence experiments on a disordered, driven spin chain"};
  app.require_subcommand(1);

  RunArgs args;
  std::string chosen;
  for (const char* kind : {"level-stats", "cue-check", "supremacy-curve", "memory", "make-dataset", "train", "w-sweep"}) {
    CLI::App* sub = app.add_subcommand(kind, std::string("Run the ") + kind + " experiment");
    sub->add_option("--config", args.config_path, "Configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", args.seed, "Master seed (overrides the config)");
    sub->add_option("--out", args.out, "Output directory (overrides the config)");
    sub->add_option("--workers", args.workers, "Worker threads (overrides the config)");
    sub->add_flag("--emit-plots", args.emit_plots, "Also write SVG plots");
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  std::string manifest_path, replay_out = "replay";
  std::size_t replay_workers = 1;
  CLI::App* rep = app.add_subcommand("replay", "Re-run a manifest and compare output checksums");
  rep->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", replay_out, "Output directory for the re-run");
  rep->add_option("--workers", replay_workers, "Worker threads")->check(CLI::PositiveNumber);
  rep->callback([&chosen] { chosen = "replay"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (chosen == "replay") return replay(manifest_path, replay_out, replay_workers);
  return run(chosen, args);
}
