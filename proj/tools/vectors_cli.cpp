// vectors: run opportunistic-relay video distribution experiments.
//
//   vectors run       --config exp.cfg [--trace t.txt] [--out dir] [--seed n]
//   vectors sweep     --config exp.cfg [--out dir]
//   vectors gen-trace --config exp.cfg [--seed n] [--out trace.txt]
//   vectors validate  --config exp.cfg
//   vectors --print-defaults
//
// Exit codes: 0 success, 1 configuration or input error, 2 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "vectors/config.hpp"
#include "vectors/experiment.hpp"
#include "vectors/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Flags {
  std::string config;
  std::string trace;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool print_defaults = false;
  unsigned jobs = 0;
};

vectors::ExperimentConfig load_config(const Flags& flags) {
  vectors::ExperimentConfig cfg;
  if (!flags.config.empty()) {
    std::ifstream in(flags.config, std::ios::binary);
    if (!in) throw vectors::ConfigError("cannot read config file '" + flags.config + "'");
    std::ostringstream text;
    text << in.rdbuf();
    auto result = vectors::validate_config(text.str());
    if (!result.ok()) {
      std::string msg = "invalid config '" + flags.config + "':";
      for (const auto& e : result.errors) msg += "\n  " + e.describe();
      throw vectors::ConfigError(msg);
    }
    cfg = std::move(*result.config);
  }
  if (!flags.trace.empty()) cfg.trace_path = flags.trace;
  if (flags.seed) {
    cfg.scenario.seed = *flags.seed;
    cfg.seeds = {*flags.seed};
  }
  return cfg;
}

void print_results(const std::vector<vectors::RunResult>& results) {
  std::printf("%-8s %-7s %-20s %-6s %-9s %-9s %-8s %-8s %s\n", "ttl", "removed", "mode", "seed", "base", "full",
              "quality", "relays", "MB relayed");
  for (const auto& r : results) {
    std::printf("%-8lld %-7d %-20s %-6llu %-9d %-9d %-8.3f %-8llu %.1f\n", static_cast<long long>(r.key.ttl),
                r.key.removed, vectors::render_mode(r.key.mode).c_str(), static_cast<unsigned long long>(r.key.seed),
                r.metrics.delivered_base, r.metrics.delivered_full, r.metrics.mean_quality,
                static_cast<unsigned long long>(r.metrics.relay_transmissions),
                static_cast<double>(r.metrics.bytes_relayed) / 1e6);
  }
}

int cmd_run(const Flags& flags, bool sweep) {
  auto cfg = load_config(flags);
  if (!flags.out.empty()) cfg.output_dir = flags.out;
  std::vector<vectors::RunKey> keys;
  if (sweep) {
    keys = vectors::sweep_keys(cfg);
  } else {
    keys = {{cfg.scenario.ttl, cfg.removed, cfg.scenario.mode, cfg.scenario.seed}};
  }
  auto out = vectors::run_experiment(cfg, keys, flags.jobs);
  print_results(out.results);
  std::printf("wrote %zu files to %s\n", out.files.size(), cfg.output_dir.c_str());
  return kExitOk;
}

int cmd_gen_trace(const Flags& flags) {
  auto cfg = load_config(flags);
  auto params = cfg.synthetic;
  params.duration = cfg.scenario.duration;
  params.seed = cfg.scenario.seed;
  const auto text = vectors::render_trace(vectors::generate_synthetic_trace(params));
  if (flags.out.empty()) {
    std::cout << text;
    return kExitOk;
  }
  std::ofstream f(flags.out, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw std::runtime_error("cannot write '" + flags.out + "'");
  return kExitOk;
}

int cmd_validate(const Flags& flags) {
  auto cfg = load_config(flags);
  if (cfg.trace_path) (void)vectors::resolve_trace(cfg, cfg.scenario.seed);
  std::printf("config ok: %zu runs in sweep\n", vectors::sweep_keys(cfg).size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opportunistic-relay scalable video experiments"};
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "Experiment configuration file");
  app.add_option("--trace", flags.trace, "Contact trace file (overrides trace.path)");
  app.add_option("--out", flags.out, "Output directory (gen-trace: output file)");
  app.add_option("--seed", flags.seed, "Single seed (overrides scenario.seed and sweep.seeds)");
  app.add_option("--jobs", flags.jobs, "Parallel sweep workers (0 = hardware threads)");
  app.add_flag("--print-defaults", flags.print_defaults, "Print the default configuration and exit");

  auto* run = app.add_subcommand("run", "Run one scenario");
  auto* sweep = app.add_subcommand("sweep", "Run the cross product of the sweep axes");
  auto* gen = app.add_subcommand("gen-trace", "Write a synthetic contact trace");
  auto* validate = app.add_subcommand("validate", "Check a configuration file");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (flags.print_defaults) {
      std::cout << vectors::render_config(vectors::ExperimentConfig{});
      return kExitOk;
    }
    if (run->parsed()) return cmd_run(flags, false);
    if (sweep->parsed()) return cmd_run(flags, true);
    if (gen->parsed()) return cmd_gen_trace(flags);
    if (validate->parsed()) return cmd_validate(flags);
    std::cerr << app.help();
    return kExitConfig;
  } catch (const vectors::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const vectors::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
