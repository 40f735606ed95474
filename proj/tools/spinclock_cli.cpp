#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "spinclock/commands.hpp"
#include "spinclock/config.hpp"

using namespace spinclock;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads{1};
};

ExperimentConfig resolve(const Options& opts) {
  ExperimentConfig config = opts.config_path.empty() ? ExperimentConfig{}
                                                     : load_config(opts.config_path);
  if (opts.seed) config.master_seed = *opts.seed;
  if (opts.out) config.output_dir = *opts.out;
  return config;
}

int run(const std::string& command, const Options& opts) {
  const ExperimentConfig config = resolve(opts);
  const std::filesystem::path dir = config.output_dir;
  if (command == "lifetime") {
    const auto result = compute_lifetime(config, opts.threads);
    write_lifetime(dir, config, result);
    print_summary(std::cout, result);
    return kExitOk;
  }
  if (command == "allan") {
    const auto result = compute_allan(config, opts.threads);
    write_allan(dir, config, result);
    print_summary(std::cout, result);
    return kExitOk;
  }
  if (command == "oracle-check") {
    const auto report = compute_oracle_check(config, opts.threads);
    write_oracle(dir, config, report);
    print_summary(std::cout, report, config.oracle);
    return report.passed ? kExitOk : kExitTolerance;
  }
  const auto result = compute_noise_selftest(config);
  write_selftest(dir, config, result);
  print_summary(std::cout, result);
  return result.passed ? kExitOk : kExitTolerance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collective-spin squeezing and clock-stability simulator"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  Options opts;
  std::string command;
  for (const char* name : {"lifetime", "allan", "oracle-check", "noise-selftest"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "JSON configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "master seed (overrides config)");
    sub->add_option("--out", opts.out, "output directory (overrides config)");
    sub->add_option("--threads", opts.threads, "worker threads; never changes results")
        ->check(CLI::Range(1, 1024));
    sub->callback([&command, name] { command = name; });
  }
  app.get_subcommand("lifetime")->description("zeta versus Ramsey time for all presets");
  app.get_subcommand("allan")->description("Allan deviation of CSS and squeezed clocks");
  app.get_subcommand("oracle-check")->description("Gaussian model versus exact Dicke states");
  app.get_subcommand("noise-selftest")->description("Allan slopes of synthetic noise");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    return run(command, opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
