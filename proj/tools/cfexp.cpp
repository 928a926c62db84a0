// cfexp: runs Chen-Fliess expansion experiments described by config files.
//
//   cfexp run CONFIG [flags]        kind taken from [experiment] kind
//   cfexp scaling CONFIG [flags]    likewise for ito-check, expand, l2-error,
//                                   fit-bv, separate
//
// Exit status: 0 success, 2 failed assertion (with --assert), 1 error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "chenfliess/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  std::size_t steps = 0;
  std::size_t workers = 1;
  std::string out;
  bool assert_pass = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("config", f.config, "experiment config file")->required();
  cmd->add_option("--seed", f.seed, "override the random seed");
  cmd->add_option("--paths", f.paths, "override the number of Monte Carlo paths")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--steps", f.steps, "override the number of grid steps")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--workers", f.workers, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--assert", f.assert_pass, "exit 2 when the experiment's check fails");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chen-Fliess expansion experiments"};
  app.require_subcommand(1);
  Flags flags;
  std::optional<std::string> kind;

  auto* run = app.add_subcommand("run", "run the experiment named in the config");
  add_flags(run, flags);
  for (const auto& k : chenfliess::experiment_kinds()) {
    auto* cmd = app.add_subcommand(k, "run a " + k + " experiment");
    add_flags(cmd, flags);
    cmd->callback([&kind, k] { kind = k; });
  }
  CLI11_PARSE(app, argc, argv);

  chenfliess::RunOptions opt;
  for (auto* cmd : app.get_subcommands()) {
    if (cmd->count("--seed")) opt.seed = flags.seed;
    if (cmd->count("--paths")) opt.paths = flags.paths;
    if (cmd->count("--steps")) opt.steps = flags.steps;
    if (cmd->count("--out")) opt.out = flags.out;
  }
  opt.workers = flags.workers;

  try {
    const auto cfg = chenfliess::Config::load(flags.config);
    const auto res = chenfliess::run_experiment(cfg, opt, kind);
    std::cout << res.line << '\n';
    return flags.assert_pass && !res.pass ? 2 : 0;
  } catch (const chenfliess::ConfigError& e) {
    std::cerr << "cfexp: " << flags.config << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "cfexp: " << e.what() << '\n';
  }
  return 1;
}
