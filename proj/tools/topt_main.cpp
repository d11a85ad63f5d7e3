#include <atomic>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "topt/commands.hpp"
#include "topt/version.hpp"

namespace {

using topt::Algorithm;
using topt::CommandOptions;

struct Cli {
  std::vector<std::string> scenarios;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool dump_traces = false;
  std::string algorithm = "topto_sarsa";
};

int run_one(const std::string& command, const Cli& cli,
            const std::string& scenario_file, const std::filesystem::path& out_dir) {
  CommandOptions options;
  options.scenario_file = scenario_file;
  options.out_dir = out_dir;
  options.seed_override = cli.seed;
  options.dump_traces = cli.dump_traces;

  if (command == "plan-rl") {
    const Algorithm algorithm = cli.algorithm == "sarsa" ? Algorithm::sarsa
                                                         : Algorithm::topto_sarsa;
    return topt::cmd_plan_rl(options, algorithm);
  }
  if (command == "plan-ni") return topt::cmd_plan_ni(options);
  if (command == "interact") return topt::cmd_interact(options);
  if (command == "compare") return topt::cmd_compare(options);
  if (command == "oracle") return topt::cmd_oracle(options);
  std::cerr << "unknown command: " << command << "\n";
  return 1;
}

int run_all(const std::string& command, const Cli& cli) {
  const std::size_t n = cli.scenarios.size();
  std::vector<int> codes(n, 0);

  const auto out_for = [&](std::size_t i) -> std::filesystem::path {
    if (n == 1) return cli.out_dir;
    return std::filesystem::path(cli.out_dir) /
           std::filesystem::path(cli.scenarios[i]).stem();
  };

  const unsigned workers = std::min<unsigned>(std::max(1u, cli.jobs),
                                              static_cast<unsigned>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      codes[i] = run_one(command, cli, cli.scenarios[i], out_for(i));
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n) return;
          codes[i] = run_one(command, cli, cli.scenarios[i], out_for(i));
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (codes[i] != 0) {
      std::cerr << cli.scenarios[i] << ": exit code " << codes[i] << "\n";
      return codes[i];
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-optimal path-tracking planner (phase-plane RL toolkit)"};
  app.set_version_flag("--version", topt::kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Cli cli;
  app.add_option("--scenario", cli.scenarios, "Scenario JSON file(s)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", cli.out_dir, "Output directory for artifacts");
  app.add_option("--seed", cli.seed, "Override the scenario's RL seed");
  app.add_option("--jobs", cli.jobs, "Parallel scenario workers (batch mode)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--dump-traces", cli.dump_traces, "Write per-round torque traces");

  CLI::App* plan_rl =
      app.add_subcommand("plan-rl", "Learn a trajectory on the kinematic grid");
  plan_rl->add_option("--algorithm", cli.algorithm, "sarsa | topto_sarsa")
      ->check(CLI::IsMember({"sarsa", "topto_sarsa"}));
  app.add_subcommand("plan-ni",
                     "Plan with the nominal-model numerical-integration baseline");
  app.add_subcommand("interact",
                     "Two-step method: learn, run on the plant, mark, re-learn");
  app.add_subcommand("compare", "Run plan-ni and interact on the same scenario");
  app.add_subcommand("oracle", "Exact DP optimum for the scenario grid");

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run_all(command, cli);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
