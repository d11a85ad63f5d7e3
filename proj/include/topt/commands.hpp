#pragma once

#include <filesystem>
#include <optional>

#include "topt/rl.hpp"

namespace topt {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 2;
inline constexpr int training_failure = 3;
inline constexpr int infeasible = 4;
inline constexpr int round_cap = 5;
}  // namespace exit_code

struct CommandOptions {
  std::filesystem::path scenario_file;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed_override;
  bool dump_traces = false;
};

int cmd_plan_rl(const CommandOptions& options, Algorithm algorithm);
int cmd_plan_ni(const CommandOptions& options);
int cmd_interact(const CommandOptions& options);
int cmd_compare(const CommandOptions& options);
int cmd_oracle(const CommandOptions& options);

}  // namespace topt
