#pragma once

#include <optional>

#include "topt/rl.hpp"

namespace topt {

struct OracleResult {
  std::optional<PhaseTrajectory> trajectory;
  double optimal_time = 0.0;        // T*; meaningless when trajectory is absent
  std::size_t visited_states = 0;   // states reached by the sweep
};

/// Exact minimum-time grid trajectory from (0,0) to (N-1,0) by forward
/// dynamic programming over columns (actions always advance one column, so a
/// single sweep is exact). Cost ties prefer larger intermediate rows.
/// Unreachable goal yields an empty trajectory.
OracleResult dp_oracle(const PhaseGrid& grid);

}  // namespace topt
