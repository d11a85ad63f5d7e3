#pragma once

#include <optional>
#include <vector>

#include "topt/plant.hpp"
#include "topt/rl.hpp"

namespace topt {

struct InteractionSettings {
  std::size_t max_rounds = 200;
  /// States are only marked when the exceedance is larger than
  /// noise_margin_sigma * sensor noise std (guards against noise-driven
  /// runaway marking).
  double noise_margin_sigma = 3.0;
};

struct InteractionRecord {
  std::size_t round = 0;  // 1-based
  PhaseTrajectory trajectory;
  std::size_t violation_count = 0;
  std::vector<PhaseState> newly_marked;
  double execution_time = 0.0;
};

enum class InteractionStatus {
  success,
  round_cap_exhausted,
  infeasible_after_refinement,
  initial_training_failed,
};

struct InteractionResult {
  InteractionStatus status = InteractionStatus::initial_training_failed;
  std::optional<Policy> final_policy;
  std::vector<InteractionRecord> records;
  std::optional<TorqueTrace> final_trace;
  QTable q;
};

/// Step 1: kinematic-only learning on the acceleration-constraint grid.
TrainResult step1_initial(const PhaseGrid& grid, const RLParams& params);

/// Maps violations to the grid cells containing their (s, sdot) sample.
/// (0,0) and (N-1,0) are never returned; duplicates collapsed.
std::vector<PhaseState> map_violations(const PhaseGrid& grid,
                                       const std::vector<Violation>& violations);

/// Step 2 loop: run the current trajectory on the true plant, mark
/// torque-violating states infeasible, re-train warm, repeat until the
/// measured trace complies or the round cap is hit. Mutates the grid.
InteractionResult interaction_loop(PhaseGrid& grid, const RLParams& params,
                                   const PlantModel& plant, double dt,
                                   const InteractionSettings& settings);

}  // namespace topt
