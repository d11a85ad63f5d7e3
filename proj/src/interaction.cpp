#include "topt/interaction.hpp"

#include <algorithm>
#include <cmath>

#include "topt/rng.hpp"

namespace topt {

TrainResult step1_initial(const PhaseGrid& grid, const RLParams& params) {
  return train(grid, params, Algorithm::topto_sarsa);
}

std::vector<PhaseState> map_violations(const PhaseGrid& grid,
                                       const std::vector<Violation>& violations) {
  const GridSpec& spec = grid.spec();
  const auto last_j = static_cast<std::int64_t>(spec.n_s) - 1;
  const auto last_m = static_cast<std::int64_t>(spec.n_sdot) - 1;

  std::vector<PhaseState> states;
  states.reserve(violations.size());
  for (const Violation& v : violations) {
    const auto j = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor(v.s / spec.ds() + 0.5)), 0, last_j);
    const auto m = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor(v.sdot / spec.dsdot() + 0.5)), 0, last_m);
    const PhaseState st{static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(m)};
    if (st == PhaseState{0, 0}) continue;
    if (st.j == static_cast<std::uint32_t>(last_j) && st.m == 0) continue;
    states.push_back(st);
  }
  std::sort(states.begin(), states.end(), [](PhaseState a, PhaseState b) {
    return a.j != b.j ? a.j < b.j : a.m < b.m;
  });
  states.erase(std::unique(states.begin(), states.end()), states.end());
  return states;
}

InteractionResult interaction_loop(PhaseGrid& grid, const RLParams& params,
                                   const PlantModel& plant, double dt,
                                   const InteractionSettings& settings) {
  InteractionResult result;

  TrainResult initial = step1_initial(grid, params);
  result.q = std::move(initial.q);
  if (!initial.policy) {
    result.status = InteractionStatus::initial_training_failed;
    return result;
  }
  Policy policy = std::move(*initial.policy);
  const double margin = settings.noise_margin_sigma * plant.noise_std();

  for (std::size_t round = 1; round <= settings.max_rounds; ++round) {
    InteractionRecord record;
    record.round = round;
    record.trajectory = policy_to_trajectory(policy, grid);
    record.execution_time = record.trajectory.execution_time;

    const TimedTrajectory timed =
        time_parameterize(record.trajectory, grid.path(), dt);
    TorqueTrace trace = run_on_plant(plant, timed, PlantSide::true_plant);
    std::vector<Violation> violations =
        check_torque_limits(trace, grid.constraints());
    record.violation_count = violations.size();

    if (violations.empty()) {
      trace.violations.clear();
      result.records.push_back(std::move(record));
      result.status = InteractionStatus::success;
      result.final_policy = std::move(policy);
      result.final_trace = std::move(trace);
      return result;
    }

    // Keep only exceedances above the noise margin.
    std::vector<Violation> actionable;
    const Constraints& limits = grid.constraints();
    for (const Violation& v : violations) {
      const double excess = v.tau > limits.tau_max[v.joint]
                                ? v.tau - limits.tau_max[v.joint]
                                : limits.tau_min[v.joint] - v.tau;
      if (excess > margin) actionable.push_back(v);
    }
    // A violating sample usually sits mid-segment, between grid rows the
    // trajectory never occupies as states; marking its raw cell would leave
    // the re-plan unchanged forever. Attribute each sample to the discrete
    // trajectory state of the nearest column instead, as run on the plant.
    const GridSpec& spec = grid.spec();
    for (Violation& v : actionable) {
      const auto j = std::min<std::size_t>(
          record.trajectory.rows.size() - 1,
          static_cast<std::size_t>(std::floor(v.s / spec.ds() + 0.5)));
      v.s = grid.s_value(static_cast<std::uint32_t>(j));
      v.sdot = record.trajectory.sdot[j];
    }
    record.newly_marked = grid.mark_infeasible(map_violations(grid, actionable));
    result.records.push_back(std::move(record));

    RLParams round_params = params;
    round_params.rng_seed = Rng::mix(params.rng_seed, round);
    TrainResult retrained = train(grid, round_params, Algorithm::topto_sarsa, &result.q);
    result.q = std::move(retrained.q);
    if (!retrained.policy) {
      result.status = InteractionStatus::infeasible_after_refinement;
      return result;
    }
    policy = std::move(*retrained.policy);
  }

  result.status = InteractionStatus::round_cap_exhausted;
  result.final_policy = std::move(policy);
  return result;
}

}  // namespace topt
