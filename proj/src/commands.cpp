#include "topt/commands.hpp"

#include <iostream>

#include "topt/artifacts.hpp"
#include "topt/interaction.hpp"
#include "topt/ni.hpp"
#include "topt/oracle.hpp"
#include "topt/scenario.hpp"

namespace topt {

namespace {

using nlohmann::ordered_json;

struct RunContext {
  Scenario scenario;
  JointPath path;
  ArtifactWriter writer;
};

/// Loads the scenario, applies the seed override, and builds the path.
/// Throws ConfigError on any configuration problem.
RunContext make_context(const CommandOptions& options) {
  Scenario scenario = load_scenario(options.scenario_file);
  if (options.seed_override) scenario.rl.rng_seed = *options.seed_override;
  JointPath path = scenario.build_path();
  ArtifactWriter writer(options.out_dir, scenario.name, scenario.content_hash,
                        scenario.rl.rng_seed);
  return RunContext{std::move(scenario), std::move(path), std::move(writer)};
}

int report_config_error(const ConfigError& e) {
  std::cerr << e.what() << "\n";
  return exit_code::config_error;
}

/// Uniform error envelope: configuration problems (including invalid-argument
/// contract violations from the library) exit with the config code; anything
/// else is reported and exits 1 rather than crashing a batch run.
template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    return report_config_error(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "scenario config: " << e.what() << "\n";
    return exit_code::config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

void require_torque_limits(const Scenario& scenario) {
  if (!scenario.constraints.has_torque_limits())
    throw ConfigError(
        "scenario config: field 'constraints.tau_max' is missing (torque limits "
        "are required for plant commands)");
}

ordered_json json_or_null(const std::optional<std::size_t>& v) {
  if (v) return *v;
  return nullptr;
}

struct NiOutcome {
  NiPlanResult plan;
  TorqueTrace measured;
  std::vector<Violation> violations;
};

/// Plans with the nominal model and measures the result on the true plant.
NiOutcome run_ni(const RunContext& ctx, const PlantModel& plant) {
  const Scenario& sc = ctx.scenario;
  const PathProjectedDynamics dyn = project_dynamics(plant, ctx.path, sc.ni_samples);
  NiOutcome out{ni_plan(dyn, sc.constraints, ctx.path, sc.ni_step,
                        sc.resolve_grid_spec(ctx.path)),
                {},
                {}};
  const TimedTrajectory timed =
      time_parameterize(out.plan.trajectory, ctx.path, sc.dt);
  out.measured = run_on_plant(plant, timed, PlantSide::true_plant);
  out.violations = check_torque_limits(out.measured, sc.constraints);
  return out;
}

int interaction_exit(InteractionStatus status) {
  switch (status) {
    case InteractionStatus::success:
      return exit_code::ok;
    case InteractionStatus::initial_training_failed:
      return exit_code::training_failure;
    case InteractionStatus::infeasible_after_refinement:
      return exit_code::infeasible;
    case InteractionStatus::round_cap_exhausted:
      return exit_code::round_cap;
  }
  return exit_code::config_error;
}

const char* interaction_status_name(InteractionStatus status) {
  switch (status) {
    case InteractionStatus::success:
      return "success";
    case InteractionStatus::initial_training_failed:
      return "initial_training_failed";
    case InteractionStatus::infeasible_after_refinement:
      return "infeasible_after_refinement";
    case InteractionStatus::round_cap_exhausted:
      return "round_cap_exhausted";
  }
  return "unknown";
}

/// Shared by cmd_interact and cmd_compare; writes the interaction artifacts
/// with the given file prefix.
int run_interaction(const RunContext& ctx, const PlantModel& plant,
                    const CommandOptions& options, const std::string& prefix,
                    InteractionResult& result) {
  const Scenario& sc = ctx.scenario;
  PhaseGrid grid = sc.make_grid(ctx.path);
  result = interaction_loop(grid, sc.rl, plant, sc.dt, sc.interaction);

  ctx.writer.write_rounds_csv(prefix + "rounds.csv", result.records);
  if (result.final_policy) {
    const PhaseTrajectory traj = policy_to_trajectory(*result.final_policy, grid);
    ctx.writer.write_trajectory_csv(prefix + "trajectory.csv", traj);
  }
  if (result.final_trace) {
    ctx.writer.write_torque_csv(prefix + "torque_measured.csv", *result.final_trace,
                                {});
  }
  if (options.dump_traces) {
    for (const InteractionRecord& record : result.records) {
      const TimedTrajectory timed =
          time_parameterize(record.trajectory, ctx.path, sc.dt);
      const TorqueTrace trace = run_on_plant(plant, timed, PlantSide::true_plant);
      const auto violations = check_torque_limits(trace, sc.constraints);
      ctx.writer.write_torque_csv(
          prefix + "torque_round_" + std::to_string(record.round) + ".csv", trace,
          violations);
    }
  }

  ordered_json summary;
  summary["command"] = "interact";
  summary["status"] = interaction_status_name(result.status);
  summary["rounds"] = result.records.size();
  if (!result.records.empty()) {
    summary["initial_T"] = result.records.front().execution_time;
    summary["final_T"] = result.records.back().execution_time;
    summary["final_violations"] = result.records.back().violation_count;
  }
  ctx.writer.write_json(prefix + "summary.json", std::move(summary));

  if (result.status != InteractionStatus::success)
    std::cerr << "interaction: " << interaction_status_name(result.status) << "\n";
  return interaction_exit(result.status);
}

}  // namespace

int cmd_plan_rl(const CommandOptions& options, Algorithm algorithm) {
  return guarded([&]() -> int {
    const RunContext ctx = make_context(options);
    const PhaseGrid grid = ctx.scenario.make_grid(ctx.path);
    const TrainResult result = train(grid, ctx.scenario.rl, algorithm);

    ctx.writer.write_stats_csv("stats.csv", result.stats);
    ordered_json summary;
    summary["command"] = "plan-rl";
    summary["algorithm"] = algorithm == Algorithm::topto_sarsa ? "topto_sarsa" : "sarsa";
    summary["episodes"] = result.stats.episodes.size();
    summary["first_success"] = json_or_null(result.stats.first_success);
    summary["converged"] = result.converged;

    if (!result.policy) {
      summary["T"] = nullptr;
      ctx.writer.write_json("summary.json", std::move(summary));
      std::cerr << "training failed: no policy within the episode budget\n";
      return exit_code::training_failure;
    }
    const PhaseTrajectory traj = policy_to_trajectory(*result.policy, grid);
    summary["T"] = traj.execution_time;
    ctx.writer.write_trajectory_csv("trajectory.csv", traj);
    ctx.writer.write_json("summary.json", std::move(summary));
    return exit_code::ok;
  });
}

int cmd_plan_ni(const CommandOptions& options) {
  return guarded([&]() -> int {
    const RunContext ctx = make_context(options);
    require_torque_limits(ctx.scenario);
    const PlantModel plant = ctx.scenario.make_plant();
    NiOutcome ni{};
    try {
      ni = run_ni(ctx, plant);
    } catch (const NiInfeasibleError& e) {
      std::cerr << e.what() << "\n";
      return exit_code::infeasible;
    }
    ctx.writer.write_trajectory_csv("trajectory.csv", ni.plan.trajectory);
    if (options.dump_traces)
      ctx.writer.write_torque_csv("torque_measured.csv", ni.measured, ni.violations);

    ordered_json summary;
    summary["command"] = "plan-ni";
    summary["T"] = ni.plan.trajectory.execution_time;
    summary["T_continuous"] = ni.plan.continuous_time;
    summary["measured_violations"] = ni.violations.size();
    ctx.writer.write_json("summary.json", std::move(summary));
    return exit_code::ok;
  });
}

int cmd_interact(const CommandOptions& options) {
  return guarded([&]() -> int {
    const RunContext ctx = make_context(options);
    require_torque_limits(ctx.scenario);
    const PlantModel plant = ctx.scenario.make_plant();
    InteractionResult result;
    return run_interaction(ctx, plant, options, "", result);
  });
}

int cmd_compare(const CommandOptions& options) {
  return guarded([&]() -> int {
    const RunContext ctx = make_context(options);
    require_torque_limits(ctx.scenario);
    const PlantModel plant = ctx.scenario.make_plant();

    NiOutcome ni{};
    bool ni_feasible = true;
    std::string ni_error;
    try {
      ni = run_ni(ctx, plant);
      ctx.writer.write_trajectory_csv("ni_trajectory.csv", ni.plan.trajectory);
      ctx.writer.write_torque_csv("ni_torque_measured.csv", ni.measured,
                                  ni.violations);
    } catch (const NiInfeasibleError& e) {
      ni_feasible = false;
      ni_error = e.what();
      std::cerr << ni_error << "\n";
    }

    InteractionResult rl;
    const int rl_exit = run_interaction(ctx, plant, options, "rl_", rl);

    ordered_json summary;
    summary["command"] = "compare";
    ordered_json ni_json;
    if (ni_feasible) {
      ni_json["T"] = ni.plan.trajectory.execution_time;
      ni_json["measured_violations"] = ni.violations.size();
    } else {
      ni_json["error"] = ni_error;
    }
    summary["ni"] = std::move(ni_json);
    ordered_json rl_json;
    rl_json["status"] = interaction_status_name(rl.status);
    rl_json["rounds"] = rl.records.size();
    if (!rl.records.empty()) {
      rl_json["T"] = rl.records.back().execution_time;
      rl_json["measured_violations"] = rl.records.back().violation_count;
    }
    summary["rl"] = std::move(rl_json);
    ctx.writer.write_json("comparison.json", std::move(summary));

    if (!ni_feasible) return exit_code::infeasible;
    return rl_exit;
  });
}

int cmd_oracle(const CommandOptions& options) {
  return guarded([&]() -> int {
    const RunContext ctx = make_context(options);
    const PhaseGrid grid = ctx.scenario.make_grid(ctx.path);
    const OracleResult result = dp_oracle(grid);

    ordered_json summary;
    summary["command"] = "oracle";
    summary["visited_states"] = result.visited_states;
    if (!result.trajectory) {
      summary["T_star"] = nullptr;
      ctx.writer.write_json("summary.json", std::move(summary));
      std::cerr << "oracle: goal unreachable on this grid\n";
      return exit_code::infeasible;
    }
    summary["T_star"] = result.optimal_time;
    ctx.writer.write_trajectory_csv("trajectory.csv", *result.trajectory);
    ctx.writer.write_json("summary.json", std::move(summary));
    std::cout << "T_star=" << format_double(result.optimal_time) << "\n";
    return exit_code::ok;
  });
}

}  // namespace topt
