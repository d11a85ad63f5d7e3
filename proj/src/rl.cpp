#include "topt/rl.hpp"

#include <cmath>
#include <stdexcept>

namespace topt {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

std::uint64_t mix_key(std::uint64_t key) {
  // splitmix64 finalizer
  key = (key ^ (key >> 30)) * 0xBF58476D1CE4E5B9ull;
  key = (key ^ (key >> 27)) * 0x94D049BB133111EBull;
  return key ^ (key >> 31);
}

constexpr std::uint64_t kEmptyKey = ~0ull;

}  // namespace

void RLParams::validate() const {
  require(alpha > 0.0 && alpha < 1.0, "rl: alpha must be in (0,1)");
  require(gamma >= 0.0 && gamma < 1.0, "rl: gamma must be in [0,1)");
  require(epsilon > 0.0 && epsilon < 1.0, "rl: epsilon must be in (0,1)");
  require(rho > 0.0 && rho < 1.0, "rl: rho must be in (0,1)");
  require(max_episodes >= 1, "rl: max_episodes must be >= 1");
}

QTable::QTable() : keys_(64, kEmptyKey), values_(64, 0.0), mask_(63) {}

double QTable::get(PhaseState st, std::uint32_t action) const {
  const std::uint64_t key = pack(st, action);
  std::size_t slot = mix_key(key) & mask_;
  while (true) {
    if (keys_[slot] == key) return values_[slot];
    if (keys_[slot] == kEmptyKey) return 0.0;
    slot = (slot + 1) & mask_;
  }
}

double& QTable::ref(PhaseState st, std::uint32_t action) {
  const std::uint64_t key = pack(st, action);
  while (true) {
    std::size_t slot = mix_key(key) & mask_;
    while (keys_[slot] != kEmptyKey) {
      if (keys_[slot] == key) return values_[slot];
      slot = (slot + 1) & mask_;
    }
    if (size_ * 10 < keys_.size() * 7) {
      keys_[slot] = key;
      values_[slot] = 0.0;
      ++size_;
      return values_[slot];
    }
    grow();
  }
}

void QTable::grow() {
  std::vector<std::uint64_t> old_keys = std::move(keys_);
  std::vector<double> old_values = std::move(values_);
  keys_.assign(old_keys.size() * 2, kEmptyKey);
  values_.assign(old_values.size() * 2, 0.0);
  mask_ = keys_.size() - 1;
  for (std::size_t i = 0; i < old_keys.size(); ++i) {
    if (old_keys[i] == kEmptyKey) continue;
    std::size_t slot = mix_key(old_keys[i]) & mask_;
    while (keys_[slot] != kEmptyKey) slot = (slot + 1) & mask_;
    keys_[slot] = old_keys[i];
    values_[slot] = old_values[i];
  }
}

double reward(double sdot_k, double sdot_k1, bool penalty) {
  const double r = sdot_k + sdot_k1;
  return penalty ? -r : r;
}

void sarsa_update(QTable& q, PhaseState s, std::uint32_t a, double r, double q_next,
                  const RLParams& params) {
  double& entry = q.ref(s, a);
  entry = entry + params.alpha * (r + params.gamma * q_next - entry);
}

void sarsa_update(QTable& q, PhaseState s, std::uint32_t a, double r,
                  const std::optional<std::pair<PhaseState, std::uint32_t>>& next,
                  const RLParams& params) {
  const double q_next = next ? q.get(next->first, next->second) : 0.0;
  sarsa_update(q, s, a, r, q_next, params);
}

void penalty_backprop(QTable& q, const EpisodeLog& episode, double r_fail,
                      double rho) {
  double factor = 1.0;
  for (std::size_t i = episode.steps.size(); i-- > 0;) {
    q.add(episode.steps[i].state, episode.steps[i].action, factor * r_fail);
    factor *= rho;
  }
}

namespace {

std::optional<std::uint32_t> select_action_impl(const QTable& q, const PhaseGrid& grid,
                                                PhaseState st, SelectMode mode,
                                                double epsilon, Rng& rng,
                                                std::vector<std::uint32_t>& scratch) {
  const ActionBand band = grid.action_range(st);
  if (band.empty()) return std::nullopt;

  if (mode == SelectMode::improved &&
      st.j + 2 == static_cast<std::uint32_t>(grid.spec().n_s) && band.lo == 0) {
    // The goal (1,0) is reachable; every other goal-column state is
    // infeasible, so take it outright.
    return 0u;
  }

  if (mode == SelectMode::classical) {
    if (epsilon > 0.0 && rng.uniform01() < epsilon)
      return band.lo + static_cast<std::uint32_t>(rng.uniform_index(band.size()));
    std::uint32_t best = band.hi;
    double best_q = q.get(st, band.hi);
    for (std::uint32_t mp = band.hi; mp-- > band.lo;) {
      const double v = q.get(st, mp);
      if (v > best_q) {
        best_q = v;
        best = mp;
      }
    }
    return best;
  }

  // improved: drop actions already known to lead into the infeasible region
  scratch.clear();
  for (std::uint32_t mp = band.lo; mp <= band.hi; ++mp) {
    if (q.get(st, mp) >= 0.0) scratch.push_back(mp);
  }
  if (scratch.empty()) return std::nullopt;
  if (epsilon > 0.0 && rng.uniform01() < epsilon)
    return scratch[rng.uniform_index(scratch.size())];
  return scratch.back();
}

void run_episode_impl(QTable& q, const PhaseGrid& grid, const RLParams& params,
                      SelectMode mode, double epsilon, Rng& rng, EpisodeLog& log,
                      std::vector<std::uint32_t>& scratch) {
  log.steps.clear();
  log.outcome = Outcome::failure;

  PhaseState state{0, 0};
  auto action = select_action_impl(q, grid, state, mode, epsilon, rng, scratch);
  if (!action) {
    log.states_visited = 1;
    log.final_state = state;
    return;
  }

  const auto goal_j = static_cast<std::uint32_t>(grid.spec().n_s - 1);
  while (true) {
    const PhaseState next{state.j + 1, *action};
    const double sd = grid.sdot_value(state.m);
    const double sd_next = grid.sdot_value(next.m);

    const auto finish = [&](Outcome outcome, double r) {
      log.steps.push_back({state, *action, r});
      sarsa_update(q, state, *action, r, 0.0, params);
      if (outcome == Outcome::failure && mode == SelectMode::improved)
        penalty_backprop(q, log, r, params.rho);
      log.outcome = outcome;
      log.states_visited = log.steps.size() + 1;
      log.final_state = next;
    };

    if (!grid.feasible(next)) {
      finish(Outcome::failure, reward(sd, sd_next, true));
      return;
    }
    if (next.j == goal_j) {
      finish(Outcome::success, reward(sd, sd_next, false));
      return;
    }
    const auto next_action =
        select_action_impl(q, grid, next, mode, epsilon, rng, scratch);
    if (!next_action) {
      // Dead end: the state is treated as critical and the entering
      // transition is penalized like a boundary hit.
      finish(Outcome::failure, reward(sd, sd_next, true));
      return;
    }
    const double r = reward(sd, sd_next, false);
    log.steps.push_back({state, *action, r});
    sarsa_update(q, state, *action, r, q.get(next, *next_action), params);
    state = next;
    action = next_action;
  }
}

double episode_time(const EpisodeLog& log, const PhaseGrid& grid) {
  const double two_ds = 2.0 * grid.spec().ds();
  double total = 0.0;
  for (const EpisodeStep& step : log.steps) {
    total += two_ds / (grid.sdot_value(step.state.m) +
                       grid.sdot_value(step.action));
  }
  return total;
}

Policy policy_from_episode(const EpisodeLog& log, const PhaseGrid& grid) {
  Policy policy(grid.spec().n_s, 0);
  for (const EpisodeStep& step : log.steps) policy[step.state.j] = step.state.m;
  policy.back() = 0;
  return policy;
}

/// Greedy no-update walk used to extract the final classical-SARSA policy.
std::optional<Policy> greedy_walk(const QTable& q, const PhaseGrid& grid,
                                  SelectMode mode,
                                  std::vector<std::uint32_t>& scratch) {
  Rng dummy(0);  // epsilon = 0: never drawn from
  Policy policy(grid.spec().n_s, 0);
  PhaseState state{0, 0};
  const auto goal_j = static_cast<std::uint32_t>(grid.spec().n_s - 1);
  while (state.j < goal_j) {
    const auto action =
        select_action_impl(q, grid, state, mode, 0.0, dummy, scratch);
    if (!action) return std::nullopt;
    const PhaseState next{state.j + 1, *action};
    if (!grid.feasible(next)) return std::nullopt;
    policy[next.j] = next.m;
    state = next;
  }
  return state.m == 0 ? std::optional<Policy>(policy) : std::nullopt;
}

}  // namespace

std::optional<std::uint32_t> select_action(const QTable& q, const PhaseGrid& grid,
                                           PhaseState st, SelectMode mode,
                                           double epsilon, Rng& rng) {
  std::vector<std::uint32_t> scratch;
  return select_action_impl(q, grid, st, mode, epsilon, rng, scratch);
}

void run_episode(QTable& q, const PhaseGrid& grid, const RLParams& params,
                 SelectMode mode, double epsilon, Rng& rng, EpisodeLog& log) {
  std::vector<std::uint32_t> scratch;
  run_episode_impl(q, grid, params, mode, epsilon, rng, log, scratch);
}

TrainResult train(const PhaseGrid& grid, const RLParams& params,
                  Algorithm algorithm, const QTable* warm_q) {
  params.validate();
  TrainResult result;
  if (warm_q != nullptr) result.q = *warm_q;

  Rng rng(params.rng_seed);
  const SelectMode mode =
      algorithm == Algorithm::topto_sarsa ? SelectMode::improved : SelectMode::classical;

  EpisodeLog log;
  std::vector<std::uint32_t> scratch;
  std::optional<Policy> last_extracted;
  bool pending_exploit = false;

  for (std::size_t episode = 1; episode <= params.max_episodes; ++episode) {
    const bool exploit_pass =
        algorithm == Algorithm::topto_sarsa && pending_exploit;
    const double epsilon = exploit_pass ? 0.0 : params.epsilon;
    run_episode_impl(result.q, grid, params, mode, epsilon, rng, log, scratch);

    TrainingStats::EpisodeRecord record;
    record.outcome = log.outcome;
    record.exploit_pass = exploit_pass;
    if (log.outcome == Outcome::success) {
      record.time = episode_time(log, grid);
      record.has_time = true;
      if (!result.stats.first_success) result.stats.first_success = episode;
    }

    if (algorithm == Algorithm::topto_sarsa) {
      if (exploit_pass) {
        pending_exploit = false;
        if (log.outcome == Outcome::success) {
          record.extracted_time = record.time;
          record.has_extracted = true;
          result.stats.extracted_times.push_back(record.time);
          Policy extracted = policy_from_episode(log, grid);
          const bool repeated = last_extracted && *last_extracted == extracted;
          result.policy = std::move(extracted);
          if (repeated) {
            result.converged = true;
            result.stats.episodes.push_back(record);
            break;
          }
          last_extracted = result.policy;
        }
      } else if (log.outcome == Outcome::success) {
        pending_exploit = true;
      }
    }
    result.stats.episodes.push_back(record);
  }

  if (algorithm == Algorithm::sarsa) {
    result.policy = greedy_walk(result.q, grid, SelectMode::classical, scratch);
  }
  return result;
}

PhaseTrajectory policy_to_trajectory(const Policy& policy, const PhaseGrid& grid) {
  const std::size_t n = grid.spec().n_s;
  require(policy.size() == n, "policy length must equal the grid column count");
  require(policy.front() == 0 && policy.back() == 0,
          "policy must start and end at row 0");

  PhaseTrajectory traj;
  traj.ds = grid.spec().ds();
  traj.rows = policy;
  traj.sdot.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    require(policy[j] < grid.spec().n_sdot, "policy row outside the grid");
    traj.sdot[j] = grid.sdot_value(policy[j]);
  }
  traj.dt.resize(n - 1);
  const double two_ds = 2.0 * traj.ds;
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double denom = traj.sdot[j] + traj.sdot[j + 1];
    if (!(denom > 0.0))
      throw std::invalid_argument(
          "degenerate segment: adjacent zero pseudo-velocities at column " +
          std::to_string(j));
    traj.dt[j] = two_ds / denom;
    total += traj.dt[j];
  }
  traj.execution_time = total;
  return traj;
}

}  // namespace topt
