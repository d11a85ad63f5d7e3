#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "topt/phase_grid.hpp"
#include "topt/rng.hpp"

namespace topt {

struct RLParams {
  double alpha = 0.8;    // learning coefficient, (0,1)
  double gamma = 0.8;    // discount factor, [0,1)
  double epsilon = 0.4;  // greed factor, (0,1)
  double rho = 0.8;      // penalty discount factor, (0,1)
  std::size_t max_episodes = 100000;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

/// Action-value storage: (state, target row) -> Q, default 0. Open-addressing
/// hash map; entries are created on first update, so only visited pairs are
/// stored. Values never depend on table layout.
class QTable {
 public:
  QTable();

  double get(PhaseState st, std::uint32_t action) const;
  double& ref(PhaseState st, std::uint32_t action);
  void add(PhaseState st, std::uint32_t action, double delta) { ref(st, action) += delta; }
  void set(PhaseState st, std::uint32_t action, double value) { ref(st, action) = value; }
  std::size_t entry_count() const { return size_; }

 private:
  static std::uint64_t pack(PhaseState st, std::uint32_t action) {
    return (static_cast<std::uint64_t>(st.j) << 40) |
           (static_cast<std::uint64_t>(st.m) << 20) | action;
  }
  void grow();

  std::vector<std::uint64_t> keys_;
  std::vector<double> values_;
  std::size_t size_ = 0;
  std::size_t mask_ = 0;
};

enum class SelectMode { classical, improved };
enum class Algorithm { sarsa, topto_sarsa };
enum class Outcome { failure, success };

struct EpisodeStep {
  PhaseState state;
  std::uint32_t action = 0;
  double reward = 0.0;
};

struct EpisodeLog {
  std::vector<EpisodeStep> steps;
  Outcome outcome = Outcome::failure;
  std::size_t states_visited = 0;
  PhaseState final_state{};
};

/// Reward of a transition between pseudo-velocities: sdot_k + sdot_k1, negated
/// for the penalty case.
double reward(double sdot_k, double sdot_k1, bool penalty);

/// Q(S,A) += alpha * (R + gamma * q_next - Q(S,A)).
void sarsa_update(QTable& q, PhaseState s, std::uint32_t a, double r, double q_next,
                  const RLParams& params);

/// Spec-shaped overload: q_next looked up from (S_k+1, A_k+1); nullopt stands
/// for the terminal / empty-range case (Q = 0).
void sarsa_update(QTable& q, PhaseState s, std::uint32_t a, double r,
                  const std::optional<std::pair<PhaseState, std::uint32_t>>& next,
                  const RLParams& params);

/// Adds rho^(k-i) * r_fail to every visited pair of a failed episode
/// (i = 1..k in episode order, so the pair nearest the failure gets the full
/// penalty).
void penalty_backprop(QTable& q, const EpisodeLog& episode, double r_fail, double rho);

/// Epsilon-greedy action choice. classical: argmax Q (ties toward larger
/// rows). improved: candidates filtered to Q >= 0, exploit takes the largest
/// row, and in column N-2 row 0 is returned whenever the goal is inside the
/// unfiltered range. nullopt = no usable action (critical state).
std::optional<std::uint32_t> select_action(const QTable& q, const PhaseGrid& grid,
                                           PhaseState st, SelectMode mode,
                                           double epsilon, Rng& rng);

/// One episode from (0,0). Applies per-step updates; on failure applies the
/// velocity-sum penalty with q_next = 0 and, in improved mode, penalty backprop.
void run_episode(QTable& q, const PhaseGrid& grid, const RLParams& params,
                 SelectMode mode, double epsilon, Rng& rng, EpisodeLog& log);

/// Row per column, j = 0..N-1; starts and ends at row 0.
using Policy = std::vector<std::uint32_t>;

struct PhaseTrajectory {
  std::vector<std::uint32_t> rows;  // per column
  std::vector<double> sdot;         // per column
  std::vector<double> dt;           // per segment
  double execution_time = 0.0;
  double ds = 0.0;
};

struct TrainingStats {
  struct EpisodeRecord {
    Outcome outcome = Outcome::failure;
    bool exploit_pass = false;
    double time = 0.0;            // episode trajectory time (successes only)
    double extracted_time = 0.0;  // set on successful exploitation passes
    bool has_time = false;
    bool has_extracted = false;
  };
  std::vector<EpisodeRecord> episodes;
  std::optional<std::size_t> first_success;  // 1-based episode index
  std::vector<double> extracted_times;
};

struct TrainResult {
  std::optional<Policy> policy;
  QTable q;
  TrainingStats stats;
  bool converged = false;
};

/// topto_sarsa: improved selection + penalty backprop, with an epsilon=0
/// exploitation pass after each successful episode; stops when two
/// consecutive extracted policies are identical. sarsa: classical algorithm
/// to max_episodes, then a no-update greedy extraction.
TrainResult train(const PhaseGrid& grid, const RLParams& params,
                  Algorithm algorithm, const QTable* warm_q = nullptr);

/// dt_j = 2 ds / (sdot_j + sdot_j+1). Throws on adjacent zero rows.
PhaseTrajectory policy_to_trajectory(const Policy& policy, const PhaseGrid& grid);

}  // namespace topt
