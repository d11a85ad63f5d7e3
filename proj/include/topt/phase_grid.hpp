#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "topt/path.hpp"

namespace topt {

/// Per-joint limit vectors. qdot_max is optional (empty when absent); torque
/// limits are only needed for plant work and may be empty for kinematic-only
/// scenarios.
struct Constraints {
  std::vector<double> qddot_min;
  std::vector<double> qddot_max;
  std::vector<double> qdot_max;
  std::vector<double> tau_min;
  std::vector<double> tau_max;

  /// Throws std::invalid_argument on shape or sign violations.
  void validate(std::size_t n_joints) const;
  bool has_torque_limits() const { return !tau_max.empty(); }
};

struct GridSpec {
  std::size_t n_s = 0;      // N grid points along s
  std::size_t n_sdot = 0;   // M grid points along sdot
  double sdot_ceiling = 0;  // sdot value of row M-1

  double ds() const { return 1.0 / static_cast<double>(n_s - 1); }
  double dsdot() const { return sdot_ceiling / static_cast<double>(n_sdot - 1); }
  void validate() const;
};

struct PhaseState {
  std::uint32_t j = 0;  // s index
  std::uint32_t m = 0;  // sdot index
  friend bool operator==(const PhaseState&, const PhaseState&) = default;
};

/// Pseudo-acceleration interval at one state. Empty (min > max, or the
/// zero-q' flag) means the state is infeasible.
struct AccelBounds {
  double sddot_min = 0.0;
  double sddot_max = 0.0;
  bool zero_direction_violation = false;
  bool empty() const { return zero_direction_violation || sddot_min > sddot_max; }
};

/// Interval of joint acceleration limits projected through the path geometry
/// at (s, sdot).
AccelBounds accel_bounds(const JointPath& path, const Constraints& constraints,
                         double s, double sdot);

/// Kinematic sdot ceiling: min over 1000 uniform s samples of
/// qdot_max_i / |q'_i(s)| over joints with |q'_i| > 1e-9, times headroom.
/// Throws std::invalid_argument when the constraints carry no qdot_max.
double compute_sdot_ceiling(const JointPath& path, const Constraints& constraints,
                            double headroom);

/// Contiguous inclusive range of next-column rows reachable from a state.
struct ActionBand {
  std::uint32_t lo = 1;
  std::uint32_t hi = 0;
  bool empty() const { return lo > hi; }
  std::size_t size() const { return empty() ? 0 : hi - lo + 1; }
};

/// N x M discretization of the (s, sdot) plane with per-state feasibility and
/// cached pseudo-acceleration bounds. Immutable during training; the
/// interaction loop is the only writer (mark_infeasible).
class PhaseGrid {
 public:
  /// Builds the grid, evaluating accel bounds for every state. Throws
  /// std::invalid_argument if (0,0) or (N-1,0) comes out infeasible.
  PhaseGrid(const JointPath& path, Constraints constraints, GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  const JointPath& path() const { return *path_; }
  const Constraints& constraints() const { return constraints_; }

  double s_value(std::uint32_t j) const { return static_cast<double>(j) * ds_; }
  double sdot_value(std::uint32_t m) const { return sdot_values_[m]; }

  bool feasible(PhaseState st) const { return feasible_[index(st)] != 0; }
  AccelBounds bounds_at(PhaseState st) const;

  /// Target rows m' in column j+1 whose transition acceleration
  /// (sdot'^2 - sdot^2) / (2 ds) lies within bounds_at(state). Excludes
  /// m'=0 when state.m == 0. Target feasibility is not filtered.
  ActionBand action_range(PhaseState st) const;

  /// Marks states infeasible; returns those that were feasible before the
  /// call. (0,0) and (N-1,0) are never marked.
  std::vector<PhaseState> mark_infeasible(std::span<const PhaseState> states);

  std::size_t feasible_count() const;
  std::size_t state_count() const { return feasible_.size(); }

 private:
  std::size_t index(PhaseState st) const {
    return static_cast<std::size_t>(st.j) * spec_.n_sdot + st.m;
  }

  const JointPath* path_;
  Constraints constraints_;
  GridSpec spec_;
  double ds_ = 0.0;
  double dsdot_ = 0.0;
  std::vector<double> sdot_values_;   // m -> m * dsdot
  std::vector<double> sdot_squares_;  // m -> sdot^2
  std::vector<std::uint8_t> feasible_;
  std::vector<std::uint8_t> bounds_ok_;  // accel interval nonempty, pre terminal rule
  std::vector<double> lo_;  // per-state sddot_min
  std::vector<double> hi_;  // per-state sddot_max
};

/// Spec-level operation name; forwards to the PhaseGrid constructor.
PhaseGrid build_grid(const JointPath& path, Constraints constraints, GridSpec spec);

}  // namespace topt
