#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "topt/phase_grid.hpp"
#include "topt/plant.hpp"
#include "topt/rl.hpp"

namespace topt {

/// Nominal-model torques written as affine functions of the phase-plane
/// coordinates: tau = a*sddot + b*sdot^2 + v*sdot + g per joint. Coulomb
/// friction is folded into g with the forward-motion convention
/// sign(qdot) = sign(q'), so the decomposition is exact for sdot > 0.
struct PathProjectedDynamics {
  std::size_t n_joints = 0;
  std::vector<double> s;           // sample positions
  std::vector<double> a, b, v, g;  // sample-major, samples x n_joints

  const PlantModel* plant = nullptr;
  const JointPath* path = nullptr;

  /// Exact recomputation at an arbitrary s (not an interpolation of the
  /// sampled arrays).
  void eval_at(double s, std::span<double> a_out, std::span<double> b_out,
               std::span<double> v_out, std::span<double> g_out) const;
};

PathProjectedDynamics project_dynamics(const PlantModel& plant, const JointPath& path,
                                       std::size_t samples);

/// Raised when the forward/backward profile hits a state with an empty
/// combined sddot interval.
class NiInfeasibleError : public std::runtime_error {
 public:
  NiInfeasibleError(double s_value, const std::string& message)
      : std::runtime_error(message), s(s_value) {}
  double s;
};

struct NiPlanResult {
  PhaseTrajectory trajectory;        // snapped onto the scenario grid
  double continuous_time = 0.0;      // execution time of the merged profile
  std::vector<double> profile_s;     // merged continuous profile
  std::vector<double> profile_sdot;
};

/// Forward/backward extremal integration under nominal torque limits and the
/// kinematic acceleration limits, merged by pointwise minimum and snapped
/// down onto the grid so the result is comparable with RL trajectories.
NiPlanResult ni_plan(const PathProjectedDynamics& dynamics,
                     const Constraints& constraints, const JointPath& path,
                     double integration_step, const GridSpec& grid_spec);

}  // namespace topt
