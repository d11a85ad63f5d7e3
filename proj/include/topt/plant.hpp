#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "topt/phase_grid.hpp"
#include "topt/rl.hpp"

namespace topt {

/// Which parameter set answers an inverse-dynamics query. The planner side of
/// the toolkit only ever sees true_plant torque traces; nominal exists for the
/// model-based baseline.
enum class PlantSide { true_plant, nominal };

struct DecoupledParams {
  std::vector<double> inertia;  // per joint
  double coupling = 0.0;        // acceleration cross-coupling gain
};

struct TwoLinkPlanarParams {
  double m1 = 8.0;
  double m2 = 5.0;
  double l1 = 0.5;
  double l2 = 0.5;
  double gravity = 0.0;  // 0 = horizontal plane
};

struct FrictionParams {
  std::vector<double> viscous;  // per joint
  std::vector<double> coulomb;  // per joint
};

/// How the nominal model deviates from the true plant. Scale 1.0 with the
/// Coulomb term kept makes the two identical.
struct MismatchSpec {
  double inertia_scale = 0.85;
  double viscous_scale = 1.0;
  bool omit_coulomb = true;
};

class PlantModel {
 public:
  enum class Preset { decoupled, two_link_planar };

  static PlantModel make_decoupled(DecoupledParams params, FrictionParams friction,
                                   MismatchSpec mismatch, double noise_std,
                                   std::uint64_t noise_seed);
  static PlantModel make_two_link_planar(TwoLinkPlanarParams params,
                                         FrictionParams friction, MismatchSpec mismatch,
                                         double noise_std, std::uint64_t noise_seed);

  Preset preset() const { return preset_; }
  std::size_t joint_count() const { return n_joints_; }
  double noise_std() const { return noise_std_; }
  std::uint64_t noise_seed() const { return noise_seed_; }

  /// Noise-free inverse dynamics of one sample.
  void inverse_dynamics(PlantSide side, std::span<const double> q,
                        std::span<const double> qd, std::span<const double> qdd,
                        std::span<double> tau) const;

  const DecoupledParams& decoupled_params(PlantSide side) const;
  const TwoLinkPlanarParams& two_link_params(PlantSide side) const;
  const FrictionParams& friction(PlantSide side) const;

 private:
  Preset preset_ = Preset::decoupled;
  std::size_t n_joints_ = 0;
  DecoupledParams dec_true_, dec_nominal_;
  TwoLinkPlanarParams tl_true_, tl_nominal_;
  FrictionParams fric_true_, fric_nominal_;
  double noise_std_ = 0.0;
  std::uint64_t noise_seed_ = 0;
};

/// Time-sampled joint trajectory: constant pseudo-acceleration per grid
/// segment, sampled every dt, with a final sample pinned at (s=1, sdot=0).
struct TimedTrajectory {
  double dt = 0.0;
  std::size_t n_joints = 0;
  std::vector<double> t, s, sdot, sddot;  // per sample
  std::vector<double> q, qd, qdd;         // sample-major, n_samples x n_joints
  std::size_t sample_count() const { return t.size(); }
  double duration() const { return t.empty() ? 0.0 : t.back(); }
};

TimedTrajectory time_parameterize(const PhaseTrajectory& traj, const JointPath& path,
                                  double dt);

struct Violation {
  double t = 0.0;
  std::size_t joint = 0;
  double tau = 0.0;
  double s = 0.0;
  double sdot = 0.0;
};

struct TorqueTrace {
  enum class Source { measured, model };
  Source source = Source::measured;
  std::size_t n_joints = 0;
  std::vector<double> t, s, sdot;  // per sample
  std::vector<double> tau;         // sample-major, n_samples x n_joints
  std::vector<Violation> violations;
  std::size_t sample_count() const { return t.size(); }
};

/// Runs the trajectory through the plant's inverse dynamics. true_plant adds
/// the configured sensor noise (seeded, reproducible); nominal is noise-free.
TorqueTrace run_on_plant(const PlantModel& plant, const TimedTrajectory& timed,
                         PlantSide side);

/// Strict-inequality comparison against tau_min/tau_max. Torque exactly at a
/// limit is compliant.
std::vector<Violation> check_torque_limits(const TorqueTrace& trace,
                                           const Constraints& constraints);

}  // namespace topt
