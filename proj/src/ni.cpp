#include "topt/ni.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace topt {

namespace {

constexpr double kTinyQPrime = 1e-12;

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void project_at(const PlantModel& plant, const PathEvaluation& eval,
                std::span<double> a, std::span<double> b, std::span<double> v,
                std::span<double> g) {
  const std::size_t nj = plant.joint_count();
  const FrictionParams& fric = plant.friction(PlantSide::nominal);

  if (plant.preset() == PlantModel::Preset::decoupled) {
    const DecoupledParams& par = plant.decoupled_params(PlantSide::nominal);
    double qp_sum = 0.0, qpp_sum = 0.0;
    for (std::size_t i = 0; i < nj; ++i) {
      qp_sum += eval.q_prime[i];
      qpp_sum += eval.q_double_prime[i];
    }
    for (std::size_t i = 0; i < nj; ++i) {
      a[i] = par.inertia[i] * eval.q_prime[i] +
             par.coupling * (qp_sum - eval.q_prime[i]);
      b[i] = par.inertia[i] * eval.q_double_prime[i] +
             par.coupling * (qpp_sum - eval.q_double_prime[i]);
      v[i] = fric.viscous[i] * eval.q_prime[i];
      g[i] = fric.coulomb[i] * sign_of(eval.q_prime[i]);
    }
    return;
  }

  const TwoLinkPlanarParams& par = plant.two_link_params(PlantSide::nominal);
  const double lc1 = par.l1 / 2.0, lc2 = par.l2 / 2.0;
  const double i1 = par.m1 * par.l1 * par.l1 / 12.0;
  const double i2 = par.m2 * par.l2 * par.l2 / 12.0;
  const double q1 = eval.q[0], q2 = eval.q[1];
  const double c2 = std::cos(q2), s2 = std::sin(q2);
  const double m11 =
      par.m1 * lc1 * lc1 + i1 +
      par.m2 * (par.l1 * par.l1 + lc2 * lc2 + 2.0 * par.l1 * lc2 * c2) + i2;
  const double m12 = par.m2 * (lc2 * lc2 + par.l1 * lc2 * c2) + i2;
  const double m22 = par.m2 * lc2 * lc2 + i2;
  const double h = -par.m2 * par.l1 * lc2 * s2;
  const double qp1 = eval.q_prime[0], qp2 = eval.q_prime[1];
  const double qpp1 = eval.q_double_prime[0], qpp2 = eval.q_double_prime[1];

  a[0] = m11 * qp1 + m12 * qp2;
  a[1] = m12 * qp1 + m22 * qp2;
  b[0] = m11 * qpp1 + m12 * qpp2 + h * (2.0 * qp1 * qp2 + qp2 * qp2);
  b[1] = m12 * qpp1 + m22 * qpp2 - h * qp1 * qp1;
  v[0] = fric.viscous[0] * qp1;
  v[1] = fric.viscous[1] * qp2;
  g[0] = (par.m1 * lc1 + par.m2 * par.l1) * par.gravity * std::cos(q1) +
         par.m2 * lc2 * par.gravity * std::cos(q1 + q2) +
         fric.coulomb[0] * sign_of(qp1);
  g[1] = par.m2 * lc2 * par.gravity * std::cos(q1 + q2) +
         fric.coulomb[1] * sign_of(qp2);
}

struct StateInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool ok = false;
};

/// Combined sddot interval at (s, sdot): kinematic acceleration bounds
/// intersected with the nominal torque bounds.
class IntervalEvaluator {
 public:
  IntervalEvaluator(const PathProjectedDynamics& dyn, const Constraints& constraints,
                    const JointPath& path)
      : dyn_(dyn), constraints_(constraints), path_(path), nj_(dyn.n_joints),
        a_(nj_), b_(nj_), v_(nj_), g_(nj_) {}

  StateInterval at(double s, double sdot) {
    const AccelBounds kin = accel_bounds(path_, constraints_, s, sdot);
    if (kin.empty()) return {};
    double lo = kin.sddot_min;
    double hi = kin.sddot_max;
    dyn_.eval_at(s, a_, b_, v_, g_);
    const double sdot_sq = sdot * sdot;
    for (std::size_t i = 0; i < nj_; ++i) {
      const double rest = b_[i] * sdot_sq + v_[i] * sdot + g_[i];
      const double num_lo = constraints_.tau_min[i] - rest;
      const double num_hi = constraints_.tau_max[i] - rest;
      if (std::fabs(a_[i]) <= kTinyQPrime) {
        if (num_lo > 0.0 || num_hi < 0.0) return {};
        continue;
      }
      const double x = num_lo / a_[i];
      const double y = num_hi / a_[i];
      lo = std::max(lo, a_[i] > 0.0 ? x : y);
      hi = std::min(hi, a_[i] > 0.0 ? y : x);
    }
    if (lo > hi) return {};
    return {lo, hi, true};
  }

  /// Velocity-limit ceiling at s, +inf when no qdot_max is configured.
  double velocity_cap(double s) {
    if (constraints_.qdot_max.empty()) return std::numeric_limits<double>::infinity();
    path_.eval_into(s, eval_);
    double cap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nj_; ++i) {
      const double qp = std::fabs(eval_.q_prime[i]);
      if (qp > 1e-9) cap = std::min(cap, constraints_.qdot_max[i] / qp);
    }
    return cap;
  }

 private:
  const PathProjectedDynamics& dyn_;
  const Constraints& constraints_;
  const JointPath& path_;
  std::size_t nj_;
  std::vector<double> a_, b_, v_, g_;
  PathEvaluation eval_;
};

/// Largest feasible sdot in [0, upper] by bisection, assuming sdot = 0 is
/// feasible. Returns the feasible side of the boundary.
double backoff_to_boundary(IntervalEvaluator& intervals, double s, double upper) {
  double lo = 0.0, hi = upper;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (intervals.at(s, mid).ok)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

void PathProjectedDynamics::eval_at(double s_value, std::span<double> a_out,
                                    std::span<double> b_out, std::span<double> v_out,
                                    std::span<double> g_out) const {
  PathEvaluation eval = path->eval(s_value);
  project_at(*plant, eval, a_out, b_out, v_out, g_out);
}

PathProjectedDynamics project_dynamics(const PlantModel& plant, const JointPath& path,
                                       std::size_t samples) {
  if (samples < 2) throw std::invalid_argument("project_dynamics: samples must be >= 2");
  if (plant.joint_count() != path.joint_count())
    throw std::invalid_argument("project_dynamics: plant/path joint counts differ");

  PathProjectedDynamics dyn;
  dyn.n_joints = plant.joint_count();
  dyn.plant = &plant;
  dyn.path = &path;
  dyn.s.resize(samples);
  dyn.a.resize(samples * dyn.n_joints);
  dyn.b.resize(samples * dyn.n_joints);
  dyn.v.resize(samples * dyn.n_joints);
  dyn.g.resize(samples * dyn.n_joints);

  PathEvaluation eval;
  for (std::size_t k = 0; k < samples; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(samples - 1);
    dyn.s[k] = s;
    path.eval_into(s, eval);
    const std::size_t base = k * dyn.n_joints;
    project_at(plant, eval, std::span(dyn.a).subspan(base, dyn.n_joints),
               std::span(dyn.b).subspan(base, dyn.n_joints),
               std::span(dyn.v).subspan(base, dyn.n_joints),
               std::span(dyn.g).subspan(base, dyn.n_joints));
  }
  return dyn;
}

NiPlanResult ni_plan(const PathProjectedDynamics& dynamics,
                     const Constraints& constraints, const JointPath& path,
                     double integration_step, const GridSpec& grid_spec) {
  if (!(integration_step > 0.0 && integration_step < 1.0))
    throw std::invalid_argument("ni_plan: integration step must be in (0,1)");
  if (!constraints.has_torque_limits())
    throw std::invalid_argument("ni_plan: torque limits required");
  grid_spec.validate();

  const std::size_t intervals_count =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(1.0 / integration_step)));
  const double h = 1.0 / static_cast<double>(intervals_count);
  const std::size_t points = intervals_count + 1;

  IntervalEvaluator intervals(dynamics, constraints, path);
  const auto s_at = [&](std::size_t k) {
    return k + 1 == points ? 1.0 : static_cast<double>(k) * h;
  };

  // Zero-velocity feasibility along the path (torque limits must dominate
  // gravity and Coulomb offsets at rest).
  for (std::size_t k = 0; k < points; ++k) {
    if (!intervals.at(s_at(k), 0.0).ok)
      throw NiInfeasibleError(s_at(k),
                              "ni_plan: no feasible start at rest, s=" +
                                  std::to_string(s_at(k)));
  }

  // Forward pass at maximum sddot.
  std::vector<double> forward(points, 0.0);
  for (std::size_t k = 0; k + 1 < points; ++k) {
    const double s = s_at(k);
    double sd = forward[k];
    StateInterval iv = intervals.at(s, sd);
    if (!iv.ok) {
      sd = backoff_to_boundary(intervals, s, sd);
      forward[k] = sd;
      iv = intervals.at(s, sd);
      if (!iv.ok)
        throw NiInfeasibleError(s, "ni_plan: forward profile infeasible at s=" +
                                       std::to_string(s));
    }
    const double next_sq = sd * sd + 2.0 * h * iv.hi;
    if (next_sq < 0.0)
      throw NiInfeasibleError(s, "ni_plan: forward profile collapses at s=" +
                                     std::to_string(s));
    forward[k + 1] = std::min(std::sqrt(next_sq), intervals.velocity_cap(s_at(k + 1)));
  }

  // Backward pass at minimum sddot, traversed from s = 1.
  std::vector<double> backward(points, 0.0);
  for (std::size_t k = points - 1; k > 0; --k) {
    const double s = s_at(k);
    double sd = backward[k];
    StateInterval iv = intervals.at(s, sd);
    if (!iv.ok) {
      sd = backoff_to_boundary(intervals, s, sd);
      backward[k] = sd;
      iv = intervals.at(s, sd);
      if (!iv.ok)
        throw NiInfeasibleError(s, "ni_plan: backward profile infeasible at s=" +
                                       std::to_string(s));
    }
    const double prev_sq = sd * sd - 2.0 * h * iv.lo;
    backward[k - 1] = prev_sq < 0.0
                          ? 0.0
                          : std::min(std::sqrt(prev_sq),
                                     intervals.velocity_cap(s_at(k - 1)));
  }

  NiPlanResult result;
  result.profile_s.resize(points);
  result.profile_sdot.resize(points);
  for (std::size_t k = 0; k < points; ++k) {
    result.profile_s[k] = s_at(k);
    result.profile_sdot[k] = std::min(forward[k], backward[k]);
  }

  // The merged profile must be feasible everywhere and positive in the
  // interior.
  for (std::size_t k = 0; k < points; ++k) {
    const double sd = result.profile_sdot[k];
    if (k > 0 && k + 1 < points && !(sd > 0.0))
      throw NiInfeasibleError(result.profile_s[k],
                              "ni_plan: merged profile stalls at s=" +
                                  std::to_string(result.profile_s[k]));
    if (!intervals.at(result.profile_s[k], sd).ok)
      throw NiInfeasibleError(result.profile_s[k],
                              "ni_plan: merged profile infeasible at s=" +
                                  std::to_string(result.profile_s[k]));
  }

  double continuous_time = 0.0;
  for (std::size_t k = 0; k + 1 < points; ++k)
    continuous_time +=
        2.0 * h / (result.profile_sdot[k] + result.profile_sdot[k + 1]);
  result.continuous_time = continuous_time;

  // Snap onto the scenario grid, rounding sdot down so every snapped state
  // sits on or below the model-feasible profile.
  const std::size_t n = grid_spec.n_s;
  const double ds = grid_spec.ds();
  const double dsdot = grid_spec.dsdot();
  Policy rows(n, 0);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double s = static_cast<double>(j) * ds;
    const double pos = s / h;
    std::size_t k = std::min(static_cast<std::size_t>(pos), points - 2);
    const double w = (s - result.profile_s[k]) / h;
    const double sq_left = result.profile_sdot[k] * result.profile_sdot[k];
    const double sq_right = result.profile_sdot[k + 1] * result.profile_sdot[k + 1];
    const double sq = sq_left + w * (sq_right - sq_left);
    const double sd = sq > 0.0 ? std::sqrt(sq) : 0.0;
    auto row = static_cast<std::int64_t>(std::floor(sd / dsdot + 1e-9));
    row = std::clamp<std::int64_t>(row, 1, static_cast<std::int64_t>(grid_spec.n_sdot) - 1);
    rows[j] = static_cast<std::uint32_t>(row);
  }

  PhaseTrajectory traj;
  traj.ds = ds;
  traj.rows = rows;
  traj.sdot.resize(n);
  traj.dt.resize(n - 1);
  for (std::size_t j = 0; j < n; ++j)
    traj.sdot[j] = static_cast<double>(rows[j]) * dsdot;
  double total = 0.0;
  const double two_ds = 2.0 * ds;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    traj.dt[j] = two_ds / (traj.sdot[j] + traj.sdot[j + 1]);
    total += traj.dt[j];
  }
  traj.execution_time = total;
  result.trajectory = std::move(traj);
  return result;
}

}  // namespace topt
