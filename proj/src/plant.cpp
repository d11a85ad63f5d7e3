#include "topt/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "topt/kernels.hpp"
#include "topt/rng.hpp"

namespace topt {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

FrictionParams nominal_friction(const FrictionParams& fric, const MismatchSpec& mm) {
  FrictionParams out = fric;
  for (double& v : out.viscous) v *= mm.viscous_scale;
  if (mm.omit_coulomb) std::fill(out.coulomb.begin(), out.coulomb.end(), 0.0);
  return out;
}

void check_friction(const FrictionParams& fric, std::size_t n) {
  require(fric.viscous.size() == n && fric.coulomb.size() == n,
          "plant: friction vectors must have one entry per joint");
}

double coulomb_term(double qd, double c) {
  return (qd > 0.0 ? c : 0.0) + (qd < 0.0 ? -c : 0.0);
}

}  // namespace

PlantModel PlantModel::make_decoupled(DecoupledParams params, FrictionParams friction,
                                      MismatchSpec mismatch, double noise_std,
                                      std::uint64_t noise_seed) {
  require(!params.inertia.empty(), "plant: decoupled preset needs inertia entries");
  for (double j : params.inertia)
    require(j > 0.0, "plant: inertias must be positive");
  check_friction(friction, params.inertia.size());

  PlantModel p;
  p.preset_ = Preset::decoupled;
  p.n_joints_ = params.inertia.size();
  p.dec_nominal_ = params;
  for (double& j : p.dec_nominal_.inertia) j *= mismatch.inertia_scale;
  p.dec_true_ = std::move(params);
  p.fric_nominal_ = nominal_friction(friction, mismatch);
  p.fric_true_ = std::move(friction);
  p.noise_std_ = noise_std;
  p.noise_seed_ = noise_seed;
  return p;
}

PlantModel PlantModel::make_two_link_planar(TwoLinkPlanarParams params,
                                            FrictionParams friction,
                                            MismatchSpec mismatch, double noise_std,
                                            std::uint64_t noise_seed) {
  require(params.m1 > 0.0 && params.m2 > 0.0 && params.l1 > 0.0 && params.l2 > 0.0,
          "plant: two-link masses and lengths must be positive");
  check_friction(friction, 2);

  PlantModel p;
  p.preset_ = Preset::two_link_planar;
  p.n_joints_ = 2;
  p.tl_true_ = params;
  p.tl_nominal_ = params;
  p.tl_nominal_.m1 *= mismatch.inertia_scale;
  p.tl_nominal_.m2 *= mismatch.inertia_scale;
  p.fric_nominal_ = nominal_friction(friction, mismatch);
  p.fric_true_ = std::move(friction);
  p.noise_std_ = noise_std;
  p.noise_seed_ = noise_seed;
  return p;
}

const DecoupledParams& PlantModel::decoupled_params(PlantSide side) const {
  return side == PlantSide::true_plant ? dec_true_ : dec_nominal_;
}

const TwoLinkPlanarParams& PlantModel::two_link_params(PlantSide side) const {
  return side == PlantSide::true_plant ? tl_true_ : tl_nominal_;
}

const FrictionParams& PlantModel::friction(PlantSide side) const {
  return side == PlantSide::true_plant ? fric_true_ : fric_nominal_;
}

void PlantModel::inverse_dynamics(PlantSide side, std::span<const double> q,
                                  std::span<const double> qd,
                                  std::span<const double> qdd,
                                  std::span<double> tau) const {
  const FrictionParams& fric = friction(side);
  if (preset_ == Preset::decoupled) {
    const DecoupledParams& par = decoupled_params(side);
    double qdd_sum = 0.0;
    for (double a : qdd) qdd_sum += a;
    for (std::size_t i = 0; i < n_joints_; ++i) {
      double t = par.inertia[i] * qdd[i];
      t = t + fric.viscous[i] * qd[i];
      t = t + coulomb_term(qd[i], fric.coulomb[i]);
      t = t + par.coupling * (qdd_sum - qdd[i]);
      tau[i] = t;
    }
    return;
  }

  const TwoLinkPlanarParams& par = two_link_params(side);
  const double lc1 = par.l1 / 2.0, lc2 = par.l2 / 2.0;
  const double i1 = par.m1 * par.l1 * par.l1 / 12.0;
  const double i2 = par.m2 * par.l2 * par.l2 / 12.0;
  const double c2 = std::cos(q[1]), s2 = std::sin(q[1]);

  const double m11 = par.m1 * lc1 * lc1 + i1 +
                     par.m2 * (par.l1 * par.l1 + lc2 * lc2 + 2.0 * par.l1 * lc2 * c2) +
                     i2;
  const double m12 = par.m2 * (lc2 * lc2 + par.l1 * lc2 * c2) + i2;
  const double m22 = par.m2 * lc2 * lc2 + i2;
  const double h = -par.m2 * par.l1 * lc2 * s2;

  const double g1 = (par.m1 * lc1 + par.m2 * par.l1) * par.gravity * std::cos(q[0]) +
                    par.m2 * lc2 * par.gravity * std::cos(q[0] + q[1]);
  const double g2 = par.m2 * lc2 * par.gravity * std::cos(q[0] + q[1]);

  tau[0] = m11 * qdd[0] + m12 * qdd[1] + h * (2.0 * qd[0] * qd[1] + qd[1] * qd[1]) +
           g1 + fric.viscous[0] * qd[0] + coulomb_term(qd[0], fric.coulomb[0]);
  tau[1] = m12 * qdd[0] + m22 * qdd[1] - h * qd[0] * qd[0] + g2 +
           fric.viscous[1] * qd[1] + coulomb_term(qd[1], fric.coulomb[1]);
}

TimedTrajectory time_parameterize(const PhaseTrajectory& traj, const JointPath& path,
                                  double dt) {
  require(dt > 0.0, "time_parameterize: dt must be positive");
  require(traj.rows.size() >= 2, "time_parameterize: trajectory too short");
  const std::size_t segments = traj.rows.size() - 1;
  const double total = traj.execution_time;

  // Per-segment start time, start s, start velocity, constant acceleration.
  std::vector<double> seg_start(segments + 1, 0.0);
  std::vector<double> seg_accel(segments, 0.0);
  for (std::size_t k = 0; k < segments; ++k) {
    seg_start[k + 1] = seg_start[k] + traj.dt[k];
    seg_accel[k] =
        (traj.sdot[k + 1] * traj.sdot[k + 1] - traj.sdot[k] * traj.sdot[k]) /
        (2.0 * traj.ds);
  }

  TimedTrajectory out;
  out.dt = dt;
  out.n_joints = path.joint_count();

  PathEvaluation eval;
  std::size_t seg = 0;
  const auto push_sample = [&](double t, double s, double sd, double sdd) {
    s = std::clamp(s, 0.0, 1.0);
    sd = std::max(sd, 0.0);
    out.t.push_back(t);
    out.s.push_back(s);
    out.sdot.push_back(sd);
    out.sddot.push_back(sdd);
    path.eval_into(s, eval);
    for (std::size_t i = 0; i < out.n_joints; ++i) {
      out.q.push_back(eval.q[i]);
      out.qd.push_back(eval.q_prime[i] * sd);
      out.qdd.push_back(eval.q_prime[i] * sdd + eval.q_double_prime[i] * sd * sd);
    }
  };

  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t >= total) break;
    while (seg + 1 < segments && t >= seg_start[seg + 1]) ++seg;
    const double local = t - seg_start[seg];
    const double s0 = static_cast<double>(seg) * traj.ds;
    const double v0 = traj.sdot[seg];
    const double a = seg_accel[seg];
    push_sample(t, s0 + v0 * local + 0.5 * a * local * local, v0 + a * local, a);
  }
  push_sample(total, 1.0, traj.sdot.back(), seg_accel.back());
  return out;
}

TorqueTrace run_on_plant(const PlantModel& plant, const TimedTrajectory& timed,
                         PlantSide side) {
  require(plant.joint_count() == timed.n_joints,
          "run_on_plant: plant/trajectory joint counts differ");
  const std::size_t n = timed.sample_count();
  const std::size_t nj = timed.n_joints;

  TorqueTrace trace;
  trace.source = side == PlantSide::true_plant ? TorqueTrace::Source::measured
                                               : TorqueTrace::Source::model;
  trace.n_joints = nj;
  trace.t = timed.t;
  trace.s = timed.s;
  trace.sdot = timed.sdot;
  trace.tau.assign(n * nj, 0.0);

  if (plant.preset() == PlantModel::Preset::decoupled) {
    // Contiguous per-joint arrays for the kernels.
    const DecoupledParams& par = plant.decoupled_params(side);
    const FrictionParams& fric = plant.friction(side);
    std::vector<double> qd_col(n), qdd_col(n), qdd_sum(n, 0.0), tau_col(n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < nj; ++i) qdd_sum[k] += timed.qdd[k * nj + i];
    const kernels::KernelTable& kt = kernels::active();
    for (std::size_t i = 0; i < nj; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        qd_col[k] = timed.qd[k * nj + i];
        qdd_col[k] = timed.qdd[k * nj + i];
      }
      kt.decoupled_tau(par.inertia[i], fric.viscous[i], fric.coulomb[i], par.coupling,
                       qd_col.data(), qdd_col.data(), qdd_sum.data(), n,
                       tau_col.data());
      for (std::size_t k = 0; k < n; ++k) trace.tau[k * nj + i] = tau_col[k];
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      plant.inverse_dynamics(side, std::span(timed.q).subspan(k * nj, nj),
                             std::span(timed.qd).subspan(k * nj, nj),
                             std::span(timed.qdd).subspan(k * nj, nj),
                             std::span(trace.tau).subspan(k * nj, nj));
    }
  }

  if (side == PlantSide::true_plant && plant.noise_std() > 0.0) {
    Rng rng(plant.noise_seed());
    for (double& tau : trace.tau) tau += rng.gaussian(plant.noise_std());
  }
  return trace;
}

std::vector<Violation> check_torque_limits(const TorqueTrace& trace,
                                           const Constraints& constraints) {
  require(constraints.has_torque_limits(),
          "check_torque_limits: constraints carry no torque limits");
  require(constraints.tau_max.size() == trace.n_joints,
          "check_torque_limits: joint count mismatch");
  std::vector<Violation> violations;
  const std::size_t nj = trace.n_joints;
  for (std::size_t k = 0; k < trace.sample_count(); ++k) {
    for (std::size_t i = 0; i < nj; ++i) {
      const double tau = trace.tau[k * nj + i];
      if (tau < constraints.tau_min[i] || tau > constraints.tau_max[i]) {
        violations.push_back({trace.t[k], i, tau, trace.s[k], trace.sdot[k]});
      }
    }
  }
  return violations;
}

}  // namespace topt
