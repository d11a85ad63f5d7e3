#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "topt/oracle.hpp"
#include "topt/plant.hpp"

using namespace topt;

namespace {

JointPath identity_path() { return JointPath::polynomial({{0.0, 1.0}}); }

Constraints unit_limits() {
  Constraints c;
  c.qddot_min = {-1.0};
  c.qddot_max = {1.0};
  return c;
}

MismatchSpec no_mismatch() { return MismatchSpec{1.0, 1.0, false}; }

PlantModel simple_decoupled(double inertia = 1.0, double viscous = 0.0,
                            double coulomb = 0.0, double coupling = 0.0,
                            MismatchSpec mm = no_mismatch(), double noise = 0.0,
                            std::uint64_t seed = 1) {
  return PlantModel::make_decoupled({{inertia}, coupling}, {{viscous}, {coulomb}}, mm,
                                    noise, seed);
}

/// Hand-built constant-acceleration trajectory for direct plant queries.
TimedTrajectory constant_qdd_trajectory(std::size_t n_joints, std::size_t samples,
                                        double qd_value, double qdd_value) {
  TimedTrajectory t;
  t.dt = 0.001;
  t.n_joints = n_joints;
  for (std::size_t k = 0; k < samples; ++k) {
    t.t.push_back(static_cast<double>(k) * t.dt);
    t.s.push_back(static_cast<double>(k) / static_cast<double>(samples));
    t.sdot.push_back(0.5);
    t.sddot.push_back(0.0);
    for (std::size_t i = 0; i < n_joints; ++i) {
      t.q.push_back(0.1 * static_cast<double>(k));
      t.qd.push_back(qd_value);
      t.qdd.push_back(qdd_value);
    }
  }
  return t;
}

PhaseTrajectory triangular_trajectory() {
  const JointPath path = identity_path();
  const PhaseGrid grid(path, unit_limits(), GridSpec{3, 3, 1.0});
  return policy_to_trajectory({0, 2, 0}, grid);
}

}  // namespace

TEST_CASE("time_parameterize: uniform cruise produces 1001 samples, s linear") {
  const JointPath path = identity_path();
  // Synthetic constant-velocity profile (sdot = 1 across all 11 columns).
  PhaseTrajectory traj;
  traj.ds = 0.1;
  traj.rows.assign(11, 1);
  traj.sdot.assign(11, 1.0);
  traj.dt.assign(10, 0.1);
  traj.execution_time = 1.0;

  const TimedTrajectory timed = time_parameterize(traj, path, 0.001);
  CHECK(timed.sample_count() == 1001);
  for (std::size_t k = 0; k < timed.sample_count(); ++k) {
    CHECK(timed.s[k] == doctest::Approx(timed.t[k]).epsilon(1e-9));
    CHECK(timed.sdot[k] == doctest::Approx(1.0));
  }
  CHECK(timed.duration() == doctest::Approx(1.0));
}

TEST_CASE("time_parameterize: triangular profile peaks at sdot=1, t=1") {
  const PhaseTrajectory traj = triangular_trajectory();
  REQUIRE(traj.execution_time == doctest::Approx(2.0));
  const JointPath path = identity_path();
  const TimedTrajectory timed = time_parameterize(traj, path, 0.001);

  CHECK(std::fabs(timed.duration() - traj.execution_time) <= timed.dt + 1e-12);
  // sdot rises linearly to 1 at t=1, then falls linearly.
  for (std::size_t k = 0; k < timed.sample_count(); ++k) {
    const double t = timed.t[k];
    const double expected = t <= 1.0 ? t : 2.0 - t;
    CHECK(timed.sdot[k] == doctest::Approx(expected).epsilon(1e-9));
  }
  // Final sample pinned at the goal state.
  CHECK(timed.s.back() == 1.0);
  CHECK(timed.sdot.back() == 0.0);
}

TEST_CASE("time_parameterize: per-sample qd/qdd match the chain rule") {
  const JointPath path = JointPath::polynomial({{0.0, 0.7, 0.4}, {0.2, -1.1, 0.0, 0.3}});
  Constraints c;
  c.qddot_min = {-2.0, -2.0};
  c.qddot_max = {2.0, 2.0};
  const PhaseGrid grid(path, c, GridSpec{6, 5, 1.0});
  const Policy policy{0, 2, 3, 3, 2, 0};
  const TimedTrajectory timed =
      time_parameterize(policy_to_trajectory(policy, grid), path, 0.003);

  for (std::size_t k = 0; k < timed.sample_count(); ++k) {
    const PathEvaluation e = path.eval(timed.s[k]);
    for (std::size_t i = 0; i < 2; ++i) {
      const double qd = e.q_prime[i] * timed.sdot[k];
      const double qdd = e.q_prime[i] * timed.sddot[k] +
                         e.q_double_prime[i] * timed.sdot[k] * timed.sdot[k];
      REQUIRE(std::fabs(timed.qd[k * 2 + i] - qd) < 1e-9);
      REQUIRE(std::fabs(timed.qdd[k * 2 + i] - qdd) < 1e-9);
    }
  }
}

TEST_CASE("run_on_plant: pure inertia gives tau = J qdd") {
  const PlantModel plant = simple_decoupled(1.0);
  const TimedTrajectory timed = constant_qdd_trajectory(1, 50, 0.4, 1.0);
  const TorqueTrace trace = run_on_plant(plant, timed, PlantSide::true_plant);
  for (double tau : trace.tau) CHECK(tau == doctest::Approx(1.0));
}

TEST_CASE("run_on_plant: omitted Coulomb shows up as measured-vs-model gap") {
  const PlantModel plant =
      simple_decoupled(1.0, 0.0, 0.2, 0.0, MismatchSpec{1.0, 1.0, true});
  const TimedTrajectory timed = constant_qdd_trajectory(1, 20, 0.5, 1.0);
  const TorqueTrace measured = run_on_plant(plant, timed, PlantSide::true_plant);
  const TorqueTrace model = run_on_plant(plant, timed, PlantSide::nominal);
  CHECK(measured.source == TorqueTrace::Source::measured);
  CHECK(model.source == TorqueTrace::Source::model);
  for (std::size_t k = 0; k < 20; ++k) {
    CHECK(measured.tau[k] == doctest::Approx(1.2));
    CHECK(model.tau[k] == doctest::Approx(1.0));
  }
}

TEST_CASE("run_on_plant: two-link at rest with zero gravity is torque-free") {
  const PlantModel plant = PlantModel::make_two_link_planar(
      TwoLinkPlanarParams{}, {{0.0, 0.0}, {0.0, 0.0}}, no_mismatch(), 0.0, 1);
  const TimedTrajectory timed = constant_qdd_trajectory(2, 10, 0.0, 0.0);
  const TorqueTrace trace = run_on_plant(plant, timed, PlantSide::true_plant);
  for (double tau : trace.tau) CHECK(tau == 0.0);
}

TEST_CASE("two-link inverse dynamics satisfies the energy balance") {
  const PlantModel plant = PlantModel::make_two_link_planar(
      TwoLinkPlanarParams{8.0, 5.0, 0.5, 0.5, 0.0}, {{0.0, 0.0}, {0.0, 0.0}},
      no_mismatch(), 0.0, 1);

  // Smooth joint motion q(t); integrate tau . qdot and compare with the
  // kinetic-energy change.
  const auto q_of = [](double t) {
    return std::array<double, 2>{0.4 * std::sin(2.0 * t),
                                 0.3 * std::cos(3.0 * t) + 0.2 * t};
  };
  const auto qd_of = [](double t) {
    return std::array<double, 2>{0.8 * std::cos(2.0 * t),
                                 -0.9 * std::sin(3.0 * t) + 0.2};
  };
  const auto qdd_of = [](double t) {
    return std::array<double, 2>{-1.6 * std::sin(2.0 * t), -2.7 * std::cos(3.0 * t)};
  };

  const auto kinetic = [&](double t) {
    const auto q = q_of(t);
    const auto qd = qd_of(t);
    // M qd via inverse dynamics with qdd := qd, qdotv := 0 (no C, G terms).
    std::array<double, 2> m_qd{};
    const std::array<double, 2> zero{0.0, 0.0};
    plant.inverse_dynamics(PlantSide::true_plant, q, zero, qd, m_qd);
    return 0.5 * (qd[0] * m_qd[0] + qd[1] * m_qd[1]);
  };

  const double t0 = 0.1, t1 = 0.9;
  const std::size_t steps = 40000;
  const double dt = (t1 - t0) / static_cast<double>(steps);
  double work = 0.0;
  std::array<double, 2> tau{};
  double prev_power = 0.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    plant.inverse_dynamics(PlantSide::true_plant, q_of(t), qd_of(t), qdd_of(t), tau);
    const auto qd = qd_of(t);
    const double power = tau[0] * qd[0] + tau[1] * qd[1];
    if (k > 0) work += 0.5 * (prev_power + power) * dt;
    prev_power = power;
  }
  const double dke = kinetic(t1) - kinetic(t0);
  CHECK(std::fabs(work - dke) / std::max(1.0, std::fabs(dke)) < 1e-4);
}

TEST_CASE("mismatch 1.0 with zero noise: measured and model traces identical") {
  const PlantModel plant = PlantModel::make_two_link_planar(
      TwoLinkPlanarParams{8.0, 5.0, 0.5, 0.5, 0.0}, {{0.4, 0.4}, {0.3, 0.3}},
      no_mismatch(), 0.0, 9);
  const TimedTrajectory timed = constant_qdd_trajectory(2, 30, 0.7, 0.9);
  const TorqueTrace a = run_on_plant(plant, timed, PlantSide::true_plant);
  const TorqueTrace b = run_on_plant(plant, timed, PlantSide::nominal);
  REQUIRE(a.tau.size() == b.tau.size());
  for (std::size_t i = 0; i < a.tau.size(); ++i) REQUIRE(a.tau[i] == b.tau[i]);
}

TEST_CASE("sensor noise is seeded and reproducible") {
  const PlantModel plant =
      simple_decoupled(1.0, 0.0, 0.0, 0.0, no_mismatch(), 0.05, 77);
  const TimedTrajectory timed = constant_qdd_trajectory(1, 100, 0.3, 1.0);
  const TorqueTrace a = run_on_plant(plant, timed, PlantSide::true_plant);
  const TorqueTrace b = run_on_plant(plant, timed, PlantSide::true_plant);
  REQUIRE(a.tau == b.tau);

  const PlantModel other =
      simple_decoupled(1.0, 0.0, 0.0, 0.0, no_mismatch(), 0.05, 78);
  const TorqueTrace c = run_on_plant(other, timed, PlantSide::true_plant);
  CHECK(a.tau != c.tau);
  double mean = 0.0;
  for (double tau : a.tau) mean += tau - 1.0;
  mean /= static_cast<double>(a.tau.size());
  CHECK(std::fabs(mean) < 0.05);
}

TEST_CASE("check_torque_limits: strict inequality and located samples") {
  Constraints c;
  c.qddot_min = {-1.0};
  c.qddot_max = {1.0};
  c.tau_min = {-1.0};
  c.tau_max = {1.0};

  TorqueTrace trace;
  trace.n_joints = 1;
  trace.t = {0.0, 0.001, 0.002, 0.003, 0.004};
  trace.s = {0.0, 0.1, 0.2, 0.3, 0.4};
  trace.sdot = {0.0, 0.5, 0.6, 0.7, 0.8};
  trace.tau = {0.5, 1.0, 1.5, -1.2, 0.9};  // exactly at the limit is compliant

  const auto violations = check_torque_limits(trace, c);
  REQUIRE(violations.size() == 2);
  CHECK(violations[0].t == 0.002);
  CHECK(violations[0].joint == 0);
  CHECK(violations[0].tau == 1.5);
  CHECK(violations[0].s == 0.2);
  CHECK(violations[0].sdot == 0.6);
  CHECK(violations[1].t == 0.003);
  CHECK(violations[1].tau == -1.2);
}

TEST_CASE("check_torque_limits: compliant trace yields an empty list") {
  Constraints c;
  c.qddot_min = {-1.0};
  c.qddot_max = {1.0};
  c.tau_min = {-2.0};
  c.tau_max = {2.0};
  const PlantModel plant = simple_decoupled(1.0);
  const TimedTrajectory timed = constant_qdd_trajectory(1, 25, 0.2, 1.0);
  const TorqueTrace trace = run_on_plant(plant, timed, PlantSide::true_plant);
  CHECK(check_torque_limits(trace, c).empty());
}

TEST_CASE("timed duration differs from trajectory T by at most dt") {
  const JointPath path = JointPath::polynomial({{0.0, 1.0, -0.2}});
  const PhaseGrid grid(path, unit_limits(), GridSpec{9, 7, 1.0});
  const Policy policy{0, 2, 3, 4, 4, 3, 2, 1, 0};
  const PhaseTrajectory traj = policy_to_trajectory(policy, grid);
  for (double dt : {0.001, 0.0007, 0.01}) {
    const TimedTrajectory timed = time_parameterize(traj, path, dt);
    CHECK(std::fabs(timed.duration() - traj.execution_time) <= dt + 1e-12);
    CHECK(timed.s.back() == 1.0);
    CHECK(timed.sdot.back() == 0.0);
  }
}
