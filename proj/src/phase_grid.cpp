#include "topt/phase_grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "topt/kernels.hpp"

namespace topt {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

std::vector<kernels::JointProjection> make_projections(const PathEvaluation& eval,
                                                       const Constraints& c) {
  std::vector<kernels::JointProjection> joints(eval.q_prime.size());
  for (std::size_t i = 0; i < joints.size(); ++i) {
    joints[i] = {eval.q_prime[i], eval.q_double_prime[i], c.qddot_min[i],
                 c.qddot_max[i]};
  }
  return joints;
}

}  // namespace

void Constraints::validate(std::size_t n_joints) const {
  require(qddot_min.size() == n_joints && qddot_max.size() == n_joints,
          "constraints: qddot_min/qddot_max must have one entry per joint");
  for (std::size_t i = 0; i < n_joints; ++i) {
    require(qddot_min[i] < 0.0 && qddot_max[i] > 0.0,
            "constraints: qddot limits must straddle zero (joint " +
                std::to_string(i) + ")");
  }
  require(qdot_max.empty() || qdot_max.size() == n_joints,
          "constraints: qdot_max must be empty or one entry per joint");
  for (double v : qdot_max)
    require(v > 0.0, "constraints: qdot_max entries must be positive");
  require(tau_min.size() == tau_max.size(),
          "constraints: tau_min/tau_max must have matching lengths");
  require(tau_min.empty() || tau_min.size() == n_joints,
          "constraints: torque limits must be empty or one entry per joint");
  for (std::size_t i = 0; i < tau_min.size(); ++i) {
    require(tau_min[i] < 0.0 && tau_max[i] > 0.0,
            "constraints: torque limits must straddle zero (joint " +
                std::to_string(i) + ")");
  }
}

void GridSpec::validate() const {
  require(n_s >= 3, "grid: N must be >= 3");
  require(n_sdot >= 2, "grid: M must be >= 2");
  require(sdot_ceiling > 0.0, "grid: sdot_ceiling must be positive");
}

AccelBounds accel_bounds(const JointPath& path, const Constraints& constraints,
                         double s, double sdot) {
  if (!(sdot >= 0.0)) throw std::domain_error("accel_bounds: sdot must be >= 0");
  const PathEvaluation eval = path.eval(s);
  const auto joints = make_projections(eval, constraints);

  const double sdot_sq = sdot * sdot;
  AccelBounds out;
  std::uint8_t ok = 0;
  kernels::active().row_bounds(joints.data(), joints.size(), &sdot_sq, 1,
                               &out.sddot_min, &out.sddot_max, &ok);
  out.zero_direction_violation = (ok == 0) && !(out.sddot_min > out.sddot_max);
  return out;
}

double compute_sdot_ceiling(const JointPath& path, const Constraints& constraints,
                            double headroom) {
  require(!constraints.qdot_max.empty(),
          "constraints: qdot_max required to derive the sdot ceiling (or set an "
          "explicit ceiling)");
  require(headroom >= 1.0, "grid: ceiling headroom must be >= 1");

  constexpr std::size_t kSamples = 1000;
  double best = std::numeric_limits<double>::infinity();
  PathEvaluation eval;
  for (std::size_t k = 0; k < kSamples; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(kSamples - 1);
    path.eval_into(s, eval);
    for (std::size_t i = 0; i < eval.q_prime.size(); ++i) {
      const double qp = std::fabs(eval.q_prime[i]);
      if (qp > 1e-9) best = std::min(best, constraints.qdot_max[i] / qp);
    }
  }
  require(std::isfinite(best),
          "path never moves: cannot derive an sdot ceiling from qdot_max");
  return best * headroom;
}

PhaseGrid::PhaseGrid(const JointPath& path, Constraints constraints, GridSpec spec)
    : path_(&path), constraints_(std::move(constraints)), spec_(spec) {
  spec_.validate();
  constraints_.validate(path.joint_count());
  ds_ = spec_.ds();
  dsdot_ = spec_.dsdot();

  const std::size_t n = spec_.n_s;
  const std::size_t m = spec_.n_sdot;
  sdot_values_.resize(m);
  sdot_squares_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    sdot_values_[i] = static_cast<double>(i) * dsdot_;
    sdot_squares_[i] = sdot_values_[i] * sdot_values_[i];
  }

  feasible_.assign(n * m, 0);
  bounds_ok_.assign(n * m, 0);
  lo_.assign(n * m, 0.0);
  hi_.assign(n * m, 0.0);

  const kernels::KernelTable& kt = kernels::active();
  PathEvaluation eval;
  for (std::size_t j = 0; j < n; ++j) {
    path.eval_into(s_value(static_cast<std::uint32_t>(j)), eval);
    const auto joints = make_projections(eval, constraints_);
    const std::size_t base = j * m;
    kt.row_bounds(joints.data(), joints.size(), sdot_squares_.data(), m,
                  lo_.data() + base, hi_.data() + base, bounds_ok_.data() + base);
  }
  feasible_ = bounds_ok_;

  // Everything on the s = 1 line except (1, 0) is infeasible.
  for (std::size_t i = 1; i < m; ++i) feasible_[(n - 1) * m + i] = 0;

  require(feasible({0, 0}),
          "grid: start state (0,0) infeasible under the given constraints");
  require(feasible({static_cast<std::uint32_t>(n - 1), 0}),
          "grid: goal state (1,0) infeasible under the given constraints");
}

AccelBounds PhaseGrid::bounds_at(PhaseState st) const {
  const std::size_t idx = index(st);
  AccelBounds out{lo_[idx], hi_[idx], false};
  out.zero_direction_violation =
      (bounds_ok_[idx] == 0) && !(out.sddot_min > out.sddot_max);
  return out;
}

ActionBand PhaseGrid::action_range(PhaseState st) const {
  ActionBand empty_band{};
  if (st.j + 1 >= spec_.n_s) return empty_band;
  const std::size_t idx = index(st);
  if (bounds_ok_[idx] == 0) return empty_band;

  const double lo = lo_[idx];
  const double hi = hi_[idx];
  const double sd_sq = sdot_squares_[st.m];
  const double two_ds = 2.0 * ds_;
  const std::int64_t last = static_cast<std::int64_t>(spec_.n_sdot) - 1;

  // Canonical membership test: the constant-acceleration transition into row
  // mp must keep sddot within [lo, hi].
  const auto in_band = [&](std::int64_t mp) {
    const double sddot = (sdot_squares_[static_cast<std::size_t>(mp)] - sd_sq) / two_ds;
    return lo <= sddot && sddot <= hi;
  };

  const double t_lo = sd_sq + two_ds * lo;
  const double t_hi = sd_sq + two_ds * hi;
  if (t_hi < 0.0) return empty_band;

  const auto row_guess = [&](double target_sq) -> std::int64_t {
    if (!(target_sq > 0.0)) return 0;
    const double r = std::sqrt(target_sq) / dsdot_;
    if (r >= static_cast<double>(last)) return last;
    return static_cast<std::int64_t>(r);
  };

  // Lower edge: first row in band.
  std::int64_t mlo = row_guess(t_lo);
  while (mlo > 0 && in_band(mlo - 1)) --mlo;
  while (mlo <= last && !in_band(mlo)) ++mlo;
  if (mlo > last) return empty_band;

  // Upper edge: last row in band.
  std::int64_t mhi = row_guess(t_hi);
  while (mhi < last && in_band(mhi + 1)) ++mhi;
  while (mhi >= mlo && !in_band(mhi)) --mhi;

  if (st.m == 0 && mlo == 0) mlo = 1;  // zero-motion transition excluded
  if (mlo > mhi) return empty_band;
  return ActionBand{static_cast<std::uint32_t>(mlo), static_cast<std::uint32_t>(mhi)};
}

std::vector<PhaseState> PhaseGrid::mark_infeasible(std::span<const PhaseState> states) {
  std::vector<PhaseState> newly;
  const PhaseState goal{static_cast<std::uint32_t>(spec_.n_s - 1), 0};
  for (const PhaseState& st : states) {
    if (st.j >= spec_.n_s || st.m >= spec_.n_sdot) continue;
    if ((st == PhaseState{0, 0}) || st == goal) continue;
    std::uint8_t& cell = feasible_[index(st)];
    if (cell != 0) {
      cell = 0;
      newly.push_back(st);
    }
  }
  return newly;
}

std::size_t PhaseGrid::feasible_count() const {
  std::size_t count = 0;
  for (std::uint8_t f : feasible_) count += f;
  return count;
}

PhaseGrid build_grid(const JointPath& path, Constraints constraints, GridSpec spec) {
  return PhaseGrid(path, std::move(constraints), spec);
}

}  // namespace topt
