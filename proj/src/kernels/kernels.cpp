#include "topt/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>

namespace topt::kernels {

namespace {

void row_bounds_scalar(const JointProjection* joints, std::size_t n_joints,
                       const double* sdot_sq, std::size_t count,
                       double* lo, double* hi, std::uint8_t* feasible) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    lo[i] = -kInf;
    hi[i] = kInf;
    feasible[i] = 1;
  }
  for (std::size_t jt = 0; jt < n_joints; ++jt) {
    const JointProjection& p = joints[jt];
    if (std::fabs(p.q_prime) <= kZeroQPrime) {
      // No sddot bound from this joint; the state itself is infeasible when
      // q'' sdot^2 falls outside the joint's acceleration limits.
      for (std::size_t i = 0; i < count; ++i) {
        const double accel = p.q_double_prime * sdot_sq[i];
        if (accel < p.qddot_min || accel > p.qddot_max) feasible[i] = 0;
      }
      continue;
    }
    for (std::size_t i = 0; i < count; ++i) {
      const double num_min = p.qddot_min - p.q_double_prime * sdot_sq[i];
      const double num_max = p.qddot_max - p.q_double_prime * sdot_sq[i];
      const double a = num_min / p.q_prime;
      const double b = num_max / p.q_prime;
      const double joint_lo = p.q_prime > 0.0 ? a : b;
      const double joint_hi = p.q_prime > 0.0 ? b : a;
      if (joint_lo > lo[i]) lo[i] = joint_lo;
      if (joint_hi < hi[i]) hi[i] = joint_hi;
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (lo[i] > hi[i]) feasible[i] = 0;
  }
}

void dp_relax_scalar(double src_cost, double src_sdot, double two_ds,
                     const double* tgt_sdot, std::size_t count,
                     double* cost, double* parent, double parent_row) {
  for (std::size_t i = 0; i < count; ++i) {
    const double candidate = src_cost + two_ds / (src_sdot + tgt_sdot[i]);
    if (candidate < cost[i]) {
      cost[i] = candidate;
      parent[i] = parent_row;
    }
  }
}

void decoupled_tau_scalar(double inertia, double viscous, double coulomb,
                          double coupling, const double* qd, const double* qdd,
                          const double* qdd_sum, std::size_t count, double* tau) {
  for (std::size_t i = 0; i < count; ++i) {
    const double friction =
        (qd[i] > 0.0 ? coulomb : 0.0) + (qd[i] < 0.0 ? -coulomb : 0.0);
    double t = inertia * qdd[i];
    t = t + viscous * qd[i];
    t = t + friction;
    t = t + coupling * (qdd_sum[i] - qdd[i]);
    tau[i] = t;
  }
}

const KernelTable kScalarTable{row_bounds_scalar, dp_relax_scalar,
                               decoupled_tau_scalar, "scalar"};

const KernelTable* pick_active() {
  const char* override_name = std::getenv("TOPT_KERNELS");
  if (override_name != nullptr) {
    if (std::strcmp(override_name, "scalar") == 0) return &kScalarTable;
    if (std::strcmp(override_name, "avx2") == 0 && avx2_table() != nullptr)
      return avx2_table();
  }
  if (const KernelTable* simd = avx2_table()) return simd;
  return &kScalarTable;
}

}  // namespace

const KernelTable& scalar_table() { return kScalarTable; }

#if !defined(TOPT_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif

const KernelTable& active() {
  static const KernelTable* table = pick_active();
  return *table;
}

}  // namespace topt::kernels
