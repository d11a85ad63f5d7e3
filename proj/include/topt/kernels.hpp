#pragma once

#include <cstddef>
#include <cstdint>

namespace topt::kernels {

/// One joint's contribution to the pseudo-acceleration interval at a fixed
/// path position: first/second path derivatives and the joint's acceleration
/// limits.
struct JointProjection {
  double q_prime;
  double q_double_prime;
  double qddot_min;
  double qddot_max;
};

/// Magnitude below which q' is treated as zero (the joint then constrains
/// state feasibility directly instead of bounding sddot).
inline constexpr double kZeroQPrime = 1e-12;

/// Intersects the per-joint sddot intervals for a batch of states sharing one
/// path position. sdot_sq[i] is the squared pseudo-velocity of state i.
/// Writes lo/hi (the interval) and feasible (interval nonempty AND no
/// zero-q'-joint violated its own acceleration limit).
///
/// All variants perform the identical sequence of IEEE operations per
/// element, so outputs are bit-equal across scalar and SIMD paths.
using RowBoundsFn = void (*)(const JointProjection* joints, std::size_t n_joints,
                             const double* sdot_sq, std::size_t count,
                             double* lo, double* hi, std::uint8_t* feasible);

/// Relaxes one DP source state into a band of target rows in the next column:
///   candidate = src_cost + two_ds / (src_sdot + tgt_sdot[i])
/// and where candidate < cost[i], stores candidate and parent_row. Strict
/// less-than: on ties the incumbent wins.
using DpRelaxFn = void (*)(double src_cost, double src_sdot, double two_ds,
                           const double* tgt_sdot, std::size_t count,
                           double* cost, double* parent, double parent_row);

/// Per-joint decoupled inverse dynamics over contiguous per-sample arrays:
///   tau[i] = inertia*qdd[i] + viscous*qd[i] + coulomb*sgn(qd[i])
///            + coupling*(qdd_sum[i] - qdd[i])
/// qdd_sum is the per-sample sum of accelerations over all joints.
using DecoupledTauFn = void (*)(double inertia, double viscous, double coulomb,
                                double coupling, const double* qd, const double* qdd,
                                const double* qdd_sum, std::size_t count, double* tau);

struct KernelTable {
  RowBoundsFn row_bounds;
  DpRelaxFn dp_relax;
  DecoupledTauFn decoupled_tau;
  const char* name;
};

/// Scalar reference kernels. Always available.
const KernelTable& scalar_table();

/// AVX2 kernels, or nullptr when unsupported (non-x86 build or CPU without
/// AVX2).
const KernelTable* avx2_table();

/// Active table: AVX2 when the CPU supports it, scalar otherwise. The
/// TOPT_KERNELS environment variable ("scalar" or "avx2") overrides.
const KernelTable& active();

}  // namespace topt::kernels
