// AVX2 variants of the arithmetic kernels. Each loop body performs the same
// IEEE operation sequence as the scalar reference, including the compare+blend
// accumulation (instead of min/max instructions, whose +-0 handling differs),
// so results are bit-identical lane by lane.

#include "topt/kernels.hpp"

#if defined(TOPT_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace topt::kernels {

namespace {

void row_bounds_avx2(const JointProjection* joints, std::size_t n_joints,
                     const double* sdot_sq, std::size_t count,
                     double* lo, double* hi, std::uint8_t* feasible) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const __m256d all_ones = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));

  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    __m256d vlo = _mm256_set1_pd(-kInf);
    __m256d vhi = _mm256_set1_pd(kInf);
    __m256d vok = all_ones;
    const __m256d sq = _mm256_loadu_pd(sdot_sq + i);

    for (std::size_t jt = 0; jt < n_joints; ++jt) {
      const JointProjection& p = joints[jt];
      const __m256d qpp = _mm256_set1_pd(p.q_double_prime);
      if (std::fabs(p.q_prime) <= kZeroQPrime) {
        const __m256d accel = _mm256_mul_pd(qpp, sq);
        const __m256d bad = _mm256_or_pd(
            _mm256_cmp_pd(accel, _mm256_set1_pd(p.qddot_min), _CMP_LT_OQ),
            _mm256_cmp_pd(accel, _mm256_set1_pd(p.qddot_max), _CMP_GT_OQ));
        vok = _mm256_andnot_pd(bad, vok);
        continue;
      }
      const __m256d qp = _mm256_set1_pd(p.q_prime);
      const __m256d num_min =
          _mm256_sub_pd(_mm256_set1_pd(p.qddot_min), _mm256_mul_pd(qpp, sq));
      const __m256d num_max =
          _mm256_sub_pd(_mm256_set1_pd(p.qddot_max), _mm256_mul_pd(qpp, sq));
      const __m256d a = _mm256_div_pd(num_min, qp);
      const __m256d b = _mm256_div_pd(num_max, qp);
      const __m256d joint_lo = p.q_prime > 0.0 ? a : b;
      const __m256d joint_hi = p.q_prime > 0.0 ? b : a;
      vlo = _mm256_blendv_pd(vlo, joint_lo, _mm256_cmp_pd(joint_lo, vlo, _CMP_GT_OQ));
      vhi = _mm256_blendv_pd(vhi, joint_hi, _mm256_cmp_pd(joint_hi, vhi, _CMP_LT_OQ));
    }

    vok = _mm256_andnot_pd(_mm256_cmp_pd(vlo, vhi, _CMP_GT_OQ), vok);
    _mm256_storeu_pd(lo + i, vlo);
    _mm256_storeu_pd(hi + i, vhi);
    const int mask = _mm256_movemask_pd(vok);
    feasible[i + 0] = static_cast<std::uint8_t>((mask >> 0) & 1);
    feasible[i + 1] = static_cast<std::uint8_t>((mask >> 1) & 1);
    feasible[i + 2] = static_cast<std::uint8_t>((mask >> 2) & 1);
    feasible[i + 3] = static_cast<std::uint8_t>((mask >> 3) & 1);
  }
  if (i < count) {
    scalar_table().row_bounds(joints, n_joints, sdot_sq + i, count - i, lo + i,
                              hi + i, feasible + i);
  }
}

void dp_relax_avx2(double src_cost, double src_sdot, double two_ds,
                   const double* tgt_sdot, std::size_t count,
                   double* cost, double* parent, double parent_row) {
  const __m256d vsrc_cost = _mm256_set1_pd(src_cost);
  const __m256d vsrc_sdot = _mm256_set1_pd(src_sdot);
  const __m256d vtwo_ds = _mm256_set1_pd(two_ds);
  const __m256d vparent = _mm256_set1_pd(parent_row);

  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d tgt = _mm256_loadu_pd(tgt_sdot + i);
    const __m256d candidate = _mm256_add_pd(
        vsrc_cost, _mm256_div_pd(vtwo_ds, _mm256_add_pd(vsrc_sdot, tgt)));
    const __m256d old_cost = _mm256_loadu_pd(cost + i);
    const __m256d better = _mm256_cmp_pd(candidate, old_cost, _CMP_LT_OQ);
    _mm256_storeu_pd(cost + i, _mm256_blendv_pd(old_cost, candidate, better));
    const __m256d old_parent = _mm256_loadu_pd(parent + i);
    _mm256_storeu_pd(parent + i, _mm256_blendv_pd(old_parent, vparent, better));
  }
  if (i < count) {
    scalar_table().dp_relax(src_cost, src_sdot, two_ds, tgt_sdot + i, count - i,
                            cost + i, parent + i, parent_row);
  }
}

void decoupled_tau_avx2(double inertia, double viscous, double coulomb,
                        double coupling, const double* qd, const double* qdd,
                        const double* qdd_sum, std::size_t count, double* tau) {
  const __m256d vin = _mm256_set1_pd(inertia);
  const __m256d vvis = _mm256_set1_pd(viscous);
  const __m256d vcol = _mm256_set1_pd(coulomb);
  const __m256d vncol = _mm256_set1_pd(-coulomb);
  const __m256d vcpl = _mm256_set1_pd(coupling);
  const __m256d zero = _mm256_setzero_pd();

  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d vqd = _mm256_loadu_pd(qd + i);
    const __m256d vqdd = _mm256_loadu_pd(qdd + i);
    const __m256d vsum = _mm256_loadu_pd(qdd_sum + i);
    const __m256d pos = _mm256_and_pd(_mm256_cmp_pd(vqd, zero, _CMP_GT_OQ), vcol);
    const __m256d neg = _mm256_and_pd(_mm256_cmp_pd(vqd, zero, _CMP_LT_OQ), vncol);
    const __m256d friction = _mm256_add_pd(pos, neg);
    __m256d t = _mm256_mul_pd(vin, vqdd);
    t = _mm256_add_pd(t, _mm256_mul_pd(vvis, vqd));
    t = _mm256_add_pd(t, friction);
    t = _mm256_add_pd(t, _mm256_mul_pd(vcpl, _mm256_sub_pd(vsum, vqdd)));
    _mm256_storeu_pd(tau + i, t);
  }
  if (i < count) {
    scalar_table().decoupled_tau(inertia, viscous, coulomb, coupling, qd + i,
                                 qdd + i, qdd_sum + i, count - i, tau + i);
  }
}

const KernelTable kAvx2Table{row_bounds_avx2, dp_relax_avx2, decoupled_tau_avx2,
                             "avx2"};

}  // namespace

const KernelTable* avx2_table() {
  return __builtin_cpu_supports("avx2") ? &kAvx2Table : nullptr;
}

}  // namespace topt::kernels

#endif  // TOPT_HAVE_AVX2
