#include "topt/oracle.hpp"

#include <cmath>
#include <limits>

#include "topt/kernels.hpp"

namespace topt {

OracleResult dp_oracle(const PhaseGrid& grid) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::size_t n = grid.spec().n_s;
  const std::size_t m_count = grid.spec().n_sdot;
  const double two_ds = 2.0 * grid.spec().ds();
  const kernels::KernelTable& kt = kernels::active();

  std::vector<double> sdot(m_count);
  for (std::size_t m = 0; m < m_count; ++m)
    sdot[m] = grid.sdot_value(static_cast<std::uint32_t>(m));

  std::vector<double> cur(m_count, kInf), nxt(m_count);
  std::vector<double> parent(n * m_count, -1.0);
  cur[0] = 0.0;

  OracleResult result;
  result.visited_states = 1;

  for (std::uint32_t j = 0; j + 1 < n; ++j) {
    std::fill(nxt.begin(), nxt.end(), kInf);
    double* parent_col = parent.data() + static_cast<std::size_t>(j + 1) * m_count;
    // Descending source rows + strict-< relaxation: cost ties keep the larger
    // parent row.
    for (std::size_t m = m_count; m-- > 0;) {
      const std::uint32_t mu = static_cast<std::uint32_t>(m);
      if (cur[m] == kInf || !grid.feasible({j, mu})) continue;
      const ActionBand band = grid.action_range({j, mu});
      if (band.empty()) continue;
      kt.dp_relax(cur[m], sdot[m], two_ds, sdot.data() + band.lo, band.size(),
                  nxt.data() + band.lo, parent_col + band.lo,
                  static_cast<double>(m));
    }
    for (std::size_t m = 0; m < m_count; ++m) {
      if (!grid.feasible({j + 1, static_cast<std::uint32_t>(m)})) nxt[m] = kInf;
      if (nxt[m] != kInf) ++result.visited_states;
    }
    cur.swap(nxt);
  }

  if (cur[0] == kInf) return result;

  result.optimal_time = cur[0];
  Policy rows(n, 0);
  for (std::size_t j = n - 1; j > 0; --j) {
    const double p = parent[j * m_count + rows[j]];
    rows[j - 1] = static_cast<std::uint32_t>(p);
  }
  // policy_to_trajectory re-sums the same segment times in path order, so its
  // execution_time reproduces the DP cost bit for bit.
  result.trajectory = policy_to_trajectory(rows, grid);
  return result;
}

}  // namespace topt
