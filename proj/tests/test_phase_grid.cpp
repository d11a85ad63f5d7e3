#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "topt/phase_grid.hpp"
#include "topt/rng.hpp"

using namespace topt;

namespace {

Constraints single_joint_unit_limits() {
  Constraints c;
  c.qddot_min = {-1.0};
  c.qddot_max = {1.0};
  return c;
}

JointPath identity_path() { return JointPath::polynomial({{0.0, 1.0}}); }

}  // namespace

TEST_CASE("accel_bounds: single joint q(s)=s gives the raw limits") {
  const JointPath path = identity_path();
  const Constraints c = single_joint_unit_limits();
  for (double sdot : {0.0, 0.3, 2.0}) {
    const AccelBounds b = accel_bounds(path, c, 0.5, sdot);
    CHECK(b.sddot_min == -1.0);
    CHECK(b.sddot_max == 1.0);
    CHECK_FALSE(b.empty());
  }
}

TEST_CASE("accel_bounds: q(s)=s^2 matches the projected-interval arithmetic") {
  // Independent check: direct evaluation of the per-joint interval formula
  // with q'=1, q''=2 at s=0.5, sdot=0.5.
  const JointPath path = JointPath::polynomial({{0.0, 0.0, 1.0}});
  const Constraints c = single_joint_unit_limits();
  const AccelBounds b = accel_bounds(path, c, 0.5, 0.5);
  const double expected_lo = (-1.0 - 2.0 * 0.25) / 1.0;
  const double expected_hi = (1.0 - 2.0 * 0.25) / 1.0;
  CHECK(b.sddot_min == doctest::Approx(expected_lo));
  CHECK(b.sddot_max == doctest::Approx(expected_hi));
  CHECK(b.sddot_min == doctest::Approx(-1.5));
  CHECK(b.sddot_max == doctest::Approx(0.5));
}

TEST_CASE("accel_bounds: antisymmetric two-joint path keeps the same interval") {
  const JointPath path = JointPath::polynomial({{0.0, 1.0}, {0.0, -1.0}});
  Constraints c;
  c.qddot_min = {-1.0, -1.0};
  c.qddot_max = {1.0, 1.0};
  const AccelBounds b = accel_bounds(path, c, 0.25, 0.7);
  CHECK(b.sddot_min == -1.0);
  CHECK(b.sddot_max == 1.0);
}

TEST_CASE("accel_bounds: negative sdot rejected") {
  const JointPath path = identity_path();
  CHECK_THROWS_AS(accel_bounds(path, single_joint_unit_limits(), 0.5, -0.1),
                  std::domain_error);
}

TEST_CASE("compute_sdot_ceiling") {
  SUBCASE("constant q' = 1") {
    const JointPath path = identity_path();
    Constraints c = single_joint_unit_limits();
    c.qdot_max = {2.0};
    CHECK(compute_sdot_ceiling(path, c, 1.0) == doctest::Approx(2.0));
  }
  SUBCASE("q' = 2 halves the ceiling") {
    const JointPath path = JointPath::polynomial({{0.0, 2.0}});
    Constraints c = single_joint_unit_limits();
    c.qdot_max = {2.0};
    CHECK(compute_sdot_ceiling(path, c, 1.0) == doctest::Approx(1.0));
  }
  SUBCASE("binding joint wins") {
    const JointPath path = JointPath::polynomial({{0.0, 1.0}, {0.0, 3.0}});
    Constraints c;
    c.qddot_min = {-1.0, -1.0};
    c.qddot_max = {1.0, 1.0};
    c.qdot_max = {2.0, 2.0};
    CHECK(compute_sdot_ceiling(path, c, 1.0) == doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("headroom scales the ceiling") {
    const JointPath path = identity_path();
    Constraints c = single_joint_unit_limits();
    c.qdot_max = {2.0};
    CHECK(compute_sdot_ceiling(path, c, 1.25) == doctest::Approx(2.5));
  }
  SUBCASE("missing qdot_max is a configuration error") {
    const JointPath path = identity_path();
    CHECK_THROWS_AS(compute_sdot_ceiling(path, single_joint_unit_limits(), 1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("build_grid: terminal column rule") {
  const JointPath path = identity_path();
  const PhaseGrid grid(path, single_joint_unit_limits(), GridSpec{5, 4, 1.0});
  const auto n = static_cast<std::uint32_t>(grid.spec().n_s);
  CHECK(grid.feasible({n - 1, 0}));
  for (std::uint32_t m = 1; m < grid.spec().n_sdot; ++m)
    CHECK_FALSE(grid.feasible({n - 1, m}));
  // generous limits: interior fully feasible
  for (std::uint32_t j = 0; j + 1 < n; ++j)
    for (std::uint32_t m = 0; m < grid.spec().n_sdot; ++m)
      CHECK(grid.feasible({j, m}));
}

TEST_CASE("build_grid: infeasible top row when the ceiling is huge") {
  // q'' = 2 and a ceiling so large that row 1 violates the accel interval of
  // the curvature-heavy path everywhere except where q'' sdot^2 fits.
  const JointPath path = JointPath::polynomial({{0.0, 0.0, 1.0}});
  const Constraints c = single_joint_unit_limits();
  const GridSpec spec{3, 2, 100.0};
  const PhaseGrid grid(path, c, spec);
  // Row 1 (sdot = 100): per-state oracle re-evaluation must agree.
  for (std::uint32_t j = 0; j + 1 < 3; ++j) {
    const AccelBounds b =
        accel_bounds(path, c, grid.s_value(j), grid.sdot_value(1));
    CHECK(grid.feasible({j, 1}) == !b.empty());
  }
  CHECK(grid.feasible({0, 0}));
  CHECK(grid.feasible({2, 0}));
}

TEST_CASE("build_grid: mask equals per-state accel_bounds recomputation") {
  Rng rng(7);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<std::vector<double>> coeffs;
    const std::size_t nj = 1 + rng.uniform_index(3);
    for (std::size_t i = 0; i < nj; ++i) {
      coeffs.push_back({rng.uniform01(), 0.2 + rng.uniform01(),
                        (rng.uniform01() - 0.5) * 2.0,
                        (rng.uniform01() - 0.5)});
    }
    const JointPath path = JointPath::polynomial(coeffs);
    Constraints c;
    for (std::size_t i = 0; i < nj; ++i) {
      c.qddot_min.push_back(-(0.5 + rng.uniform01()));
      c.qddot_max.push_back(0.5 + rng.uniform01());
    }
    const GridSpec spec{3 + rng.uniform_index(48), 2 + rng.uniform_index(49),
                        0.2 + 2.0 * rng.uniform01()};
    const PhaseGrid grid(path, c, spec);
    const auto n = static_cast<std::uint32_t>(spec.n_s);
    for (std::uint32_t j = 0; j < n; ++j) {
      for (std::uint32_t m = 0; m < spec.n_sdot; ++m) {
        const AccelBounds b =
            accel_bounds(path, c, grid.s_value(j), grid.sdot_value(m));
        const bool expected = (j == n - 1) ? (m == 0 && !b.empty()) : !b.empty();
        REQUIRE(grid.feasible({j, m}) == expected);
        const AccelBounds stored = grid.bounds_at({j, m});
        REQUIRE(stored.sddot_min == b.sddot_min);
        REQUIRE(stored.sddot_max == b.sddot_max);
      }
    }
  }
}

TEST_CASE("action_range: hand-enumerated bands on the 3x3 grid") {
  // N=3, M=3, ds=0.5, ceiling 1 (rows 0, 0.5, 1), q(s)=s, limits +-1.
  const JointPath path = identity_path();
  const PhaseGrid grid(path, single_joint_unit_limits(), GridSpec{3, 3, 1.0});

  SUBCASE("state (0,0): next sdot^2 within [0, 1] minus the zero action") {
    const ActionBand band = grid.action_range({0, 0});
    CHECK(band.lo == 1);
    CHECK(band.hi == 2);
  }
  SUBCASE("state (1,2): sdot=1, next sdot^2 within [0, 2]") {
    const ActionBand band = grid.action_range({1, 2});
    CHECK(band.lo == 0);
    CHECK(band.hi == 2);
  }
  SUBCASE("empty accel interval yields an empty band") {
    const JointPath curved = JointPath::polynomial({{0.0, 0.0, 1.0}});
    const PhaseGrid g2(curved, single_joint_unit_limits(), GridSpec{3, 2, 10.0});
    // At sdot=10, q''*sdot^2 = 200 swamps the +-1 limits: interval empty.
    CHECK(g2.bounds_at({0, 1}).empty());
    CHECK(g2.action_range({0, 1}).empty());
  }
}

TEST_CASE("action_range: every returned action satisfies the accel interval") {
  Rng rng(99);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<std::vector<double>> coeffs{
        {0.0, 0.5 + rng.uniform01(), (rng.uniform01() - 0.5)}};
    const JointPath path = JointPath::polynomial(coeffs);
    Constraints c = single_joint_unit_limits();
    const GridSpec spec{3 + rng.uniform_index(30), 2 + rng.uniform_index(40),
                        0.3 + rng.uniform01()};
    const PhaseGrid grid(path, c, spec);
    const double two_ds = 2.0 * spec.ds();
    for (std::uint32_t j = 0; j + 1 < spec.n_s; ++j) {
      for (std::uint32_t m = 0; m < spec.n_sdot; ++m) {
        const PhaseState st{j, m};
        if (!grid.feasible(st)) continue;
        const ActionBand band = grid.action_range(st);
        const AccelBounds b = grid.bounds_at(st);
        const double sd = grid.sdot_value(m);
        for (std::uint32_t mp = band.lo; !band.empty() && mp <= band.hi; ++mp) {
          const double sdn = grid.sdot_value(mp);
          const double sddot = (sdn * sdn - sd * sd) / two_ds;
          REQUIRE(sddot >= b.sddot_min - 1e-12);
          REQUIRE(sddot <= b.sddot_max + 1e-12);
        }
        // Band edges are tight: the rows just outside fail the interval test.
        if (!band.empty()) {
          if (band.lo > 0 && !(m == 0 && band.lo == 1)) {
            const double sdn = grid.sdot_value(band.lo - 1);
            const double sddot = (sdn * sdn - sd * sd) / two_ds;
            REQUIRE(!(sddot >= b.sddot_min && sddot <= b.sddot_max));
          }
          if (band.hi + 1 < spec.n_sdot) {
            const double sdn = grid.sdot_value(band.hi + 1);
            const double sddot = (sdn * sdn - sd * sd) / two_ds;
            REQUIRE(!(sddot >= b.sddot_min && sddot <= b.sddot_max));
          }
        }
      }
    }
  }
}

TEST_CASE("action_range: zero-motion action excluded from row 0 only") {
  const JointPath path = identity_path();
  const PhaseGrid grid(path, single_joint_unit_limits(), GridSpec{11, 11, 1.0});
  CHECK(grid.action_range({3, 0}).lo == 1);
  // From a moving row, braking to zero is allowed when within bounds.
  CHECK(grid.action_range({3, 1}).lo == 0);
}

TEST_CASE("shrinking qddot limits never enlarges an action range") {
  const JointPath path = JointPath::polynomial({{0.0, 1.0, -0.4}});
  Constraints wide = single_joint_unit_limits();
  Constraints narrow;
  narrow.qddot_min = {-0.4};
  narrow.qddot_max = {0.6};
  const GridSpec spec{9, 13, 1.0};
  const PhaseGrid grid_wide(path, wide, spec);
  const PhaseGrid grid_narrow(path, narrow, spec);
  for (std::uint32_t j = 0; j + 1 < spec.n_s; ++j) {
    for (std::uint32_t m = 0; m < spec.n_sdot; ++m) {
      if (!grid_narrow.feasible({j, m}) || !grid_wide.feasible({j, m})) continue;
      const ActionBand nb = grid_narrow.action_range({j, m});
      const ActionBand wb = grid_wide.action_range({j, m});
      if (nb.empty()) continue;
      REQUIRE_FALSE(wb.empty());
      REQUIRE(wb.lo <= nb.lo);
      REQUIRE(wb.hi >= nb.hi);
    }
  }
}

TEST_CASE("accel interval tightens monotonically in sdot for uniform-sign q''") {
  const JointPath path = JointPath::polynomial({{0.0, 1.0, 0.5}});  // q'' = 1
  const Constraints c = single_joint_unit_limits();
  double prev_hi = std::numeric_limits<double>::infinity();
  for (double sdot : {0.0, 0.2, 0.4, 0.8, 1.2}) {
    const AccelBounds b = accel_bounds(path, c, 0.5, sdot);
    CHECK(b.sddot_max <= prev_hi + 1e-15);
    prev_hi = b.sddot_max;
  }
}

TEST_CASE("mark_infeasible: protected states and dedup") {
  const JointPath path = identity_path();
  PhaseGrid grid(path, single_joint_unit_limits(), GridSpec{5, 4, 1.0});
  const std::vector<PhaseState> wanted{{0, 0}, {4, 0}, {2, 1}, {2, 1}, {1, 3}};
  const auto newly = grid.mark_infeasible(wanted);
  REQUIRE(newly.size() == 2);
  CHECK(grid.feasible({0, 0}));
  CHECK(grid.feasible({4, 0}));
  CHECK_FALSE(grid.feasible({2, 1}));
  CHECK_FALSE(grid.feasible({1, 3}));
  // Second call: nothing newly marked.
  CHECK(grid.mark_infeasible(wanted).empty());
}

TEST_CASE("constraints validation") {
  Constraints c;
  c.qddot_min = {-1.0};
  c.qddot_max = {1.0};
  CHECK_NOTHROW(c.validate(1));
  c.qddot_min = {0.5};
  CHECK_THROWS_AS(c.validate(1), std::invalid_argument);
  c.qddot_min = {-1.0};
  c.tau_min = {-1.0};
  CHECK_THROWS_AS(c.validate(1), std::invalid_argument);  // tau_max missing
  c.tau_max = {1.0};
  CHECK_NOTHROW(c.validate(1));
}
