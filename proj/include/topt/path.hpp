#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace topt {

/// q, dq/ds, d2q/ds2 at one path position, one entry per joint.
struct PathEvaluation {
  std::vector<double> q;
  std::vector<double> q_prime;
  std::vector<double> q_double_prime;
};

struct Waypoint {
  double s = 0.0;
  std::vector<double> q;
};

/// Joint-space geometric path q(s), s in [0,1]. Immutable after construction;
/// safe to share across concurrent readers.
class JointPath {
 public:
  /// Per-joint polynomial in s, coefficients in ascending powers.
  static JointPath polynomial(std::vector<std::vector<double>> coefficients);

  std::size_t joint_count() const { return n_joints_; }

  /// Throws std::domain_error for s outside [0,1].
  PathEvaluation eval(double s) const;

  /// Allocation-free variant for hot loops; resizes `out` vectors as needed.
  void eval_into(double s, PathEvaluation& out) const;

 private:
  JointPath() = default;
  friend JointPath spline_from_waypoints(const std::vector<Waypoint>&);

  enum class Kind { polynomial, spline };

  struct SplineData {
    std::vector<double> knots;               // shared across joints
    std::vector<std::vector<double>> values; // per joint, per knot
    std::vector<std::vector<double>> second; // per joint, natural-spline q'' at knots
  };

  Kind kind_ = Kind::polynomial;
  std::size_t n_joints_ = 0;
  std::vector<std::vector<double>> coeffs_;  // polynomial kind
  SplineData spline_;                        // spline kind
};

/// Spec-level operation name; forwards to JointPath::eval.
PathEvaluation eval_path(const JointPath& path, double s);

/// Natural cubic spline through the waypoints (zero second derivative at the
/// ends). Requires >= 3 waypoints with strictly increasing s, s0 = 0, s_last = 1.
JointPath spline_from_waypoints(const std::vector<Waypoint>& waypoints);

struct TwoLinkArm {
  double l1 = 0.5;
  double l2 = 0.5;
};

struct LineShape {
  std::array<double, 2> from{0.1668, -0.4647};
  std::array<double, 2> to{0.2595, 0.4201};
};

struct CosineShape {
  double x0 = 0.35;
  double amplitude = 0.15;
  double frequency = 16.0;
  double y_min = -0.3;
  double y_max = 0.3;
};

/// Planar two-link forward kinematics (for tests and round-trip checks).
std::array<double, 2> two_link_forward(const TwoLinkArm& arm, double q1, double q2);

/// Joint-space path tracing a Cartesian line, via elbow-up two-link inverse
/// kinematics sampled uniformly and re-fitted as a spline. Throws
/// std::invalid_argument naming the offending s when a sample is unreachable.
JointPath demo_path_2link(const LineShape& shape, const TwoLinkArm& arm,
                          std::size_t samples = 201);

/// Same for a cosine curve x = x0 + amplitude*cos(frequency*y).
JointPath demo_path_2link(const CosineShape& shape, const TwoLinkArm& arm,
                          std::size_t samples = 401);

}  // namespace topt
