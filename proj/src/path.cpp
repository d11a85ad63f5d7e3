#include "topt/path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace topt {

namespace {

void check_s_in_range(double s) {
  if (!(s >= 0.0 && s <= 1.0))
    throw std::domain_error("path evaluation outside [0,1]: s=" + std::to_string(s));
}

/// Solves the natural-spline tridiagonal system for the knot second
/// derivatives of one joint (Thomas algorithm).
std::vector<double> natural_spline_second_derivatives(const std::vector<double>& x,
                                                      const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> m2(n, 0.0);
  if (n < 3) return m2;

  const std::size_t interior = n - 2;
  std::vector<double> diag(interior), upper(interior), rhs(interior);
  for (std::size_t k = 0; k < interior; ++k) {
    const double h0 = x[k + 1] - x[k];
    const double h1 = x[k + 2] - x[k + 1];
    diag[k] = (h0 + h1) / 3.0;
    upper[k] = h1 / 6.0;
    rhs[k] = (y[k + 2] - y[k + 1]) / h1 - (y[k + 1] - y[k]) / h0;
  }
  // Forward elimination; the subdiagonal entry of row k is h_k/6 = upper[k-1].
  for (std::size_t k = 1; k < interior; ++k) {
    const double w = upper[k - 1] / diag[k - 1];
    diag[k] -= w * upper[k - 1];
    rhs[k] -= w * rhs[k - 1];
  }
  m2[interior] = rhs[interior - 1] / diag[interior - 1];
  for (std::size_t k = interior - 1; k-- > 0;) {
    m2[k + 1] = (rhs[k] - upper[k] * m2[k + 2]) / diag[k];
  }
  return m2;
}

}  // namespace

JointPath JointPath::polynomial(std::vector<std::vector<double>> coefficients) {
  if (coefficients.empty())
    throw std::invalid_argument("polynomial path needs at least one joint");
  JointPath p;
  p.kind_ = Kind::polynomial;
  p.n_joints_ = coefficients.size();
  for (auto& c : coefficients)
    if (c.empty()) c.push_back(0.0);
  p.coeffs_ = std::move(coefficients);
  return p;
}

PathEvaluation JointPath::eval(double s) const {
  PathEvaluation out;
  eval_into(s, out);
  return out;
}

void JointPath::eval_into(double s, PathEvaluation& out) const {
  check_s_in_range(s);
  out.q.resize(n_joints_);
  out.q_prime.resize(n_joints_);
  out.q_double_prime.resize(n_joints_);

  if (kind_ == Kind::polynomial) {
    for (std::size_t i = 0; i < n_joints_; ++i) {
      const std::vector<double>& c = coeffs_[i];
      // Simultaneous Horner evaluation of q, q', q''.
      double q = 0.0, qp = 0.0, qpp = 0.0;
      for (std::size_t k = c.size(); k-- > 0;) {
        qpp = qpp * s + 2.0 * qp;
        qp = qp * s + q;
        q = q * s + c[k];
      }
      out.q[i] = q;
      out.q_prime[i] = qp;
      out.q_double_prime[i] = qpp;
    }
    return;
  }

  const std::vector<double>& x = spline_.knots;
  // Interval index: last k with x[k] <= s (s == 1 maps to the final interval).
  const auto it = std::upper_bound(x.begin(), x.end(), s);
  std::size_t k = static_cast<std::size_t>(std::distance(x.begin(), it));
  k = (k == 0) ? 0 : k - 1;
  if (k >= x.size() - 1) k = x.size() - 2;

  const double h = x[k + 1] - x[k];
  const double dl = x[k + 1] - s;  // distance to right knot
  const double dr = s - x[k];      // distance to left knot
  for (std::size_t i = 0; i < n_joints_; ++i) {
    const std::vector<double>& y = spline_.values[i];
    const std::vector<double>& m2 = spline_.second[i];
    const double c_left = y[k] / h - m2[k] * h / 6.0;
    const double c_right = y[k + 1] / h - m2[k + 1] * h / 6.0;
    out.q[i] = m2[k] * dl * dl * dl / (6.0 * h) + m2[k + 1] * dr * dr * dr / (6.0 * h) +
               c_left * dl + c_right * dr;
    out.q_prime[i] = -m2[k] * dl * dl / (2.0 * h) + m2[k + 1] * dr * dr / (2.0 * h) -
                     c_left + c_right;
    out.q_double_prime[i] = m2[k] * dl / h + m2[k + 1] * dr / h;
  }
}

PathEvaluation eval_path(const JointPath& path, double s) { return path.eval(s); }

JointPath spline_from_waypoints(const std::vector<Waypoint>& waypoints) {
  if (waypoints.size() < 3)
    throw std::invalid_argument("spline needs at least 3 waypoints");
  const std::size_t n_joints = waypoints.front().q.size();
  if (n_joints == 0) throw std::invalid_argument("waypoints carry no joints");

  std::vector<double> knots;
  knots.reserve(waypoints.size());
  for (const Waypoint& w : waypoints) {
    if (w.q.size() != n_joints)
      throw std::invalid_argument("inconsistent joint count across waypoints");
    if (!knots.empty() && !(w.s > knots.back()))
      throw std::invalid_argument("waypoint s values must be strictly increasing");
    knots.push_back(w.s);
  }
  if (knots.front() != 0.0 || knots.back() != 1.0)
    throw std::invalid_argument("waypoints must span s=0 to s=1");

  JointPath p;
  p.kind_ = JointPath::Kind::spline;
  p.n_joints_ = n_joints;
  p.spline_.knots = std::move(knots);
  p.spline_.values.resize(n_joints);
  p.spline_.second.resize(n_joints);
  for (std::size_t i = 0; i < n_joints; ++i) {
    std::vector<double>& y = p.spline_.values[i];
    y.reserve(waypoints.size());
    for (const Waypoint& w : waypoints) y.push_back(w.q[i]);
    p.spline_.second[i] = natural_spline_second_derivatives(p.spline_.knots, y);
  }
  return p;
}

std::array<double, 2> two_link_forward(const TwoLinkArm& arm, double q1, double q2) {
  return {arm.l1 * std::cos(q1) + arm.l2 * std::cos(q1 + q2),
          arm.l1 * std::sin(q1) + arm.l2 * std::sin(q1 + q2)};
}

namespace {

/// Elbow-up inverse kinematics (sin q2 >= 0 branch). Throws when (x, y) is
/// outside the annular workspace.
std::array<double, 2> two_link_inverse(const TwoLinkArm& arm, double x, double y,
                                       double s_label) {
  const double r2 = x * x + y * y;
  const double r = std::sqrt(r2);
  const double r_min = std::fabs(arm.l1 - arm.l2);
  const double r_max = arm.l1 + arm.l2;
  constexpr double kReachTol = 1e-9;
  if (r < r_min - kReachTol || r > r_max + kReachTol)
    throw std::invalid_argument("demo path sample unreachable at s=" +
                                std::to_string(s_label) + " (distance " +
                                std::to_string(r) + ")");
  double d = (r2 - arm.l1 * arm.l1 - arm.l2 * arm.l2) / (2.0 * arm.l1 * arm.l2);
  d = std::clamp(d, -1.0, 1.0);
  const double q2 = std::acos(d);
  const double q1 = std::atan2(y, x) -
                    std::atan2(arm.l2 * std::sin(q2), arm.l1 + arm.l2 * std::cos(q2));
  return {q1, q2};
}

JointPath demo_from_cartesian(const TwoLinkArm& arm, std::size_t samples,
                              auto&& point_at) {
  if (samples < 3) throw std::invalid_argument("demo path needs >= 3 samples");
  if (!(arm.l1 > 0.0 && arm.l2 > 0.0))
    throw std::invalid_argument("arm link lengths must be positive");
  std::vector<Waypoint> waypoints;
  waypoints.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(samples - 1);
    const std::array<double, 2> p = point_at(s);
    const std::array<double, 2> q = two_link_inverse(arm, p[0], p[1], s);
    waypoints.push_back({s, {q[0], q[1]}});
  }
  waypoints.front().s = 0.0;
  waypoints.back().s = 1.0;
  return spline_from_waypoints(waypoints);
}

}  // namespace

JointPath demo_path_2link(const LineShape& shape, const TwoLinkArm& arm,
                          std::size_t samples) {
  return demo_from_cartesian(arm, samples, [&](double s) -> std::array<double, 2> {
    return {shape.from[0] + s * (shape.to[0] - shape.from[0]),
            shape.from[1] + s * (shape.to[1] - shape.from[1])};
  });
}

JointPath demo_path_2link(const CosineShape& shape, const TwoLinkArm& arm,
                          std::size_t samples) {
  return demo_from_cartesian(arm, samples, [&](double s) -> std::array<double, 2> {
    const double y = shape.y_min + s * (shape.y_max - shape.y_min);
    return {shape.x0 + shape.amplitude * std::cos(shape.frequency * y), y};
  });
}

}  // namespace topt
