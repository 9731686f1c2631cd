#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>

namespace touchloc {

/// Rigid placement with rotation about the world z axis.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double theta = 0.0;

  static Pose identity() { return {}; }

  /// Maps an angle onto (-pi, pi].
  static double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
  }

  Pose normalized() const { return {x, y, z, wrap_angle(theta)}; }

  Eigen::Vector3d translation() const { return {x, y, z}; }

  Eigen::Matrix3d rotation() const {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix3d r;
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return r;
  }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * p.x() - s * p.y() + x, s * p.x() + c * p.y() + y, p.z() + z};
  }
  Eigen::Vector3d apply_direction(const Eigen::Vector3d& d) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * d.x() - s * d.y(), s * d.x() + c * d.y(), d.z()};
  }
  Eigen::Vector3d apply_inverse(const Eigen::Vector3d& p) const {
    return inverse_direction({p.x() - x, p.y() - y, p.z() - z});
  }
  Eigen::Vector3d inverse_direction(const Eigen::Vector3d& d) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
  }

  /// (this * other)(p) == this(other(p)).
  Pose compose(const Pose& other) const {
    if (other.x == 0.0 && other.y == 0.0 && other.z == 0.0 && other.theta == 0.0) return *this;
    if (x == 0.0 && y == 0.0 && z == 0.0 && theta == 0.0) return other;
    const Eigen::Vector3d t = apply(other.translation());
    return Pose{t.x(), t.y(), t.z(), wrap_angle(theta + other.theta)};
  }

  Pose inverse() const {
    const Eigen::Vector3d t = inverse_direction({-x, -y, -z});
    return Pose{t.x(), t.y(), t.z(), wrap_angle(-theta)};
  }

  Eigen::Vector4d as_vector() const { return {x, y, z, theta}; }
  static Pose from_vector(const Eigen::Vector4d& v) { return Pose{v[0], v[1], v[2], v[3]}; }

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// A guarded move: a straight end-effector motion that halts at first contact.
///
/// `start.theta` is the roll of the end effector about `direction`; see
/// `EffectorFrame`.
struct Action {
  int id = 0;
  Pose start;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();
  double length = 0.0;      // m
  double speed = 0.05;      // m/s
  double fixed_time = 5.0;  // s, moving to the start pose

  double duration() const { return length / speed; }
};

/// c(a): time to run the full trajectory plus the fixed approach time.
inline double action_cost(const Action& a) { return a.length / a.speed + a.fixed_time; }

}  // namespace touchloc
