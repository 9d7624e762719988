#pragma once

#include <array>

namespace artigen::artgraph {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;  // row-major

Vec3 operator+(const Vec3& a, const Vec3& b);
Vec3 operator-(const Vec3& a, const Vec3& b);
Vec3 operator*(double s, const Vec3& a);
double dot(const Vec3& a, const Vec3& b);
Vec3 cross(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);

Mat3 identity3();
Mat3 operator*(const Mat3& a, const Mat3& b);
Vec3 operator*(const Mat3& m, const Vec3& v);
Mat3 transpose(const Mat3& m);

// Rodrigues rotation about a unit axis.
Mat3 rotation_about(const Vec3& unit_axis, double angle);
Mat3 from_axis_angle(const Vec3& rotvec);
// Log map; the returned angle lies in [0, pi].
Vec3 to_axis_angle(const Mat3& r);
// Rewrites a rotation vector so its angle lies in [0, pi]. Vectors already in
// range are returned bit-for-bit unchanged.
Vec3 canonical_axis_angle(const Vec3& rotvec);
// URDF fixed-axis roll/pitch/yaw, R = Rz(yaw) * Ry(pitch) * Rx(roll).
Vec3 to_rpy(const Mat3& r);

struct Rigid {
  Mat3 rotation = identity3();
  Vec3 translation{0.0, 0.0, 0.0};

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  // (this * other)(p) = this(other(p))
  Rigid operator*(const Rigid& other) const;
  Rigid inverse() const;

  // Packs as [rotation vector (3), translation (3)].
  static Rigid from_pose6(const std::array<double, 6>& pose);
  std::array<double, 6> to_pose6() const;
};

// Plucker line (direction d, moment m = q x d for any point q on the line).
struct Plucker {
  Vec3 direction{0.0, 0.0, 1.0};
  Vec3 moment{0.0, 0.0, 0.0};

  static Plucker through(const Vec3& point, const Vec3& direction);
  static Plucker from_array(const std::array<double, 6>& p);
  std::array<double, 6> to_array() const;
  // Closest point on the line to the origin (requires unit direction).
  Vec3 closest_point() const { return cross(direction, moment); }
  double distance_to(const Vec3& p) const;
  Plucker transformed(const Rigid& t) const;
};

// Validity tolerance used by plucker_project's fast path and by validation.
inline constexpr double kPluckerExactTol = 1e-12;

// Normalizes so |d| = 1 and d . m = 0. Inputs that already satisfy both within
// kPluckerExactTol are returned unchanged. Throws NumericalError if |d| <= 1e-8.
std::array<double, 6> plucker_project(const std::array<double, 6>& p);

// Screw motion: rotate by `angle` about the line, then slide by `displacement` along it.
Rigid screw_motion(const Plucker& axis, double angle, double displacement);

}  // namespace artigen::artgraph
