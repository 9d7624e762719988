#include "artigen/artgraph/se3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "artigen/error.hpp"

namespace artigen::artgraph {

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Mat3 identity3() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
  }
  return c;
}

Vec3 operator*(const Mat3& m, const Vec3& v) { return {dot(m[0], v), dot(m[1], v), dot(m[2], v)}; }

Mat3 transpose(const Mat3& m) {
  return {{{m[0][0], m[1][0], m[2][0]}, {m[0][1], m[1][1], m[2][1]}, {m[0][2], m[1][2], m[2][2]}}};
}

Mat3 rotation_about(const Vec3& k, double angle) {
  const double c = std::cos(angle), s = std::sin(angle), v = 1.0 - c;
  return {{{c + k[0] * k[0] * v, k[0] * k[1] * v - k[2] * s, k[0] * k[2] * v + k[1] * s},
           {k[1] * k[0] * v + k[2] * s, c + k[1] * k[1] * v, k[1] * k[2] * v - k[0] * s},
           {k[2] * k[0] * v - k[1] * s, k[2] * k[1] * v + k[0] * s, c + k[2] * k[2] * v}}};
}

Mat3 from_axis_angle(const Vec3& rotvec) {
  const double angle = norm(rotvec);
  if (angle < 1e-300) return identity3();
  return rotation_about((1.0 / angle) * rotvec, angle);
}

Vec3 to_axis_angle(const Mat3& r) {
  const double trace = r[0][0] + r[1][1] + r[2][2];
  const double cos_angle = std::clamp((trace - 1.0) / 2.0, -1.0, 1.0);
  const double angle = std::acos(cos_angle);
  const Vec3 skew{r[2][1] - r[1][2], r[0][2] - r[2][0], r[1][0] - r[0][1]};
  if (angle < 1e-12) return {0.5 * skew[0], 0.5 * skew[1], 0.5 * skew[2]};
  if (std::numbers::pi - angle > 1e-6) {
    return (angle / (2.0 * std::sin(angle))) * skew;
  }
  // Near pi: axis from the symmetric part, sign fixed by the skew part.
  Vec3 axis{std::sqrt(std::max(0.0, (r[0][0] + 1.0) / 2.0)), std::sqrt(std::max(0.0, (r[1][1] + 1.0) / 2.0)),
            std::sqrt(std::max(0.0, (r[2][2] + 1.0) / 2.0))};
  const int big = static_cast<int>(std::max_element(axis.begin(), axis.end()) - axis.begin());
  for (int i = 0; i < 3; ++i) {
    if (i == big) continue;
    const double sym = r[big][i] + r[i][big];
    axis[i] = std::copysign(axis[i], sym);
  }
  if (skew[big] < 0.0) axis = -1.0 * axis;
  const double n = norm(axis);
  return (angle / n) * axis;
}

Vec3 canonical_axis_angle(const Vec3& rotvec) {
  const double angle = norm(rotvec);
  if (angle <= std::numbers::pi) return rotvec;
  const Vec3 axis = (1.0 / angle) * rotvec;
  double wrapped = std::fmod(angle, 2.0 * std::numbers::pi);
  if (wrapped > std::numbers::pi) return (wrapped - 2.0 * std::numbers::pi) * axis;
  return wrapped * axis;
}

Vec3 to_rpy(const Mat3& r) {
  const double pitch = std::asin(std::clamp(-r[2][0], -1.0, 1.0));
  if (std::abs(std::cos(pitch)) < 1e-9) {
    // Gimbal lock: fold roll into yaw.
    return {0.0, pitch, std::atan2(-r[0][1], r[1][1])};
  }
  return {std::atan2(r[2][1], r[2][2]), pitch, std::atan2(r[1][0], r[0][0])};
}

Rigid Rigid::operator*(const Rigid& other) const {
  return Rigid{rotation * other.rotation, rotation * other.translation + translation};
}

Rigid Rigid::inverse() const {
  const Mat3 rt = artgraph::transpose(rotation);
  return Rigid{rt, -1.0 * (rt * translation)};
}

Rigid Rigid::from_pose6(const std::array<double, 6>& pose) {
  return Rigid{from_axis_angle({pose[0], pose[1], pose[2]}), {pose[3], pose[4], pose[5]}};
}

std::array<double, 6> Rigid::to_pose6() const {
  const Vec3 w = to_axis_angle(rotation);
  return {w[0], w[1], w[2], translation[0], translation[1], translation[2]};
}

Plucker Plucker::through(const Vec3& point, const Vec3& direction) {
  const double n = norm(direction);
  if (n <= 1e-8) throw NumericalError("degenerate line direction");
  const Vec3 d = (1.0 / n) * direction;
  return Plucker{d, cross(point, d)};
}

Plucker Plucker::from_array(const std::array<double, 6>& p) { return Plucker{{p[0], p[1], p[2]}, {p[3], p[4], p[5]}}; }

std::array<double, 6> Plucker::to_array() const {
  return {direction[0], direction[1], direction[2], moment[0], moment[1], moment[2]};
}

double Plucker::distance_to(const Vec3& p) const {
  // |p x d - m| / |d|
  return norm(cross(p, direction) - moment) / norm(direction);
}

Plucker Plucker::transformed(const Rigid& t) const {
  const Vec3 d = t.rotation * direction;
  return Plucker{d, t.rotation * moment + cross(t.translation, d)};
}

std::array<double, 6> plucker_project(const std::array<double, 6>& p) {
  Vec3 d{p[0], p[1], p[2]};
  Vec3 m{p[3], p[4], p[5]};
  const double s = norm(d);
  if (!(s > 1e-8)) throw NumericalError("degenerate joint axis: |d| = " + std::to_string(s));
  if (std::abs(s - 1.0) <= kPluckerExactTol && std::abs(dot(d, m)) <= kPluckerExactTol) return p;
  d = (1.0 / s) * d;
  m = (1.0 / s) * m;
  m = m - dot(m, d) * d;
  return {d[0], d[1], d[2], m[0], m[1], m[2]};
}

Rigid screw_motion(const Plucker& axis, double angle, double displacement) {
  const Vec3 q = axis.closest_point();
  const Mat3 r = rotation_about(axis.direction, angle);
  return Rigid{r, q - r * q + displacement * axis.direction};
}

}  // namespace artigen::artgraph
