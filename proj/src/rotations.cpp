#include "mofasm/rotations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace mofasm {

namespace {

constexpr double kPi = std::numbers::pi;

// cos(pitch) below which roll and yaw are not separately identifiable
constexpr double kGimbalCos = 1e-12;
// cos(pitch) below which the direct atan2 recovery of roll loses digits
constexpr double kIllConditionedCos = 1e-6;

Mat3 rot_y(double t) {
  Mat3 m;
  m << std::cos(t), 0, std::sin(t), 0, 1, 0, -std::sin(t), 0, std::cos(t);
  return m;
}

Mat3 rot_z(double t) {
  Mat3 m;
  m << std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t), 0, 0, 0, 1;
  return m;
}

} // namespace

RotationMatrix euler_to_matrix(const EulerAngles& e) {
  double cf = std::cos(e.roll), sf = std::sin(e.roll);
  double cw = std::cos(e.pitch), sw = std::sin(e.pitch);
  double cp = std::cos(e.yaw), sp = std::sin(e.yaw);
  Mat3 r;
  r << cp * cw, cp * sw * sf - sp * cf, cp * sw * cf + sp * sf,
       sp * cw, sp * sw * sf + cp * cf, sp * sw * cf - cp * sf,
       -sw,     cw * sf,                cw * cf;
  return r;
}

EulerAngles matrix_to_euler(const RotationMatrix& R) {
  EulerAngles e;
  double cos_pitch = std::hypot(R(0, 0), R(1, 0));
  if (cos_pitch < kGimbalCos) {
    e.roll = 0;
    e.pitch = R(2, 0) < 0 ? kPi / 2 : -kPi / 2;
    e.yaw = std::atan2(-R(0, 1), R(1, 1));
    return e;
  }
  // asin(-r31) written as atan2 so pitch stays accurate near +-pi/2
  e.pitch = std::atan2(-R(2, 0), cos_pitch);
  e.yaw = std::atan2(R(1, 0), R(0, 0));
  if (cos_pitch >= kIllConditionedCos) {
    e.roll = std::atan2(R(2, 1), R(2, 2));
  } else {
    // Near gimbal lock take roll from the residual Rx(roll) = Ry^T Rz^T R,
    // whose entries are O(1); this absorbs the error in yaw.
    Mat3 rx = rot_y(e.pitch).transpose() * rot_z(e.yaw).transpose() * R;
    e.roll = std::atan2(rx(2, 1) - rx(1, 2), rx(1, 1) + rx(2, 2));
  }
  return e;
}

AxisAngle AxisAngle::from_rotvec(const Vec3& m) {
  double angle = m.norm();
  if (angle == 0)
    return {};
  return {m / angle, angle};
}

RotationMatrix axis_angle_to_matrix(const AxisAngle& aa) {
  if (aa.angle == 0)
    return Mat3::Identity();
  Vec3 a = aa.axis.normalized();
  Mat3 k;
  k << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  double s = std::sin(aa.angle), c = std::cos(aa.angle);
  return Mat3::Identity() + s * k + (1 - c) * k * k;
}

AxisAngle matrix_to_axis_angle(const RotationMatrix& R) {
  double cos_angle = std::clamp((R.trace() - 1) / 2, -1.0, 1.0);
  Vec3 skew(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  // atan2 keeps full precision at small angles where acos does not
  double angle = std::atan2(skew.norm() / 2, cos_angle);
  if (angle < 1e-15)
    return {};
  if (angle < kPi / 2)
    return {skew.normalized(), angle};

  // (R + R^T)/2 = cos I + (1 - cos) a a^T; pick the best-conditioned column.
  Mat3 aat = ((R + R.transpose()) / 2 - cos_angle * Mat3::Identity()) / (1 - cos_angle);
  int i = 0;
  aat.diagonal().maxCoeff(&i);
  Vec3 axis = aat.col(i) / std::sqrt(std::max(aat(i, i), 1e-300));
  axis.normalize();
  if (skew.norm() > 1e-12) {
    if (axis.dot(skew) < 0)
      axis = -axis;
  } else {
    // angle == pi: a and -a are the same rotation; make the largest
    // component positive
    int j = 0;
    axis.cwiseAbs().maxCoeff(&j);
    if (axis[j] < 0)
      axis = -axis;
  }
  return {axis, angle};
}

bool is_rotation(const Mat3& M, double tol) {
  if (!M.allFinite())
    return false;
  if ((M.transpose() * M - Mat3::Identity()).cwiseAbs().maxCoeff() > tol)
    return false;
  return std::abs(M.determinant() - 1) <= tol;
}

RotationMatrix random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::Quaterniond q;
  do {
    q = Eigen::Quaterniond(normal(rng), normal(rng), normal(rng), normal(rng));
  } while (q.norm() < 1e-12);
  q.normalize();
  return q.toRotationMatrix();
}

Points apply_rotation(const Points& points, const RotationMatrix& R) {
  Points out;
  out.reserve(points.size());
  for (const Vec3& p : points)
    out.push_back(R * p);
  return out;
}

} // namespace mofasm
