// SO(3) representations: rotation matrices, extrinsic x-y-z Euler angles
// (roll, pitch, yaw) and axis-angle / rotation vectors.

#ifndef MOFASM_ROTATIONS_HPP_
#define MOFASM_ROTATIONS_HPP_

#include <cstdint>

#include "mofasm/linalg.hpp"

namespace mofasm {

using RotationMatrix = Mat3;

/// Radians. roll in [-pi, pi], pitch in [-pi/2, pi/2], yaw in [-pi, pi].
struct EulerAngles {
  double roll = 0;   // phi, about x
  double pitch = 0;  // omega, about y
  double yaw = 0;    // psi, about z
};

struct AxisAngle {
  Vec3 axis = Vec3::UnitX();
  double angle = 0;  // [0, pi]

  Vec3 rotvec() const { return angle * axis; }
  static AxisAngle from_rotvec(const Vec3& m);
};

/// R = Rz(yaw) Ry(pitch) Rx(roll).
RotationMatrix euler_to_matrix(const EulerAngles& e);

/// Inverse of euler_to_matrix. At gimbal lock roll is set to 0.
EulerAngles matrix_to_euler(const RotationMatrix& R);

/// Rodrigues construction.
RotationMatrix axis_angle_to_matrix(const AxisAngle& aa);

/// Angle from the trace, axis from the skew part. Angle 0 reports axis
/// (1,0,0); angles near pi fall back to the symmetric part of R.
AxisAngle matrix_to_axis_angle(const RotationMatrix& R);

bool is_rotation(const Mat3& M, double tol = 1e-9);

/// Uniform on SO(3); deterministic per seed.
RotationMatrix random_rotation(std::uint64_t seed);

/// p -> p * R^T in row-vector form, i.e. R p for column vectors.
Points apply_rotation(const Points& points, const RotationMatrix& R);

} // namespace mofasm

#endif
