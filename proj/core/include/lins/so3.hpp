// Minimal SO(3) / unit-quaternion algebra used throughout the filter.
//
// Conventions (fixed globally):
//  - Hamilton quaternions, scalar-first storage (w, x, y, z), passive rotations.
//  - q_A^B denotes the rotation from frame A to frame B; its matrix satisfies
//    x_B = R(q_A^B) x_A and compositions chain as q_A^C = q_B^C * q_A^B.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace lins::so3 {

// Threshold below which exp/log fall back to their Taylor expansions.
inline constexpr double kSmallAngle = 1e-7;

// Skew-symmetric matrix of v, i.e. skew(v) * w == v.cross(w).
inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

// Exponential map: rotation vector (axis * angle, radians) -> unit quaternion.
// Throws std::invalid_argument on non-finite input.
Eigen::Quaterniond expMap(const Eigen::Vector3d& theta);

// Logarithm map, inverse of expMap up to the quaternion double cover.
// Returns a rotation vector with norm <= pi.
Eigen::Vector3d logMap(const Eigen::Quaterniond& q);

// Hamilton product, renormalized to unit length.
Eigen::Quaterniond quatMul(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

// Right Jacobian of SO(3): exp(theta + d) ~= exp(theta) * exp(Jr(theta) * d).
Eigen::Matrix3d rightJacobian(const Eigen::Vector3d& theta);

}  // namespace lins::so3
