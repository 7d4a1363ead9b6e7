#include "lins/so3.hpp"

#include <cmath>
#include <stdexcept>

namespace lins::so3 {

Eigen::Quaterniond expMap(const Eigen::Vector3d& theta) {
  if (!theta.allFinite()) {
    throw std::invalid_argument("so3::expMap: non-finite rotation vector");
  }
  const double angle = theta.norm();
  double half_sinc;  // sin(angle/2) / angle
  double w;
  if (angle < kSmallAngle) {
    // Second-order Taylor branch, avoids 0/0 at the identity.
    half_sinc = 0.5 - angle * angle / 48.0;
    w = 1.0 - angle * angle / 8.0;
  } else {
    half_sinc = std::sin(0.5 * angle) / angle;
    w = std::cos(0.5 * angle);
  }
  Eigen::Quaterniond q(w, half_sinc * theta.x(), half_sinc * theta.y(), half_sinc * theta.z());
  q.normalize();
  return q;
}

Eigen::Vector3d logMap(const Eigen::Quaterniond& q) {
  // Work on the hemisphere with w >= 0 so the result has norm <= pi.
  Eigen::Quaterniond qn = q.normalized();
  if (qn.w() < 0.0) {
    qn.coeffs() = -qn.coeffs();
  }
  const double vec_norm = qn.vec().norm();
  const double angle = 2.0 * std::atan2(vec_norm, qn.w());
  if (vec_norm < kSmallAngle) {
    // theta ~= 2 * vec for small angles.
    return 2.0 * qn.vec();
  }
  return (angle / vec_norm) * qn.vec();
}

Eigen::Quaterniond quatMul(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  Eigen::Quaterniond q = a * b;
  q.normalize();
  return q;
}

Eigen::Matrix3d rightJacobian(const Eigen::Vector3d& theta) {
  const double angle = theta.norm();
  const Eigen::Matrix3d W = skew(theta);
  if (angle < kSmallAngle) {
    return Eigen::Matrix3d::Identity() - 0.5 * W + W * W / 6.0;
  }
  const double a2 = angle * angle;
  const double c1 = (1.0 - std::cos(angle)) / a2;
  const double c2 = (angle - std::sin(angle)) / (a2 * angle);
  return Eigen::Matrix3d::Identity() - c1 * W + c2 * W * W;
}

}  // namespace lins::so3
