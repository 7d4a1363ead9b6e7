// Robocentric state containers and the retraction / composition /
// re-initialization operations that connect them.
//
// The error state is an 18-vector with a frozen block layout shared by every
// matrix in the system:
//   [ dp, dv, dtheta, dba, dbg, dg ]   (3 each)
// The attitude error is a right (body-frame) perturbation:
//   q_true = q_nominal * exp(dtheta).

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "lins/so3.hpp"

namespace lins {

using Vector18d = Eigen::Matrix<double, 18, 1>;
using Matrix18d = Eigen::Matrix<double, 18, 18>;

// Gravity magnitude used by the whole artifact (simulator and filter).
inline constexpr double kGravityNorm = 9.81;

// Error-state block offsets.
namespace blk {
inline constexpr int kP = 0;
inline constexpr int kV = 3;
inline constexpr int kTheta = 6;
inline constexpr int kBa = 9;
inline constexpr int kBg = 12;
inline constexpr int kG = 15;
}  // namespace blk

using ErrorState = Vector18d;
using Covariance18 = Matrix18d;

// Pose of the world frame w.r.t. the current body frame: p is the position of
// the world origin expressed in the body frame, q rotates world coordinates
// into body coordinates.
struct GlobalPose {
  Eigen::Vector3d p_w_b = Eigen::Vector3d::Zero();
  Eigen::Quaterniond q_w_b = Eigen::Quaterniond::Identity();

  // Inverse view: body pose expressed in the world frame (what gets exported).
  Eigen::Quaterniond bodyOrientationInWorld() const { return q_w_b.conjugate(); }
  Eigen::Vector3d bodyPositionInWorld() const {
    return -(q_w_b.conjugate() * p_w_b);
  }
};

// Relative state between two consecutive IMU-affixed frames b_k -> b_{k+1},
// expressed in F_{b_k}. q maps b_{k+1} coordinates into b_k coordinates.
// The local gravity g (in F_{b_k}) is part of the state.
struct LocalState {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();        // m
  Eigen::Vector3d v = Eigen::Vector3d::Zero();        // m/s
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  Eigen::Vector3d ba = Eigen::Vector3d::Zero();       // m/s^2
  Eigen::Vector3d bg = Eigen::Vector3d::Zero();       // rad/s
  Eigen::Vector3d g = Eigen::Vector3d(0, 0, -kGravityNorm);  // m/s^2
};

// Fixed lidar->IMU rigid transform: x_b = R_l_b * x_l + p_l_b.
struct Extrinsics {
  Eigen::Matrix3d R_l_b = Eigen::Matrix3d::Identity();
  Eigen::Vector3d p_l_b = Eigen::Vector3d::Zero();
};

// Retraction: additive on the vector blocks, right-multiplicative exp on the
// quaternion.
LocalState boxplus(const LocalState& prior, const ErrorState& delta);

// Local inverse of boxplus (test / oracle support): finds delta such that
// boxplus(ref, delta) == s.
ErrorState boxminus(const LocalState& s, const LocalState& ref);

// Global pose composition: folds the finished relative state into the
// world-w.r.t.-body pose. The relative state stores b_{k+1} -> b_k and is
// inverted internally.
GlobalPose composeGlobal(const GlobalPose& prev, const LocalState& rel);

// Start the next relative state: zero translation, identity rotation,
// velocity and gravity rotated into the new body frame, biases carried over.
LocalState reinitLocal(const LocalState& finished);

// Covariance counterpart of reinitLocal: zero the dp/dtheta rows and columns,
// rotate the retained dv and dg blocks (and their cross terms) into the new
// frame, keep the bias blocks.
Covariance18 resetCovariance(const Covariance18& P, const LocalState& finished);

}  // namespace lins
