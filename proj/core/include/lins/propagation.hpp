// IMU-driven propagation of the relative-state prior, the error state and its
// covariance between two lidar time-steps.

#pragma once

#include <Eigen/Core>

#include "lins/state.hpp"

namespace lins {

// One raw 6-axis IMU measurement. a_m is specific force (gravity included).
struct ImuSample {
  double t = 0.0;                               // s
  Eigen::Vector3d a_m = Eigen::Vector3d::Zero();  // m/s^2
  Eigen::Vector3d w_m = Eigen::Vector3d::Zero();  // rad/s
};

// Continuous-time white-noise / random-walk densities.
struct NoiseParams {
  double sigma_na = 0.02;     // accel white noise, m/s^2/sqrt(Hz)
  double sigma_ng = 0.005;    // gyro white noise, rad/s/sqrt(Hz)
  double sigma_nba = 1e-4;    // accel bias walk, m/s^3/sqrt(Hz)
  double sigma_nbg = 1e-5;    // gyro bias walk, rad/s^2/sqrt(Hz)
};

// Continuous error-state transition matrix F (18x18) and noise Jacobian
// G (18x12, noise order [n_a, n_g, n_ba, n_bg]).
struct PropagationJacobians {
  Matrix18d F = Matrix18d::Zero();
  Eigen::Matrix<double, 18, 12> G = Eigen::Matrix<double, 18, 12>::Zero();
};

// Bias removal. Gravity is handled by the g block of the nominal state, not here.
inline void correctImu(const ImuSample& sample, const Eigen::Vector3d& ba,
                       const Eigen::Vector3d& bg, Eigen::Vector3d* a_hat,
                       Eigen::Vector3d* w_hat) {
  *a_hat = sample.a_m - ba;
  *w_hat = sample.w_m - bg;
}

// Linear interpolation of two samples to time t in [a.t, b.t]; used to split
// IMU intervals straddling a scan boundary.
ImuSample interpolateImu(const ImuSample& a, const ImuSample& b, double t);

// Build F and G at the given linearization point.
//
// The printed form of the transition matrix couples dg into the dtheta rate
// and leaves the dv rate independent of dg, which contradicts the nominal
// kinematics v_dot = R a_hat + g; the default here is the kinematically
// consistent form (dv_dot/dg = I, dtheta_dot/dg = 0). Pass
// use_printed_form = true to reproduce the other variant for comparison.
PropagationJacobians buildJacobians(const LocalState& state,
                                    const Eigen::Vector3d& a_hat,
                                    const Eigen::Vector3d& w_hat,
                                    bool use_printed_form = false);

// One discrete propagation step of the error mean and covariance:
//   dx <- (I + F dt) dx
//   P  <- (I + F dt) P (I + F dt)^T + (G dt) Q (G dt)^T
// Q is assembled block-diagonal from the squared densities divided by dt, so
// the additive term scales linearly with dt. Output P is symmetrized.
// Throws std::invalid_argument unless 0 < dt < 0.1 s.
void propagateStep(ErrorState* delta_x, Covariance18* P,
                   const PropagationJacobians& J, const NoiseParams& noise,
                   double dt);

// Mid-point integration of the nominal robocentric kinematics over one IMU
// interval. Biases and local gravity are constant across the step.
// Throws std::invalid_argument unless 0 < dt < 0.1 s.
LocalState propagatePrior(const LocalState& prior, const ImuSample& prev,
                          const ImuSample& cur);

}  // namespace lins
