#include "lins/propagation.hpp"

#include <stdexcept>

namespace lins {
namespace {

void checkDt(double dt) {
  if (!(dt > 0.0 && dt < 0.1)) {
    throw std::invalid_argument("propagation: dt outside (0, 0.1) s, dropped IMU packets?");
  }
}

}  // namespace

ImuSample interpolateImu(const ImuSample& a, const ImuSample& b, double t) {
  if (!(a.t <= t && t <= b.t && a.t < b.t)) {
    throw std::invalid_argument("interpolateImu: t outside sample interval");
  }
  const double s = (t - a.t) / (b.t - a.t);
  ImuSample out;
  out.t = t;
  out.a_m = (1.0 - s) * a.a_m + s * b.a_m;
  out.w_m = (1.0 - s) * a.w_m + s * b.w_m;
  return out;
}

PropagationJacobians buildJacobians(const LocalState& state,
                                    const Eigen::Vector3d& a_hat,
                                    const Eigen::Vector3d& w_hat,
                                    bool use_printed_form) {
  PropagationJacobians J;
  const Eigen::Matrix3d R = state.q.toRotationMatrix();  // body(t) -> b_k
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();

  J.F.block<3, 3>(blk::kP, blk::kV) = I;
  J.F.block<3, 3>(blk::kV, blk::kTheta) = -R * so3::skew(a_hat);
  J.F.block<3, 3>(blk::kV, blk::kBa) = -R;
  J.F.block<3, 3>(blk::kTheta, blk::kTheta) = -so3::skew(w_hat);
  J.F.block<3, 3>(blk::kTheta, blk::kBg) = -I;
  if (use_printed_form) {
    J.F.block<3, 3>(blk::kTheta, blk::kG) = -I;
  } else {
    J.F.block<3, 3>(blk::kV, blk::kG) = I;
  }

  J.G.block<3, 3>(blk::kV, 0) = -R;
  J.G.block<3, 3>(blk::kTheta, 3) = -I;
  J.G.block<3, 3>(blk::kBa, 6) = I;
  J.G.block<3, 3>(blk::kBg, 9) = I;
  return J;
}

void propagateStep(ErrorState* delta_x, Covariance18* P,
                   const PropagationJacobians& J, const NoiseParams& noise,
                   double dt) {
  checkDt(dt);
  const Matrix18d Phi = Matrix18d::Identity() + J.F * dt;

  Eigen::Matrix<double, 12, 12> Q = Eigen::Matrix<double, 12, 12>::Zero();
  Q.block<3, 3>(0, 0) = (noise.sigma_na * noise.sigma_na / dt) * Eigen::Matrix3d::Identity();
  Q.block<3, 3>(3, 3) = (noise.sigma_ng * noise.sigma_ng / dt) * Eigen::Matrix3d::Identity();
  Q.block<3, 3>(6, 6) = (noise.sigma_nba * noise.sigma_nba / dt) * Eigen::Matrix3d::Identity();
  Q.block<3, 3>(9, 9) = (noise.sigma_nbg * noise.sigma_nbg / dt) * Eigen::Matrix3d::Identity();

  const Eigen::Matrix<double, 18, 12> Gd = J.G * dt;
  *delta_x = Phi * (*delta_x);
  *P = Phi * (*P) * Phi.transpose() + Gd * Q * Gd.transpose();
  *P = 0.5 * (*P + P->transpose()).eval();
}

LocalState propagatePrior(const LocalState& prior, const ImuSample& prev,
                          const ImuSample& cur) {
  const double dt = cur.t - prev.t;
  checkDt(dt);

  Eigen::Vector3d a0, w0, a1, w1;
  correctImu(prev, prior.ba, prior.bg, &a0, &w0);
  correctImu(cur, prior.ba, prior.bg, &a1, &w1);
  const Eigen::Vector3d a_bar = 0.5 * (a0 + a1);
  const Eigen::Vector3d w_bar = 0.5 * (w0 + w1);

  // Rotation at the interval mid-point for the specific-force term.
  const Eigen::Quaterniond q_mid = so3::quatMul(prior.q, so3::expMap(0.5 * dt * w_bar));
  const Eigen::Vector3d acc = q_mid.toRotationMatrix() * a_bar + prior.g;

  LocalState out = prior;
  out.p = prior.p + prior.v * dt + 0.5 * acc * dt * dt;
  out.v = prior.v + acc * dt;
  out.q = so3::quatMul(prior.q, so3::expMap(w_bar * dt));
  return out;
}

}  // namespace lins
