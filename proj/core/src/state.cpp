#include "lins/state.hpp"

namespace lins {

LocalState boxplus(const LocalState& prior, const ErrorState& delta) {
  LocalState out = prior;
  out.p += delta.segment<3>(blk::kP);
  out.v += delta.segment<3>(blk::kV);
  out.q = so3::quatMul(prior.q, so3::expMap(delta.segment<3>(blk::kTheta)));
  out.ba += delta.segment<3>(blk::kBa);
  out.bg += delta.segment<3>(blk::kBg);
  out.g += delta.segment<3>(blk::kG);
  return out;
}

ErrorState boxminus(const LocalState& s, const LocalState& ref) {
  ErrorState d;
  d.segment<3>(blk::kP) = s.p - ref.p;
  d.segment<3>(blk::kV) = s.v - ref.v;
  d.segment<3>(blk::kTheta) = so3::logMap(ref.q.conjugate() * s.q);
  d.segment<3>(blk::kBa) = s.ba - ref.ba;
  d.segment<3>(blk::kBg) = s.bg - ref.bg;
  d.segment<3>(blk::kG) = s.g - ref.g;
  return d;
}

GlobalPose composeGlobal(const GlobalPose& prev, const LocalState& rel) {
  // rel holds b_{k+1} -> b_k quantities; the composition needs the inverse.
  const Eigen::Quaterniond q_bk_bk1 = rel.q.conjugate();
  GlobalPose out;
  out.p_w_b = q_bk_bk1 * (prev.p_w_b - rel.p);
  out.q_w_b = so3::quatMul(q_bk_bk1, prev.q_w_b);
  return out;
}

LocalState reinitLocal(const LocalState& finished) {
  const Eigen::Quaterniond q_bk_bk1 = finished.q.conjugate();
  LocalState out;
  out.p.setZero();
  out.q.setIdentity();
  out.v = q_bk_bk1 * finished.v;
  out.ba = finished.ba;
  out.bg = finished.bg;
  out.g = q_bk_bk1 * finished.g;
  return out;
}

Covariance18 resetCovariance(const Covariance18& P, const LocalState& finished) {
  // T zeroes the pose blocks and rotates the retained dv / dg blocks into the
  // new body frame, consistent with reinitLocal. The new frame is known only
  // up to the residual attitude error, so the reset map also carries
  // d(R^T x)/d(dtheta) = [R^T x]_x into the dv and dg rows; dropping that
  // coupling makes the filter overconfident in gravity, which then drifts.
  const Eigen::Matrix3d R_bk_bk1 = finished.q.conjugate().toRotationMatrix();
  Matrix18d T = Matrix18d::Zero();
  T.block<3, 3>(blk::kV, blk::kV) = R_bk_bk1;
  T.block<3, 3>(blk::kV, blk::kTheta) = so3::skew(R_bk_bk1 * finished.v);
  T.block<3, 3>(blk::kBa, blk::kBa).setIdentity();
  T.block<3, 3>(blk::kBg, blk::kBg).setIdentity();
  T.block<3, 3>(blk::kG, blk::kG) = R_bk_bk1;
  T.block<3, 3>(blk::kG, blk::kTheta) = so3::skew(R_bk_bk1 * finished.g);
  Covariance18 out = T * P * T.transpose();
  out = 0.5 * (out + out.transpose()).eval();
  return out;
}

}  // namespace lins
