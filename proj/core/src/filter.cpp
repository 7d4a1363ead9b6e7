#include "lins/filter.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace lins {
namespace {

Eigen::Vector3d mean3(std::span<const ImuSample> samples,
                      const Eigen::Vector3d& (*get)(const ImuSample&)) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const ImuSample& s : samples) sum += get(s);
  return sum / static_cast<double>(samples.size());
}

double maxAxisStd(std::span<const ImuSample> samples, const Eigen::Vector3d& mean,
                  const Eigen::Vector3d& (*get)(const ImuSample&)) {
  Eigen::Vector3d var = Eigen::Vector3d::Zero();
  for (const ImuSample& s : samples) var += (get(s) - mean).cwiseAbs2();
  var /= static_cast<double>(samples.size());
  return std::sqrt(var.maxCoeff());
}

const Eigen::Vector3d& getA(const ImuSample& s) { return s.a_m; }
const Eigen::Vector3d& getW(const ImuSample& s) { return s.w_m; }

}  // namespace

LinsFilter::LinsFilter(FilterConfig cfg, Extrinsics extr)
    : cfg_(std::move(cfg)), extr_(std::move(extr)) {}

void LinsFilter::initialize(std::span<const ImuSample> stationary) {
  if (stationary.size() < 2 ||
      stationary.back().t - stationary.front().t < 0.5) {
    throw InitError("initialize: need at least 0.5 s of stationary IMU data");
  }
  const Eigen::Vector3d mean_a = mean3(stationary, getA);
  const Eigen::Vector3d mean_w = mean3(stationary, getW);
  if (maxAxisStd(stationary, mean_w, getW) > cfg_.stationary_gyro_std ||
      maxAxisStd(stationary, mean_a, getA) > cfg_.stationary_accel_std) {
    throw InitError("initialize: IMU window is not stationary");
  }

  prior_ = LocalState{};
  prior_.bg = mean_w;
  prior_.ba = cfg_.ba0;
  // Mean unbiased specific force points opposite gravity; only its direction
  // is used so the gravity norm is exact by construction.
  const Eigen::Vector3d up = (mean_a - cfg_.ba0).normalized();
  prior_.g = -kGravityNorm * up;

  global_ = GlobalPose{};
  // Roll/pitch only: minimal rotation taking world +z to the measured up axis.
  global_.q_w_b = Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(), up);

  P_.setZero();
  const InitialSigmas& s = cfg_.init_sigmas;
  auto setBlock = [&](int off, double sigma) {
    P_.block<3, 3>(off, off) = sigma * sigma * Eigen::Matrix3d::Identity();
  };
  setBlock(blk::kP, s.p);
  setBlock(blk::kV, s.v);
  setBlock(blk::kTheta, s.theta);
  setBlock(blk::kBa, s.ba);
  setBlock(blk::kBg, s.bg);
  setBlock(blk::kG, s.g);

  delta_.setZero();
  state_time_ = stationary.back().t;
  last_imu_ = stationary.back();
  has_prev_ = false;
  initialized_ = true;
}

void LinsFilter::processImu(const ImuSample& sample) {
  if (!initialized_) {
    throw std::logic_error("processImu: filter not initialized");
  }
  if (sample.t <= state_time_) {
    throw std::invalid_argument("processImu: out-of-order IMU timestamp");
  }
  if (last_imu_) {
    Eigen::Vector3d a_hat, w_hat;
    const ImuSample mid = interpolateImu(*last_imu_, sample,
                                         0.5 * (last_imu_->t + sample.t));
    correctImu(mid, prior_.ba, prior_.bg, &a_hat, &w_hat);
    const PropagationJacobians J = buildJacobians(prior_, a_hat, w_hat);
    propagateStep(&delta_, &P_, J, cfg_.noise, sample.t - last_imu_->t);
    prior_ = propagatePrior(prior_, *last_imu_, sample);
  }
  last_imu_ = sample;
  state_time_ = sample.t;
}

void LinsFilter::propagateTo(double t_end) {
  if (state_time_ >= t_end - 1e-9) return;
  if (!last_imu_) return;
  // No sample beyond the boundary was provided: hold the last measurement.
  ImuSample held = *last_imu_;
  held.t = t_end;
  processImu(held);
}

void LinsFilter::perturbPrior(const Eigen::Vector3d& dtheta, const Eigen::Vector3d& dp) {
  prior_.q = so3::quatMul(prior_.q, so3::expMap(dtheta));
  prior_.p += dp;
}

LinsFilter::UpdateResult LinsFilter::iteratedUpdate(const FeatureCloud& features) {
  UpdateResult res;
  res.state = prior_;

  const MatchIndex index(prev_features_, cfg_.ring_count);
  const Matrix18d I18 = Matrix18d::Identity();

  ErrorState delta = ErrorState::Zero();
  ErrorState best_delta = ErrorState::Zero();
  Eigen::MatrixXd A_best;
  double best_cost = std::numeric_limits<double>::infinity();
  double prev_cost = std::numeric_limits<double>::infinity();
  bool have_system = false;

  int solves = 0;
  // Evaluate-then-solve: one extra evaluation pass after the last solve so
  // the final iterate is also a candidate for the best-cost selection.
  for (int j = 0; j <= cfg_.max_iterations; ++j) {
    const LocalState state_j = boxplus(prior_, delta);

    // Re-undistort with the current iterate: undistortion errors are
    // proportional to the velocity error and otherwise feed straight back
    // into the match as a motion-underestimation bias.
    const FeatureCloud undistorted = undistort(features, state_j, extr_);
    FeatureCloud transformed = undistorted;
    for (FeaturePoint& fp : transformed.edges) fp.p = transformPoint(fp.p, state_j, extr_);
    for (FeaturePoint& fp : transformed.planars) fp.p = transformPoint(fp.p, state_j, extr_);

    const std::vector<Correspondence> corrs =
        findCorrespondences(transformed, undistorted, index, cfg_.match);
    if (static_cast<int>(corrs.size()) < cfg_.match.min_matches) {
      res.status = ScanStatus::kDegenerate;
      break;
    }

    const ResidualSystem sys =
        buildResidualSystem(corrs, prior_, delta, extr_, cfg_.sigma_lidar);
    const double cost = sys.r.cwiseAbs().mean();
    if (j == 0) res.initial_cost = cost;

    const Eigen::VectorXd w_inv = sys.noise_var.cwiseInverse();
    const Eigen::MatrixXd HtW = sys.H.transpose() * w_inv.asDiagonal();
    const Eigen::MatrixXd A = HtW * sys.H;  // 18x18
    have_system = true;

    // Re-matching makes the cost non-monotone across iterations; keep the
    // best iterate and its linearization for the state/covariance update.
    if (cost < best_cost) {
      best_cost = cost;
      best_delta = delta;
      A_best = A;
      res.num_edges = sys.num_edges;
      res.num_planes = sys.num_planes;
      res.final_cost = cost;
    }

    if (j == 0) {
      // Observability check on the pose block of the information matrix.
      Eigen::Matrix<double, 6, 6> info;
      info.block<3, 3>(0, 0) = A.block<3, 3>(blk::kP, blk::kP);
      info.block<3, 3>(0, 3) = A.block<3, 3>(blk::kP, blk::kTheta);
      info.block<3, 3>(3, 0) = A.block<3, 3>(blk::kTheta, blk::kP);
      info.block<3, 3>(3, 3) = A.block<3, 3>(blk::kTheta, blk::kTheta);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(info);
      res.pose_info_ratio =
          eig.eigenvalues()(0) / std::max(eig.eigenvalues()(5), 1e-12);
      if (res.pose_info_ratio < cfg_.degeneracy_rel_eig) {
        res.status = ScanStatus::kDegenerate;
      }
    }

    if (j == cfg_.max_iterations) break;
    if (cost < cfg_.cost_threshold) break;
    // Stop once the cost has stopped improving between relinearizations.
    if (j > 0 && cost > prev_cost - 1e-4) break;
    prev_cost = cost;

    // Kalman step in pushed-through form; avoids inverting either P or the
    // (rows x rows) innovation covariance:
    //   K = (I + P A)^-1 P H^T R^-1
    // The iterate is the TOTAL correction from the prior, re-derived each
    // pass (relinearization changes H and r), not an accumulated increment.
    const Eigen::VectorXd b = HtW * (sys.H * delta - sys.r);
    const Matrix18d M = I18 + P_ * A;
    const ErrorState next = M.partialPivLu().solve(P_ * b);
    const double step = (next - delta).norm();
    delta = next;
    ++solves;
    if (step < cfg_.step_norm_epsilon) break;
  }
  res.iterations = solves;

  if (have_system) {
    res.applied = true;
    res.A = A_best;
    if (res.final_cost > cfg_.divergence_factor * res.initial_cost &&
        res.final_cost > cfg_.cost_threshold) {
      res.status = ScanStatus::kDiverged;
    }
  }
  res.state = boxplus(prior_, best_delta);
  return res;
}

OdometryOutput LinsFilter::processScan(const FeatureCloud& raw_features) {
  if (!initialized_) {
    throw std::logic_error("processScan: filter not initialized");
  }
  const double t_end = raw_features.stamp + cfg_.sweep_duration;
  propagateTo(t_end);

  OdometryOutput out;
  out.stamp = t_end;

  if (has_prev_) {
    UpdateResult upd = iteratedUpdate(raw_features);
    out.iterations_used = upd.iterations;
    out.mean_residual = upd.final_cost;
    out.initial_residual = upd.initial_cost;
    out.num_edge_matches = upd.num_edges;
    out.num_plane_matches = upd.num_planes;
    out.pose_info_ratio = upd.pose_info_ratio;
    out.status = upd.status;
    prior_ = upd.state;

    if (upd.applied) {
      // Joseph-form covariance update with the final-iteration system.
      const Matrix18d I18 = Matrix18d::Identity();
      const Eigen::PartialPivLU<Matrix18d> lu(I18 + P_ * upd.A);
      const Matrix18d KH = lu.solve(P_ * upd.A);
      const Matrix18d IKH = I18 - KH;
      const Matrix18d KRK = lu.solve(P_ * upd.A * P_ * lu.inverse().transpose());
      P_ = IKH * P_ * IKH.transpose() + KRK;
      P_ = 0.5 * (P_ + P_.transpose()).eval();
    }
    // The gravity block is updated additively; restore the norm constraint.
    prior_.g *= kGravityNorm / prior_.g.norm();
  }

  out.rel = prior_;
  global_ = composeGlobal(global_, prior_);
  out.global_pose = global_;

  // Store this scan's features, re-expressed at the sweep end with the
  // converged estimate, as anchors for the next scan.
  prev_features_ = undistort(raw_features, prior_, extr_);
  has_prev_ = true;

  prior_ = reinitLocal(prior_);
  P_ = resetCovariance(P_, out.rel);
  delta_.setZero();
  return out;
}

}  // namespace lins
