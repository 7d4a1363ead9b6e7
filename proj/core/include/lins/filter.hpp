// Robocentric iterated error-state Kalman filter: per-scan orchestration of
// IMU propagation, iterated measurement update with re-matching, covariance
// update, undistortion, global composition and local re-initialization.

#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lins/features.hpp"
#include "lins/measurement.hpp"
#include "lins/propagation.hpp"
#include "lins/state.hpp"

namespace lins {

struct InitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Initial error-state standard deviations (diagonal P0). The relative pose
// starts known exactly (it is the frame definition), so dp/dtheta start at 0.
struct InitialSigmas {
  double p = 0.0;
  double v = 0.1;      // m/s
  double theta = 0.0;
  double ba = 0.05;    // m/s^2
  double bg = 0.01;    // rad/s
  double g = 0.05;     // m/s^2 (gravity direction uncertainty)
};

struct FilterConfig {
  int max_iterations = 10;
  double cost_threshold = 0.005;    // m, mean absolute residual
  double step_norm_epsilon = 1e-6;
  double divergence_factor = 10.0;  // final cost vs initial cost guard
  NoiseParams noise;
  double sigma_lidar = 0.05;        // m
  MatchConfig match;
  int ring_count = 16;
  double sweep_duration = 0.1;      // s; scan period == sweep
  // Update is flagged degenerate when the pose-block information matrix has
  // min eigenvalue below this fraction of its max eigenvalue. Structured
  // scenes sit around 1e-3; a single plane leaves the in-plane directions
  // near 1e-6, so 1e-4 separates the two with an order of magnitude margin.
  double degeneracy_rel_eig = 1e-4;
  InitialSigmas init_sigmas;
  Eigen::Vector3d ba0 = Eigen::Vector3d::Zero();  // off-line calibrated
  // Init stationarity gates; must sit above the per-sample sensor noise
  // (sigma * sqrt(rate), e.g. 0.005 * sqrt(200) = 0.07 rad/s for the gyro).
  double stationary_gyro_std = 0.2;    // rad/s
  double stationary_accel_std = 1.0;   // m/s^2
};

enum class ScanStatus { kOk, kDegenerate, kDiverged };

struct OdometryOutput {
  double stamp = 0.0;  // sweep end = state time-step
  GlobalPose global_pose;
  LocalState rel;      // converged relative state for this scan interval
  int iterations_used = 0;
  double mean_residual = 0.0;   // final cost, m
  double initial_residual = 0.0;
  int num_edge_matches = 0;
  int num_plane_matches = 0;
  // min/max eigenvalue ratio of the 6x6 pose information block; small values
  // indicate an unobservable direction.
  double pose_info_ratio = 1.0;
  ScanStatus status = ScanStatus::kOk;
};

class LinsFilter {
 public:
  LinsFilter(FilterConfig cfg, Extrinsics extr);

  // Stationary initialization: gyro bias from the sample mean, roll/pitch and
  // local gravity from the mean unbiased specific force, accel bias from the
  // config. Throws InitError when the window is too short or not stationary.
  void initialize(std::span<const ImuSample> stationary);

  // Advance prior, error state and covariance through one IMU sample.
  // Throws std::invalid_argument on out-of-order timestamps.
  void processImu(const ImuSample& sample);

  // Full per-scan pipeline on already-extracted features (stamp = sweep
  // start). The caller must have fed all IMU samples up to the sweep end.
  OdometryOutput processScan(const FeatureCloud& raw_features);

  bool initialized() const { return initialized_; }
  double stateTime() const { return state_time_; }
  const LocalState& prior() const { return prior_; }
  const Covariance18& covariance() const { return P_; }
  const GlobalPose& globalPose() const { return global_; }
  const FeatureCloud& previousFeatures() const { return prev_features_; }

  // Test hook: perturb the current prior in place (right-multiplicative on
  // the rotation, additive on translation).
  void perturbPrior(const Eigen::Vector3d& dtheta, const Eigen::Vector3d& dp);

 private:
  struct UpdateResult {
    LocalState state;
    int iterations = 0;
    double initial_cost = 0.0;
    double final_cost = 0.0;
    int num_edges = 0;
    int num_planes = 0;
    double pose_info_ratio = 1.0;
    ScanStatus status = ScanStatus::kOk;
    bool applied = false;
    Eigen::MatrixXd A;  // H^T R^-1 H of the final iteration
  };
  UpdateResult iteratedUpdate(const FeatureCloud& features);
  void propagateTo(double t_end);

  FilterConfig cfg_;
  Extrinsics extr_;
  bool initialized_ = false;
  double state_time_ = 0.0;
  LocalState prior_;
  ErrorState delta_ = ErrorState::Zero();
  Covariance18 P_ = Covariance18::Zero();
  GlobalPose global_;
  std::optional<ImuSample> last_imu_;
  FeatureCloud prev_features_;
  bool has_prev_ = false;
};

}  // namespace lins
