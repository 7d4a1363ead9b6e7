// Synthetic data generation: analytic ground-truth trajectories, noisy IMU
// streams and motion-distorted lidar scans over plane worlds. Everything is
// closed form so the filter can be checked against exact references.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "lins/features.hpp"
#include "lins/propagation.hpp"
#include "lins/state.hpp"

namespace lins {

// Rectangular plane patch: point p0, unit normal n, orthonormal in-plane axes
// u, v with half-extents eu, ev.
struct PlanePatch {
  Eigen::Vector3d p0;
  Eigen::Vector3d n;
  Eigen::Vector3d u;
  Eigen::Vector3d v;
  double eu = 0.0;
  double ev = 0.0;
};

PlanePatch makePatch(const Eigen::Vector3d& p0, const Eigen::Vector3d& normal,
                     const Eigen::Vector3d& u_hint, double eu, double ev);

struct WorldModel {
  std::vector<PlanePatch> planes;
};

// Axis shape: constant + linear * s + sum of amp * sin(omega * s + phase).
struct SinTerm {
  double amp = 0.0;
  double omega = 0.0;
  double phase = 0.0;
};
struct AxisShape {
  double constant = 0.0;
  double linear = 0.0;
  std::vector<SinTerm> sins;

  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const;
};

// Analytic trajectory: shape functions of a warped time s(t), where the warp
// rate ramps smoothly (quintic) from 0 to 1 after a stationary lead-in. This
// keeps the path exactly on the shape while velocities ramp up, with
// closed-form first and second derivatives throughout. Attitude is yaw-only.
struct TrajectorySpec {
  double duration = 60.0;         // s
  double stationary_time = 1.5;   // s fully at rest at the start
  double ramp_time = 2.0;         // s to reach nominal speed
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  AxisShape x, y, z, yaw;

  struct Sample {
    Eigen::Vector3d pos;   // world
    Eigen::Vector3d vel;   // world
    Eigen::Vector3d acc;   // world
    double yaw = 0.0;
    double yaw_rate = 0.0;
  };
  Sample at(double t) const;

  // Body pose: x_w = R_b_w x_b + pos.
  Eigen::Quaterniond bodyOrientation(double t) const;  // body -> world
};

struct TruthSample {
  double t = 0.0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();    // body position, world frame
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();  // body -> world
  Eigen::Vector3d v = Eigen::Vector3d::Zero();    // world frame
};

struct LidarModel {
  int rings = 16;
  double elevation_min_deg = -15.0;
  double elevation_max_deg = 15.0;
  int azimuth_steps = 720;
  double min_range = 0.5;
  double max_range = 80.0;
};

struct SyntheticDataset {
  std::vector<ImuSample> imu;
  std::vector<RawScan> scans;
  std::vector<TruthSample> truth;
};

// Inverse of the bias-removal model: synthesize raw specific-force and rate
// measurements with white noise (density-scaled per sample) and random-walk
// biases. Deterministic under a fixed seed. rate must be in [50, 1000] Hz.
std::vector<ImuSample> synthImu(const TrajectorySpec& traj, double rate,
                                const NoiseParams& noise,
                                const Eigen::Vector3d& ba0,
                                const Eigen::Vector3d& bg0, std::uint64_t seed);

// Ray-cast one sweep starting at t_start. Each azimuth column is emitted at
// its own time, so a moving sensor produces motion distortion. Points are
// grouped per ring in azimuth order.
RawScan synthScan(const TrajectorySpec& traj, const WorldModel& world,
                  const Extrinsics& extr, double t_start, double sweep,
                  const LidarModel& lidar, double range_sigma,
                  std::mt19937_64& rng);

// Exact relative state between the body frames at t_k and t_k1, expressed in
// the t_k frame (biases zero). Throws if a timestamp is outside the span.
LocalState truthRelative(const TrajectorySpec& traj, double t_k, double t_k1);

TruthSample truthAt(const TrajectorySpec& traj, double t);

// Bundled presets.
WorldModel corridorWorld();
WorldModel warehouseWorld();
WorldModel singlePlaneWorld();
TrajectorySpec corridorTrajectory(double duration);
TrajectorySpec warehouseTrajectory(double duration);
TrajectorySpec singlePlaneTrajectory(double duration);

struct SimParams {
  std::string world = "warehouse";  // corridor | warehouse | single_plane
  double duration = 60.0;
  double imu_rate = 200.0;
  double scan_rate = 10.0;
  NoiseParams noise;
  Eigen::Vector3d ba0 = Eigen::Vector3d::Zero();
  Eigen::Vector3d bg0 = Eigen::Vector3d::Zero();
  double range_sigma = 0.03;
  LidarModel lidar;
  Extrinsics extrinsics;
  std::uint64_t seed = 7;
};

// Full dataset: IMU stream, distorted scans at scan_rate (sweep = scan
// period), truth at both rates.
SyntheticDataset generateDataset(const SimParams& params);

}  // namespace lins
