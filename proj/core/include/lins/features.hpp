// Edge / planar feature extraction from ring-organized scans and sweep
// undistortion under a constant-velocity motion model.

#pragma once

#include <vector>

#include <Eigen/Core>

#include "lins/state.hpp"

namespace lins {

// One lidar return. rel_time is the emission time as a fraction of the sweep.
struct RawPoint {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();  // m, lidar frame
  int ring = 0;
  double rel_time = 0.0;  // in [0, 1]
};

struct RawScan {
  std::vector<RawPoint> points;  // grouped per ring, azimuth order within a ring
  double stamp = 0.0;            // s, sweep start
};

enum class FeatureKind { kEdge, kPlanar };

struct FeaturePoint {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();  // m, lidar frame
  int ring = 0;
  double rel_time = 0.0;
  FeatureKind kind = FeatureKind::kPlanar;
};

struct FeatureCloud {
  std::vector<FeaturePoint> edges;
  std::vector<FeaturePoint> planars;
  double stamp = 0.0;
};

struct ExtractConfig {
  int ring_count = 16;
  int neighbor_half_width = 5;   // curvature window and suppression radius
  int sectors = 6;               // azimuth sectors per ring
  int max_edges_per_sector = 4;
  int max_planars_per_sector = 30;
  double edge_thresh = 0.1;      // on normalized curvature
  double planar_thresh = 0.1;
  double min_range = 0.5;        // m
  double max_range = 80.0;       // m
};

// LOAM-style extraction: per-ring curvature over +-neighbor_half_width
// neighbors, per-sector selection of the highest / lowest curvature points,
// neighbor suppression around every pick. Empty scans yield empty clouds.
FeatureCloud extractFeatures(const RawScan& scan, const ExtractConfig& cfg);

// Lidar-frame relative transform over one sweep, derived from the body-frame
// relative state and the extrinsics: x_{l_k} = R * x_{l_{k+1}} + p.
void lidarRelativeTransform(const LocalState& rel, const Extrinsics& extr,
                            Eigen::Matrix3d* R, Eigen::Vector3d* p);

// Re-express every feature at the sweep-end pose, interpolating the relative
// motion with a constant-velocity model (linear translation, slerp rotation).
FeatureCloud undistort(const FeatureCloud& features, const LocalState& rel,
                       const Extrinsics& extr);

}  // namespace lins
