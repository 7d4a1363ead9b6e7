// Stacked point-to-line / point-to-plane residual system: feature transform
// into the previous lidar frame, correspondence search against the previous
// scan, residuals and their analytic Jacobian w.r.t. the error state.

#pragma once

#include <vector>

#include <Eigen/Core>

#include "lins/features.hpp"
#include "lins/kdtree.hpp"
#include "lins/state.hpp"

namespace lins {

// A feature point (in F_{l_{k+1}}) paired with its anchors in F_{l_k}:
// two points defining an edge, or three non-collinear points defining a plane.
struct Correspondence {
  FeaturePoint feature;
  Eigen::Vector3d pa = Eigen::Vector3d::Zero();
  Eigen::Vector3d pb = Eigen::Vector3d::Zero();
  Eigen::Vector3d pc = Eigen::Vector3d::Zero();  // planes only
};

// Stacked residuals (edges contribute 3 rows, planes 1), their Jacobian
// w.r.t. the 18-dim error state (nonzero only in the dp / dtheta columns),
// and the diagonal of J M J^T as per-row variances.
struct ResidualSystem {
  Eigen::VectorXd r;
  Eigen::MatrixXd H;
  Eigen::VectorXd noise_var;
  int num_edges = 0;
  int num_planes = 0;
};

struct MatchConfig {
  double match_radius = 1.0;   // m, gate on the primary nearest anchor
  // Gate on the secondary anchors that span the line/plane; wider than the
  // primary gate because ring-to-ring spacing grows with range.
  double anchor_radius = 3.0;  // m
  int min_matches = 10;        // below this the scene is declared degenerate
};

// Spatial index over the previous scan's features: kd-trees for the global
// nearest-anchor queries plus per-ring buckets for the same/adjacent-ring
// anchors.
class MatchIndex {
 public:
  MatchIndex() = default;
  MatchIndex(const FeatureCloud& prev, int ring_count);

  bool empty() const { return edge_tree_.empty() && planar_tree_.empty(); }

  // Nearest edge / planar feature within max_dist; returns -1 if none.
  int nearestEdge(const Eigen::Vector3d& q, double max_dist) const;
  int nearestPlanar(const Eigen::Vector3d& q, double max_dist) const;
  // Nearest feature on rings adjacent to `ring` (or the same ring), excluding
  // index `exclude`.
  int nearestEdgeOnAdjacentRing(const Eigen::Vector3d& q, int ring, double max_dist,
                                int exclude) const;
  int nearestPlanarOnRing(const Eigen::Vector3d& q, int ring, double max_dist,
                          int exclude) const;
  int nearestPlanarOnAdjacentRing(const Eigen::Vector3d& q, int ring, double max_dist,
                                  int exclude) const;

  const FeaturePoint& edge(int i) const { return edges_[i]; }
  const FeaturePoint& planar(int i) const { return planars_[i]; }

 private:
  int nearestLinear(const std::vector<FeaturePoint>& pts, const std::vector<int>& idx,
                    const Eigen::Vector3d& q, double max_dist, int exclude) const;

  std::vector<FeaturePoint> edges_;
  std::vector<FeaturePoint> planars_;
  KdTree3d edge_tree_;
  KdTree3d planar_tree_;
  std::vector<std::vector<int>> edge_rings_;
  std::vector<std::vector<int>> planar_rings_;
};

// Eq-(14)-style transform of a lidar point from F_{l_{k+1}} to F_{l_k}.
Eigen::Vector3d transformPoint(const Eigen::Vector3d& p, const LocalState& rel,
                               const Extrinsics& extr);

// Correspondence search. `transformed` carries the features already mapped
// into F_{l_k} with the current state estimate; `original` carries the same
// features in F_{l_{k+1}} (pairwise by index) and provides the points stored
// in the output. Gated by cfg.match_radius; degenerate anchor sets rejected.
std::vector<Correspondence> findCorrespondences(const FeatureCloud& transformed,
                                                const FeatureCloud& original,
                                                const MatchIndex& prev,
                                                const MatchConfig& cfg);

// Smooth vector form of the point-to-line distance: norm equals the distance
// from p_hat to the infinite line through pa, pb.
// Throws std::invalid_argument when |pa - pb| <= 1e-6.
Eigen::Vector3d edgeResidual(const Eigen::Vector3d& p_hat, const Eigen::Vector3d& pa,
                             const Eigen::Vector3d& pb);

// Signed point-to-plane distance along the unit normal of (pa, pb, pc).
// Throws std::invalid_argument when the anchors are collinear.
double planeResidual(const Eigen::Vector3d& p_hat, const Eigen::Vector3d& pa,
                     const Eigen::Vector3d& pb, const Eigen::Vector3d& pc);

// Assemble the full residual system, evaluated at boxplus(prior, delta).
// sigma_lidar is the isotropic per-point range noise (M = sigma^2 I).
// Throws std::invalid_argument when corrs is empty.
ResidualSystem buildResidualSystem(const std::vector<Correspondence>& corrs,
                                   const LocalState& prior, const ErrorState& delta,
                                   const Extrinsics& extr, double sigma_lidar);

}  // namespace lins
