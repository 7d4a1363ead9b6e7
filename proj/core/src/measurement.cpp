#include "lins/measurement.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lins {
namespace {

constexpr double kMinEdgeLength = 1e-6;
constexpr double kMinTriangleArea = 1e-8;  // m^2

std::vector<Eigen::Vector3d> positions(const std::vector<FeaturePoint>& pts) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(pts.size());
  for (const FeaturePoint& fp : pts) out.push_back(fp.p);
  return out;
}

}  // namespace

MatchIndex::MatchIndex(const FeatureCloud& prev, int ring_count)
    : edges_(prev.edges),
      planars_(prev.planars),
      edge_tree_(positions(prev.edges)),
      planar_tree_(positions(prev.planars)),
      edge_rings_(ring_count),
      planar_rings_(ring_count) {
  for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
    if (edges_[i].ring >= 0 && edges_[i].ring < ring_count)
      edge_rings_[edges_[i].ring].push_back(i);
  }
  for (int i = 0; i < static_cast<int>(planars_.size()); ++i) {
    if (planars_[i].ring >= 0 && planars_[i].ring < ring_count)
      planar_rings_[planars_[i].ring].push_back(i);
  }
}

int MatchIndex::nearestEdge(const Eigen::Vector3d& q, double max_dist) const {
  return edge_tree_.nearest(q, max_dist);
}

int MatchIndex::nearestPlanar(const Eigen::Vector3d& q, double max_dist) const {
  return planar_tree_.nearest(q, max_dist);
}

int MatchIndex::nearestLinear(const std::vector<FeaturePoint>& pts,
                              const std::vector<int>& idx, const Eigen::Vector3d& q,
                              double max_dist, int exclude) const {
  int best = -1;
  double best_sq = max_dist * max_dist;
  for (int i : idx) {
    if (i == exclude) continue;
    const double d_sq = (pts[i].p - q).squaredNorm();
    if (d_sq <= best_sq) {
      best_sq = d_sq;
      best = i;
    }
  }
  return best;
}

int MatchIndex::nearestEdgeOnAdjacentRing(const Eigen::Vector3d& q, int ring,
                                          double max_dist, int exclude) const {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int r : {ring - 1, ring + 1}) {
    if (r < 0 || r >= static_cast<int>(edge_rings_.size())) continue;
    const int i = nearestLinear(edges_, edge_rings_[r], q, max_dist, exclude);
    if (i >= 0) {
      const double d = (edges_[i].p - q).norm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
  }
  return best;
}

int MatchIndex::nearestPlanarOnRing(const Eigen::Vector3d& q, int ring,
                                    double max_dist, int exclude) const {
  if (ring < 0 || ring >= static_cast<int>(planar_rings_.size())) return -1;
  return nearestLinear(planars_, planar_rings_[ring], q, max_dist, exclude);
}

int MatchIndex::nearestPlanarOnAdjacentRing(const Eigen::Vector3d& q, int ring,
                                            double max_dist, int exclude) const {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int r : {ring - 1, ring + 1}) {
    if (r < 0 || r >= static_cast<int>(planar_rings_.size())) continue;
    const int i = nearestLinear(planars_, planar_rings_[r], q, max_dist, exclude);
    if (i >= 0) {
      const double d = (planars_[i].p - q).norm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
  }
  return best;
}

Eigen::Vector3d transformPoint(const Eigen::Vector3d& p, const LocalState& rel,
                               const Extrinsics& extr) {
  const Eigen::Matrix3d R_bb = rel.q.toRotationMatrix();
  return extr.R_l_b.transpose() *
         (R_bb * (extr.R_l_b * p + extr.p_l_b) + rel.p - extr.p_l_b);
}

std::vector<Correspondence> findCorrespondences(const FeatureCloud& transformed,
                                                const FeatureCloud& original,
                                                const MatchIndex& prev,
                                                const MatchConfig& cfg) {
  std::vector<Correspondence> out;
  out.reserve(transformed.edges.size() + transformed.planars.size());

  for (std::size_t i = 0; i < transformed.edges.size(); ++i) {
    const Eigen::Vector3d& q = transformed.edges[i].p;
    const int ia = prev.nearestEdge(q, cfg.match_radius);
    if (ia < 0) continue;
    const FeaturePoint& a = prev.edge(ia);
    const int ib = prev.nearestEdgeOnAdjacentRing(q, a.ring, cfg.anchor_radius, ia);
    if (ib < 0) continue;
    const FeaturePoint& b = prev.edge(ib);
    if ((a.p - b.p).norm() <= kMinEdgeLength) continue;
    out.push_back({original.edges[i], a.p, b.p, Eigen::Vector3d::Zero()});
  }

  for (std::size_t i = 0; i < transformed.planars.size(); ++i) {
    const Eigen::Vector3d& q = transformed.planars[i].p;
    const int ia = prev.nearestPlanar(q, cfg.match_radius);
    if (ia < 0) continue;
    const FeaturePoint& a = prev.planar(ia);
    const int ib = prev.nearestPlanarOnRing(q, a.ring, cfg.anchor_radius, ia);
    const int ic = prev.nearestPlanarOnAdjacentRing(q, a.ring, cfg.anchor_radius, ia);
    if (ib < 0 || ic < 0) continue;
    const FeaturePoint& b = prev.planar(ib);
    const FeaturePoint& c = prev.planar(ic);
    const double area = 0.5 * ((a.p - b.p).cross(a.p - c.p)).norm();
    if (area <= kMinTriangleArea) continue;
    out.push_back({original.planars[i], a.p, b.p, c.p});
  }
  return out;
}

Eigen::Vector3d edgeResidual(const Eigen::Vector3d& p_hat, const Eigen::Vector3d& pa,
                             const Eigen::Vector3d& pb) {
  const double len = (pa - pb).norm();
  if (len <= kMinEdgeLength) {
    throw std::invalid_argument("edgeResidual: degenerate edge");
  }
  return (p_hat - pa).cross(p_hat - pb) / len;
}

double planeResidual(const Eigen::Vector3d& p_hat, const Eigen::Vector3d& pa,
                     const Eigen::Vector3d& pb, const Eigen::Vector3d& pc) {
  Eigen::Vector3d n = (pa - pb).cross(pa - pc);
  const double n_norm = n.norm();
  if (0.5 * n_norm <= kMinTriangleArea) {
    throw std::invalid_argument("planeResidual: collinear anchors");
  }
  n /= n_norm;
  return (p_hat - pa).dot(n);
}

ResidualSystem buildResidualSystem(const std::vector<Correspondence>& corrs,
                                   const LocalState& prior, const ErrorState& delta,
                                   const Extrinsics& extr, double sigma_lidar) {
  if (corrs.empty()) {
    throw std::invalid_argument("buildResidualSystem: no correspondences");
  }
  const LocalState state = boxplus(prior, delta);
  const Eigen::Matrix3d R_bb = state.q.toRotationMatrix();
  const Eigen::Matrix3d RlbT = extr.R_l_b.transpose();
  // Right Jacobian of the retraction at the current delta: accounts for the
  // boxplus linearization point being away from zero during iterations.
  const Eigen::Matrix3d Jr = so3::rightJacobian(delta.segment<3>(blk::kTheta));

  int rows = 0;
  for (const Correspondence& c : corrs) {
    rows += c.feature.kind == FeatureKind::kEdge ? 3 : 1;
  }

  ResidualSystem sys;
  sys.r.resize(rows);
  sys.H = Eigen::MatrixXd::Zero(rows, 18);
  sys.noise_var.resize(rows);

  const double var = sigma_lidar * sigma_lidar;
  int row = 0;
  for (const Correspondence& c : corrs) {
    const Eigen::Vector3d y = extr.R_l_b * c.feature.p + extr.p_l_b;
    const Eigen::Vector3d p_hat = RlbT * (R_bb * y + state.p - extr.p_l_b);
    const Eigen::Matrix3d dphat_ddp = RlbT;
    const Eigen::Matrix3d dphat_dth = -RlbT * R_bb * so3::skew(y) * Jr;

    if (c.feature.kind == FeatureKind::kEdge) {
      sys.r.segment<3>(row) = edgeResidual(p_hat, c.pa, c.pb);
      const Eigen::Matrix3d drdp = so3::skew(c.pb - c.pa) / (c.pa - c.pb).norm();
      sys.H.block<3, 3>(row, blk::kP) = drdp * dphat_ddp;
      sys.H.block<3, 3>(row, blk::kTheta) = drdp * dphat_dth;
      // dr/dp_i is drdp times a rotation, so row norms carry over directly.
      for (int i = 0; i < 3; ++i) {
        sys.noise_var(row + i) = drdp.row(i).squaredNorm() * var;
      }
      ++sys.num_edges;
      row += 3;
    } else {
      sys.r(row) = planeResidual(p_hat, c.pa, c.pb, c.pc);
      Eigen::Vector3d n = (c.pa - c.pb).cross(c.pa - c.pc).normalized();
      sys.H.block<1, 3>(row, blk::kP) = n.transpose() * dphat_ddp;
      sys.H.block<1, 3>(row, blk::kTheta) = n.transpose() * dphat_dth;
      sys.noise_var(row) = var;
      ++sys.num_planes;
      row += 1;
    }
  }
  return sys;
}

}  // namespace lins
