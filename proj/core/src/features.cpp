#include "lins/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lins {
namespace {

struct RingPoint {
  const RawPoint* pt;
  double curvature = 0.0;
  bool suppressed = false;
};

}  // namespace

FeatureCloud extractFeatures(const RawScan& scan, const ExtractConfig& cfg) {
  FeatureCloud out;
  out.stamp = scan.stamp;
  if (scan.points.empty()) {
    return out;
  }

  // Bucket per ring, keeping the input azimuth order.
  std::vector<std::vector<RingPoint>> rings(cfg.ring_count);
  for (const RawPoint& pt : scan.points) {
    if (pt.ring < 0 || pt.ring >= cfg.ring_count) continue;
    const double range = pt.p.norm();
    if (range < cfg.min_range || range > cfg.max_range || !pt.p.allFinite()) continue;
    rings[pt.ring].push_back({&pt});
  }

  const int hw = cfg.neighbor_half_width;
  for (int ring = 0; ring < cfg.ring_count; ++ring) {
    auto& pts = rings[ring];
    const int n = static_cast<int>(pts.size());
    if (n < 2 * hw + 1) continue;

    // Normalized sum-of-differences curvature.
    for (int i = hw; i < n - hw; ++i) {
      Eigen::Vector3d diff = Eigen::Vector3d::Zero();
      for (int j = -hw; j <= hw; ++j) {
        if (j == 0) continue;
        diff += pts[i + j].pt->p - pts[i].pt->p;
      }
      pts[i].curvature = diff.norm() / (2.0 * hw * pts[i].pt->p.norm());
    }

    // Per-sector selection; first/last half-windows have no curvature and are
    // excluded.
    const int lo = hw;
    const int hi = n - hw;
    const int span = hi - lo;
    if (span <= 0) continue;
    for (int sec = 0; sec < cfg.sectors; ++sec) {
      const int s0 = lo + span * sec / cfg.sectors;
      const int s1 = lo + span * (sec + 1) / cfg.sectors;
      if (s1 <= s0) continue;

      std::vector<int> order(s1 - s0);
      std::iota(order.begin(), order.end(), s0);
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return pts[a].curvature > pts[b].curvature; });

      auto pick = [&](int idx, FeatureKind kind) {
        const RawPoint& rp = *pts[idx].pt;
        FeaturePoint fp;
        fp.p = rp.p;
        fp.ring = rp.ring;
        fp.rel_time = rp.rel_time;
        fp.kind = kind;
        (kind == FeatureKind::kEdge ? out.edges : out.planars).push_back(fp);
        // Planar picks use a tighter exclusion zone: smooth surfaces can be
        // sampled densely, while edge picks keep the full curvature window
        // clear to avoid double-picking one discontinuity.
        const int r = kind == FeatureKind::kEdge ? hw : std::max(1, hw / 2);
        for (int j = std::max(0, idx - r); j <= std::min(n - 1, idx + r); ++j) {
          pts[j].suppressed = true;
        }
      };

      int edges = 0;
      for (int idx : order) {
        if (edges >= cfg.max_edges_per_sector) break;
        if (pts[idx].suppressed || pts[idx].curvature <= cfg.edge_thresh) continue;
        pick(idx, FeatureKind::kEdge);
        ++edges;
      }
      int planars = 0;
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (planars >= cfg.max_planars_per_sector) break;
        if (pts[*it].suppressed || pts[*it].curvature >= cfg.planar_thresh) continue;
        pick(*it, FeatureKind::kPlanar);
        ++planars;
      }
    }
  }
  return out;
}

void lidarRelativeTransform(const LocalState& rel, const Extrinsics& extr,
                            Eigen::Matrix3d* R, Eigen::Vector3d* p) {
  const Eigen::Matrix3d R_bb = rel.q.toRotationMatrix();
  *R = extr.R_l_b.transpose() * R_bb * extr.R_l_b;
  *p = extr.R_l_b.transpose() * (R_bb * extr.p_l_b + rel.p - extr.p_l_b);
}

FeatureCloud undistort(const FeatureCloud& features, const LocalState& rel,
                       const Extrinsics& extr) {
  Eigen::Matrix3d R_rel;
  Eigen::Vector3d p_rel;
  lidarRelativeTransform(rel, extr, &R_rel, &p_rel);
  const Eigen::Vector3d theta = so3::logMap(Eigen::Quaterniond(R_rel));

  auto fix = [&](std::vector<FeaturePoint> pts) {
    for (FeaturePoint& fp : pts) {
      const double s = 1.0 - fp.rel_time;  // fraction of motion still ahead
      const Eigen::Matrix3d Rc = so3::expMap(-s * theta).toRotationMatrix();
      fp.p = Rc * fp.p - s * (R_rel.transpose() * p_rel);
    }
    return pts;
  };

  FeatureCloud out;
  out.stamp = features.stamp;
  out.edges = fix(features.edges);
  out.planars = fix(features.planars);
  return out;
}

}  // namespace lins
