#include "lins/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace lins {

void KdTree3d::build(std::vector<Eigen::Vector3d> points) {
  points_ = std::move(points);
  nodes_.clear();
  nodes_.reserve(points_.size());
  std::vector<int> idx(points_.size());
  std::iota(idx.begin(), idx.end(), 0);
  root_ = buildRecursive(idx, 0, static_cast<int>(idx.size()), 0);
}

int KdTree3d::buildRecursive(std::vector<int>& idx, int lo, int hi, int depth) {
  if (lo >= hi) return -1;
  const int axis = depth % 3;
  const int mid = (lo + hi) / 2;
  std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
  const int node_id = static_cast<int>(nodes_.size());
  nodes_.push_back({idx[mid], axis, -1, -1});
  nodes_[node_id].left = buildRecursive(idx, lo, mid, depth + 1);
  nodes_[node_id].right = buildRecursive(idx, mid + 1, hi, depth + 1);
  return node_id;
}

int KdTree3d::nearest(const Eigen::Vector3d& query, double max_dist,
                      double* dist_out) const {
  int best = -1;
  double best_sq = max_dist * max_dist;
  search(root_, query, &best, &best_sq);
  if (best >= 0 && dist_out != nullptr) {
    *dist_out = std::sqrt(best_sq);
  }
  return best;
}

void KdTree3d::search(int node, const Eigen::Vector3d& query, int* best,
                      double* best_sq) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const double d_sq = (points_[n.index] - query).squaredNorm();
  if (d_sq <= *best_sq) {
    // <= so a zero-radius hit on an exact duplicate still registers.
    *best_sq = d_sq;
    *best = n.index;
  }
  const double plane_delta = query[n.axis] - points_[n.index][n.axis];
  const int near_side = plane_delta <= 0.0 ? n.left : n.right;
  const int far_side = plane_delta <= 0.0 ? n.right : n.left;
  search(near_side, query, best, best_sq);
  if (plane_delta * plane_delta <= *best_sq) {
    search(far_side, query, best, best_sq);
  }
}

}  // namespace lins
