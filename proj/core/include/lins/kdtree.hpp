// Small exact 3D kd-tree for nearest-neighbor queries on feature clouds.

#pragma once

#include <vector>

#include <Eigen/Core>

namespace lins {

class KdTree3d {
 public:
  KdTree3d() = default;
  explicit KdTree3d(std::vector<Eigen::Vector3d> points) { build(std::move(points)); }

  void build(std::vector<Eigen::Vector3d> points);

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }
  const Eigen::Vector3d& point(int index) const { return points_[index]; }

  // Index of the exact nearest point, or -1 when the tree is empty or no
  // point lies within max_dist.
  int nearest(const Eigen::Vector3d& query, double max_dist,
              double* dist_out = nullptr) const;

 private:
  struct Node {
    int index = -1;   // point stored at this node
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int buildRecursive(std::vector<int>& idx, int lo, int hi, int depth);
  void search(int node, const Eigen::Vector3d& query, int* best,
              double* best_sq) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace lins
