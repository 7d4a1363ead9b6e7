#include "lins/eval.hpp"

#include <algorithm>
#include <cmath>

namespace lins {

MetricsReport evaluateTrajectory(const std::vector<TrajectoryPoint>& estimate,
                                 const std::vector<TrajectoryPoint>& truth,
                                 double assoc_tolerance) {
  if (estimate.empty() || truth.empty()) {
    throw DataError("evaluateTrajectory: empty trajectory");
  }

  // Nearest-timestamp association; truth is sorted by construction.
  struct Pair {
    const TrajectoryPoint* est;
    const TrajectoryPoint* ref;
  };
  std::vector<Pair> pairs;
  std::size_t j = 0;
  for (const TrajectoryPoint& e : estimate) {
    while (j + 1 < truth.size() &&
           std::abs(truth[j + 1].t - e.t) <= std::abs(truth[j].t - e.t)) {
      ++j;
    }
    if (std::abs(truth[j].t - e.t) <= assoc_tolerance) {
      pairs.push_back({&e, &truth[j]});
    }
  }
  if (pairs.size() < 2) {
    throw DataError("evaluateTrajectory: trajectory and truth spans do not overlap");
  }

  // Rigid alignment at the first associated pose only.
  const Eigen::Quaterniond q_align = pairs.front().ref->q * pairs.front().est->q.conjugate();
  const Eigen::Vector3d t_align =
      pairs.front().ref->p - q_align * pairs.front().est->p;

  MetricsReport report;
  report.associated_poses = static_cast<int>(pairs.size());

  double sq_sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Eigen::Vector3d p_aligned = q_align * pairs[i].est->p + t_align;
    const double err = (p_aligned - pairs[i].ref->p).norm();
    sq_sum += err * err;
    if (i + 1 == pairs.size()) report.final_error = err;
    if (i > 0) {
      report.path_length += (pairs[i].ref->p - pairs[i - 1].ref->p).norm();
    }
  }
  report.ate_rmse = std::sqrt(sq_sum / pairs.size());
  report.relative_drift_percent =
      report.path_length > 0.0 ? 100.0 * report.final_error / report.path_length : 0.0;
  return report;
}

RuntimeStats computeRuntimeStats(std::vector<double> per_scan_ms) {
  RuntimeStats stats;
  stats.count = static_cast<int>(per_scan_ms.size());
  if (per_scan_ms.empty()) return stats;
  double sum = 0.0;
  for (double v : per_scan_ms) sum += v;
  stats.mean_ms = sum / per_scan_ms.size();
  std::sort(per_scan_ms.begin(), per_scan_ms.end());
  stats.max_ms = per_scan_ms.back();
  const std::size_t idx = static_cast<std::size_t>(0.95 * (per_scan_ms.size() - 1));
  stats.p95_ms = per_scan_ms[idx];
  return stats;
}

}  // namespace lins
