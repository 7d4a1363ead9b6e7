// Trajectory evaluation: relative drift and absolute trajectory error after
// first-pose alignment (robocentric odometry is gauge-fixed at the start).

#pragma once

#include <string>
#include <vector>

#include "lins/dataset.hpp"

namespace lins {

struct RuntimeStats {
  double mean_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
  int count = 0;
};

struct MetricsReport {
  double relative_drift_percent = 0.0;  // final gap / distance traveled * 100
  double ate_rmse = 0.0;                // m
  double path_length = 0.0;             // m, over the truth
  double final_error = 0.0;             // m
  int associated_poses = 0;
  RuntimeStats runtime;
  std::vector<int> iteration_histogram;  // index = iterations used
};

// Associate by nearest timestamp (tolerance in seconds), rigidly align the
// estimate to the truth at the first associated pose, then compute ATE RMSE
// and the relative drift. Throws DataError when the spans do not overlap.
MetricsReport evaluateTrajectory(const std::vector<TrajectoryPoint>& estimate,
                                 const std::vector<TrajectoryPoint>& truth,
                                 double assoc_tolerance = 0.01);

RuntimeStats computeRuntimeStats(std::vector<double> per_scan_ms);

}  // namespace lins
