// End-to-end odometry run over an on-disk dataset: initialization, streaming
// IMU/scan playback through the filter, trajectory/diagnostics/metrics output.

#pragma once

#include <string>

#include "lins/config.hpp"
#include "lins/eval.hpp"

namespace lins {

struct FilterDivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunResult {
  int scans_processed = 0;
  int degenerate_scans = 0;
  int diverged_scans = 0;
  int cost_increase_scans = 0;   // final iterated cost above initial cost
  double max_gravity_norm_error = 0.0;
  double min_covariance_eigenvalue = 0.0;  // most negative seen over the run
  MetricsReport metrics;          // drift/ATE filled only when truth exists
  bool has_truth_metrics = false;
  std::string trajectory_path;
  std::string metrics_path;
  std::string diagnostics_path;
};

// Executes the full pipeline and writes trajectory.txt (TUM), metrics.json
// and diagnostics.csv under out_dir. max_scans < 0 means all scans.
// check_consistency additionally monitors covariance eigenvalues per scan
// (costs one 18x18 eigendecomposition per scan).
RunResult runOdometry(const std::string& dataset_dir, const Config& config,
                      const std::string& out_dir, int max_scans = -1,
                      bool check_consistency = false);

}  // namespace lins
