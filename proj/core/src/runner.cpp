#include "lins/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "lins/dataset.hpp"
#include "lins/filter.hpp"

#include <json.hpp>

namespace fs = std::filesystem;

namespace lins {
namespace {

constexpr double kMaxTimestampGap = 0.5;  // s, abort beyond this

const char* statusName(ScanStatus s) {
  switch (s) {
    case ScanStatus::kOk: return "ok";
    case ScanStatus::kDegenerate: return "degenerate";
    case ScanStatus::kDiverged: return "diverged";
  }
  return "unknown";
}

TrajectoryPoint toTrajectoryPoint(double t, const GlobalPose& pose) {
  TrajectoryPoint tp;
  tp.t = t;
  tp.p = pose.bodyPositionInWorld();
  tp.q = pose.bodyOrientationInWorld();
  return tp;
}

}  // namespace

RunResult runOdometry(const std::string& dataset_dir, const Config& config,
                      const std::string& out_dir, int max_scans,
                      bool check_consistency) {
  const std::vector<ImuSample> imu = readImuCsv((fs::path(dataset_dir) / "imu.csv").string());
  const std::vector<std::string> scan_files = listScanFiles(dataset_dir);
  if (imu.empty() || scan_files.empty()) {
    throw DataError("runOdometry: dataset has no IMU samples or no scans");
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("runOdometry: cannot create output directory " + out_dir);

  const FilterConfig fcfg = filterConfigFrom(config);
  const ExtractConfig ecfg = extractConfigFrom(config);
  const Extrinsics extr = extrinsicsFrom(config);
  const double init_duration = config.getDouble("init.duration", 1.0);
  const double sweep = fcfg.sweep_duration;

  // Stationary initialization window at the head of the IMU stream.
  std::size_t init_end = 0;
  while (init_end < imu.size() &&
         imu[init_end].t - imu.front().t <= init_duration) {
    ++init_end;
  }
  LinsFilter filter(fcfg, extr);
  filter.initialize(std::span<const ImuSample>(imu.data(), init_end));

  RunResult result;
  result.trajectory_path = (fs::path(out_dir) / "trajectory.txt").string();
  result.metrics_path = (fs::path(out_dir) / "metrics.json").string();
  result.diagnostics_path = (fs::path(out_dir) / "diagnostics.csv").string();
  result.min_covariance_eigenvalue = 0.0;

  std::ofstream diag(result.diagnostics_path);
  diag << "stamp,status,iterations,initial_residual,final_residual,"
          "edge_matches,plane_matches,pose_info_ratio,runtime_ms,gravity_norm\n";

  std::vector<TrajectoryPoint> trajectory;
  std::vector<double> runtimes_ms;
  std::vector<int> iter_hist(fcfg.max_iterations + 1, 0);

  std::size_t imu_idx = init_end;
  bool wrote_initial = false;
  double last_scan_end = -1.0;

  for (const std::string& scan_file : scan_files) {
    if (max_scans >= 0 && result.scans_processed >= max_scans) break;
    RawScan scan = readScanCsv(scan_file);
    const double t_end = scan.stamp + sweep;
    if (scan.stamp < filter.stateTime() - 1e-6) continue;  // inside the init window
    if (last_scan_end >= 0.0 && scan.stamp - last_scan_end > kMaxTimestampGap) {
      throw DataError("runOdometry: scan timestamp gap exceeds 0.5 s at " +
                      std::to_string(scan.stamp));
    }
    last_scan_end = t_end;

    if (!wrote_initial) {
      trajectory.push_back(toTrajectoryPoint(scan.stamp, filter.globalPose()));
      wrote_initial = true;
    }

    // Feature extraction is outside the timed LIO section.
    const FeatureCloud features = extractFeatures(scan, ecfg);

    const auto t0 = std::chrono::steady_clock::now();
    // Feed IMU through the sweep; split the straddling interval at the
    // boundary so propagation lands exactly on the scan time-step.
    while (imu_idx < imu.size() && imu[imu_idx].t <= t_end) {
      if (imu[imu_idx].t - filter.stateTime() > kMaxTimestampGap) {
        throw DataError("runOdometry: IMU timestamp gap exceeds 0.5 s at " +
                        std::to_string(imu[imu_idx].t));
      }
      filter.processImu(imu[imu_idx]);
      ++imu_idx;
    }
    if (imu_idx < imu.size() && t_end - filter.stateTime() > 1e-9) {
      filter.processImu(interpolateImu(imu[imu_idx - 1], imu[imu_idx], t_end));
    }

    const OdometryOutput out = filter.processScan(features);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    runtimes_ms.push_back(ms);
    trajectory.push_back(toTrajectoryPoint(out.stamp, out.global_pose));
    ++result.scans_processed;
    if (out.status == ScanStatus::kDegenerate) ++result.degenerate_scans;
    if (out.status == ScanStatus::kDiverged) ++result.diverged_scans;
    if (out.num_edge_matches + out.num_plane_matches > 0 &&
        out.mean_residual > out.initial_residual) {
      ++result.cost_increase_scans;
    }
    if (out.iterations_used < static_cast<int>(iter_hist.size())) {
      ++iter_hist[out.iterations_used];
    }

    const double g_err = std::abs(filter.prior().g.norm() - kGravityNorm);
    result.max_gravity_norm_error = std::max(result.max_gravity_norm_error, g_err);
    if (check_consistency) {
      Eigen::SelfAdjointEigenSolver<Covariance18> eig(filter.covariance());
      result.min_covariance_eigenvalue =
          std::min(result.min_covariance_eigenvalue, eig.eigenvalues()(0));
    }

    char row[256];
    std::snprintf(row, sizeof(row), "%.6f,%s,%d,%.9g,%.9g,%d,%d,%.3g,%.3f,%.9f\n",
                  out.stamp, statusName(out.status), out.iterations_used,
                  out.initial_residual, out.mean_residual, out.num_edge_matches,
                  out.num_plane_matches, out.pose_info_ratio, ms,
                  filter.prior().g.norm());
    diag << row;

    if (!filter.prior().p.allFinite() || !filter.globalPose().p_w_b.allFinite()) {
      throw FilterDivergedError("runOdometry: non-finite state at scan " +
                                std::to_string(out.stamp));
    }
  }

  writeTrajectoryTum(result.trajectory_path, trajectory);

  result.metrics.runtime = computeRuntimeStats(runtimes_ms);
  result.metrics.iteration_histogram = iter_hist;

  const std::string truth_path = (fs::path(dataset_dir) / "truth.csv").string();
  if (fs::exists(truth_path)) {
    const std::vector<TruthSample> truth = readTruthCsv(truth_path);
    std::vector<TrajectoryPoint> truth_traj;
    truth_traj.reserve(truth.size());
    for (const TruthSample& s : truth) truth_traj.push_back({s.t, s.p, s.q});
    const RuntimeStats runtime = result.metrics.runtime;
    const auto hist = result.metrics.iteration_histogram;
    result.metrics = evaluateTrajectory(trajectory, truth_traj);
    result.metrics.runtime = runtime;
    result.metrics.iteration_histogram = hist;
    result.has_truth_metrics = true;
  }

  nlohmann::json j;
  j["scans_processed"] = result.scans_processed;
  j["degenerate_scans"] = result.degenerate_scans;
  j["diverged_scans"] = result.diverged_scans;
  j["cost_increase_scans"] = result.cost_increase_scans;
  j["max_gravity_norm_error"] = result.max_gravity_norm_error;
  j["runtime_ms"] = {{"mean", result.metrics.runtime.mean_ms},
                     {"p95", result.metrics.runtime.p95_ms},
                     {"max", result.metrics.runtime.max_ms},
                     {"count", result.metrics.runtime.count}};
  j["iteration_histogram"] = result.metrics.iteration_histogram;
  if (result.has_truth_metrics) {
    j["relative_drift_percent"] = result.metrics.relative_drift_percent;
    j["ate_rmse"] = result.metrics.ate_rmse;
    j["path_length"] = result.metrics.path_length;
    j["final_error"] = result.metrics.final_error;
  }
  std::ofstream mfile(result.metrics_path);
  mfile << j.dump(2) << "\n";

  return result;
}

}  // namespace lins
