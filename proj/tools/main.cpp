// lins command-line front end: dataset simulation, odometry runs, evaluation.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lins/config.hpp"
#include "lins/dataset.hpp"
#include "lins/eval.hpp"
#include "lins/runner.hpp"
#include "lins/simulator.hpp"

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 ok, 2 config error, 3 data error, 4 filter divergence.
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDiverged = 4;

lins::Config loadConfig(const std::string& path) {
  lins::Config cfg = path.empty() ? lins::Config::fromString(lins::defaultConfigText(), "<defaults>")
                                  : lins::Config::fromFile(path);
  cfg.applyEnvOverrides();
  return cfg;
}

int cmdSimulate(const std::string& config_path, const std::string& out_dir,
                long long seed_override) {
  lins::Config cfg = loadConfig(config_path);
  if (seed_override >= 0) cfg.set("simulator.seed", std::to_string(seed_override));
  const lins::SimParams params = lins::simParamsFrom(cfg);
  std::cout << "simulating world '" << params.world << "', " << params.duration
            << " s, seed " << params.seed << "\n";
  const lins::SyntheticDataset ds = lins::generateDataset(params);
  lins::writeDataset(out_dir, ds, cfg.toString());
  std::cout << "wrote " << ds.imu.size() << " IMU samples, " << ds.scans.size()
            << " scans to " << out_dir << "\n";
  return 0;
}

int cmdRun(const std::string& dataset_dir, const std::string& config_path,
           const std::string& out_dir, int max_scans) {
  lins::Config cfg = loadConfig(config_path);
  const lins::RunResult res = lins::runOdometry(dataset_dir, cfg, out_dir, max_scans);
  std::cout << "processed " << res.scans_processed << " scans ("
            << res.degenerate_scans << " degenerate, " << res.diverged_scans
            << " diverged)\n";
  std::cout << "mean LIO runtime " << res.metrics.runtime.mean_ms << " ms/scan\n";
  if (res.has_truth_metrics) {
    std::cout << "relative drift " << res.metrics.relative_drift_percent
              << " %, ATE RMSE " << res.metrics.ate_rmse << " m\n";
  }
  std::cout << "outputs: " << res.trajectory_path << ", " << res.metrics_path
            << ", " << res.diagnostics_path << "\n";
  return res.diverged_scans > 0 ? kExitDiverged : 0;
}

int cmdEval(const std::string& traj_path, const std::string& truth_path,
            const std::string& out_path) {
  const auto est = lins::readTrajectoryTum(traj_path);

  std::vector<lins::TrajectoryPoint> truth;
  if (fs::path(truth_path).extension() == ".csv") {
    for (const lins::TruthSample& s : lins::readTruthCsv(truth_path)) {
      truth.push_back({s.t, s.p, s.q});
    }
  } else {
    truth = lins::readTrajectoryTum(truth_path);
  }

  const lins::MetricsReport report = lins::evaluateTrajectory(est, truth);
  std::cout << "associated poses: " << report.associated_poses << "\n"
            << "path length:      " << report.path_length << " m\n"
            << "final error:      " << report.final_error << " m\n"
            << "relative drift:   " << report.relative_drift_percent << " %\n"
            << "ATE RMSE:         " << report.ate_rmse << " m\n";
  if (!out_path.empty()) {
    nlohmann::json j;
    j["relative_drift_percent"] = report.relative_drift_percent;
    j["ate_rmse"] = report.ate_rmse;
    j["path_length"] = report.path_length;
    j["final_error"] = report.final_error;
    j["associated_poses"] = report.associated_poses;
    std::ofstream out(out_path);
    out << j.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lins: robocentric lidar-inertial odometry"};
  app.require_subcommand(1);

  std::string config_path;
  std::string dataset_dir;
  std::string out_dir = "out";
  long long seed = -1;
  int max_scans = -1;

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim->add_option("--config", config_path, "configuration file");
  sim->add_option("--out", out_dir, "output dataset directory")->required();
  sim->add_option("--seed", seed, "override simulator.seed");

  auto* run = app.add_subcommand("run", "run odometry over a dataset");
  run->add_option("--dataset", dataset_dir, "dataset directory")->required();
  run->add_option("--config", config_path, "configuration file");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--max-scans", max_scans, "process at most this many scans");

  std::string traj_path, truth_path, report_path;
  auto* eval = app.add_subcommand("eval", "evaluate a trajectory against truth");
  eval->add_option("--trajectory", traj_path, "estimated trajectory (TUM)")->required();
  eval->add_option("--truth", truth_path, "ground truth (TUM or truth.csv)")->required();
  eval->add_option("--out", report_path, "optional metrics JSON output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmdSimulate(config_path, out_dir, seed);
    if (run->parsed()) return cmdRun(dataset_dir, config_path, out_dir, max_scans);
    if (eval->parsed()) return cmdEval(traj_path, truth_path, report_path);
  } catch (const lins::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const lins::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const lins::FilterDivergedError& e) {
    std::cerr << "filter diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
