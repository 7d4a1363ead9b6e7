#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "lins/config.hpp"
#include "lins/dataset.hpp"
#include "lins/eval.hpp"
#include "oracles.hpp"

using namespace lins;
namespace fs = std::filesystem;

namespace {

fs::path tempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lins_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TrajectoryPoint tp(double t, const Eigen::Vector3d& p,
                   const Eigen::Quaterniond& q = Eigen::Quaterniond::Identity()) {
  TrajectoryPoint out;
  out.t = t;
  out.p = p;
  out.q = q;
  return out;
}

}  // namespace

TEST_CASE("config parses sections, comments and typed accessors") {
  const Config cfg = Config::fromString(R"(
# top comment
[Filter]
max_iterations = 7   # trailing comment
sigma_lidar = 0.125

[extrinsics]
translation = 0.1, -0.2, 0.3
)");
  CHECK(cfg.getInt("filter.max_iterations", 0) == 7);
  CHECK(cfg.getDouble("filter.sigma_lidar", 0.0) == doctest::Approx(0.125));
  CHECK(cfg.getDouble("filter.absent", 1.5) == doctest::Approx(1.5));
  const Eigen::Vector3d v = cfg.getVec3("extrinsics.translation", Eigen::Vector3d::Zero());
  CHECK((v - Eigen::Vector3d(0.1, -0.2, 0.3)).norm() < 1e-15);
}

TEST_CASE("config rejects malformed input with line context") {
  CHECK_THROWS_WITH_AS(Config::fromString("[filter\nx = 1\n", "bad.cfg"),
                       doctest::Contains("bad.cfg:1"), ConfigError);
  CHECK_THROWS_WITH_AS(Config::fromString("[a]\njust words\n", "bad.cfg"),
                       doctest::Contains("bad.cfg:2"), ConfigError);
  CHECK_THROWS_WITH_AS(Config::fromString("= 3\n", "bad.cfg"),
                       doctest::Contains("empty key"), ConfigError);

  const Config cfg = Config::fromString("[a]\nx = notanumber\nv = 1, 2\n");
  CHECK_THROWS_AS(cfg.getDouble("a.x", 0.0), ConfigError);
  CHECK_THROWS_AS(cfg.getVec3("a.v", Eigen::Vector3d::Zero()), ConfigError);
  CHECK(cfg.getString("a.x", "") == "notanumber");
}

TEST_CASE("config file round-trip and missing file error") {
  const fs::path dir = tempDir("config");
  const fs::path path = dir / "test.cfg";
  {
    std::ofstream out(path);
    out << "[filter]\nmax_iterations = 3\n";
  }
  CHECK(Config::fromFile(path.string()).getInt("filter.max_iterations", 0) == 3);
  CHECK_THROWS_AS(Config::fromFile((dir / "nope.cfg").string()), ConfigError);
}

TEST_CASE("environment variables override file values") {
  Config cfg = Config::fromString("[filter]\nmax_iterations = 10\n");
  ::setenv("LINS_FILTER_MAX_ITERATIONS", "4", 1);
  ::setenv("LINS_SIMULATOR_SEED", "99", 1);
  cfg.applyEnvOverrides("LINS_");
  ::unsetenv("LINS_FILTER_MAX_ITERATIONS");
  ::unsetenv("LINS_SIMULATOR_SEED");

  CHECK(cfg.getInt("filter.max_iterations", 0) == 4);
  CHECK(cfg.getInt("simulator.seed", 0) == 99);
}

TEST_CASE("the default config text parses and matches the struct defaults") {
  const Config cfg = Config::fromString(defaultConfigText());
  const FilterConfig f = filterConfigFrom(cfg);
  CHECK(f.max_iterations == FilterConfig{}.max_iterations);
  CHECK(f.sigma_lidar == doctest::Approx(FilterConfig{}.sigma_lidar));
  CHECK(f.sweep_duration == doctest::Approx(0.1));

  const ExtractConfig e = extractConfigFrom(cfg);
  CHECK(e.ring_count == 16);
  CHECK(e.max_planars_per_sector == ExtractConfig{}.max_planars_per_sector);

  const SimParams s = simParamsFrom(cfg);
  CHECK(s.world == "warehouse");
  CHECK(s.imu_rate == doctest::Approx(200.0));
  CHECK((s.ba0 - Eigen::Vector3d(0.02, -0.01, 0.015)).norm() < 1e-12);
  // The lidar is mounted 0.2 m above the IMU by default.
  CHECK((s.extrinsics.p_l_b - Eigen::Vector3d(0, 0, 0.2)).norm() < 1e-12);

  const Extrinsics x = extrinsicsFrom(cfg);
  CHECK((x.R_l_b - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("dataset write / read round-trip") {
  SimParams params;
  params.world = "single_plane";
  params.duration = 1.5;
  params.imu_rate = 100.0;
  params.scan_rate = 10.0;
  params.seed = 3;
  const SyntheticDataset ds = generateDataset(params);

  const fs::path dir = tempDir("dataset");
  writeDataset(dir.string(), ds, "echo = 1\n");

  const auto imu = readImuCsv((dir / "imu.csv").string());
  REQUIRE(imu.size() == ds.imu.size());
  CHECK(imu[17].t == doctest::Approx(ds.imu[17].t).epsilon(1e-12));
  CHECK((imu[17].a_m - ds.imu[17].a_m).norm() < 1e-7);
  CHECK((imu[17].w_m - ds.imu[17].w_m).norm() < 1e-7);

  const auto truth = readTruthCsv((dir / "truth.csv").string());
  REQUIRE(truth.size() == ds.truth.size());
  CHECK((truth[42].p - ds.truth[42].p).norm() < 1e-12);
  CHECK(truth[42].q.angularDistance(ds.truth[42].q) < 1e-12);

  const auto files = listScanFiles(dir.string());
  REQUIRE(files.size() == ds.scans.size());
  const RawScan scan = readScanCsv(files[3]);
  CHECK(scan.stamp == doctest::Approx(ds.scans[3].stamp).epsilon(1e-9));
  REQUIRE(scan.points.size() == ds.scans[3].points.size());
  CHECK((scan.points[10].p - ds.scans[3].points[10].p).norm() < 1e-6);
  CHECK(scan.points[10].ring == ds.scans[3].points[10].ring);

  CHECK(fs::exists(dir / "config.resolved.txt"));
}

TEST_CASE("IMU reader rejects malformed and non-monotone rows") {
  const fs::path dir = tempDir("badimu");
  {
    std::ofstream out(dir / "imu.csv");
    out << "t,ax,ay,az,wx,wy,wz\n0.0,0,0,9.81,0,0,0\nnot,a,row\n";
  }
  CHECK_THROWS_AS(readImuCsv((dir / "imu.csv").string()), DataError);
  {
    std::ofstream out(dir / "imu.csv");
    out << "t,ax,ay,az,wx,wy,wz\n"
        << "0.10,0,0,9.81,0,0,0\n"
        << "0.05,0,0,9.81,0,0,0\n";
  }
  CHECK_THROWS_WITH_AS(readImuCsv((dir / "imu.csv").string()),
                       doctest::Contains("non-monotone"), DataError);
  CHECK_THROWS_AS(readImuCsv((dir / "missing.csv").string()), DataError);
  CHECK_THROWS_AS(listScanFiles(dir.string()), DataError);
}

TEST_CASE("TUM trajectory round-trip") {
  oracle::Rng rng(61);
  std::vector<TrajectoryPoint> traj;
  for (int i = 0; i < 20; ++i) traj.push_back(tp(0.1 * i, rng.vec3(10.0), rng.quat()));

  const fs::path dir = tempDir("tum");
  const std::string path = (dir / "trajectory.txt").string();
  writeTrajectoryTum(path, traj);
  const auto back = readTrajectoryTum(path);

  REQUIRE(back.size() == traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    CHECK(back[i].t == doctest::Approx(traj[i].t).epsilon(1e-9));
    CHECK((back[i].p - traj[i].p).norm() < 1e-6);
    CHECK(back[i].q.angularDistance(traj[i].q) < 1e-7);
  }
}

TEST_CASE("evaluateTrajectory is zero on identical trajectories") {
  std::vector<TrajectoryPoint> traj;
  for (int i = 0; i < 10; ++i) traj.push_back(tp(i, Eigen::Vector3d(2.0 * i, 0, 0)));
  const MetricsReport report = evaluateTrajectory(traj, traj);
  CHECK(report.ate_rmse == doctest::Approx(0.0));
  CHECK(report.relative_drift_percent == doctest::Approx(0.0));
  CHECK(report.path_length == doctest::Approx(18.0));
  CHECK(report.associated_poses == 10);
}

TEST_CASE("evaluateTrajectory reports a 5 percent drift on a 3-pose case") {
  const std::vector<TrajectoryPoint> truth = {
      tp(0, {0, 0, 0}), tp(1, {10, 0, 0}), tp(2, {20, 0, 0})};
  const std::vector<TrajectoryPoint> est = {
      tp(0, {0, 0, 0}), tp(1, {10, 0.4, 0}), tp(2, {20, 1, 0})};
  const MetricsReport report = evaluateTrajectory(est, truth);
  CHECK(report.path_length == doctest::Approx(20.0));
  CHECK(report.final_error == doctest::Approx(1.0));
  CHECK(report.relative_drift_percent == doctest::Approx(5.0));
}

TEST_CASE("evaluateTrajectory is invariant to a rigid transform of the estimate") {
  oracle::Rng rng(62);
  std::vector<TrajectoryPoint> truth;
  for (int i = 0; i < 30; ++i) {
    truth.push_back(tp(0.1 * i, rng.vec3(5.0), rng.quat()));
  }
  std::vector<TrajectoryPoint> est = truth;
  est[29].p += Eigen::Vector3d(0.3, 0, 0);  // some genuine error
  const double base = evaluateTrajectory(est, truth).ate_rmse;

  // Move the whole estimate by a rigid transform; first-pose alignment must
  // remove it entirely.
  const Eigen::Quaterniond q = rng.quat();
  const Eigen::Vector3d t = rng.vec3(100.0);
  for (TrajectoryPoint& p : est) {
    p.p = q * p.p + t;
    p.q = q * p.q;
  }
  CHECK(evaluateTrajectory(est, truth).ate_rmse == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("evaluateTrajectory association respects the tolerance") {
  const std::vector<TrajectoryPoint> truth = {
      tp(0, {0, 0, 0}), tp(1, {1, 0, 0}), tp(2, {2, 0, 0})};
  const std::vector<TrajectoryPoint> shifted = {
      tp(0.002, {0, 0, 0}), tp(1.002, {1, 0, 0}), tp(5.0, {9, 9, 9})};
  const MetricsReport report = evaluateTrajectory(shifted, truth);
  CHECK(report.associated_poses == 2);  // the 5.0 s pose finds no partner

  const std::vector<TrajectoryPoint> disjoint = {tp(100, {0, 0, 0}), tp(101, {1, 0, 0})};
  CHECK_THROWS_AS(evaluateTrajectory(disjoint, truth), DataError);
  CHECK_THROWS_AS(evaluateTrajectory({}, truth), DataError);
}

TEST_CASE("runtime stats") {
  const RuntimeStats empty = computeRuntimeStats({});
  CHECK(empty.count == 0);
  CHECK(empty.mean_ms == 0.0);

  std::vector<double> ms;
  for (int i = 1; i <= 100; ++i) ms.push_back(double(i));
  const RuntimeStats stats = computeRuntimeStats(ms);
  CHECK(stats.count == 100);
  CHECK(stats.mean_ms == doctest::Approx(50.5));
  CHECK(stats.max_ms == doctest::Approx(100.0));
  CHECK(stats.p95_ms == doctest::Approx(95.0).epsilon(0.02));
}
