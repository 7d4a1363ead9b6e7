// On-disk dataset layout and serialization:
//   <dir>/imu.csv            t,ax,ay,az,wx,wy,wz         (SI units)
//   <dir>/scans/<stamp>.csv  x,y,z,ring,rel_time         one file per sweep
//   <dir>/truth.csv          t,px,py,pz,qx,qy,qz,qw,vx,vy,vz  (optional)
//   <dir>/config.resolved.txt  echoed configuration
// Scan filenames are zero-padded seconds so lexicographic order is stamp order.

#pragma once

#include <string>
#include <vector>

#include "lins/simulator.hpp"

namespace lins {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrajectoryPoint {
  double t = 0.0;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();  // body -> world
};

void writeDataset(const std::string& dir, const SyntheticDataset& ds,
                  const std::string& config_echo);

std::vector<ImuSample> readImuCsv(const std::string& path);
std::vector<TruthSample> readTruthCsv(const std::string& path);

// Sorted scan file paths under <dir>/scans.
std::vector<std::string> listScanFiles(const std::string& dir);
RawScan readScanCsv(const std::string& path);

// TUM format: "t x y z qx qy qz qw", 9 significant digits.
void writeTrajectoryTum(const std::string& path,
                        const std::vector<TrajectoryPoint>& traj);
std::vector<TrajectoryPoint> readTrajectoryTum(const std::string& path);

}  // namespace lins
