#include "lins/dataset.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace lins {
namespace {

std::string scanFileName(double stamp) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%012.6f.csv", stamp);
  return buf;
}

std::ifstream openOrThrow(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  return in;
}

}  // namespace

void writeDataset(const std::string& dir, const SyntheticDataset& ds,
                  const std::string& config_echo) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "scans", ec);
  if (ec) throw DataError("cannot create dataset directory: " + dir);

  {
    std::ofstream out(fs::path(dir) / "imu.csv");
    if (!out) throw DataError("cannot write imu.csv under " + dir);
    out << "t,ax,ay,az,wx,wy,wz\n";
    char line[256];
    for (const ImuSample& s : ds.imu) {
      std::snprintf(line, sizeof(line), "%.9f,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                    s.t, s.a_m.x(), s.a_m.y(), s.a_m.z(), s.w_m.x(), s.w_m.y(),
                    s.w_m.z());
      out << line;
    }
  }

  for (const RawScan& scan : ds.scans) {
    std::ofstream out(fs::path(dir) / "scans" / scanFileName(scan.stamp));
    if (!out) throw DataError("cannot write scan file under " + dir);
    out << "x,y,z,ring,rel_time\n";
    char line[256];
    for (const RawPoint& pt : scan.points) {
      std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%d,%.9g\n", pt.p.x(),
                    pt.p.y(), pt.p.z(), pt.ring, pt.rel_time);
      out << line;
    }
  }

  if (!ds.truth.empty()) {
    std::ofstream out(fs::path(dir) / "truth.csv");
    if (!out) throw DataError("cannot write truth.csv under " + dir);
    out << "t,px,py,pz,qx,qy,qz,qw,vx,vy,vz\n";
    char line[512];
    for (const TruthSample& s : ds.truth) {
      std::snprintf(line, sizeof(line),
                    "%.9f,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    s.t, s.p.x(), s.p.y(), s.p.z(), s.q.x(), s.q.y(), s.q.z(),
                    s.q.w(), s.v.x(), s.v.y(), s.v.z());
      out << line;
    }
  }

  std::ofstream echo(fs::path(dir) / "config.resolved.txt");
  echo << config_echo;
}

std::vector<ImuSample> readImuCsv(const std::string& path) {
  std::ifstream in = openOrThrow(path);
  std::vector<ImuSample> out;
  std::string line;
  std::getline(in, line);  // header
  double last_t = -1e300;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ImuSample s;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &s.t,
                    &s.a_m.x(), &s.a_m.y(), &s.a_m.z(), &s.w_m.x(), &s.w_m.y(),
                    &s.w_m.z()) != 7) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed IMU row");
    }
    if (s.t <= last_t) {
      throw DataError(path + ":" + std::to_string(lineno) + ": non-monotone timestamp");
    }
    last_t = s.t;
    out.push_back(s);
  }
  return out;
}

std::vector<TruthSample> readTruthCsv(const std::string& path) {
  std::ifstream in = openOrThrow(path);
  std::vector<TruthSample> out;
  std::string line;
  std::getline(in, line);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    TruthSample s;
    double qx, qy, qz, qw;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf",
                    &s.t, &s.p.x(), &s.p.y(), &s.p.z(), &qx, &qy, &qz, &qw,
                    &s.v.x(), &s.v.y(), &s.v.z()) != 11) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed truth row");
    }
    s.q = Eigen::Quaterniond(qw, qx, qy, qz).normalized();
    out.push_back(s);
  }
  return out;
}

std::vector<std::string> listScanFiles(const std::string& dir) {
  const fs::path scan_dir = fs::path(dir) / "scans";
  if (!fs::is_directory(scan_dir)) {
    throw DataError("missing scans/ directory under " + dir);
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(scan_dir)) {
    if (entry.path().extension() == ".csv") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

RawScan readScanCsv(const std::string& path) {
  std::ifstream in = openOrThrow(path);
  RawScan scan;
  scan.stamp = std::atof(fs::path(path).stem().string().c_str());
  std::string line;
  std::getline(in, line);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    RawPoint pt;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%d,%lf", &pt.p.x(), &pt.p.y(),
                    &pt.p.z(), &pt.ring, &pt.rel_time) != 5) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed scan row");
    }
    scan.points.push_back(pt);
  }
  return scan;
}

void writeTrajectoryTum(const std::string& path,
                        const std::vector<TrajectoryPoint>& traj) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trajectory file: " + path);
  char line[512];
  for (const TrajectoryPoint& tp : traj) {
    std::snprintf(line, sizeof(line), "%.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g\n",
                  tp.t, tp.p.x(), tp.p.y(), tp.p.z(), tp.q.x(), tp.q.y(),
                  tp.q.z(), tp.q.w());
    out << line;
  }
}

std::vector<TrajectoryPoint> readTrajectoryTum(const std::string& path) {
  std::ifstream in = openOrThrow(path);
  std::vector<TrajectoryPoint> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    TrajectoryPoint tp;
    double qx, qy, qz, qw;
    if (std::sscanf(line.c_str(), "%lf %lf %lf %lf %lf %lf %lf %lf", &tp.t,
                    &tp.p.x(), &tp.p.y(), &tp.p.z(), &qx, &qy, &qz, &qw) != 8) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed trajectory row");
    }
    tp.q = Eigen::Quaterniond(qw, qx, qy, qz).normalized();
    out.push_back(tp);
  }
  return out;
}

}  // namespace lins
