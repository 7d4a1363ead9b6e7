#include "lins/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

extern char** environ;

namespace lins {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string toLower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

Config Config::fromString(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      }
      section = toLower(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = toLower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    cfg.values_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

Config Config::fromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return fromString(ss.str(), path);
}

void Config::applyEnvOverrides(const std::string& prefix) {
  for (char** env = environ; *env != nullptr; ++env) {
    const std::string entry(*env);
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(prefix.size(), eq - prefix.size());
    const std::string value = entry.substr(eq + 1);
    // SECTION_KEY -> section.key (first underscore splits section from key).
    const auto us = key.find('_');
    if (us == std::string::npos) continue;
    key[us] = '.';
    values_[toLower(key)] = value;
  }
}

std::string Config::getString(const std::string& key, const std::string& def) const {
  const auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

double Config::getDouble(const std::string& key, double def) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + it->second + "' as number");
  }
}

int Config::getInt(const std::string& key, int def) const {
  const double v = getDouble(key, static_cast<double>(def));
  return static_cast<int>(v);
}

Eigen::Vector3d Config::getVec3(const std::string& key, const Eigen::Vector3d& def) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  std::istringstream in(it->second);
  Eigen::Vector3d v;
  char comma;
  if (!(in >> v.x() >> comma >> v.y() >> comma >> v.z())) {
    throw ConfigError("config key '" + key + "': expected 'x, y, z', got '" + it->second + "'");
  }
  return v;
}

std::string Config::toString() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) {
    out << key << " = " << value << "\n";
  }
  return out.str();
}

FilterConfig filterConfigFrom(const Config& cfg) {
  FilterConfig f;
  f.max_iterations = cfg.getInt("filter.max_iterations", f.max_iterations);
  f.cost_threshold = cfg.getDouble("filter.cost_threshold", f.cost_threshold);
  f.step_norm_epsilon = cfg.getDouble("filter.step_norm_epsilon", f.step_norm_epsilon);
  f.divergence_factor = cfg.getDouble("filter.divergence_factor", f.divergence_factor);
  f.sigma_lidar = cfg.getDouble("filter.sigma_lidar", f.sigma_lidar);
  f.match.match_radius = cfg.getDouble("filter.match_radius", f.match.match_radius);
  f.match.min_matches = cfg.getInt("filter.min_matches", f.match.min_matches);
  f.ring_count = cfg.getInt("extractor.ring_count", f.ring_count);
  f.sweep_duration = 1.0 / cfg.getDouble("simulator.scan_rate", 1.0 / f.sweep_duration);
  f.degeneracy_rel_eig = cfg.getDouble("filter.degeneracy_rel_eig", f.degeneracy_rel_eig);
  f.noise.sigma_na = cfg.getDouble("noise.sigma_na", f.noise.sigma_na);
  f.noise.sigma_ng = cfg.getDouble("noise.sigma_ng", f.noise.sigma_ng);
  f.noise.sigma_nba = cfg.getDouble("noise.sigma_nba", f.noise.sigma_nba);
  f.noise.sigma_nbg = cfg.getDouble("noise.sigma_nbg", f.noise.sigma_nbg);
  f.init_sigmas.v = cfg.getDouble("init.sigma_v", f.init_sigmas.v);
  f.init_sigmas.ba = cfg.getDouble("init.sigma_ba", f.init_sigmas.ba);
  f.init_sigmas.bg = cfg.getDouble("init.sigma_bg", f.init_sigmas.bg);
  f.init_sigmas.g = cfg.getDouble("init.sigma_g", f.init_sigmas.g);
  f.ba0 = cfg.getVec3("init.accel_bias", f.ba0);
  f.stationary_gyro_std = cfg.getDouble("init.stationary_gyro_std", f.stationary_gyro_std);
  f.stationary_accel_std = cfg.getDouble("init.stationary_accel_std", f.stationary_accel_std);
  return f;
}

ExtractConfig extractConfigFrom(const Config& cfg) {
  ExtractConfig e;
  e.ring_count = cfg.getInt("extractor.ring_count", e.ring_count);
  e.neighbor_half_width = cfg.getInt("extractor.neighbor_half_width", e.neighbor_half_width);
  e.sectors = cfg.getInt("extractor.sectors", e.sectors);
  e.max_edges_per_sector = cfg.getInt("extractor.max_edges_per_sector", e.max_edges_per_sector);
  e.max_planars_per_sector = cfg.getInt("extractor.max_planars_per_sector", e.max_planars_per_sector);
  e.edge_thresh = cfg.getDouble("extractor.edge_thresh", e.edge_thresh);
  e.planar_thresh = cfg.getDouble("extractor.planar_thresh", e.planar_thresh);
  e.min_range = cfg.getDouble("extractor.min_range", e.min_range);
  e.max_range = cfg.getDouble("extractor.max_range", e.max_range);
  return e;
}

Extrinsics extrinsicsFrom(const Config& cfg) {
  Extrinsics e;
  const Eigen::Vector3d rotvec = cfg.getVec3("extrinsics.rotation", Eigen::Vector3d::Zero());
  e.R_l_b = so3::expMap(rotvec).toRotationMatrix();
  e.p_l_b = cfg.getVec3("extrinsics.translation", e.p_l_b);
  return e;
}

SimParams simParamsFrom(const Config& cfg) {
  SimParams p;
  p.world = cfg.getString("simulator.world", p.world);
  p.duration = cfg.getDouble("simulator.duration", p.duration);
  p.imu_rate = cfg.getDouble("simulator.imu_rate", p.imu_rate);
  p.scan_rate = cfg.getDouble("simulator.scan_rate", p.scan_rate);
  p.range_sigma = cfg.getDouble("simulator.range_sigma", p.range_sigma);
  p.seed = static_cast<std::uint64_t>(cfg.getDouble("simulator.seed", static_cast<double>(p.seed)));
  p.ba0 = cfg.getVec3("simulator.accel_bias", p.ba0);
  p.bg0 = cfg.getVec3("simulator.gyro_bias", p.bg0);
  p.noise.sigma_na = cfg.getDouble("noise.sigma_na", p.noise.sigma_na);
  p.noise.sigma_ng = cfg.getDouble("noise.sigma_ng", p.noise.sigma_ng);
  p.noise.sigma_nba = cfg.getDouble("noise.sigma_nba", p.noise.sigma_nba);
  p.noise.sigma_nbg = cfg.getDouble("noise.sigma_nbg", p.noise.sigma_nbg);
  p.lidar.rings = cfg.getInt("extractor.ring_count", p.lidar.rings);
  p.lidar.azimuth_steps = cfg.getInt("simulator.azimuth_steps", p.lidar.azimuth_steps);
  p.lidar.min_range = cfg.getDouble("extractor.min_range", p.lidar.min_range);
  p.lidar.max_range = cfg.getDouble("extractor.max_range", p.lidar.max_range);
  p.extrinsics = extrinsicsFrom(cfg);
  return p;
}

std::string defaultConfigText() {
  return R"(# lins default configuration; every value shown is the built-in default.

[simulator]
world = warehouse          # corridor | warehouse | single_plane
duration = 60.0            # s
imu_rate = 200.0           # Hz
scan_rate = 10.0           # Hz; sweep duration is 1/scan_rate
range_sigma = 0.03         # m, lidar range noise
seed = 7
azimuth_steps = 720        # lidar columns per sweep
accel_bias = 0.02, -0.01, 0.015    # true accelerometer bias, m/s^2
gyro_bias = 0.002, -0.001, 0.0015  # true gyroscope bias, rad/s

[noise]
sigma_na = 0.02            # accel white noise, m/s^2/sqrt(Hz)
sigma_ng = 0.005           # gyro white noise, rad/s/sqrt(Hz)
sigma_nba = 1e-4           # accel bias walk, m/s^3/sqrt(Hz)
sigma_nbg = 1e-5           # gyro bias walk, rad/s^2/sqrt(Hz)

[extractor]
ring_count = 16
neighbor_half_width = 5    # curvature window / suppression radius
sectors = 6                # azimuth sectors per ring
max_edges_per_sector = 4
max_planars_per_sector = 30
edge_thresh = 0.1          # normalized curvature
planar_thresh = 0.1
min_range = 0.5            # m
max_range = 80.0           # m

[filter]
max_iterations = 10
cost_threshold = 0.005     # m, mean absolute residual stop criterion
step_norm_epsilon = 1e-6
divergence_factor = 10.0   # flag diverged when final cost > factor * initial
sigma_lidar = 0.05         # m, per-point measurement noise
match_radius = 1.0         # m, correspondence gate
min_matches = 10
degeneracy_rel_eig = 1e-4  # pose-information eigenvalue ratio gate

[init]
duration = 1.0             # s of stationary data used for initialization
accel_bias = 0.02, -0.01, 0.015    # off-line calibrated accel bias
sigma_v = 0.1              # initial stddev, m/s
sigma_ba = 0.05            # m/s^2
sigma_bg = 0.01            # rad/s
sigma_g = 0.05             # m/s^2
stationary_gyro_std = 0.2    # rad/s; above per-sample gyro noise sigma*sqrt(rate)
stationary_accel_std = 1.0   # m/s^2

[extrinsics]
rotation = 0, 0, 0         # lidar->IMU rotation vector, rad
translation = 0, 0, 0.2    # lidar origin in IMU frame, m
)";
}

}  // namespace lins
