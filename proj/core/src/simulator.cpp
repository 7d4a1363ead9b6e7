#include "lins/simulator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lins {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Quintic smoothstep and derivatives on [0, 1].
double smoothstep(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }
double smoothstepD1(double s) { return s * s * (30.0 + s * (-60.0 + 30.0 * s)); }

// Integral of smoothstep from 0 to s.
double smoothstepInt(double s) {
  return s * s * s * s * (2.5 + s * (-3.0 + s));
}

// Warp: tau(t) with rate r(t) = smoothstep ramp after the stationary lead-in.
struct Warp {
  double tau = 0.0;   // warped time
  double rate = 0.0;  // d tau / dt
  double accel = 0.0; // d2 tau / dt2
};

Warp warpAt(double t, double t0, double tr) {
  Warp w;
  if (t <= t0) return w;
  if (t < t0 + tr) {
    const double s = (t - t0) / tr;
    w.tau = tr * smoothstepInt(s);
    w.rate = smoothstep(s);
    w.accel = smoothstepD1(s) / tr;
    return w;
  }
  w.tau = tr * smoothstepInt(1.0) + (t - t0 - tr);
  w.rate = 1.0;
  w.accel = 0.0;
  return w;
}

}  // namespace

double AxisShape::value(double s) const {
  double v = constant + linear * s;
  for (const SinTerm& term : sins) v += term.amp * std::sin(term.omega * s + term.phase);
  return v;
}

double AxisShape::d1(double s) const {
  double v = linear;
  for (const SinTerm& term : sins)
    v += term.amp * term.omega * std::cos(term.omega * s + term.phase);
  return v;
}

double AxisShape::d2(double s) const {
  double v = 0.0;
  for (const SinTerm& term : sins)
    v -= term.amp * term.omega * term.omega * std::sin(term.omega * s + term.phase);
  return v;
}

TrajectorySpec::Sample TrajectorySpec::at(double t) const {
  const Warp w = warpAt(t, stationary_time, ramp_time);
  const double s = w.tau;

  Sample out;
  const Eigen::Vector3d f(x.value(s), y.value(s), z.value(s));
  const Eigen::Vector3d f1(x.d1(s), y.d1(s), z.d1(s));
  const Eigen::Vector3d f2(x.d2(s), y.d2(s), z.d2(s));
  // Offset so the body sits at `start` while stationary.
  const Eigen::Vector3d f0(x.value(0.0), y.value(0.0), z.value(0.0));
  out.pos = start + f - f0;
  out.vel = f1 * w.rate;
  out.acc = f2 * w.rate * w.rate + f1 * w.accel;
  out.yaw = yaw.value(s) - yaw.value(0.0);
  out.yaw_rate = yaw.d1(s) * w.rate;
  return out;
}

Eigen::Quaterniond TrajectorySpec::bodyOrientation(double t) const {
  const double y = at(t).yaw;
  return Eigen::Quaterniond(Eigen::AngleAxisd(y, Eigen::Vector3d::UnitZ()));
}

PlanePatch makePatch(const Eigen::Vector3d& p0, const Eigen::Vector3d& normal,
                     const Eigen::Vector3d& u_hint, double eu, double ev) {
  PlanePatch patch;
  patch.p0 = p0;
  patch.n = normal.normalized();
  patch.u = (u_hint - u_hint.dot(patch.n) * patch.n).normalized();
  patch.v = patch.n.cross(patch.u);
  patch.eu = eu;
  patch.ev = ev;
  return patch;
}

std::vector<ImuSample> synthImu(const TrajectorySpec& traj, double rate,
                                const NoiseParams& noise,
                                const Eigen::Vector3d& ba0,
                                const Eigen::Vector3d& bg0, std::uint64_t seed) {
  if (rate < 50.0 || rate > 1000.0) {
    throw std::invalid_argument("synthImu: rate outside [50, 1000] Hz");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> randn(0.0, 1.0);
  auto gauss3 = [&]() {
    return Eigen::Vector3d(randn(rng), randn(rng), randn(rng));
  };

  const double dt = 1.0 / rate;
  const double sqrt_dt = std::sqrt(dt);
  const Eigen::Vector3d g_w(0.0, 0.0, -kGravityNorm);

  Eigen::Vector3d ba = ba0;
  Eigen::Vector3d bg = bg0;
  std::vector<ImuSample> out;
  const int n = static_cast<int>(traj.duration * rate) + 1;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    const TrajectorySpec::Sample s = traj.at(t);
    const Eigen::Matrix3d R_w_b = traj.bodyOrientation(t).conjugate().toRotationMatrix();

    ImuSample m;
    m.t = t;
    m.a_m = R_w_b * (s.acc - g_w) + ba + (noise.sigma_na / sqrt_dt) * gauss3();
    m.w_m = Eigen::Vector3d(0.0, 0.0, s.yaw_rate) + bg +
            (noise.sigma_ng / sqrt_dt) * gauss3();
    out.push_back(m);

    ba += noise.sigma_nba * sqrt_dt * gauss3();
    bg += noise.sigma_nbg * sqrt_dt * gauss3();
  }
  return out;
}

RawScan synthScan(const TrajectorySpec& traj, const WorldModel& world,
                  const Extrinsics& extr, double t_start, double sweep,
                  const LidarModel& lidar, double range_sigma,
                  std::mt19937_64& rng) {
  if (sweep <= 0.0) {
    throw std::invalid_argument("synthScan: sweep must be positive");
  }
  std::normal_distribution<double> randn(0.0, 1.0);

  RawScan scan;
  scan.stamp = t_start;

  const double el0 = lidar.elevation_min_deg * kPi / 180.0;
  const double el_step = lidar.rings > 1
      ? (lidar.elevation_max_deg - lidar.elevation_min_deg) * kPi / 180.0 / (lidar.rings - 1)
      : 0.0;

  // Column emission poses are shared across rings; precompute them.
  std::vector<Eigen::Matrix3d> R_cols(lidar.azimuth_steps);
  std::vector<Eigen::Vector3d> p_cols(lidar.azimuth_steps);
  std::vector<double> rel_times(lidar.azimuth_steps);
  for (int col = 0; col < lidar.azimuth_steps; ++col) {
    const double rel = lidar.azimuth_steps > 1
        ? static_cast<double>(col) / (lidar.azimuth_steps - 1) : 0.0;
    rel_times[col] = rel;
    const double t = t_start + rel * sweep;
    const TrajectorySpec::Sample s = traj.at(t);
    const Eigen::Matrix3d R_b_w = traj.bodyOrientation(t).toRotationMatrix();
    R_cols[col] = R_b_w * extr.R_l_b;           // lidar -> world
    p_cols[col] = s.pos + R_b_w * extr.p_l_b;   // lidar origin in world
  }

  for (int ring = 0; ring < lidar.rings; ++ring) {
    const double el = el0 + ring * el_step;
    const double ce = std::cos(el), se = std::sin(el);
    for (int col = 0; col < lidar.azimuth_steps; ++col) {
      const double az = 2.0 * kPi * col / lidar.azimuth_steps;
      const Eigen::Vector3d d_l(ce * std::cos(az), ce * std::sin(az), se);
      const Eigen::Vector3d d_w = R_cols[col] * d_l;
      const Eigen::Vector3d& origin = p_cols[col];

      double best = std::numeric_limits<double>::infinity();
      for (const PlanePatch& patch : world.planes) {
        const double denom = d_w.dot(patch.n);
        if (std::abs(denom) < 1e-12) continue;
        const double range = (patch.p0 - origin).dot(patch.n) / denom;
        if (range <= 0.0 || range >= best) continue;
        const Eigen::Vector3d hit = origin + range * d_w - patch.p0;
        if (std::abs(hit.dot(patch.u)) > patch.eu) continue;
        if (std::abs(hit.dot(patch.v)) > patch.ev) continue;
        best = range;
      }
      if (!std::isfinite(best)) continue;
      if (range_sigma > 0.0) best += range_sigma * randn(rng);
      if (best < lidar.min_range || best > lidar.max_range) continue;

      RawPoint pt;
      pt.p = best * d_l;
      pt.ring = ring;
      pt.rel_time = rel_times[col];
      scan.points.push_back(pt);
    }
  }
  return scan;
}

TruthSample truthAt(const TrajectorySpec& traj, double t) {
  const TrajectorySpec::Sample s = traj.at(t);
  TruthSample out;
  out.t = t;
  out.p = s.pos;
  out.q = traj.bodyOrientation(t);
  out.v = s.vel;
  return out;
}

LocalState truthRelative(const TrajectorySpec& traj, double t_k, double t_k1) {
  if (t_k < 0.0 || t_k1 < 0.0 || t_k > traj.duration || t_k1 > traj.duration) {
    throw std::invalid_argument("truthRelative: timestamp outside trajectory span");
  }
  const TrajectorySpec::Sample s0 = traj.at(t_k);
  const TrajectorySpec::Sample s1 = traj.at(t_k1);
  const Eigen::Quaterniond q_b0_w = traj.bodyOrientation(t_k);
  const Eigen::Quaterniond q_b1_w = traj.bodyOrientation(t_k1);
  const Eigen::Quaterniond q_w_b0 = q_b0_w.conjugate();

  LocalState rel;
  rel.p = q_w_b0 * (s1.pos - s0.pos);
  rel.v = q_w_b0 * s1.vel;
  rel.q = so3::quatMul(q_w_b0, q_b1_w);
  rel.g = q_w_b0 * Eigen::Vector3d(0.0, 0.0, -kGravityNorm);
  return rel;
}

WorldModel corridorWorld() {
  WorldModel w;
  const Eigen::Vector3d ux = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d uy = Eigen::Vector3d::UnitY();
  // Ground plus two long walls; planar-rich, edge-poor.
  w.planes.push_back(makePatch({60, 0, 0}, Eigen::Vector3d::UnitZ(), ux, 80, 5));
  w.planes.push_back(makePatch({60, 4, 2.5}, -Eigen::Vector3d::UnitY(), ux, 80, 2.5));
  w.planes.push_back(makePatch({60, -4, 2.5}, Eigen::Vector3d::UnitY(), ux, 80, 2.5));
  // End caps plus door-frame pillars every 8 m. Without faces perpendicular
  // to the corridor axis the travel direction is unobservable from planar
  // matches alone and the estimate drifts freely along x.
  w.planes.push_back(makePatch({140, 0, 2.5}, -ux, uy, 5, 2.5));
  w.planes.push_back(makePatch({-20, 0, 2.5}, ux, uy, 5, 2.5));
  auto addPillar = [&](double cx, double cy) {
    const double hw = 0.3;   // half-width
    const double hh = 1.25;  // half-height
    w.planes.push_back(makePatch({cx + hw, cy, hh}, ux, uy, hw, hh));
    w.planes.push_back(makePatch({cx - hw, cy, hh}, -ux, uy, hw, hh));
    w.planes.push_back(makePatch({cx, cy + hw, hh}, uy, ux, hw, hh));
    w.planes.push_back(makePatch({cx, cy - hw, hh}, -uy, ux, hw, hh));
  };
  for (int k = 0; k < 26; ++k) {
    const double x = -16.0 + 6.0 * k;
    addPillar(x, 3.4);
    addPillar(x + 3.0, -3.4);
  }
  return w;
}

WorldModel warehouseWorld() {
  WorldModel w;
  const Eigen::Vector3d ux = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d uy = Eigen::Vector3d::UnitY();
  w.planes.push_back(makePatch({0, 16, 0}, Eigen::Vector3d::UnitZ(), ux, 45, 45));
  // Arena walls.
  w.planes.push_back(makePatch({45, 16, 3}, -ux, uy, 45, 3));
  w.planes.push_back(makePatch({-45, 16, 3}, ux, uy, 45, 3));
  w.planes.push_back(makePatch({0, 61, 3}, -uy, ux, 45, 3));
  w.planes.push_back(makePatch({0, -29, 3}, uy, ux, 45, 3));

  // Boxes around and inside the loop; vertical faces meet in edge lines.
  auto addBox = [&](double cx, double cy, double sx, double sy, double h) {
    w.planes.push_back(makePatch({cx + sx / 2, cy, h / 2}, ux, uy, sy / 2, h / 2));
    w.planes.push_back(makePatch({cx - sx / 2, cy, h / 2}, -ux, uy, sy / 2, h / 2));
    w.planes.push_back(makePatch({cx, cy + sy / 2, h / 2}, uy, ux, sx / 2, h / 2));
    w.planes.push_back(makePatch({cx, cy - sy / 2, h / 2}, -uy, ux, sx / 2, h / 2));
    w.planes.push_back(makePatch({cx, cy, h}, Eigen::Vector3d::UnitZ(), ux, sx / 2, sy / 2));
  };
  addBox(0.0, 16.0, 6.0, 6.0, 3.0);     // loop center
  addBox(24.0, 6.0, 4.0, 5.0, 2.5);
  addBox(26.0, 28.0, 5.0, 4.0, 3.5);
  addBox(-2.0, 42.0, 6.0, 4.0, 2.0);
  addBox(-25.0, 27.0, 4.0, 6.0, 3.0);
  addBox(-24.0, 4.0, 5.0, 5.0, 2.5);
  addBox(2.0, -10.0, 6.0, 4.0, 3.0);
  addBox(36.0, 16.0, 4.0, 4.0, 2.0);
  return w;
}

WorldModel singlePlaneWorld() {
  WorldModel w;
  w.planes.push_back(makePatch(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ(),
                               Eigen::Vector3d::UnitX(), 1e4, 1e4));
  return w;
}

TrajectorySpec corridorTrajectory(double duration) {
  TrajectorySpec traj;
  traj.duration = duration;
  traj.start = Eigen::Vector3d(-5.0, 0.0, 1.2);
  traj.x.linear = 2.0;
  traj.y.sins.push_back({0.5, 0.15, 0.0});
  traj.yaw.sins.push_back({0.08, 0.12, 0.0});
  return traj;
}

TrajectorySpec warehouseTrajectory(double duration) {
  TrajectorySpec traj;
  traj.duration = duration;
  traj.start = Eigen::Vector3d(0.0, 0.0, 1.2);
  // Circle of radius 16 m at ~2 m/s, heading along the tangent.
  const double radius = 16.0;
  const double omega = 0.125;
  traj.x.sins.push_back({radius, omega, 0.0});
  traj.y.constant = radius;
  traj.y.sins.push_back({radius, omega, -kPi / 2.0});
  traj.yaw.linear = omega;
  traj.z.sins.push_back({0.05, 0.3, 0.0});  // mild vertical bob
  return traj;
}

TrajectorySpec singlePlaneTrajectory(double duration) {
  TrajectorySpec traj;
  traj.duration = duration;
  traj.start = Eigen::Vector3d(0.0, 0.0, 1.2);
  traj.x.linear = 1.0;
  return traj;
}

SyntheticDataset generateDataset(const SimParams& params) {
  WorldModel world;
  TrajectorySpec traj;
  if (params.world == "corridor") {
    world = corridorWorld();
    traj = corridorTrajectory(params.duration);
  } else if (params.world == "warehouse") {
    world = warehouseWorld();
    traj = warehouseTrajectory(params.duration);
  } else if (params.world == "single_plane") {
    world = singlePlaneWorld();
    traj = singlePlaneTrajectory(params.duration);
  } else {
    throw std::invalid_argument("generateDataset: unknown world preset '" + params.world + "'");
  }

  SyntheticDataset ds;
  ds.imu = synthImu(traj, params.imu_rate, params.noise, params.ba0, params.bg0,
                    params.seed);

  const double sweep = 1.0 / params.scan_rate;
  std::mt19937_64 scan_rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
  const int n_scans = static_cast<int>((params.duration - sweep) * params.scan_rate);
  ds.scans.reserve(n_scans);
  for (int k = 0; k < n_scans; ++k) {
    const double t0 = k * sweep;
    ds.scans.push_back(synthScan(traj, world, params.extrinsics, t0, sweep,
                                 params.lidar, params.range_sigma, scan_rng));
  }

  for (const ImuSample& s : ds.imu) {
    ds.truth.push_back(truthAt(traj, s.t));
  }
  return ds;
}

}  // namespace lins
