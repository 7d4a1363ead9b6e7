#include <doctest.h>

#include <stdexcept>

#include "lins/kdtree.hpp"
#include "lins/measurement.hpp"
#include "oracles.hpp"

using namespace lins;

namespace {

oracle::Se3 lidarSweepTransform(const LocalState& rel, const Extrinsics& extr) {
  const oracle::Se3 T_lb{extr.R_l_b, extr.p_l_b};
  const oracle::Se3 T_bb{rel.q.toRotationMatrix(), rel.p};
  return T_lb.inverse() * T_bb * T_lb;
}

// Two previous-scan clouds living on simple geometry: a vertical pole of edge
// points (rings 0..3) and a horizontal plane of planar points (two rings).
FeatureCloud poleAndFloor() {
  FeatureCloud prev;
  for (int ring = 0; ring < 4; ++ring) {
    FeaturePoint fp;
    fp.p = Eigen::Vector3d(5.0, 2.0, 0.3 * ring);
    fp.ring = ring;
    fp.kind = FeatureKind::kEdge;
    prev.edges.push_back(fp);
  }
  for (int ring = 0; ring < 2; ++ring) {
    for (int i = 0; i < 6; ++i) {
      FeaturePoint fp;
      fp.p = Eigen::Vector3d(3.0 + 0.4 * i, -1.0 - 0.4 * ring, 0.0);
      fp.ring = ring;
      fp.kind = FeatureKind::kPlanar;
      prev.planars.push_back(fp);
    }
  }
  return prev;
}

}  // namespace

TEST_CASE("kd-tree nearest agrees with a linear scan") {
  oracle::Rng rng(51);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 500; ++i) pts.push_back(rng.vec3(10.0));
  const KdTree3d tree(pts);

  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d q = rng.vec3(12.0);
    for (double max_dist : {0.5, 2.0, 100.0}) {
      const int got = tree.nearest(q, max_dist);
      const int want = oracle::nearestLinearScan(pts, q, max_dist);
      if (want < 0) {
        CHECK(got == -1);
      } else {
        REQUIRE(got >= 0);
        CHECK((tree.point(got) - q).norm() ==
              doctest::Approx((pts[want] - q).norm()).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("kd-tree handles empty input, exact hits and reports distance") {
  CHECK(KdTree3d(std::vector<Eigen::Vector3d>{}).nearest(Eigen::Vector3d::Zero(), 1.0) == -1);

  std::vector<Eigen::Vector3d> pts = {{1, 2, 3}, {1, 2, 3}, {4, 5, 6}};
  const KdTree3d tree(pts);
  double dist = -1.0;
  const int idx = tree.nearest(Eigen::Vector3d(1, 2, 3), 0.1, &dist);
  CHECK(idx >= 0);
  CHECK(dist == doctest::Approx(0.0));
}

TEST_CASE("edge residual norm equals the point-to-line distance") {
  oracle::Rng rng(52);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d pa = rng.vec3(5.0);
    const Eigen::Vector3d pb = pa + rng.vec3(2.0);
    if ((pa - pb).norm() < 0.1) continue;
    const Eigen::Vector3d p = rng.vec3(5.0);
    const double dist = oracle::lineDistanceBruteForce(p, pa, pb);
    CHECK(edgeResidual(p, pa, pb).norm() == doctest::Approx(dist).epsilon(1e-6));
  }
  CHECK_THROWS_AS(edgeResidual(Eigen::Vector3d(1, 1, 1), Eigen::Vector3d::Zero(),
                               Eigen::Vector3d::Zero()),
                  std::invalid_argument);
}

TEST_CASE("plane residual magnitude equals the point-to-plane distance") {
  oracle::Rng rng(53);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d pa = rng.vec3(5.0);
    const Eigen::Vector3d pb = pa + rng.vec3(2.0);
    const Eigen::Vector3d pc = pa + rng.vec3(2.0);
    if (0.5 * ((pa - pb).cross(pa - pc)).norm() < 0.05) continue;
    const Eigen::Vector3d p = rng.vec3(5.0);
    const double dist = oracle::planeDistanceBruteForce(p, pa, pb, pc);
    CHECK(std::abs(planeResidual(p, pa, pb, pc)) == doctest::Approx(dist).epsilon(1e-10));
  }
  // Signed: moving along the normal moves the residual linearly.
  const Eigen::Vector3d pa(0, 0, 0), pb(1, 0, 0), pc(0, 1, 0);
  const double r1 = planeResidual(Eigen::Vector3d(0.2, 0.2, 0.5), pa, pb, pc);
  const double r2 = planeResidual(Eigen::Vector3d(0.2, 0.2, -0.5), pa, pb, pc);
  CHECK(r1 == doctest::Approx(-r2).epsilon(1e-12));
  CHECK(std::abs(r1) == doctest::Approx(0.5));

  CHECK_THROWS_AS(
      planeResidual(Eigen::Vector3d(1, 1, 1), pa, pb, 2.0 * pb - pa),
      std::invalid_argument);
}

TEST_CASE("transformPoint matches the conjugated SE(3) oracle") {
  oracle::Rng rng(54);
  for (int i = 0; i < 50; ++i) {
    LocalState rel;
    rel.p = rng.vec3(0.5);
    rel.q = rng.quat();
    Extrinsics extr;
    extr.R_l_b = rng.quat().toRotationMatrix();
    extr.p_l_b = rng.vec3(0.3);
    const Eigen::Vector3d p = rng.vec3(10.0);
    const Eigen::Vector3d got = transformPoint(p, rel, extr);
    const Eigen::Vector3d want = lidarSweepTransform(rel, extr).apply(p);
    CHECK((got - want).norm() < 1e-12);
  }
  // Identity relative state: no motion, point unchanged.
  LocalState id;
  Extrinsics extr;
  extr.p_l_b = Eigen::Vector3d(0.1, 0, 0.2);
  const Eigen::Vector3d p(3, 4, 5);
  CHECK((transformPoint(p, id, extr) - p).norm() < 1e-14);
}

TEST_CASE("MatchIndex ring-restricted queries exclude the anchor") {
  const FeatureCloud prev = poleAndFloor();
  const MatchIndex index(prev, 16);
  CHECK(!index.empty());

  const Eigen::Vector3d q(5.0, 2.0, 0.01);
  const int ia = index.nearestEdge(q, 1.0);
  REQUIRE(ia >= 0);
  CHECK(index.edge(ia).ring == 0);

  const int ib = index.nearestEdgeOnAdjacentRing(q, index.edge(ia).ring, 1.0, ia);
  REQUIRE(ib >= 0);
  CHECK(ib != ia);
  CHECK(index.edge(ib).ring == 1);

  // Planar same-ring query must not return the anchor itself.
  const int pa = index.nearestPlanar(Eigen::Vector3d(3.0, -1.0, 0.0), 1.0);
  REQUIRE(pa >= 0);
  const int pb = index.nearestPlanarOnRing(Eigen::Vector3d(3.0, -1.0, 0.0),
                                           index.planar(pa).ring, 1.0, pa);
  REQUIRE(pb >= 0);
  CHECK(pb != pa);
  CHECK(index.planar(pb).ring == index.planar(pa).ring);
}

TEST_CASE("findCorrespondences builds gated, non-degenerate anchor sets") {
  const FeatureCloud prev = poleAndFloor();
  const MatchIndex index(prev, 16);
  MatchConfig cfg;

  FeatureCloud cur;
  FeaturePoint e;
  e.p = Eigen::Vector3d(5.02, 2.01, 0.15);
  e.ring = 0;
  e.kind = FeatureKind::kEdge;
  cur.edges.push_back(e);
  FeaturePoint far_e = e;
  far_e.p = Eigen::Vector3d(50, 50, 50);  // outside the gate
  cur.edges.push_back(far_e);
  FeaturePoint pl;
  pl.p = Eigen::Vector3d(3.4, -1.2, 0.02);
  pl.ring = 0;
  pl.kind = FeatureKind::kPlanar;
  cur.planars.push_back(pl);

  const auto corrs = findCorrespondences(cur, cur, index, cfg);
  REQUIRE(corrs.size() == 2);

  const Correspondence& edge = corrs[0];
  CHECK(edge.feature.kind == FeatureKind::kEdge);
  CHECK((edge.pa - edge.pb).norm() > 1e-6);
  CHECK((edge.pa - e.p).norm() <= cfg.match_radius);

  const Correspondence& plane = corrs[1];
  CHECK(plane.feature.kind == FeatureKind::kPlanar);
  const double area = 0.5 * ((plane.pa - plane.pb).cross(plane.pa - plane.pc)).norm();
  CHECK(area > 1e-8);
}

TEST_CASE("residuals vanish at the exact transform") {
  oracle::Rng rng(55);
  LocalState rel;
  rel.p = rng.vec3(0.3);
  rel.q = so3::expMap(rng.vec3(0.2));
  Extrinsics extr;
  extr.R_l_b = so3::expMap(rng.vec3(0.2)).toRotationMatrix();
  extr.p_l_b = rng.vec3(0.2);
  const oracle::Se3 T = lidarSweepTransform(rel, extr);

  // Anchors in the previous frame; features are the exact pre-images of points
  // on the anchor geometry.
  const Eigen::Vector3d pa(4, 1, 0), pb(4, 1, 1), pc(5, 1, 0);
  std::vector<Correspondence> corrs;

  Correspondence ce;
  ce.feature.kind = FeatureKind::kEdge;
  ce.feature.p = T.inverse().apply(pa + 0.37 * (pb - pa));
  ce.pa = pa;
  ce.pb = pb;
  corrs.push_back(ce);

  Correspondence cp;
  cp.feature.kind = FeatureKind::kPlanar;
  cp.feature.p = T.inverse().apply(pa + 0.3 * (pb - pa) + 0.4 * (pc - pa));
  cp.pa = pa;
  cp.pb = pb;
  cp.pc = pc;
  corrs.push_back(cp);

  const ResidualSystem sys =
      buildResidualSystem(corrs, rel, ErrorState::Zero(), extr, 0.05);
  CHECK(sys.num_edges == 1);
  CHECK(sys.num_planes == 1);
  CHECK(sys.r.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("measurement Jacobian matches central finite differences") {
  oracle::Rng rng(56);
  for (int trial = 0; trial < 10; ++trial) {
    LocalState prior;
    prior.p = rng.vec3(0.3);
    prior.q = so3::expMap(rng.vec3(0.3));
    Extrinsics extr;
    extr.R_l_b = so3::expMap(rng.vec3(0.2)).toRotationMatrix();
    extr.p_l_b = rng.vec3(0.2);
    // Nonzero delta: the right-Jacobian factor must be exercised.
    ErrorState delta = ErrorState::Zero();
    delta.segment<3>(blk::kP) = rng.vec3(0.05);
    delta.segment<3>(blk::kTheta) = rng.vec3(0.1);

    std::vector<Correspondence> corrs;
    for (int i = 0; i < 3; ++i) {
      Correspondence ce;
      ce.feature.kind = FeatureKind::kEdge;
      ce.feature.p = rng.vec3(6.0);
      ce.pa = rng.vec3(6.0);
      ce.pb = ce.pa + rng.vec3(1.0);
      if ((ce.pa - ce.pb).norm() < 0.2) ce.pb = ce.pa + Eigen::Vector3d(1, 0, 0);
      corrs.push_back(ce);

      Correspondence cp;
      cp.feature.kind = FeatureKind::kPlanar;
      cp.feature.p = rng.vec3(6.0);
      cp.pa = rng.vec3(6.0);
      cp.pb = cp.pa + Eigen::Vector3d(1, 0.1, 0);
      cp.pc = cp.pa + Eigen::Vector3d(0.1, 1, 0);
      corrs.push_back(cp);
    }

    const ResidualSystem sys = buildResidualSystem(corrs, prior, delta, extr, 0.05);

    const double eps = 1e-6;
    for (int j = 0; j < 18; ++j) {
      ErrorState dp = delta, dm = delta;
      dp(j) += eps;
      dm(j) -= eps;
      const Eigen::VectorXd rp = buildResidualSystem(corrs, prior, dp, extr, 0.05).r;
      const Eigen::VectorXd rm = buildResidualSystem(corrs, prior, dm, extr, 0.05).r;
      const Eigen::VectorXd col_fd = (rp - rm) / (2.0 * eps);
      CHECK((col_fd - sys.H.col(j)).cwiseAbs().maxCoeff() < 2e-5);
    }

    // Only the pose columns may be populated.
    CHECK(sys.H.block(0, blk::kV, sys.H.rows(), 3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sys.H.block(0, blk::kBa, sys.H.rows(), 9).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("noise variances follow the residual row geometry") {
  oracle::Rng rng(57);
  const double sigma = 0.05;

  std::vector<Correspondence> corrs;
  Correspondence ce;
  ce.feature.kind = FeatureKind::kEdge;
  ce.feature.p = rng.vec3(5.0);
  ce.pa = Eigen::Vector3d(2, 0, 0);
  ce.pb = Eigen::Vector3d(2, 0, 2);
  corrs.push_back(ce);
  Correspondence cp;
  cp.feature.kind = FeatureKind::kPlanar;
  cp.feature.p = rng.vec3(5.0);
  cp.pa = Eigen::Vector3d(0, 0, 0);
  cp.pb = Eigen::Vector3d(1, 0, 0);
  cp.pc = Eigen::Vector3d(0, 1, 0);
  corrs.push_back(cp);

  const ResidualSystem sys =
      buildResidualSystem(corrs, LocalState{}, ErrorState::Zero(), Extrinsics{}, sigma);
  REQUIRE(sys.noise_var.size() == 4);

  // Edge rows: variance = |row of [pb - pa]x / L|^2 * sigma^2.
  const Eigen::Matrix3d drdp = so3::skew(ce.pb - ce.pa) / (ce.pa - ce.pb).norm();
  for (int i = 0; i < 3; ++i) {
    CHECK(sys.noise_var(i) ==
          doctest::Approx(drdp.row(i).squaredNorm() * sigma * sigma).epsilon(1e-12));
  }
  // Plane row: unit normal, variance = sigma^2 exactly.
  CHECK(sys.noise_var(3) == doctest::Approx(sigma * sigma).epsilon(1e-12));
}

TEST_CASE("buildResidualSystem rejects an empty correspondence set") {
  CHECK_THROWS_AS(buildResidualSystem({}, LocalState{}, ErrorState::Zero(),
                                      Extrinsics{}, 0.05),
                  std::invalid_argument);
}
