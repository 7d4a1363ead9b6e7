// Microbenchmarks for the per-scan hot path: kd-tree construction and queries,
// residual system assembly, IMU propagation and the full scan update.

#include <benchmark/benchmark.h>

#include <random>

#include "lins/config.hpp"
#include "lins/filter.hpp"
#include "lins/kdtree.hpp"
#include "lins/measurement.hpp"
#include "lins/simulator.hpp"

using namespace lins;

namespace {

std::vector<Eigen::Vector3d> randomPoints(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  return pts;
}

void BM_KdTreeBuild(benchmark::State& state) {
  const auto pts = randomPoints(int(state.range(0)), 1);
  for (auto _ : state) {
    KdTree3d tree(pts);
    benchmark::DoNotOptimize(tree);
  }
}
BENCHMARK(BM_KdTreeBuild)->Arg(500)->Arg(3000);

void BM_KdTreeQuery(benchmark::State& state) {
  const KdTree3d tree(randomPoints(3000, 1));
  const auto queries = randomPoints(1000, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.nearest(queries[i++ % queries.size()], 2.0));
  }
}
BENCHMARK(BM_KdTreeQuery);

void BM_ResidualAssembly(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  auto v3 = [&]() { return Eigen::Vector3d(u(rng), u(rng), u(rng)); };

  std::vector<Correspondence> corrs;
  for (int i = 0; i < int(state.range(0)); ++i) {
    Correspondence c;
    c.feature.kind = (i % 25 == 0) ? FeatureKind::kEdge : FeatureKind::kPlanar;
    c.feature.p = v3();
    c.pa = v3();
    c.pb = c.pa + Eigen::Vector3d(1, 0.2, 0);
    c.pc = c.pa + Eigen::Vector3d(0.2, 1, 0);
    corrs.push_back(c);
  }
  LocalState prior;
  prior.p = Eigen::Vector3d(0.2, 0.0, 0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        buildResidualSystem(corrs, prior, ErrorState::Zero(), Extrinsics{}, 0.05));
  }
}
BENCHMARK(BM_ResidualAssembly)->Arg(500)->Arg(2500);

void BM_ImuPropagation(benchmark::State& state) {
  FilterConfig cfg;
  LinsFilter filter(cfg, Extrinsics{});
  std::vector<ImuSample> init;
  for (int i = 0; i <= 200; ++i) {
    ImuSample s;
    s.t = i / 200.0;
    s.a_m = Eigen::Vector3d(0, 0, kGravityNorm);
    init.push_back(s);
  }
  filter.initialize(init);

  double t = 1.0;
  for (auto _ : state) {
    ImuSample s;
    t += 0.005;
    s.t = t;
    s.a_m = Eigen::Vector3d(0.1, 0, kGravityNorm);
    s.w_m = Eigen::Vector3d(0, 0, 0.1);
    filter.processImu(s);
  }
}
BENCHMARK(BM_ImuPropagation);

void BM_ProcessScan(benchmark::State& state) {
  Config cfg = Config::fromString(defaultConfigText());
  SimParams params = simParamsFrom(cfg);
  params.duration = 8.0;
  const SyntheticDataset ds = generateDataset(params);
  const ExtractConfig ecfg = extractConfigFrom(cfg);
  const FilterConfig fcfg = filterConfigFrom(cfg);

  std::vector<FeatureCloud> features;
  for (const RawScan& scan : ds.scans) features.push_back(extractFeatures(scan, ecfg));

  for (auto _ : state) {
    state.PauseTiming();
    LinsFilter filter(fcfg, params.extrinsics);
    std::vector<ImuSample> window;
    std::size_t i = 0;
    while (i < ds.imu.size() && ds.imu[i].t <= 1.0) window.push_back(ds.imu[i++]);
    filter.initialize(window);
    state.ResumeTiming();

    for (std::size_t k = 0; k < ds.scans.size(); ++k) {
      if (ds.scans[k].stamp < filter.stateTime()) continue;
      const double t_end = ds.scans[k].stamp + fcfg.sweep_duration;
      while (i < ds.imu.size() && ds.imu[i].t <= t_end + 1e-9) {
        filter.processImu(ds.imu[i++]);
      }
      benchmark::DoNotOptimize(filter.processScan(features[k]));
    }
  }
  state.SetItemsProcessed(state.iterations() * int64_t(ds.scans.size()));
}
BENCHMARK(BM_ProcessScan)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
