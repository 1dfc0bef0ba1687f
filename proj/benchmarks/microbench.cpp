#include <benchmark/benchmark.h>

#include <optional>

#include "symdet/hemisphere.hpp"
#include "symdet/synth.hpp"
#include "symdet/volume.hpp"

namespace {

using namespace symdet;

struct Fixture {
  Fixture(int grid, int channels, int depth)
      : sweep(0.64, 1.23, depth),
        plane(MirrorPlane::from_normal(Eigen::Vector3d(0.0, 0.0, -1.0))) {
    SynthParams params;
    params.height = grid;
    params.width = grid;
    params.channels = channels;
    params.seed = 11;
    params.intrinsics = CameraIntrinsics(grid, grid, grid / 2.0, grid / 2.0);
    scene = generate_scene(params);
    normalized = normalize(scene->scene.features);
    tensor = build_correlation(*normalized);
  }

  std::optional<SyntheticScene> scene;
  std::optional<FeatureMap> normalized;
  std::optional<CorrelationTensor> tensor;
  DepthSweep sweep;
  MirrorPlane plane;
};

Fixture& fixture(int grid, int channels, int depth) {
  static Fixture f64(64, 64, 64);
  static Fixture f32(32, 32, 32);
  if (grid == 64) return f64;
  (void)channels;
  (void)depth;
  return f32;
}

void BM_BuildCorrelation(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  Fixture& f = fixture(grid, grid, grid);
  for (auto _ : state) {
    CorrelationTensor tensor = build_correlation(*f.normalized);
    benchmark::DoNotOptimize(tensor.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid) * grid * grid * grid);
}
BENCHMARK(BM_BuildCorrelation)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BuildVolume(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  Fixture& f = fixture(grid, grid, grid);
  for (auto _ : state) {
    CorrelationVolume volume =
        build_volume(*f.tensor, f.scene->scene.intrinsics, f.plane, f.sweep);
    benchmark::DoNotOptimize(volume.values.data());
  }
  state.SetItemsProcessed(state.iterations() * f.sweep.count * static_cast<long>(grid) * grid);
}
BENCHMARK(BM_BuildVolume)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_GatherVolume4D(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  Fixture& f = fixture(grid, grid, grid);
  FeatureVolume4D out{};
  for (auto _ : state) {
    build_feature_volume_4d(*f.normalized, f.scene->scene.intrinsics, f.plane, f.sweep, out);
    benchmark::DoNotOptimize(out.values.data());
  }
  state.SetItemsProcessed(state.iterations() * f.sweep.count * static_cast<long>(grid) * grid);
}
BENCHMARK(BM_GatherVolume4D)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ReduceScore(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  Fixture& f = fixture(grid, grid, grid);
  const CorrelationVolume volume =
      build_volume(*f.tensor, f.scene->scene.intrinsics, f.plane, f.sweep);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reduce_score(volume, Reducer::kMaxDepth));
  }
}
BENCHMARK(BM_ReduceScore)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Downscale3D(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  Fixture& f = fixture(grid, grid, grid);
  const CorrelationVolume volume =
      build_volume(*f.tensor, f.scene->scene.intrinsics, f.plane, f.sweep);
  const ConvStack stack = ConvStack::random(3);
  for (auto _ : state) {
    std::vector<double> descriptor = downscale3d(volume, stack);
    benchmark::DoNotOptimize(descriptor.data());
  }
}
BENCHMARK(BM_Downscale3D)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FibonacciHemisphere(benchmark::State& state) {
  for (auto _ : state) {
    SphericalLattice lattice = fibonacci_hemisphere(static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(lattice.normals.data());
  }
}
BENCHMARK(BM_FibonacciHemisphere)->Arg(128)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
