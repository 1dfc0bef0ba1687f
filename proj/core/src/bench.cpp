#include "symdet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "symdet/errors.hpp"
#include "symdet/hemisphere.hpp"
#include "symdet/synth.hpp"
#include "symdet/volume.hpp"
#include "threading.hpp"

namespace symdet {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double median(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  return n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  AffineFit fit;
  const double denom = n * sxx - sx * sx;
  fit.slope_ms_per_plane = (n * sxy - sx * sy) / denom;
  fit.intercept_ms = (sy - fit.slope_ms_per_plane * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  const double mean_y = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double predicted = fit.intercept_ms + fit.slope_ms_per_plane * x[i];
    ss_res += (y[i] - predicted) * (y[i] - predicted);
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace

BenchReport run_bench(const BenchShape& shape, const std::vector<int>& plane_counts, int repeats,
                      int threads) {
  if (repeats < 3) {
    throw std::invalid_argument("benchmark needs at least 3 repeats");
  }
  if (plane_counts.empty()) {
    throw std::invalid_argument("benchmark needs at least one plane count");
  }
  for (int count : plane_counts) {
    if (count < 1) throw std::invalid_argument("plane counts must be positive");
  }
  if (shape.height % 8 != 0 || shape.width % 8 != 0 || shape.depth % 4 != 0) {
    throw std::invalid_argument("benchmark shape must divide as H,W by 8 and D by 4");
  }

  SynthParams params;
  params.height = shape.height;
  params.width = shape.width;
  params.channels = shape.channels;
  params.seed = 7;
  params.intrinsics = CameraIntrinsics(shape.width, shape.width, shape.width / 2.0,
                                       shape.height / 2.0);
  const SyntheticScene scene = generate_scene(params);
  const FeatureMap normalized = normalize(scene.scene.features);
  const CameraIntrinsics& intrinsics = scene.scene.intrinsics;
  const DepthSweep sweep(0.64, 1.23, shape.depth);

  const int max_planes = *std::max_element(plane_counts.begin(), plane_counts.end());
  const SphericalLattice lattice = cap_lattice(Eigen::Vector3d(0, 0, -1), 90.0, max_planes);
  std::vector<MirrorPlane> planes;
  planes.reserve(max_planes);
  for (const Eigen::Vector3d& n : lattice.normals) {
    planes.push_back(MirrorPlane::canonicalized(n));
  }

  // Correctness gate: both paths must agree before anything is timed.
  const CorrelationTensor tensor = build_correlation(normalized);
  std::vector<double> corr_scores(max_planes), base_scores(max_planes);
  {
    FeatureVolume4D gathered{};
    for (int i = 0; i < max_planes; ++i) {
      corr_scores[i] =
          reduce_score(build_volume(tensor, intrinsics, planes[i], sweep), Reducer::kMaxDepth);
      build_feature_volume_4d(normalized, intrinsics, planes[i], sweep, gathered);
      base_scores[i] =
          reduce_feature_volume_4d(gathered, intrinsics, planes[i], sweep, Reducer::kMaxDepth);
    }
  }
  double max_diff = 0.0;
  for (int i = 0; i < max_planes; ++i) {
    if (std::isinf(corr_scores[i]) && std::isinf(base_scores[i])) continue;
    max_diff = std::max(max_diff, std::abs(corr_scores[i] - base_scores[i]));
  }
  const auto argmax = [](const std::vector<double>& s) {
    return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
  };
  if (max_diff > 1e-4 || argmax(corr_scores) != argmax(base_scores)) {
    throw BenchGateError("correlation and 4D baseline paths disagree (max score difference " +
                         std::to_string(max_diff) + ")");
  }

  BenchReport report;
  report.shape = shape;
  report.repeats = repeats;
  report.threads = resolve_threads(threads == 0 ? 1 : threads);
  report.element_ratio = 2ULL * shape.channels;
  report.correlation_elements = static_cast<std::uint64_t>(shape.height) * shape.width *
                                shape.height * shape.width;
  report.volume_elements =
      static_cast<std::uint64_t>(shape.depth) * shape.height * shape.width;
  report.baseline_elements = report.volume_elements * 2ULL * shape.channels;
  report.baseline_elements_c32 = report.volume_elements * 32ULL;
  report.max_score_difference = max_diff;

  const int worker_threads = report.threads;
  std::vector<double> sink(max_planes, 0.0);

  for (int count : plane_counts) {
    std::vector<double> corr_one_time, corr_total, base_total;
    for (int rep = -1; rep < repeats; ++rep) {  // rep -1 is the warm-up
      // Correlation path: one shared tensor, then light per-plane volumes.
      const auto corr_start = Clock::now();
      const CorrelationTensor timed_tensor = build_correlation(normalized);
      const double one_time = ms_since(corr_start);
      parallel_for(count, worker_threads, [&](int i) {
        sink[i] = reduce_score(build_volume(timed_tensor, intrinsics, planes[i], sweep),
                               Reducer::kMaxDepth);
      });
      const double corr_ms = ms_since(corr_start);

      // Baseline path: gather-and-concatenate per plane, reduce on the fly.
      const auto base_start = Clock::now();
      if (worker_threads <= 1) {
        FeatureVolume4D gathered{};
        for (int i = 0; i < count; ++i) {
          build_feature_volume_4d(normalized, intrinsics, planes[i], sweep, gathered);
          sink[i] =
              reduce_feature_volume_4d(gathered, intrinsics, planes[i], sweep, Reducer::kMaxDepth);
        }
      } else {
        parallel_for(count, worker_threads, [&](int i) {
          const FeatureVolume4D gathered =
              build_feature_volume_4d(normalized, intrinsics, planes[i], sweep);
          sink[i] =
              reduce_feature_volume_4d(gathered, intrinsics, planes[i], sweep, Reducer::kMaxDepth);
        });
      }
      const double base_ms = ms_since(base_start);

      if (rep >= 0) {
        corr_one_time.push_back(one_time);
        corr_total.push_back(corr_ms);
        base_total.push_back(base_ms);
      }
    }

    BenchRun run;
    run.plane_count = count;
    run.correlation.one_time_ms = median(corr_one_time);
    run.correlation.total_ms = median(corr_total);
    run.correlation.per_plane_ms =
        (run.correlation.total_ms - run.correlation.one_time_ms) / count;
    run.correlation.planes_per_second = 1000.0 * count / run.correlation.total_ms;
    run.correlation.one_time_bytes = report.correlation_elements * sizeof(float);
    run.correlation.per_plane_bytes =
        report.volume_elements * (sizeof(float) + sizeof(std::uint8_t));
    run.baseline.one_time_ms = 0.0;
    run.baseline.total_ms = median(base_total);
    run.baseline.per_plane_ms = run.baseline.total_ms / count;
    run.baseline.planes_per_second = 1000.0 * count / run.baseline.total_ms;
    run.baseline.one_time_bytes = 0;
    run.baseline.per_plane_bytes = report.baseline_elements * sizeof(float);
    run.speedup = run.correlation.planes_per_second / run.baseline.planes_per_second;
    report.runs.push_back(run);
  }

  if (report.runs.size() >= 3) {
    std::vector<double> xs, corr_ys, base_ys;
    for (const BenchRun& run : report.runs) {
      xs.push_back(run.plane_count);
      corr_ys.push_back(run.correlation.total_ms);
      base_ys.push_back(run.baseline.total_ms);
    }
    report.correlation_fit = fit_affine(xs, corr_ys);
    report.baseline_fit = fit_affine(xs, base_ys);
  }
  return report;
}

}  // namespace symdet
