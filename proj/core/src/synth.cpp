#include "symdet/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "symdet/errors.hpp"
#include "symdet/rng.hpp"

namespace symdet {

namespace {

constexpr int kNormalTrials = 64;

struct PairSample {
  Eigen::Vector3d first;
  Eigen::Vector3d second;
  int first_x, first_y;
  int second_x, second_y;
};

Eigen::Vector3d sample_hemisphere_normal(RngStream& rng) {
  const double z = -rng.uniform();
  const double radius = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  Eigen::Vector3d n(radius * std::cos(theta), radius * std::sin(theta), z);
  return n / n.norm();
}

}  // namespace

SyntheticScene generate_scene(const SynthParams& params) {
  if (params.n_pairs < 1) {
    throw std::invalid_argument("scene generation needs at least one mirror pair");
  }
  if (params.n_distractors < 0 || params.noise_sigma < 0.0) {
    throw std::invalid_argument("distractor count and noise sigma must be non-negative");
  }
  if (params.height < 3 || params.width < 3 || params.channels < 1) {
    throw std::invalid_argument("scene grid must be at least 3x3 with one channel");
  }
  if (!(params.d_min > 0.0) || !(params.d_max > params.d_min)) {
    throw std::invalid_argument("scene depth range requires 0 < d_min < d_max");
  }

  RngStream rng(params.seed);
  const CameraIntrinsics& intrinsics = params.intrinsics;
  const int width = params.width;
  const int height = params.height;
  // Interior splats keep every bilinear tap of a near-hit inside the grid.
  const double lo_u = 1.0, hi_u = width - 2.0;
  const double lo_v = 1.0, hi_v = height - 2.0;

  std::vector<PairSample> pairs;
  Eigen::Vector3d gt_normal = Eigen::Vector3d::UnitZ() * -1.0;
  bool found = false;
  const long attempt_budget = 1000L + 400L * params.n_pairs;

  for (int trial = 0; trial < kNormalTrials && !found; ++trial) {
    gt_normal = sample_hemisphere_normal(rng);
    const MirrorPlane plane = MirrorPlane::from_normal(gt_normal);
    pairs.clear();
    for (long attempt = 0; attempt < attempt_budget && static_cast<int>(pairs.size()) < params.n_pairs;
         ++attempt) {
      const int px = rng.uniform_int(1, width - 2);
      const int py = rng.uniform_int(1, height - 2);
      const double d = rng.uniform(params.d_min, params.d_max);
      const Eigen::Vector4d first = backproject(intrinsics, PixelDepthPoint{double(px), double(py), d});
      const Eigen::Vector4d second = reflect_point(plane, first);
      if (!(second.z() >= params.d_min) || !(second.z() <= params.d_max)) continue;
      const PixelDepthPoint projected = project(intrinsics, second);
      if (projected.u < lo_u || projected.u > hi_u || projected.v < lo_v || projected.v > hi_v) {
        continue;
      }
      pairs.push_back(PairSample{first.head<3>(), second.head<3>(), px, py,
                                 static_cast<int>(std::lround(projected.u)),
                                 static_cast<int>(std::lround(projected.v))});
    }
    found = static_cast<int>(pairs.size()) == params.n_pairs;
  }
  if (!found) {
    throw GenerationError("exhausted the rejection budget without a plane supporting " +
                          std::to_string(params.n_pairs) + " visible mirror pairs");
  }

  SyntheticScene result{
      Scene{FeatureMap(height, width, params.channels), intrinsics, gt_normal},
      MirrorPlane::from_normal(gt_normal),
      {},
      params.seed};

  // Distractors: unconstrained visible points with their own descriptors.
  struct Distractor {
    Eigen::Vector3d position;
    int px, py;
  };
  std::vector<Distractor> distractors;
  distractors.reserve(params.n_distractors);
  for (int i = 0; i < params.n_distractors; ++i) {
    const int px = rng.uniform_int(0, width - 1);
    const int py = rng.uniform_int(0, height - 1);
    const double d = rng.uniform(params.d_min, params.d_max);
    const Eigen::Vector4d p = backproject(intrinsics, PixelDepthPoint{double(px), double(py), d});
    distractors.push_back(Distractor{p.head<3>(), px, py});
  }

  FeatureMap& features = result.scene.features;
  std::vector<std::uint8_t> splatted(static_cast<std::size_t>(height) * width, 0);
  const auto splat = [&](int px, int py, const Eigen::VectorXd& descriptor) {
    float* pixel = features.at(py, px);
    for (int c = 0; c < params.channels; ++c) pixel[c] = static_cast<float>(descriptor[c]);
    splatted[static_cast<std::size_t>(py) * width + px] = 1;
  };

  int descriptor_id = 0;
  for (const PairSample& pair : pairs) {
    const Eigen::VectorXd descriptor = rng.unit_vector(params.channels);
    splat(pair.first_x, pair.first_y, descriptor);
    splat(pair.second_x, pair.second_y, descriptor);
    result.points.push_back(ScenePoint{pair.first, descriptor_id, pair.first_x, pair.first_y});
    result.points.push_back(ScenePoint{pair.second, descriptor_id, pair.second_x, pair.second_y});
    ++descriptor_id;
  }
  for (const Distractor& distractor : distractors) {
    const Eigen::VectorXd descriptor = rng.unit_vector(params.channels);
    splat(distractor.px, distractor.py, descriptor);
    result.points.push_back(
        ScenePoint{distractor.position, descriptor_id++, distractor.px, distractor.py});
  }

  // Background: independent unit descriptors; expected cross-correlation
  // is ~1/sqrt(C), well below the pair signal.
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (splatted[static_cast<std::size_t>(y) * width + x]) continue;
      const Eigen::VectorXd descriptor = rng.unit_vector(params.channels);
      float* pixel = features.at(y, x);
      for (int c = 0; c < params.channels; ++c) pixel[c] = static_cast<float>(descriptor[c]);
    }
  }

  if (params.noise_sigma > 0.0) {
    for (float& value : features.values()) {
      value += static_cast<float>(params.noise_sigma * rng.normal());
    }
  }

  return result;
}

}  // namespace symdet
