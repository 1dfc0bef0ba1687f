#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "symdet/geometry.hpp"
#include "symdet/scene.hpp"

namespace symdet {

struct SynthParams {
  int height = 64;
  int width = 64;
  int channels = 64;
  int n_pairs = 128;
  int n_distractors = 16;
  double noise_sigma = 0.0;
  double d_min = 0.64;
  double d_max = 1.23;
  std::uint64_t seed = 0;
  CameraIntrinsics intrinsics{64.0, 64.0, 32.0, 32.0};
};

/// One generated 3D point together with the pixel its descriptor was
/// splatted to. Mirror pairs are consecutive and share a descriptor id;
/// distractors follow with unique ids.
struct ScenePoint {
  Eigen::Vector3d position;
  int descriptor_id;
  int pixel_x;
  int pixel_y;
};

/// Scene with exactly known mirror symmetry: every pair point's reflection
/// through the ground-truth plane is also in the point list with an
/// identical descriptor.
struct SyntheticScene {
  Scene scene;
  MirrorPlane gt_plane;
  std::vector<ScenePoint> points;
  std::uint64_t seed;
};

/// Samples a ground-truth plane that slices the visible depth shell, fills
/// the feature map with mirror-consistent descriptor pairs (nearest-pixel
/// splats, later splats overwrite earlier ones), distractors, and random
/// unit background descriptors, then applies optional per-channel Gaussian
/// noise. Deterministic per seed.
SyntheticScene generate_scene(const SynthParams& params);

}  // namespace symdet
