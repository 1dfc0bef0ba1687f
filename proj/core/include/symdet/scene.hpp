#pragma once

#include <Eigen/Core>
#include <optional>

#include "symdet/featuremap.hpp"
#include "symdet/geometry.hpp"

namespace symdet {

/// A single-view input to the detector: feature map plus intrinsics, with
/// the ground-truth plane normal carried along when known.
struct Scene {
  FeatureMap features;
  CameraIntrinsics intrinsics;
  std::optional<Eigen::Vector3d> gt_normal;
};

}  // namespace symdet
