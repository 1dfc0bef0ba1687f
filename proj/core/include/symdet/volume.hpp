#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "symdet/featuremap.hpp"
#include "symdet/geometry.hpp"

namespace symdet {

/// Uniform depth samples d_i = d_min + i*(d_max-d_min)/(count-1).
struct DepthSweep {
  double d_min;
  double d_max;
  int count;

  DepthSweep(double d_min, double d_max, int count);

  double depth(int i) const {
    return d_min + static_cast<double>(i) * (d_max - d_min) / (count - 1);
  }
};

/// D x H x W similarity grid of one candidate plane. Values are zero
/// wherever the validity mask is false.
struct CorrelationVolume {
  int depth;
  int height;
  int width;
  std::vector<float> values;        // [d][y][x]
  std::vector<std::uint8_t> valid;  // same layout
  MirrorPlane plane;

  CorrelationVolume(int depth, int height, int width, MirrorPlane plane);

  std::size_t index(int d, int y, int x) const {
    return (static_cast<std::size_t>(d) * height + y) * width + x;
  }
  float value_at(int d, int y, int x) const { return values[index(d, y, x)]; }
  bool valid_at(int d, int y, int x) const { return valid[index(d, y, x)] != 0; }
};

/// V(i, y, x) = C(x, y, u'', v'') where (u'', v'', d'') is the mirror
/// correspondence of pixel (x, y) at depth d_i. Cells whose correspondence
/// falls behind the camera or off the grid are invalid.
CorrelationVolume build_volume(const CorrelationTensor& tensor, const CameraIntrinsics& intrinsics,
                               const MirrorPlane& plane, const DepthSweep& sweep);

enum class Reducer { kMaxDepth, kMean };

/// Collapses a volume to one scalar. kMaxDepth takes the per-pixel maximum
/// over valid depths and averages it over pixels with at least one valid
/// entry; kMean averages all valid entries. Returns -infinity when nothing
/// is valid.
double reduce_score(const CorrelationVolume& volume, Reducer reducer);

/// One 3x3x3 convolution block, single channel in and out.
struct ConvBlock {
  std::array<double, 27> weights{};  // [dz][dy][dx], z the depth axis
  double bias = 0.0;
};

/// Three stride-downscaling conv blocks with leaky rectification:
/// strides (2,2,2), (2,2,2), (2,2,1) over (H, W, D), zero padding 1.
struct ConvStack {
  std::array<ConvBlock, 3> blocks;
  double leaky_slope = 0.2;

  static ConvStack random(std::uint64_t seed);
};

/// Flattens the downscaled volume to a descriptor of length
/// (H/8)*(W/8)*(D/4), depth-major. Requires H, W divisible by 8 and D by 4.
std::vector<double> downscale3d(const CorrelationVolume& volume, const ConvStack& stack);

struct ConvStackGrad {
  std::array<ConvBlock, 3> blocks;  // same shapes as the parameters
};

/// Analytic d(upstream . descriptor)/d(parameters).
ConvStackGrad downscale3d_param_grad(const CorrelationVolume& volume, const ConvStack& stack,
                                     const std::vector<double>& upstream);

/// NeRD-style gather-and-concatenate baseline: channels [0, C) hold the
/// pixel's own feature replicated over depth, channels [C, 2C) the
/// bilinearly gathered feature of its correspondence (zeros when invalid).
struct FeatureVolume4D {
  int channels;  // 2C
  int depth;
  int height;
  int width;
  std::vector<float> values;  // cell-major [d][y][x][2C]

  std::size_t cell_index(int d, int y, int x) const {
    return ((static_cast<std::size_t>(d) * height + y) * width + x) * channels;
  }
  float value_at(int c, int d, int y, int x) const { return values[cell_index(d, y, x) + c]; }
};

void build_feature_volume_4d(const FeatureMap& map, const CameraIntrinsics& intrinsics,
                             const MirrorPlane& plane, const DepthSweep& sweep,
                             FeatureVolume4D& out);

FeatureVolume4D build_feature_volume_4d(const FeatureMap& map, const CameraIntrinsics& intrinsics,
                                        const MirrorPlane& plane, const DepthSweep& sweep);

/// Reduces the 4D baseline volume to the same scalar as
/// reduce_score(build_volume(...)), recomputing cell validity from the
/// correspondence map.
double reduce_feature_volume_4d(const FeatureVolume4D& volume, const CameraIntrinsics& intrinsics,
                                const MirrorPlane& plane, const DepthSweep& sweep, Reducer reducer);

}  // namespace symdet
