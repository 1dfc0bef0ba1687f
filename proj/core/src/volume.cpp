#include "symdet/volume.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "symdet/rng.hpp"

namespace symdet {

DepthSweep::DepthSweep(double d_min, double d_max, int count)
    : d_min(d_min), d_max(d_max), count(count) {
  if (!(d_min > 0.0) || !(d_max > d_min)) {
    throw std::invalid_argument("depth sweep requires 0 < d_min < d_max");
  }
  if (count < 2) {
    throw std::invalid_argument("depth sweep needs at least 2 samples");
  }
}

CorrelationVolume::CorrelationVolume(int depth, int height, int width, MirrorPlane plane)
    : depth(depth),
      height(height),
      width(width),
      values(static_cast<std::size_t>(depth) * height * width, 0.0f),
      valid(static_cast<std::size_t>(depth) * height * width, 0),
      plane(plane) {}

CorrelationVolume build_volume(const CorrelationTensor& tensor, const CameraIntrinsics& intrinsics,
                               const MirrorPlane& plane, const DepthSweep& sweep) {
  const int height = tensor.height();
  const int width = tensor.width();
  CorrelationVolume volume(sweep.count, height, width, plane);

  const PlaneCorrespondence map(intrinsics, plane);
  const Eigen::Matrix4d& composite = map.composite();

  std::size_t cell = 0;
  for (int i = 0; i < sweep.count; ++i) {
    const double d = sweep.depth(i);
    // The lifted pixel [u*d, v*d, d, 1] is affine in (u, v) at fixed depth.
    const Eigen::Vector4d step_u = composite.col(0) * d;
    const Eigen::Vector4d step_v = composite.col(1) * d;
    const Eigen::Vector4d base = composite.col(2) * d + composite.col(3);
    for (int y = 0; y < height; ++y) {
      const double rx = base.x() + y * step_v.x();
      const double ry = base.y() + y * step_v.y();
      const double rz = base.z() + y * step_v.z();
      for (int x = 0; x < width; ++x, ++cell) {
        const double depth_out = rz + x * step_u.z();
        if (!(depth_out > 0.0)) continue;
        const double u = (rx + x * step_u.x()) / depth_out;
        const double v = (ry + x * step_u.y()) / depth_out;
        const SampleResult sample =
            sample_bilinear_grid(tensor.slice(x, y), width, height, u, v);
        if (sample.valid) {
          volume.values[cell] = sample.value;
          volume.valid[cell] = 1;
        }
      }
    }
  }
  return volume;
}

double reduce_score(const CorrelationVolume& volume, Reducer reducer) {
  const std::size_t pixels = static_cast<std::size_t>(volume.height) * volume.width;
  if (reducer == Reducer::kMean) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < volume.values.size(); ++i) {
      if (volume.valid[i]) {
        sum += volume.values[i];
        ++count;
      }
    }
    return count == 0 ? -std::numeric_limits<double>::infinity() : sum / count;
  }

  std::vector<float> best(pixels, 0.0f);
  std::vector<std::uint8_t> seen(pixels, 0);
  std::size_t cell = 0;
  for (int d = 0; d < volume.depth; ++d) {
    for (std::size_t p = 0; p < pixels; ++p, ++cell) {
      if (!volume.valid[cell]) continue;
      const float value = volume.values[cell];
      if (!seen[p] || value > best[p]) {
        best[p] = value;
        seen[p] = 1;
      }
    }
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < pixels; ++p) {
    if (seen[p]) {
      sum += best[p];
      ++count;
    }
  }
  return count == 0 ? -std::numeric_limits<double>::infinity() : sum / count;
}

namespace {

struct Grid3 {
  int depth = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  Grid3() = default;
  Grid3(int d, int h, int w)
      : depth(d), height(h), width(w), values(static_cast<std::size_t>(d) * h * w, 0.0) {}

  double at(int z, int y, int x) const {
    if (z < 0 || z >= depth || y < 0 || y >= height || x < 0 || x >= width) return 0.0;
    return values[(static_cast<std::size_t>(z) * height + y) * width + x];
  }
  double& ref(int z, int y, int x) {
    return values[(static_cast<std::size_t>(z) * height + y) * width + x];
  }
};

struct BlockStride {
  int sy, sx, sz;
};

constexpr BlockStride kStrides[3] = {{2, 2, 2}, {2, 2, 2}, {2, 2, 1}};

int out_size(int n, int stride) { return (n - 1) / stride + 1; }

Grid3 conv_forward(const Grid3& in, const ConvBlock& block, const BlockStride& s, double slope,
                   Grid3* preact) {
  Grid3 out(out_size(in.depth, s.sz), out_size(in.height, s.sy), out_size(in.width, s.sx));
  if (preact) *preact = out;
  for (int z = 0; z < out.depth; ++z) {
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        double acc = block.bias;
        for (int kz = 0; kz < 3; ++kz) {
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              acc += block.weights[(kz * 3 + ky) * 3 + kx] *
                     in.at(z * s.sz + kz - 1, y * s.sy + ky - 1, x * s.sx + kx - 1);
            }
          }
        }
        if (preact) preact->ref(z, y, x) = acc;
        out.ref(z, y, x) = acc > 0.0 ? acc : slope * acc;
      }
    }
  }
  return out;
}

void conv_backward(const Grid3& in, const Grid3& preact, const Grid3& dout, const ConvBlock& block,
                   const BlockStride& s, double slope, ConvBlock& grad, Grid3& din) {
  din = Grid3(in.depth, in.height, in.width);
  for (int z = 0; z < dout.depth; ++z) {
    for (int y = 0; y < dout.height; ++y) {
      for (int x = 0; x < dout.width; ++x) {
        double g = dout.at(z, y, x);
        if (g == 0.0) continue;
        if (preact.at(z, y, x) <= 0.0) g *= slope;
        grad.bias += g;
        for (int kz = 0; kz < 3; ++kz) {
          const int iz = z * s.sz + kz - 1;
          if (iz < 0 || iz >= in.depth) continue;
          for (int ky = 0; ky < 3; ++ky) {
            const int iy = y * s.sy + ky - 1;
            if (iy < 0 || iy >= in.height) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = x * s.sx + kx - 1;
              if (ix < 0 || ix >= in.width) continue;
              const int k = (kz * 3 + ky) * 3 + kx;
              grad.weights[k] += g * in.at(iz, iy, ix);
              din.ref(iz, iy, ix) += g * block.weights[k];
            }
          }
        }
      }
    }
  }
}

Grid3 to_grid(const CorrelationVolume& volume) {
  Grid3 grid(volume.depth, volume.height, volume.width);
  for (std::size_t i = 0; i < volume.values.size(); ++i) {
    grid.values[i] = static_cast<double>(volume.values[i]);
  }
  return grid;
}

void check_divisible(const CorrelationVolume& volume) {
  if (volume.height % 8 != 0 || volume.width % 8 != 0 || volume.depth % 4 != 0) {
    throw std::invalid_argument("downscale3d needs H, W divisible by 8 and D by 4");
  }
}

}  // namespace

ConvStack ConvStack::random(std::uint64_t seed) {
  RngStream rng(seed);
  ConvStack stack;
  for (ConvBlock& block : stack.blocks) {
    for (double& w : block.weights) w = rng.uniform(-0.35, 0.35);
    block.bias = rng.uniform(-0.1, 0.1);
  }
  return stack;
}

std::vector<double> downscale3d(const CorrelationVolume& volume, const ConvStack& stack) {
  check_divisible(volume);
  Grid3 grid = to_grid(volume);
  for (int b = 0; b < 3; ++b) {
    grid = conv_forward(grid, stack.blocks[b], kStrides[b], stack.leaky_slope, nullptr);
  }
  return grid.values;
}

ConvStackGrad downscale3d_param_grad(const CorrelationVolume& volume, const ConvStack& stack,
                                     const std::vector<double>& upstream) {
  check_divisible(volume);
  std::array<Grid3, 4> activations;  // inputs of each block plus final output
  std::array<Grid3, 3> preacts;
  activations[0] = to_grid(volume);
  for (int b = 0; b < 3; ++b) {
    activations[b + 1] =
        conv_forward(activations[b], stack.blocks[b], kStrides[b], stack.leaky_slope, &preacts[b]);
  }
  if (upstream.size() != activations[3].values.size()) {
    throw std::invalid_argument("upstream gradient length does not match the descriptor");
  }

  ConvStackGrad grads{};
  Grid3 dout = activations[3];
  dout.values = upstream;
  for (int b = 2; b >= 0; --b) {
    Grid3 din;
    conv_backward(activations[b], preacts[b], dout, stack.blocks[b], kStrides[b],
                  stack.leaky_slope, grads.blocks[b], din);
    dout = std::move(din);
  }
  return grads;
}

void build_feature_volume_4d(const FeatureMap& map, const CameraIntrinsics& intrinsics,
                             const MirrorPlane& plane, const DepthSweep& sweep,
                             FeatureVolume4D& out) {
  const int height = map.height();
  const int width = map.width();
  const int channels = map.channels();
  out.channels = 2 * channels;
  out.depth = sweep.count;
  out.height = height;
  out.width = width;
  out.values.assign(static_cast<std::size_t>(out.channels) * sweep.count * height * width, 0.0f);

  const PlaneCorrespondence correspondence(intrinsics, plane);
  for (int i = 0; i < sweep.count; ++i) {
    const double d = sweep.depth(i);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        float* cell = out.values.data() + out.cell_index(i, y, x);
        Eigen::Map<Eigen::VectorXf> own(cell, channels);
        own = Eigen::Map<const Eigen::VectorXf>(map.at(y, x), channels);

        const Correspondence corr = correspondence.map(x, y, d);
        if (!corr.valid) continue;
        const double u = corr.point.u;
        const double v = corr.point.v;
        if (!(u >= 0.0) || !(v >= 0.0) || !(u <= width - 1.0) || !(v <= height - 1.0)) continue;

        const int u0 = static_cast<int>(u);
        const int v0 = static_cast<int>(v);
        const int u1 = std::min(u0 + 1, width - 1);
        const int v1 = std::min(v0 + 1, height - 1);
        const float fu = static_cast<float>(u - u0);
        const float fv = static_cast<float>(v - v0);
        Eigen::Map<Eigen::VectorXf> gathered(cell + channels, channels);
        gathered = (1.0f - fv) * ((1.0f - fu) * Eigen::Map<const Eigen::VectorXf>(map.at(v0, u0), channels) +
                                  fu * Eigen::Map<const Eigen::VectorXf>(map.at(v0, u1), channels)) +
                   fv * ((1.0f - fu) * Eigen::Map<const Eigen::VectorXf>(map.at(v1, u0), channels) +
                         fu * Eigen::Map<const Eigen::VectorXf>(map.at(v1, u1), channels));
      }
    }
  }
}

FeatureVolume4D build_feature_volume_4d(const FeatureMap& map, const CameraIntrinsics& intrinsics,
                                        const MirrorPlane& plane, const DepthSweep& sweep) {
  FeatureVolume4D out{};
  build_feature_volume_4d(map, intrinsics, plane, sweep, out);
  return out;
}

double reduce_feature_volume_4d(const FeatureVolume4D& volume, const CameraIntrinsics& intrinsics,
                                const MirrorPlane& plane, const DepthSweep& sweep,
                                Reducer reducer) {
  const int height = volume.height;
  const int width = volume.width;
  const int channels = volume.channels / 2;
  const std::size_t pixels = static_cast<std::size_t>(height) * width;
  const PlaneCorrespondence correspondence(intrinsics, plane);

  std::vector<float> best(pixels, 0.0f);
  std::vector<std::uint8_t> seen(pixels, 0);
  double mean_sum = 0.0;
  std::size_t mean_count = 0;

  for (int i = 0; i < sweep.count; ++i) {
    const double d = sweep.depth(i);
    std::size_t p = 0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x, ++p) {
        const Correspondence corr = correspondence.map(x, y, d);
        if (!corr.valid) continue;
        const double u = corr.point.u;
        const double v = corr.point.v;
        if (!(u >= 0.0) || !(v >= 0.0) || !(u <= width - 1.0) || !(v <= height - 1.0)) continue;

        const float* cell = volume.values.data() + volume.cell_index(i, y, x);
        const Eigen::Map<const Eigen::VectorXf> own(cell, channels);
        const Eigen::Map<const Eigen::VectorXf> gathered(cell + channels, channels);
        const float value = own.dot(gathered);
        if (reducer == Reducer::kMean) {
          mean_sum += value;
          ++mean_count;
        } else if (!seen[p] || value > best[p]) {
          best[p] = value;
          seen[p] = 1;
        }
      }
    }
  }

  if (reducer == Reducer::kMean) {
    return mean_count == 0 ? -std::numeric_limits<double>::infinity() : mean_sum / mean_count;
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < pixels; ++p) {
    if (seen[p]) {
      sum += best[p];
      ++count;
    }
  }
  return count == 0 ? -std::numeric_limits<double>::infinity() : sum / count;
}

}  // namespace symdet
