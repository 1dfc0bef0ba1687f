#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace symdet {

/// Dense H x W x C feature grid, row-major [y][x][c], single precision.
class FeatureMap {
 public:
  FeatureMap(int height, int width, int channels);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }

  float* at(int y, int x) { return values_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_; }
  const float* at(int y, int x) const {
    return values_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_;
  }

  std::vector<float>& values() { return values_; }
  const std::vector<float>& values() const { return values_; }

 private:
  int height_;
  int width_;
  int channels_;
  std::vector<float> values_;
};

/// Per-pixel L2 normalization; channel vectors with norm below 1e-12
/// become exactly zero. Idempotent.
FeatureMap normalize(const FeatureMap& map);

/// All-pairs channel dot products, (H*W) x (H*W). Column q (= y*W + x) is
/// the contiguous H x W similarity slice of pixel q against every pixel.
/// Exactly symmetric: the upper triangle mirrors the computed lower one.
class CorrelationTensor {
 public:
  CorrelationTensor(int height, int width) : height_(height), width_(width) {}

  int height() const { return height_; }
  int width() const { return width_; }

  Eigen::MatrixXf& values() { return values_; }
  const Eigen::MatrixXf& values() const { return values_; }

  /// Contiguous H*W similarity slice for source pixel (x, y), indexed y'*W + x'.
  const float* slice(int x, int y) const {
    return values_.col(static_cast<Eigen::Index>(y) * width_ + x).data();
  }

 private:
  int height_;
  int width_;
  Eigen::MatrixXf values_;
};

/// Requires a normalized feature map.
CorrelationTensor build_correlation(const FeatureMap& map);

struct SampleResult {
  float value = 0.0f;
  bool valid = false;
};

/// Bilinear interpolation over one similarity slice at continuous (u, v).
/// Coordinates outside [0, W-1] x [0, H-1] yield (0, invalid).
SampleResult sample_bilinear_grid(const float* grid, int width, int height, double u, double v);

/// Bilinear lookup of the correlation tensor at C(x, y, u, v).
SampleResult sample_bilinear(const CorrelationTensor& tensor, int x, int y, double u, double v);

}  // namespace symdet
