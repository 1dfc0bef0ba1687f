#include "symdet/featuremap.hpp"

#include <cmath>
#include <stdexcept>

namespace symdet {

FeatureMap::FeatureMap(int height, int width, int channels)
    : height_(height), width_(width), channels_(channels) {
  if (height < 1 || width < 1 || channels < 1) {
    throw std::invalid_argument("feature map dimensions must be positive");
  }
  values_.assign(static_cast<std::size_t>(height) * width * channels, 0.0f);
}

FeatureMap normalize(const FeatureMap& map) {
  FeatureMap out = map;
  const int channels = map.channels();
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      float* pixel = out.at(y, x);
      Eigen::Map<Eigen::VectorXf> vec(pixel, channels);
      const float norm = vec.norm();
      if (norm < 1e-12f) {
        vec.setZero();
      } else {
        vec /= norm;
      }
    }
  }
  return out;
}

CorrelationTensor build_correlation(const FeatureMap& map) {
  const Eigen::Index pixels = static_cast<Eigen::Index>(map.height()) * map.width();
  const Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      features(map.values().data(), pixels, map.channels());

  CorrelationTensor tensor(map.height(), map.width());
  Eigen::MatrixXf& values = tensor.values();
  values.setZero(pixels, pixels);
  values.selfadjointView<Eigen::Lower>().rankUpdate(features);
  // Mirror the lower triangle so C(a,b) == C(b,a) bit for bit.
  values.triangularView<Eigen::StrictlyUpper>() = values.transpose();
  return tensor;
}

SampleResult sample_bilinear_grid(const float* grid, int width, int height, double u, double v) {
  if (!(u >= 0.0) || !(v >= 0.0) || !(u <= width - 1.0) || !(v <= height - 1.0)) {
    return SampleResult{0.0f, false};
  }
  const int u0 = static_cast<int>(u);
  const int v0 = static_cast<int>(v);
  const int u1 = std::min(u0 + 1, width - 1);
  const int v1 = std::min(v0 + 1, height - 1);
  const double fu = u - u0;
  const double fv = v - v0;
  const double top = (1.0 - fu) * grid[v0 * width + u0] + fu * grid[v0 * width + u1];
  const double bottom = (1.0 - fu) * grid[v1 * width + u0] + fu * grid[v1 * width + u1];
  return SampleResult{static_cast<float>((1.0 - fv) * top + fv * bottom), true};
}

SampleResult sample_bilinear(const CorrelationTensor& tensor, int x, int y, double u, double v) {
  if (x < 0 || x >= tensor.width() || y < 0 || y >= tensor.height()) {
    throw std::invalid_argument("source pixel is outside the grid");
  }
  return sample_bilinear_grid(tensor.slice(x, y), tensor.width(), tensor.height(), u, v);
}

}  // namespace symdet
