#include "symdet/featuremap.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "symdet/rng.hpp"

namespace symdet {
namespace {

FeatureMap random_map(int h, int w, int c, std::uint64_t seed) {
  FeatureMap map(h, w, c);
  RngStream rng(seed);
  for (float& v : map.values()) v = static_cast<float>(rng.normal());
  return map;
}

TEST(Normalize, ExamplesAndIdempotence) {
  FeatureMap map(1, 2, 4);
  map.at(0, 0)[0] = 3.0f;
  map.at(0, 0)[1] = 4.0f;
  // Pixel (0,1) stays the zero vector.
  const FeatureMap unit = normalize(map);
  EXPECT_FLOAT_EQ(unit.at(0, 0)[0], 0.6f);
  EXPECT_FLOAT_EQ(unit.at(0, 0)[1], 0.8f);
  EXPECT_FLOAT_EQ(unit.at(0, 0)[2], 0.0f);
  for (int c = 0; c < 4; ++c) EXPECT_FLOAT_EQ(unit.at(0, 1)[c], 0.0f);

  const FeatureMap twice = normalize(unit);
  for (std::size_t i = 0; i < unit.values().size(); ++i) {
    EXPECT_FLOAT_EQ(twice.values()[i], unit.values()[i]);
  }
}

TEST(BuildCorrelation, ConstantAndDiagonal) {
  FeatureMap map(2, 2, 4);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) map.at(y, x)[2] = 5.0f;
  }
  const CorrelationTensor tensor = build_correlation(normalize(map));
  for (Eigen::Index i = 0; i < tensor.values().size(); ++i) {
    EXPECT_NEAR(tensor.values().data()[i], 1.0f, 1e-6);
  }
}

TEST(BuildCorrelation, MatchesBruteForceOracle) {
  const FeatureMap map = normalize(random_map(4, 4, 8, 42));
  const CorrelationTensor tensor = build_correlation(map);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      for (int yp = 0; yp < 4; ++yp) {
        for (int xp = 0; xp < 4; ++xp) {
          double expected = 0.0;
          for (int c = 0; c < 8; ++c) {
            expected += static_cast<double>(map.at(y, x)[c]) * map.at(yp, xp)[c];
          }
          const float stored = tensor.values()(static_cast<Eigen::Index>(yp) * 4 + xp,
                                               static_cast<Eigen::Index>(y) * 4 + x);
          EXPECT_NEAR(stored, expected, 1e-6);
        }
      }
    }
  }
}

TEST(BuildCorrelation, ExactSymmetryAndUnitDiagonal) {
  FeatureMap map = random_map(6, 5, 16, 7);
  // Leave one pixel empty so the diagonal carries a 0 as well as 1s.
  for (int c = 0; c < 16; ++c) map.at(2, 3)[c] = 0.0f;
  const CorrelationTensor tensor = build_correlation(normalize(map));
  const Eigen::MatrixXf& values = tensor.values();
  for (Eigen::Index a = 0; a < values.rows(); ++a) {
    for (Eigen::Index b = 0; b < a; ++b) {
      EXPECT_EQ(values(a, b), values(b, a));
    }
    const float diag = values(a, a);
    EXPECT_TRUE(std::abs(diag - 1.0f) < 1e-6 || diag == 0.0f);
  }
}

TEST(BuildCorrelation, InvariantUnderChannelRotation) {
  const int channels = 8;
  const FeatureMap map = normalize(random_map(4, 4, channels, 13));

  // Random orthonormal rotation of the channel space.
  RngStream rng(99);
  Eigen::MatrixXd gaussian(channels, channels);
  for (int r = 0; r < channels; ++r) {
    for (int c = 0; c < channels; ++c) gaussian(r, c) = rng.normal();
  }
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian).householderQ();

  FeatureMap rotated(4, 4, channels);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      Eigen::VectorXd v(channels);
      for (int c = 0; c < channels; ++c) v[c] = map.at(y, x)[c];
      const Eigen::VectorXd rv = q * v;
      for (int c = 0; c < channels; ++c) rotated.at(y, x)[c] = static_cast<float>(rv[c]);
    }
  }

  const CorrelationTensor original = build_correlation(map);
  const CorrelationTensor after = build_correlation(rotated);
  EXPECT_LT((original.values() - after.values()).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(SampleBilinear, IntegerLatticeIsExact) {
  const FeatureMap map = normalize(random_map(5, 6, 8, 3));
  const CorrelationTensor tensor = build_correlation(map);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 6; ++x) {
      for (int yp = 0; yp < 5; ++yp) {
        for (int xp = 0; xp < 6; ++xp) {
          const SampleResult s = sample_bilinear(tensor, x, y, xp, yp);
          ASSERT_TRUE(s.valid);
          EXPECT_EQ(s.value, tensor.slice(x, y)[yp * 6 + xp]);
        }
      }
    }
  }
}

TEST(SampleBilinear, MidpointAveragesNeighbors) {
  const FeatureMap map = normalize(random_map(4, 4, 8, 5));
  const CorrelationTensor tensor = build_correlation(map);
  const float* slice = tensor.slice(1, 2);
  const SampleResult s = sample_bilinear(tensor, 1, 2, 1.5, 3.0);
  ASSERT_TRUE(s.valid);
  EXPECT_NEAR(s.value, 0.5 * (slice[3 * 4 + 1] + slice[3 * 4 + 2]), 1e-7);
}

TEST(SampleBilinear, OutOfBoundsIsInvalidZero) {
  const FeatureMap map = normalize(random_map(4, 4, 8, 6));
  const CorrelationTensor tensor = build_correlation(map);
  for (const auto& [u, v] : std::vector<std::pair<double, double>>{
           {-0.5, 1.0}, {3.2, 1.0}, {1.0, -0.01}, {1.0, 3.001}}) {
    const SampleResult s = sample_bilinear(tensor, 0, 0, u, v);
    EXPECT_FALSE(s.valid);
    EXPECT_EQ(s.value, 0.0f);
  }
  // Borders included.
  EXPECT_TRUE(sample_bilinear(tensor, 0, 0, 0.0, 0.0).valid);
  EXPECT_TRUE(sample_bilinear(tensor, 0, 0, 3.0, 3.0).valid);
}

TEST(SampleBilinear, UnitFeaturesStayInRange) {
  const FeatureMap map = normalize(random_map(6, 6, 8, 21));
  const CorrelationTensor tensor = build_correlation(map);
  RngStream rng(22);
  for (int i = 0; i < 2000; ++i) {
    const int x = rng.uniform_int(0, 5);
    const int y = rng.uniform_int(0, 5);
    const SampleResult s =
        sample_bilinear(tensor, x, y, rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0));
    ASSERT_TRUE(s.valid);
    EXPECT_GE(s.value, -1.0f - 1e-6f);
    EXPECT_LE(s.value, 1.0f + 1e-6f);
  }
}

}  // namespace
}  // namespace symdet
