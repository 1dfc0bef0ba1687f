#include "symdet/hemisphere.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "symdet/rng.hpp"

namespace symdet {
namespace {

TEST(FibonacciHemisphere, FormulaAndBounds) {
  const SphericalLattice single = fibonacci_hemisphere(1);
  ASSERT_EQ(single.size(), 1);
  EXPECT_DOUBLE_EQ(single.normals[0].z(), -0.5);
  EXPECT_NEAR(single.normals[0].norm(), 1.0, 1e-12);

  const SphericalLattice lattice = fibonacci_hemisphere(128);
  ASSERT_EQ(lattice.size(), 128);
  for (const Eigen::Vector3d& n : lattice.normals) {
    EXPECT_NEAR(n.norm(), 1.0, 1e-9);
    EXPECT_LT(n.z(), 0.0);
    EXPECT_GT(n.z(), -1.0);
  }

  EXPECT_THROW(fibonacci_hemisphere(0), std::invalid_argument);
}

TEST(FibonacciHemisphere, NearUniformSpacing) {
  // Brute-force nearest-neighbor gaps; a Fibonacci lattice keeps the ratio
  // of extreme gaps small.
  const SphericalLattice lattice = fibonacci_hemisphere(128);
  double min_gap = 180.0, max_gap = 0.0;
  for (int i = 0; i < lattice.size(); ++i) {
    double nearest = 180.0;
    for (int j = 0; j < lattice.size(); ++j) {
      if (i == j) continue;
      nearest = std::min(nearest, angle_between_deg(lattice.normals[i], lattice.normals[j]));
    }
    min_gap = std::min(min_gap, nearest);
    max_gap = std::max(max_gap, nearest);
  }
  EXPECT_GT(min_gap, 0.0);
  EXPECT_LT(max_gap / min_gap, 2.5);
}

TEST(FibonacciHemisphere, Deterministic) {
  const SphericalLattice a = fibonacci_hemisphere(64);
  const SphericalLattice b = fibonacci_hemisphere(64);
  for (int i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.normals[i].x(), b.normals[i].x());
    EXPECT_EQ(a.normals[i].y(), b.normals[i].y());
    EXPECT_EQ(a.normals[i].z(), b.normals[i].z());
  }
}

TEST(CapLattice, HemisphereCapStaysBelowEquator) {
  const SphericalLattice cap = cap_lattice({0.0, 0.0, -1.0}, 90.0, 128);
  ASSERT_EQ(cap.size(), 128);
  for (const Eigen::Vector3d& n : cap.normals) {
    EXPECT_NEAR(n.norm(), 1.0, 1e-9);
    EXPECT_LE(n.z(), 1e-6);
  }
}

TEST(CapLattice, StaysInsideCap) {
  RngStream rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector3d center(rng.normal(), rng.normal(), rng.normal());
    center.normalize();
    const SphericalLattice cap = cap_lattice(center, 3.28, 64);
    for (const Eigen::Vector3d& n : cap.normals) {
      EXPECT_LE(angle_between_deg(n, center), 3.28 + 1e-6);
    }
  }
}

TEST(CapLattice, PoleCenterMatchesUnrotatedFormula) {
  const int count = 64;
  const double delta = 12.86;
  const SphericalLattice cap = cap_lattice({0.0, 0.0, -1.0}, delta, count);
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  const double cos_delta = std::cos(delta * M_PI / 180.0);
  for (int i = 0; i < count; ++i) {
    const double along = 1.0 - (i + 0.5) * (1.0 - cos_delta) / count;
    const double radius = std::sqrt(1.0 - along * along);
    EXPECT_EQ(cap.normals[i].x(), radius * std::cos(i * golden));
    EXPECT_EQ(cap.normals[i].y(), radius * std::sin(i * golden));
    EXPECT_EQ(cap.normals[i].z(), -along);
  }
}

TEST(CapLattice, RejectsBadInputs) {
  EXPECT_THROW(cap_lattice({0, 0, -1}, 0.0, 8), std::invalid_argument);
  EXPECT_THROW(cap_lattice({0, 0, -1}, 90.5, 8), std::invalid_argument);
  EXPECT_THROW(cap_lattice({0, 0, -1}, 45.0, 0), std::invalid_argument);
  EXPECT_THROW(cap_lattice({0, 0, -2}, 45.0, 8), std::invalid_argument);
}

TEST(CapLattice, HemisphereCoverageImprovesWithCount) {
  double previous = 180.0;
  for (const int count : {32, 64, 128}) {
    const SphericalLattice probes = fibonacci_hemisphere(count);
    const SphericalLattice cap = cap_lattice({0.0, 0.0, -1.0}, 90.0, count);
    double cover = 0.0;
    for (const Eigen::Vector3d& probe : probes.normals) {
      double nearest = 180.0;
      for (const Eigen::Vector3d& node : cap.normals) {
        nearest = std::min(nearest, angle_between_deg(probe, node));
      }
      cover = std::max(cover, nearest);
    }
    EXPECT_LT(cover, previous);
    previous = cover;
  }
}

TEST(AngleBetween, ExamplesAndProperties) {
  EXPECT_NEAR(angle_between_deg({1, 0, 0}, {0, 1, 0}), 90.0, 1e-12);
  const Eigen::Vector3d n = Eigen::Vector3d(0.3, -0.4, -0.5).normalized();
  EXPECT_NEAR(angle_between_deg(n, -n), 0.0, 1e-5);
  EXPECT_NEAR(angle_between_deg({1, 0, 0}, Eigen::Vector3d(1, 1, 0).normalized()), 45.0, 1e-9);

  RngStream rng(23);
  for (int i = 0; i < 100; ++i) {
    Eigen::Vector3d a(rng.normal(), rng.normal(), rng.normal());
    Eigen::Vector3d b(rng.normal(), rng.normal(), rng.normal());
    a.normalize();
    b.normalize();
    const double ab = angle_between_deg(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 90.0);
    EXPECT_DOUBLE_EQ(ab, angle_between_deg(b, a));
    EXPECT_DOUBLE_EQ(ab, angle_between_deg(-a, b));
    EXPECT_DOUBLE_EQ(ab, angle_between_deg(a, -b));
  }
}

TEST(KnnGraph, SmallAndDegenerateCases) {
  SphericalLattice lattice = fibonacci_hemisphere(4);
  const auto adjacency = knn_graph(lattice, 3);
  for (int i = 0; i < 4; ++i) {
    ASSERT_EQ(adjacency[i].size(), 3u);
    std::set<int> neighbors(adjacency[i].begin(), adjacency[i].end());
    EXPECT_EQ(neighbors.count(i), 0u);
    EXPECT_EQ(neighbors.size(), 3u);
  }

  // k larger than size-1 truncates.
  const auto truncated = knn_graph(lattice, 100);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(truncated[i].size(), 3u);

  SphericalLattice singleton = fibonacci_hemisphere(1);
  EXPECT_THROW(knn_graph(singleton, 1), std::invalid_argument);
  EXPECT_THROW(knn_graph(lattice, 0), std::invalid_argument);
}

TEST(KnnGraph, MatchesBruteForceOracle) {
  const SphericalLattice lattice = fibonacci_hemisphere(128);
  const int k = 16;
  const auto adjacency = knn_graph(lattice, k);
  for (int i = 0; i < lattice.size(); ++i) {
    // Oracle: the k-th smallest distance bounds every selected neighbor.
    std::vector<double> distances;
    for (int j = 0; j < lattice.size(); ++j) {
      if (j != i) distances.push_back(angle_between_deg(lattice.normals[i], lattice.normals[j]));
    }
    std::sort(distances.begin(), distances.end());
    const double bound = distances[k - 1];
    ASSERT_EQ(adjacency[i].size(), static_cast<std::size_t>(k));
    std::set<int> seen;
    for (int j : adjacency[i]) {
      EXPECT_NE(j, i);
      EXPECT_TRUE(seen.insert(j).second);
      EXPECT_LE(angle_between_deg(lattice.normals[i], lattice.normals[j]), bound + 1e-12);
    }
  }
}

}  // namespace
}  // namespace symdet
