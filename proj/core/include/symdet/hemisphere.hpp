#pragma once

#include <Eigen/Core>
#include <vector>

namespace symdet {

/// Candidate plane normals sampled on the sphere, plus the optional k-NN
/// graph consumed by the EdgeConv scoring head.
struct SphericalLattice {
  std::vector<Eigen::Vector3d> normals;
  int stage_index = 0;
  /// Directed out-neighbors per node; empty until knn_graph fills it.
  std::vector<std::vector<int>> knn;

  int size() const { return static_cast<int>(normals.size()); }
};

/// Deterministic Fibonacci lattice on the z < 0 hemisphere:
/// z_i = -(i+0.5)/count, azimuth i * pi*(3-sqrt(5)).
SphericalLattice fibonacci_hemisphere(int count);

/// Fibonacci spiral on the spherical cap of half-angle delta around
/// `center`. The spiral is built around the pole (0,0,-1) and carried to
/// the center by a Rodrigues rotation (identity when center is the pole).
SphericalLattice cap_lattice(const Eigen::Vector3d& center, double delta_deg, int count);

/// Angle between plane normals in degrees, sign-insensitive:
/// arccos(clamp(|a.b|, 0, 1)) in [0, 90].
double angle_between_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

/// k nearest other nodes per node by angle_between_deg, ties broken by
/// lower index, self excluded, k truncated to size-1.
std::vector<std::vector<int>> knn_graph(const SphericalLattice& lattice, int k);

}  // namespace symdet
