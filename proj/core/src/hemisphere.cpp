#include "symdet/hemisphere.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace symdet {

namespace {

double golden_angle() { return std::numbers::pi * (3.0 - std::sqrt(5.0)); }

Eigen::Matrix3d rotation_from_pole(const Eigen::Vector3d& center) {
  const Eigen::Vector3d pole(0.0, 0.0, -1.0);
  const Eigen::Vector3d axis = pole.cross(center);
  const double sin_angle = axis.norm();
  const double cos_angle = pole.dot(center);
  if (sin_angle < 1e-12) {
    if (cos_angle > 0.0) return Eigen::Matrix3d::Identity();
    // Antipodal center: half-turn about the x axis.
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(1, 1) = -1.0;
    flip(2, 2) = -1.0;
    return flip;
  }
  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  cross(0, 1) = -axis.z();
  cross(0, 2) = axis.y();
  cross(1, 0) = axis.z();
  cross(1, 2) = -axis.x();
  cross(2, 0) = -axis.y();
  cross(2, 1) = axis.x();
  return Eigen::Matrix3d::Identity() + cross +
         cross * cross * ((1.0 - cos_angle) / (sin_angle * sin_angle));
}

}  // namespace

SphericalLattice fibonacci_hemisphere(int count) {
  if (count < 1) {
    throw std::invalid_argument("hemisphere lattice needs a positive sample count");
  }
  SphericalLattice lattice;
  lattice.normals.reserve(count);
  const double theta_step = golden_angle();
  for (int i = 0; i < count; ++i) {
    const double z = -(i + 0.5) / count;
    const double radius = std::sqrt(1.0 - z * z);
    const double theta = i * theta_step;
    lattice.normals.emplace_back(radius * std::cos(theta), radius * std::sin(theta), z);
  }
  return lattice;
}

SphericalLattice cap_lattice(const Eigen::Vector3d& center, double delta_deg, int count) {
  if (!(delta_deg > 0.0) || delta_deg > 90.0) {
    throw std::invalid_argument("cap half-angle must be in (0, 90] degrees");
  }
  if (count < 1) {
    throw std::invalid_argument("cap lattice needs a positive sample count");
  }
  if (std::abs(center.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("cap center must be a unit vector");
  }
  const double cos_delta = std::cos(delta_deg * std::numbers::pi / 180.0);
  const bool at_pole = (center - Eigen::Vector3d(0.0, 0.0, -1.0)).norm() < 1e-12;
  const Eigen::Matrix3d rotation = rotation_from_pole(center);

  SphericalLattice lattice;
  lattice.normals.reserve(count);
  const double theta_step = golden_angle();
  for (int i = 0; i < count; ++i) {
    const double along = 1.0 - (i + 0.5) * (1.0 - cos_delta) / count;
    const double radius = std::sqrt(std::max(0.0, 1.0 - along * along));
    const double theta = i * theta_step;
    const Eigen::Vector3d local(radius * std::cos(theta), radius * std::sin(theta), -along);
    lattice.normals.push_back(at_pole ? local : Eigen::Vector3d(rotation * local));
  }
  return lattice;
}

double angle_between_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double dot = std::clamp(std::abs(a.dot(b)), 0.0, 1.0);
  return std::acos(dot) * 180.0 / std::numbers::pi;
}

std::vector<std::vector<int>> knn_graph(const SphericalLattice& lattice, int k) {
  if (k < 1) {
    throw std::invalid_argument("k must be at least 1");
  }
  const int count = lattice.size();
  if (count < 2) {
    throw std::invalid_argument("k-NN graph needs at least 2 lattice nodes");
  }
  const int out_degree = std::min(k, count - 1);
  std::vector<std::vector<int>> adjacency(count);
  std::vector<std::pair<double, int>> order;
  order.reserve(count - 1);
  for (int i = 0; i < count; ++i) {
    order.clear();
    for (int j = 0; j < count; ++j) {
      if (j == i) continue;
      order.emplace_back(angle_between_deg(lattice.normals[i], lattice.normals[j]), j);
    }
    std::partial_sort(order.begin(), order.begin() + out_degree, order.end());
    adjacency[i].reserve(out_degree);
    for (int n = 0; n < out_degree; ++n) adjacency[i].push_back(order[n].second);
  }
  return adjacency;
}

}  // namespace symdet
