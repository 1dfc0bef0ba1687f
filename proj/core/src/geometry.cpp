#include "symdet/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace symdet {

namespace {
constexpr double kUnitTolerance = 1e-9;
constexpr double kHemisphereSlack = 1e-6;
}  // namespace

CameraIntrinsics::CameraIntrinsics(double fx, double fy, double cx, double cy)
    : fx(fx), fy(fy), cx(cx), cy(cy) {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw std::invalid_argument("camera focal lengths must be positive");
  }
}

Eigen::Matrix4d CameraIntrinsics::matrix() const {
  Eigen::Matrix4d k = Eigen::Matrix4d::Zero();
  k(0, 0) = fx;
  k(0, 2) = cx;
  k(1, 1) = fy;
  k(1, 2) = cy;
  k(2, 2) = 1.0;
  k(3, 3) = 1.0;
  return k;
}

Eigen::Matrix4d CameraIntrinsics::inverse_matrix() const {
  Eigen::Matrix4d k = Eigen::Matrix4d::Zero();
  k(0, 0) = 1.0 / fx;
  k(0, 2) = -cx / fx;
  k(1, 1) = 1.0 / fy;
  k(1, 2) = -cy / fy;
  k(2, 2) = 1.0;
  k(3, 3) = 1.0;
  return k;
}

MirrorPlane MirrorPlane::from_normal(const Eigen::Vector3d& normal) {
  if (std::abs(normal.norm() - 1.0) > kUnitTolerance) {
    throw std::invalid_argument("mirror plane normal must be unit length");
  }
  if (normal.z() > kHemisphereSlack) {
    throw std::invalid_argument("mirror plane normal must lie on the z <= 0 hemisphere");
  }
  return MirrorPlane(normal);
}

MirrorPlane MirrorPlane::canonicalized(const Eigen::Vector3d& normal) {
  return from_normal(normal.z() > 0.0 ? Eigen::Vector3d(-normal) : normal);
}

Eigen::Matrix4d mirror_matrix(const MirrorPlane& plane) {
  const Eigen::Vector3d& n = plane.normal();
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() -= 2.0 * n * n.transpose();
  m.topRightCorner<3, 1>() = -2.0 * n;
  return m;
}

Eigen::Vector4d reflect_point(const MirrorPlane& plane, const Eigen::Vector4d& point) {
  if (std::abs(point.w() - 1.0) > kUnitTolerance) {
    throw std::invalid_argument("homogeneous point must be normalized to W = 1");
  }
  const Eigen::Vector3d& n = plane.normal();
  const Eigen::Vector3d x = point.head<3>();
  const double signed_distance = n.dot(x) + 1.0;
  Eigen::Vector4d reflected;
  reflected.head<3>() = x - 2.0 * signed_distance * n;
  reflected.w() = 1.0;
  return reflected;
}

PixelDepthPoint project(const CameraIntrinsics& intrinsics, const Eigen::Vector4d& point) {
  const double z = point.z();
  if (!(z > 0.0)) {
    throw std::domain_error("cannot project a point at or behind the camera");
  }
  return PixelDepthPoint{intrinsics.fx * point.x() / z + intrinsics.cx,
                         intrinsics.fy * point.y() / z + intrinsics.cy, z};
}

Eigen::Vector4d backproject(const CameraIntrinsics& intrinsics, const PixelDepthPoint& pixel) {
  if (!(pixel.d > 0.0)) {
    throw std::domain_error("backprojection requires a positive depth");
  }
  return Eigen::Vector4d((pixel.u - intrinsics.cx) * pixel.d / intrinsics.fx,
                         (pixel.v - intrinsics.cy) * pixel.d / intrinsics.fy, pixel.d, 1.0);
}

PlaneCorrespondence::PlaneCorrespondence(const CameraIntrinsics& intrinsics,
                                         const MirrorPlane& plane)
    : composite_(intrinsics.matrix() * mirror_matrix(plane) * intrinsics.inverse_matrix()) {}

Correspondence PlaneCorrespondence::map(double u, double v, double d) const {
  // x''d'' = (K M K^-1) x'd' with x'd' = [u*d, v*d, d, 1].
  const Eigen::Vector4d lifted(u * d, v * d, d, 1.0);
  const Eigen::Vector4d mapped = composite_ * lifted;
  const double reflected_depth = mapped.z();
  if (!(reflected_depth > 0.0)) {
    return Correspondence{PixelDepthPoint{0.0, 0.0, reflected_depth}, false};
  }
  return Correspondence{
      PixelDepthPoint{mapped.x() / reflected_depth, mapped.y() / reflected_depth, reflected_depth},
      true};
}

Correspondence pixel_correspondence(const CameraIntrinsics& intrinsics, const MirrorPlane& plane,
                                    const PixelDepthPoint& pixel) {
  if (!(pixel.d > 0.0)) {
    throw std::domain_error("pixel correspondence requires a positive depth");
  }
  return PlaneCorrespondence(intrinsics, plane).map(pixel.u, pixel.v, pixel.d);
}

}  // namespace symdet
