#pragma once

#include <Eigen/Core>

namespace symdet {

/// Pinhole intrinsics, lifted to the 4x4 homogeneous form
/// [[fx,0,cx,0],[0,fy,cy,0],[0,0,1,0],[0,0,0,1]] where needed.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx, double fy, double cx, double cy);

  Eigen::Matrix4d matrix() const;
  Eigen::Matrix4d inverse_matrix() const;
};

/// Mirror plane n.x + 1 = 0. The normal is unit length and lives on the
/// canonical z <= 0 hemisphere, so the plane's anchor point -n sits in
/// front of the camera.
class MirrorPlane {
 public:
  static MirrorPlane from_normal(const Eigen::Vector3d& normal);

  /// Same as from_normal but flips the sign first when z > 0.
  static MirrorPlane canonicalized(const Eigen::Vector3d& normal);

  const Eigen::Vector3d& normal() const { return normal_; }

 private:
  explicit MirrorPlane(const Eigen::Vector3d& n) : normal_(n) {}
  Eigen::Vector3d normal_;
};

/// Continuous pixel location with camera-space depth.
struct PixelDepthPoint {
  double u = 0.0;
  double v = 0.0;
  double d = 0.0;
};

struct Correspondence {
  PixelDepthPoint point;
  bool valid = false;
};

/// 4x4 homogeneous reflection [[I - 2nn^T, -2n],[0, 1]]. Involutive.
Eigen::Matrix4d mirror_matrix(const MirrorPlane& plane);

/// Reflects a homogeneous point (W must be 1) through the plane.
Eigen::Vector4d reflect_point(const MirrorPlane& plane, const Eigen::Vector4d& point);

/// u = fx*X/Z + cx, v = fy*Y/Z + cy, d = Z. Requires Z > 0.
PixelDepthPoint project(const CameraIntrinsics& intrinsics, const Eigen::Vector4d& point);

/// Inverse of project; requires d > 0.
Eigen::Vector4d backproject(const CameraIntrinsics& intrinsics, const PixelDepthPoint& pixel);

/// Depth-swept correspondence map of one candidate plane, precomputed as the
/// composite K * M * K^-1 so it can be applied to every (u, v, d) cheaply.
class PlaneCorrespondence {
 public:
  PlaneCorrespondence(const CameraIntrinsics& intrinsics, const MirrorPlane& plane);

  /// Mirror correspondence of pixel (u, v) assumed at depth d. Results with
  /// reflected depth d'' <= 0 are flagged invalid, not clamped.
  Correspondence map(double u, double v, double d) const;

  const Eigen::Matrix4d& composite() const { return composite_; }

 private:
  Eigen::Matrix4d composite_;
};

/// One-shot form of PlaneCorrespondence::map.
Correspondence pixel_correspondence(const CameraIntrinsics& intrinsics,
                                    const MirrorPlane& plane,
                                    const PixelDepthPoint& pixel);

}  // namespace symdet
