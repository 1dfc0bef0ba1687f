#include "symdet/geometry.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <chrono>

#include "symdet/rng.hpp"

namespace symdet {
namespace {

Eigen::Vector3d random_hemisphere_normal(RngStream& rng) {
  const double z = -rng.uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double theta = rng.uniform(0.0, 2.0 * M_PI);
  return Eigen::Vector3d(r * std::cos(theta), r * std::sin(theta), z).normalized();
}

TEST(MirrorMatrix, AxisAlignedExamples) {
  const Eigen::Matrix4d mx = mirror_matrix(MirrorPlane::from_normal({1.0, 0.0, 0.0}));
  Eigen::Matrix4d expected;
  expected << -1, 0, 0, -2,  //
      0, 1, 0, 0,            //
      0, 0, 1, 0,            //
      0, 0, 0, 1;
  EXPECT_LT((mx - expected).cwiseAbs().maxCoeff(), 1e-12);

  const Eigen::Matrix4d mz = mirror_matrix(MirrorPlane::from_normal({0.0, 0.0, -1.0}));
  EXPECT_DOUBLE_EQ(mz(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(mz(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(mz(2, 2), -1.0);
  EXPECT_DOUBLE_EQ(mz(0, 3), 0.0);
  EXPECT_DOUBLE_EQ(mz(1, 3), 0.0);
  EXPECT_DOUBLE_EQ(mz(2, 3), 2.0);
}

TEST(MirrorMatrix, InvolutionAndOrientation) {
  RngStream rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const MirrorPlane plane = MirrorPlane::from_normal(random_hemisphere_normal(rng));
    const Eigen::Matrix4d m = mirror_matrix(plane);
    worst = std::max(worst, (m * m - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-9);

  const Eigen::Matrix4d m =
      mirror_matrix(MirrorPlane::from_normal(Eigen::Vector3d(1, 2, -2).normalized()));
  const double orientation = m.topLeftCorner<3, 3>().determinant();
  EXPECT_NEAR(orientation, -1.0, 1e-12);
}

TEST(MirrorPlane, RejectsInvalidNormals) {
  EXPECT_THROW(MirrorPlane::from_normal({0.5, 0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(MirrorPlane::from_normal({0.0, 0.0, 1.0}), std::invalid_argument);
  EXPECT_NO_THROW(MirrorPlane::canonicalized({0.0, 0.0, 1.0}));
  EXPECT_EQ(MirrorPlane::canonicalized({0.0, 0.0, 1.0}).normal().z(), -1.0);
}

TEST(ReflectPoint, HandComputedExamples) {
  const MirrorPlane px = MirrorPlane::from_normal({1.0, 0.0, 0.0});
  const Eigen::Vector4d reflected = reflect_point(px, {0.5, 0.0, 1.0, 1.0});
  EXPECT_LT((reflected - Eigen::Vector4d(-2.5, 0.0, 1.0, 1.0)).cwiseAbs().maxCoeff(), 1e-12);

  // Points on the plane stay fixed.
  const Eigen::Vector4d on_plane = reflect_point(px, {-1.0, 2.0, 3.0, 1.0});
  EXPECT_LT((on_plane - Eigen::Vector4d(-1.0, 2.0, 3.0, 1.0)).cwiseAbs().maxCoeff(), 1e-12);

  const MirrorPlane pz = MirrorPlane::from_normal({0.0, 0.0, -1.0});
  const Eigen::Vector4d depth_flip = reflect_point(pz, {0.0, 0.0, 0.8, 1.0});
  EXPECT_LT((depth_flip - Eigen::Vector4d(0.0, 0.0, 1.2, 1.0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ReflectPoint, InvolutionAndFixedPlane) {
  RngStream rng(202);
  for (int i = 0; i < 200; ++i) {
    const MirrorPlane plane = MirrorPlane::from_normal(random_hemisphere_normal(rng));
    const Eigen::Vector4d p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2), 1.0);
    EXPECT_LT((reflect_point(plane, reflect_point(plane, p)) - p).cwiseAbs().maxCoeff(), 1e-9);

    // Project a point onto the plane, then check it is a fixed point.
    const Eigen::Vector3d& n = plane.normal();
    const Eigen::Vector3d on_plane = p.head<3>() - (n.dot(p.head<3>()) + 1.0) * n;
    Eigen::Vector4d q;
    q << on_plane, 1.0;
    EXPECT_LT((reflect_point(plane, q) - q).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Projection, ExamplesAndErrors) {
  const CameraIntrinsics k(64, 64, 32, 32);
  const PixelDepthPoint center = project(k, {0.0, 0.0, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(center.u, 32.0);
  EXPECT_DOUBLE_EQ(center.v, 32.0);
  EXPECT_DOUBLE_EQ(center.d, 1.0);

  const PixelDepthPoint off = project(k, {0.25, 0.0, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(off.u, 48.0);
  EXPECT_DOUBLE_EQ(off.v, 32.0);

  EXPECT_THROW(project(k, {0.0, 0.0, -1.0, 1.0}), std::domain_error);
  EXPECT_THROW(project(k, {0.0, 0.0, 0.0, 1.0}), std::domain_error);
}

TEST(Backprojection, ExamplesAndErrors) {
  const CameraIntrinsics k(64, 64, 32, 32);
  EXPECT_LT((backproject(k, {32, 32, 1}) - Eigen::Vector4d(0, 0, 1, 1)).cwiseAbs().maxCoeff(),
            1e-12);
  EXPECT_LT((backproject(k, {48, 32, 1}) - Eigen::Vector4d(0.25, 0, 1, 1)).cwiseAbs().maxCoeff(),
            1e-12);
  EXPECT_THROW(backproject(k, {10, 10, 0.0}), std::domain_error);
  EXPECT_THROW(backproject(k, {10, 10, -1.0}), std::domain_error);
}

TEST(Projection, RoundTrip) {
  const CameraIntrinsics k(64, 64, 32, 32);
  RngStream rng(303);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector4d p(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(0.2, 3.0),
                            1.0);
    worst = std::max(worst, (backproject(k, project(k, p)) - p).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-9);

  for (int u = 0; u < 64; u += 7) {
    for (int v = 0; v < 64; v += 7) {
      const PixelDepthPoint q{double(u), double(v), 1.5};
      const PixelDepthPoint back = project(k, backproject(k, q));
      EXPECT_LT(std::abs(back.u - q.u), 1e-9);
      EXPECT_LT(std::abs(back.v - q.v), 1e-9);
    }
  }
}

TEST(Projection, ScaleGaugeLeavesPixelsUnchanged) {
  const CameraIntrinsics k(64, 64, 32, 32);
  RngStream rng(404);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector4d p(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(0.2, 3.0),
                            1.0);
    const PixelDepthPoint base = project(k, p);
    for (const double scale : {0.5, 2.0, 4.0}) {
      Eigen::Vector4d scaled = p * scale;
      scaled.w() = 1.0;
      const PixelDepthPoint q = project(k, scaled);
      EXPECT_EQ(q.u, base.u);
      EXPECT_EQ(q.v, base.v);
      EXPECT_EQ(q.d, base.d * scale);
    }
  }
}

TEST(PixelCorrespondence, HandComputedExamples) {
  const CameraIntrinsics identity_k(1, 1, 0, 0);
  const Correspondence a = pixel_correspondence(identity_k, MirrorPlane::from_normal({1, 0, 0}),
                                                {0.5, 0.0, 1.0});
  ASSERT_TRUE(a.valid);
  EXPECT_NEAR(a.point.u, -2.5, 1e-12);
  EXPECT_NEAR(a.point.v, 0.0, 1e-12);
  EXPECT_NEAR(a.point.d, 1.0, 1e-12);

  const CameraIntrinsics k(64, 64, 32, 32);
  const MirrorPlane pz = MirrorPlane::from_normal({0, 0, -1});
  const Correspondence b = pixel_correspondence(k, pz, {48, 32, 1.0});
  ASSERT_TRUE(b.valid);
  EXPECT_NEAR(b.point.u, 48.0, 1e-9);
  EXPECT_NEAR(b.point.v, 32.0, 1e-9);
  EXPECT_NEAR(b.point.d, 1.0, 1e-12);

  const Correspondence c = pixel_correspondence(k, pz, {32, 32, 0.8});
  ASSERT_TRUE(c.valid);
  EXPECT_NEAR(c.point.u, 32.0, 1e-9);
  EXPECT_NEAR(c.point.v, 32.0, 1e-9);
  EXPECT_NEAR(c.point.d, 1.2, 1e-12);
}

TEST(PixelCorrespondence, InvalidWhenReflectedBehindCamera) {
  const CameraIntrinsics k(64, 64, 32, 32);
  // Points beyond z = 2 reflect through z = 1 to negative depth.
  const Correspondence c =
      pixel_correspondence(k, MirrorPlane::from_normal({0, 0, -1}), {32, 32, 2.5});
  EXPECT_FALSE(c.valid);
}

TEST(PixelCorrespondence, CompositeMatchesReflectThenProject) {
  const CameraIntrinsics k(57.3, 61.1, 30.2, 33.8);
  RngStream rng(505);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const MirrorPlane plane = MirrorPlane::from_normal(random_hemisphere_normal(rng));
    const PixelDepthPoint q{rng.uniform(0, 63), rng.uniform(0, 63), rng.uniform(0.3, 2.0)};
    const Correspondence composite = pixel_correspondence(k, plane, q);
    const Eigen::Vector4d reflected = reflect_point(plane, backproject(k, q));
    if (reflected.z() <= 0.0) {
      EXPECT_FALSE(composite.valid);
      continue;
    }
    ASSERT_TRUE(composite.valid);
    const PixelDepthPoint direct = project(k, reflected);
    worst = std::max({worst, std::abs(direct.u - composite.point.u),
                      std::abs(direct.v - composite.point.v),
                      std::abs(direct.d - composite.point.d)});
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(PixelCorrespondence, DoubleReflectionRoundTrip) {
  const CameraIntrinsics k(64, 64, 32, 32);
  RngStream rng(606);
  double worst = 0.0;
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const MirrorPlane plane = MirrorPlane::from_normal(random_hemisphere_normal(rng));
    const PixelDepthPoint q{rng.uniform(0, 63), rng.uniform(0, 63), rng.uniform(0.4, 1.6)};
    const Correspondence there = pixel_correspondence(k, plane, q);
    if (!there.valid) continue;
    const Correspondence back = pixel_correspondence(k, plane, there.point);
    if (!back.valid) continue;
    ++checked;
    worst = std::max({worst, std::abs(back.point.u - q.u), std::abs(back.point.v - q.v)});
  }
  EXPECT_GT(checked, 100);
  EXPECT_LT(worst, 1e-6);
}

}  // namespace
}  // namespace symdet
