#include "lidar_normals/core.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lidar_normals;

namespace {

Pose random_pose(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  return Pose::from_axis_angle(Vec3(g(rng), g(rng), g(rng)), u(rng), Vec3(g(rng), g(rng), g(rng)) * 10.0);
}

}  // namespace

TEST(core, transform_point_examples) {
  EXPECT_EQ(transform_point(Pose::identity(), Vec3(1, 2, 3)), Vec3(1, 2, 3));
  EXPECT_EQ(transform_point(Pose::from_translation(Vec3(1, 0, 0)), Vec3::Zero()), Vec3(1, 0, 0));
  const Vec3 r = transform_point(Pose::rotation_z(M_PI / 2), Vec3(1, 0, 0));
  EXPECT_NEAR((r - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
}

TEST(core, transform_normal_examples) {
  const Pose shifted(Mat3::Identity(), Vec3(5, 5, 5));
  EXPECT_EQ(transform_normal(shifted, Vec3(0, 0, 1)), Vec3(0, 0, 1));
  EXPECT_NEAR((transform_normal(Pose::rotation_z(M_PI / 2), Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((transform_normal(Pose::rotation_z(M_PI / 2).inverse(), Vec3(0, 1, 0)) - Vec3(1, 0, 0)).norm(), 0.0,
              1e-15);
}

TEST(core, pose_properties) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    const Vec3 p(1.5, -2.0, 0.25);

    EXPECT_LT((transform_point(a.inverse(), transform_point(a, p)) - p).norm(), 1e-9);

    const Pose left = compose(compose(a, b), c), right = compose(a, compose(b, c));
    EXPECT_LT((left.rotation() - right.rotation()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((left.translation() - right.translation()).norm(), 1e-9);

    const Pose inv_ab = compose(a, b).inverse(), ba_inv = compose(b.inverse(), a.inverse());
    EXPECT_LT((inv_ab.rotation() - ba_inv.rotation()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((inv_ab.translation() - ba_inv.translation()).norm(), 1e-9);

    const Vec3 n = Vec3(0.3, -0.4, 0.5).normalized();
    EXPECT_NEAR(transform_normal(a, n).norm(), 1.0, 1e-9);
  }
}

TEST(core, pose_rejects_improper_rotation) {
  Mat3 flip = Mat3::Identity();
  flip(2, 2) = -1;
  EXPECT_THROW(Pose(flip, Vec3::Zero()), InvalidArgument);
  EXPECT_THROW(Pose(2.0 * Mat3::Identity(), Vec3::Zero()), InvalidArgument);
}

TEST(core, unit_vec3_invariant) {
  EXPECT_NO_THROW(UnitVec3(0, 0, 1));
  EXPECT_THROW(UnitVec3(0, 0, 1.001), InvalidArgument);
  EXPECT_THROW(UnitVec3::normalized(Vec3::Zero()), InvalidArgument);
  EXPECT_NEAR(UnitVec3::normalized(Vec3(3, 4, 0)).x(), 0.6, 1e-15);
}

TEST(core, sensor_defaults) {
  const SensorConfig s;
  EXPECT_EQ(s.beams, 64);
  EXPECT_EQ(s.upper_fov_deg, 10.0);
  EXPECT_EQ(s.lower_fov_deg, -30.0);
  EXPECT_EQ(s.max_range_m, 100.0);
  EXPECT_EQ(s.points_per_second, 2'000'000);
  EXPECT_EQ(s.rotation_hz, 10.0);
  EXPECT_EQ(s.drop_ratio, 0.45);
  EXPECT_EQ(s.noise_std_m, 0.02);
  EXPECT_EQ(s.azimuth_count(), 3125);
  EXPECT_NO_THROW(s.validate());

  SensorConfig bad = s;
  bad.lower_fov_deg = 20.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = s;
  bad.beams = 0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(core, frame_validate_and_field_helpers) {
  Frame f;
  f.points = {Vec3(1, 0, 0), Vec3(0, 1, 0)};
  f.gt_normals = std::vector<UnitVec3>{UnitVec3(0, 0, 1)};
  EXPECT_THROW(f.validate(), InvalidArgument);

  NormalField field{{Vec3(0, 0, 3), Vec3::Zero()}, 0};
  const auto unit = field.normalized(Vec3::UnitX());
  EXPECT_EQ(unit.normals[0], Vec3(0, 0, 1));
  EXPECT_EQ(unit.normals[1], Vec3::UnitX());
  EXPECT_TRUE(unit.is_unit());
  EXPECT_FALSE(field.is_unit());
}
