#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lidar_normals {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Thrown when a value violates a documented precondition or invariant.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Vector whose Euclidean norm is 1 within 1e-6, checked at construction.
class UnitVec3 {
 public:
  static constexpr double kTolerance = 1e-6;

  explicit UnitVec3(const Vec3& v);
  UnitVec3(double x, double y, double z) : UnitVec3(Vec3(x, y, z)) {}

  /// Normalizes v; throws on a zero or non-finite vector.
  static UnitVec3 normalized(const Vec3& v);

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }

  UnitVec3 operator-() const { return UnitVec3(-v_, Unchecked{}); }
  bool operator==(const UnitVec3& o) const { return v_ == o.v_; }

 private:
  struct Unchecked {};
  UnitVec3(const Vec3& v, Unchecked) : v_(v) {}
  Vec3 v_;
};

/// Rigid transform x -> R x + t with R a proper rotation.
class Pose {
 public:
  static constexpr double kTolerance = 1e-9;

  Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  Pose(const Mat3& rotation, const Vec3& translation);

  static Pose identity() { return Pose(); }
  static Pose from_translation(const Vec3& t) { return Pose(Mat3::Identity(), t); }
  /// Rotation about a unit axis by angle_rad, followed by translation t.
  static Pose from_axis_angle(const Vec3& axis, double angle_rad, const Vec3& t = Vec3::Zero());
  static Pose rotation_z(double angle_rad, const Vec3& t = Vec3::Zero());

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Pose inverse() const;
  bool operator==(const Pose& o) const {
    return rotation_ == o.rotation_ && translation_ == o.translation_;
  }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// a ∘ b: applies b first, then a.
Pose compose(const Pose& a, const Pose& b);
inline Pose inverse(const Pose& p) { return p.inverse(); }

Vec3 transform_point(const Pose& pose, const Vec3& p);
/// Applies the rotation part only; normals are directions.
Vec3 transform_normal(const Pose& pose, const Vec3& n);

/// One LiDAR sweep in sensor coordinates.
struct Frame {
  std::vector<Vec3> points;
  std::optional<std::vector<UnitVec3>> gt_normals;
  std::optional<Pose> pose;  // sensor -> world
  double timestamp = 0.0;
  std::int64_t frame_id = 0;

  std::size_t size() const { return points.size(); }
  bool has_gt() const { return gt_normals.has_value(); }
  /// Throws InvalidArgument if gt_normals length differs from points.
  void validate() const;
};

/// Per-point normals aligned with a Frame. Entries may leave the unit
/// sphere while being optimized.
struct NormalField {
  std::vector<Vec3> normals;
  std::int64_t frame_id = 0;

  std::size_t size() const { return normals.size(); }

  static NormalField from_gt(const Frame& frame);
  /// Every entry scaled to unit length; zero entries are replaced by fallback.
  NormalField normalized(const Vec3& fallback = Vec3::UnitZ()) const;
  bool is_unit(double tol = UnitVec3::kTolerance) const;
};

struct SensorConfig {
  int beams = 64;
  double upper_fov_deg = 10.0;
  double lower_fov_deg = -30.0;
  double horizontal_fov_deg = 360.0;
  double max_range_m = 100.0;
  std::int64_t points_per_second = 2'000'000;
  double rotation_hz = 10.0;
  double drop_ratio = 0.45;
  double noise_std_m = 0.02;

  void validate() const;
  /// floor(points_per_second / rotation_hz / beams).
  int azimuth_count() const;
};

inline double deg2rad(double deg) { return deg * (M_PI / 180.0); }
inline double rad2deg(double rad) { return rad * (180.0 / M_PI); }

}  // namespace lidar_normals
