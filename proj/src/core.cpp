#include "lidar_normals/core.hpp"

#include <cmath>
#include <sstream>

namespace lidar_normals {

UnitVec3::UnitVec3(const Vec3& v) : v_(v) {
  const double n = v.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kTolerance) {
    std::ostringstream os;
    os << "UnitVec3: norm " << n << " is not 1";
    throw InvalidArgument(os.str());
  }
}

UnitVec3 UnitVec3::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("UnitVec3: cannot normalize zero vector");
  return UnitVec3(v / n, Unchecked{});
}

Pose::Pose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = rotation.determinant();
  if (!(ortho <= kTolerance) || !(std::abs(det - 1.0) <= kTolerance) || !translation.allFinite()) {
    std::ostringstream os;
    os << "Pose: rotation not proper orthonormal (|RtR-I|=" << ortho << ", det=" << det << ")";
    throw InvalidArgument(os.str());
  }
}

Pose Pose::from_axis_angle(const Vec3& axis, double angle_rad, const Vec3& t) {
  const Mat3 r = Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
  return Pose(r, t);
}

Pose Pose::rotation_z(double angle_rad, const Vec3& t) {
  // Exact entries at multiples of 90 degrees keep hand-computed examples exact.
  double c = std::cos(angle_rad);
  double s = std::sin(angle_rad);
  if (std::abs(c) < 1e-15) c = 0.0;
  if (std::abs(s) < 1e-15) s = 0.0;
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return Pose(r, t);
}

Pose Pose::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return Pose(rt, -(rt * translation_));
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation());
}

Vec3 transform_point(const Pose& pose, const Vec3& p) {
  return pose.rotation() * p + pose.translation();
}

Vec3 transform_normal(const Pose& pose, const Vec3& n) { return pose.rotation() * n; }

void Frame::validate() const {
  if (gt_normals && gt_normals->size() != points.size()) {
    throw InvalidArgument("Frame: gt_normals length does not match points");
  }
}

NormalField NormalField::from_gt(const Frame& frame) {
  if (!frame.gt_normals) throw InvalidArgument("NormalField::from_gt: frame has no ground truth");
  NormalField f;
  f.frame_id = frame.frame_id;
  f.normals.reserve(frame.size());
  for (const auto& n : *frame.gt_normals) f.normals.push_back(n.vec());
  return f;
}

NormalField NormalField::normalized(const Vec3& fallback) const {
  NormalField out = *this;
  for (auto& n : out.normals) {
    const double len = n.norm();
    n = (len > 0.0 && std::isfinite(len)) ? Vec3(n / len) : fallback;
  }
  return out;
}

bool NormalField::is_unit(double tol) const {
  for (const auto& n : normals) {
    if (!(std::abs(n.norm() - 1.0) <= tol)) return false;
  }
  return true;
}

void SensorConfig::validate() const {
  if (beams < 1) throw InvalidArgument("SensorConfig: beams must be >= 1");
  if (!(lower_fov_deg < upper_fov_deg)) throw InvalidArgument("SensorConfig: lower_fov_deg must be < upper_fov_deg");
  if (!(horizontal_fov_deg > 0.0 && horizontal_fov_deg <= 360.0))
    throw InvalidArgument("SensorConfig: horizontal_fov_deg must be in (0, 360]");
  if (!(max_range_m > 0.0)) throw InvalidArgument("SensorConfig: max_range_m must be > 0");
  if (points_per_second < 1) throw InvalidArgument("SensorConfig: points_per_second must be >= 1");
  if (!(rotation_hz > 0.0)) throw InvalidArgument("SensorConfig: rotation_hz must be > 0");
  if (!(drop_ratio >= 0.0 && drop_ratio <= 1.0)) throw InvalidArgument("SensorConfig: drop_ratio must be in [0, 1]");
  if (!(noise_std_m >= 0.0)) throw InvalidArgument("SensorConfig: noise_std_m must be >= 0");
  if (azimuth_count() < 1) throw InvalidArgument("SensorConfig: fewer than one ray per beam per sweep");
}

int SensorConfig::azimuth_count() const {
  return static_cast<int>(std::floor(static_cast<double>(points_per_second) / rotation_hz / beams));
}

}  // namespace lidar_normals
