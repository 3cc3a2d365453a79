#pragma once

#include "lidar_normals/core.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lidar_normals {

struct Plane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Ones();
};

/// Closed finite cylinder (lateral surface plus end caps).
struct Cylinder {
  Vec3 center = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double radius = 1.0;
  double half_length = 1.0;
};

/// Upper half of a cylindrical shell around a horizontal centerline segment;
/// seen from the inside it is a tunnel ceiling and walls.
struct TunnelArc {
  Vec3 start = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  double length = 10.0;
  double radius = 5.0;
};

using Shape = std::variant<Plane, Box, Cylinder, TunnelArc>;

struct ScenePrimitive {
  Shape shape;
  int material_id = 0;
};

struct Hit {
  double range;
  Vec3 normal;  // analytic unit normal, orientation not yet resolved
  std::size_t primitive;
};

struct Scene {
  std::string name;
  std::vector<ScenePrimitive> primitives;

  void validate() const;

  /// Nearest intersection with range in (0, max_range].
  std::optional<Hit> intersect(const Vec3& origin, const Vec3& dir, double max_range) const;

  /// Unsigned distance from p to the nearest primitive surface.
  double surface_distance(const Vec3& p) const;
};

std::optional<Hit> intersect(const Shape& shape, const Vec3& origin, const Vec3& dir);
double surface_distance(const Shape& shape, const Vec3& p);
/// Analytic normal at a point on (or projected to) the surface.
Vec3 surface_normal(const Shape& shape, const Vec3& p);

}  // namespace lidar_normals
