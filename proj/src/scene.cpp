#include "lidar_normals/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lidar_normals {

namespace {

constexpr double kMinRange = 1e-9;
constexpr double kParallel = 1e-15;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Roots of a t^2 + b t + c in ascending order, if real.
std::optional<std::pair<double, double>> solve_quadratic(double a, double b, double c) {
  if (std::abs(a) < kParallel) return std::nullopt;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + std::copysign(sq, b));
  double t0 = q / a;
  double t1 = q != 0.0 ? c / q : t0;
  if (t0 > t1) std::swap(t0, t1);
  return std::make_pair(t0, t1);
}

Vec3 perpendicular_part(const Vec3& v, const Vec3& axis) { return v - v.dot(axis) * axis; }

Vec3 tunnel_up(const TunnelArc& t) {
  const Vec3 u = t.direction.normalized();
  return perpendicular_part(Vec3::UnitZ(), u).normalized();
}

std::optional<Hit> hit_plane(const Plane& p, const Vec3& o, const Vec3& d) {
  const Vec3 n = p.normal.normalized();
  const double denom = d.dot(n);
  if (std::abs(denom) < kParallel) return std::nullopt;
  const double t = (p.point - o).dot(n) / denom;
  if (!(t > kMinRange)) return std::nullopt;
  return Hit{t, n, 0};
}

std::optional<Hit> hit_box(const Box& b, const Vec3& o, const Vec3& d) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int near_axis = -1, far_axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < kParallel) {
      if (o[a] < b.min[a] || o[a] > b.max[a]) return std::nullopt;
      continue;
    }
    double t0 = (b.min[a] - o[a]) / d[a];
    double t1 = (b.max[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) { t_near = t0; near_axis = a; }
    if (t1 < t_far) { t_far = t1; far_axis = a; }
  }
  if (t_near > t_far || !(t_far > kMinRange)) return std::nullopt;
  Vec3 n = Vec3::Zero();
  if (t_near > kMinRange) {
    n[near_axis] = d[near_axis] > 0 ? -1.0 : 1.0;
    return Hit{t_near, n, 0};
  }
  n[far_axis] = d[far_axis] > 0 ? 1.0 : -1.0;
  return Hit{t_far, n, 0};
}

std::optional<Hit> hit_cylinder(const Cylinder& c, const Vec3& o, const Vec3& d) {
  const Vec3 a = c.axis.normalized();
  const Vec3 oc = o - c.center;
  std::optional<Hit> best;
  auto consider = [&](double t, const Vec3& n) {
    if (t > kMinRange && (!best || t < best->range)) best = Hit{t, n, 0};
  };

  const Vec3 dp = perpendicular_part(d, a);
  const Vec3 op = perpendicular_part(oc, a);
  if (auto roots = solve_quadratic(dp.squaredNorm(), 2.0 * op.dot(dp), op.squaredNorm() - c.radius * c.radius)) {
    for (double t : {roots->first, roots->second}) {
      const Vec3 x = oc + t * d;
      if (std::abs(x.dot(a)) <= c.half_length) consider(t, perpendicular_part(x, a) / c.radius);
    }
  }
  const double da = d.dot(a);
  if (std::abs(da) >= kParallel) {
    for (double side : {-1.0, 1.0}) {
      const double t = (side * c.half_length - oc.dot(a)) / da;
      const Vec3 x = oc + t * d;
      if (perpendicular_part(x, a).squaredNorm() <= c.radius * c.radius) consider(t, side * a);
    }
  }
  return best;
}

std::optional<Hit> hit_tunnel(const TunnelArc& tn, const Vec3& o, const Vec3& d) {
  const Vec3 u = tn.direction.normalized();
  const Vec3 up = tunnel_up(tn);
  const Vec3 os = o - tn.start;
  const Vec3 dp = perpendicular_part(d, u);
  const Vec3 op = perpendicular_part(os, u);
  auto roots = solve_quadratic(dp.squaredNorm(), 2.0 * op.dot(dp), op.squaredNorm() - tn.radius * tn.radius);
  if (!roots) return std::nullopt;
  for (double t : {roots->first, roots->second}) {
    if (!(t > kMinRange)) continue;
    const Vec3 x = os + t * d;
    const double s = x.dot(u);
    const Vec3 radial = perpendicular_part(x, u);
    if (s >= 0.0 && s <= tn.length && radial.dot(up) >= 0.0) return Hit{t, radial / tn.radius, 0};
  }
  return std::nullopt;
}

double box_distance(const Box& b, const Vec3& p) {
  const Vec3 c = 0.5 * (b.min + b.max);
  const Vec3 h = 0.5 * (b.max - b.min);
  const Vec3 q = (p - c).cwiseAbs() - h;
  if ((q.array() <= 0.0).all()) return -q.maxCoeff();
  return q.cwiseMax(0.0).norm();
}

double cylinder_distance(const Cylinder& c, const Vec3& p) {
  const Vec3 a = c.axis.normalized();
  const Vec3 x = p - c.center;
  const double s = std::abs(x.dot(a));
  const double rho = perpendicular_part(x, a).norm();
  if (s <= c.half_length && rho <= c.radius) return std::min(c.radius - rho, c.half_length - s);
  const double dr = std::max(rho - c.radius, 0.0);
  const double ds = std::max(s - c.half_length, 0.0);
  return std::hypot(dr, ds);
}

double tunnel_distance(const TunnelArc& tn, const Vec3& p) {
  const Vec3 u = tn.direction.normalized();
  const Vec3 up = tunnel_up(tn);
  const Vec3 side = u.cross(up);
  const Vec3 x = p - tn.start;
  const double s = std::clamp(x.dot(u), 0.0, tn.length);
  const Vec3 radial = perpendicular_part(x, u);
  Vec3 dir;
  if (radial.dot(up) >= 0.0 && radial.norm() > 0.0) {
    dir = radial.normalized();
  } else {
    dir = radial.dot(side) >= 0.0 ? side : Vec3(-side);
  }
  const Vec3 nearest = s * u + tn.radius * dir;
  return (x - nearest).norm();
}

}  // namespace

std::optional<Hit> intersect(const Shape& shape, const Vec3& origin, const Vec3& dir) {
  return std::visit(Overloaded{
                        [&](const Plane& s) { return hit_plane(s, origin, dir); },
                        [&](const Box& s) { return hit_box(s, origin, dir); },
                        [&](const Cylinder& s) { return hit_cylinder(s, origin, dir); },
                        [&](const TunnelArc& s) { return hit_tunnel(s, origin, dir); },
                    },
                    shape);
}

double surface_distance(const Shape& shape, const Vec3& p) {
  return std::visit(Overloaded{
                        [&](const Plane& s) { return std::abs((p - s.point).dot(s.normal.normalized())); },
                        [&](const Box& s) { return box_distance(s, p); },
                        [&](const Cylinder& s) { return cylinder_distance(s, p); },
                        [&](const TunnelArc& s) { return tunnel_distance(s, p); },
                    },
                    shape);
}

Vec3 surface_normal(const Shape& shape, const Vec3& p) {
  return std::visit(
      Overloaded{
          [&](const Plane& s) -> Vec3 { return s.normal.normalized(); },
          [&](const Box& s) -> Vec3 {
            // Face whose plane is closest to p.
            double best = std::numeric_limits<double>::infinity();
            Vec3 n = Vec3::UnitZ();
            for (int a = 0; a < 3; ++a) {
              for (int side = 0; side < 2; ++side) {
                const double d = std::abs(p[a] - (side ? s.max[a] : s.min[a]));
                if (d < best) {
                  best = d;
                  n = Vec3::Zero();
                  n[a] = side ? 1.0 : -1.0;
                }
              }
            }
            return n;
          },
          [&](const Cylinder& s) -> Vec3 {
            const Vec3 a = s.axis.normalized();
            const Vec3 x = p - s.center;
            const double axial = x.dot(a);
            const Vec3 radial = perpendicular_part(x, a);
            if (std::abs(std::abs(axial) - s.half_length) < std::abs(radial.norm() - s.radius))
              return axial >= 0 ? a : Vec3(-a);
            return radial.normalized();
          },
          [&](const TunnelArc& s) -> Vec3 {
            return perpendicular_part(p - s.start, s.direction.normalized()).normalized();
          },
      },
      shape);
}

void Scene::validate() const {
  if (primitives.empty()) throw InvalidArgument("Scene '" + name + "' has no primitives");
  for (const auto& prim : primitives) {
    std::visit(Overloaded{
                   [](const Plane& s) {
                     if (!(s.normal.norm() > 0)) throw InvalidArgument("plane: zero normal");
                   },
                   [](const Box& s) {
                     if (!(s.min.array() < s.max.array()).all()) throw InvalidArgument("box: min must be < max");
                   },
                   [](const Cylinder& s) {
                     if (!(s.axis.norm() > 0) || !(s.radius > 0) || !(s.half_length > 0))
                       throw InvalidArgument("cylinder: axis, radius and half_length must be positive");
                   },
                   [](const TunnelArc& s) {
                     if (!(s.direction.norm() > 0) || !(s.radius > 0) || !(s.length > 0))
                       throw InvalidArgument("tunnel: direction, radius and length must be positive");
                     if (perpendicular_part(Vec3::UnitZ(), s.direction.normalized()).norm() < 1e-6)
                       throw InvalidArgument("tunnel: centerline must not be vertical");
                   },
               },
               prim.shape);
  }
}

std::optional<Hit> Scene::intersect(const Vec3& origin, const Vec3& dir, double max_range) const {
  std::optional<Hit> best;
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    auto h = lidar_normals::intersect(primitives[i].shape, origin, dir);
    if (h && h->range <= max_range && (!best || h->range < best->range)) {
      h->primitive = i;
      best = h;
    }
  }
  return best;
}

double Scene::surface_distance(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& prim : primitives) best = std::min(best, lidar_normals::surface_distance(prim.shape, p));
  return best;
}

}  // namespace lidar_normals
