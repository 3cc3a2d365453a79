#pragma once

#include "lidar_normals/core.hpp"
#include "lidar_normals/scene.hpp"
#include "lidar_normals/simulator.hpp"

#include <random>
#include <vector>

namespace lidar_normals::fixtures {

/// Ground plane, two boxes and an upright cylinder around the origin.
inline Scene street_scene() {
  Scene s;
  s.name = "street";
  s.primitives.push_back({Plane{Vec3::Zero(), Vec3::UnitZ()}, 0});
  s.primitives.push_back({Box{Vec3(5, -2, 0), Vec3(8, 2, 3)}, 1});
  s.primitives.push_back({Box{Vec3(-6, 3, 0), Vec3(-3, 7, 2.5)}, 1});
  s.primitives.push_back({Cylinder{Vec3(3, -5, 1.5), Vec3::UnitZ(), 0.8, 1.5}, 2});
  return s;
}

/// Two sweeps 0.5 m apart along x, sensor 2 m above ground.
inline std::vector<Frame> street_sequence(const SensorConfig& sensor, std::uint64_t seed, int frames = 2) {
  const auto traj = Trajectory::linear(Pose::from_translation(Vec3(0, 0, 2)), Vec3(5, 0, 0), 0.0, frames,
                                       sensor.rotation_hz);
  return simulate_sequence(street_scene(), sensor, traj, seed);
}

/// Negates a seeded `fraction` of the normals; returns the flipped indices.
inline std::vector<std::size_t> flip_fraction(NormalField& field, double fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(fraction);
  std::vector<std::size_t> flipped;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (coin(rng)) {
      field.normals[i] = -field.normals[i];
      flipped.push_back(i);
    }
  }
  return flipped;
}

inline Frame plane_frame(int nx, int ny, double spacing, double height = -2.0) {
  Frame f;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) f.points.emplace_back((i - nx / 2) * spacing, (j - ny / 2) * spacing, height);
  std::vector<UnitVec3> gt(f.points.size(), UnitVec3(0, 0, 1));
  f.gt_normals = gt;
  f.pose = Pose::identity();
  return f;
}

}  // namespace lidar_normals::fixtures
