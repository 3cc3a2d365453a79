#pragma once

#include "lidar_normals/core.hpp"
#include "lidar_normals/scene.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lidar_normals {

/// Unit ray direction in the sensor frame (x forward, z up).
Vec3 ray_direction(double elevation_rad, double azimuth_rad);

/// Beam elevations in radians, uniform over [lower_fov, upper_fov].
std::vector<double> beam_elevations(const SensorConfig& sensor);
/// Azimuths in radians, uniform over the horizontal field of view.
std::vector<double> beam_azimuths(const SensorConfig& sensor);

/// Casts one full sweep. Ground-truth normals are expressed in the sensor
/// frame and face the sensor (n . ray < 0). Range noise is applied along the
/// ray, then each return is dropped with probability drop_ratio.
Frame raycast_frame(const Scene& scene, const SensorConfig& sensor, const Pose& pose,
                    std::uint64_t seed);

struct Trajectory {
  std::vector<std::pair<double, Pose>> poses;

  /// Checks timestamps increase at exactly 1/rotation_hz spacing (1e-9 s).
  void validate(double rotation_hz) const;

  /// Constant-velocity drive starting at `start`, one pose per sweep.
  static Trajectory linear(const Pose& start, const Vec3& velocity, double yaw_rate_rad, int frames,
                           double rotation_hz, double t0 = 0.0);
};

/// Per-frame seed derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

std::vector<Frame> simulate_sequence(const Scene& scene, const SensorConfig& sensor,
                                     const Trajectory& trajectory, std::uint64_t seed);

enum class Split { kTrain, kTest, kVal };
std::string to_string(Split s);
Split parse_split(const std::string& s);

struct SplitManifest {
  std::map<std::string, Split> assignment;

  std::vector<std::string> scenes_in(Split s) const;
};

/// Partitions whole scenes (never frames) into train/test/val with counts
/// proportional to `ratios`. Every split with a non-zero ratio receives at
/// least one scene.
SplitManifest assign_splits(const std::vector<std::string>& scenes,
                            const std::array<double, 3>& ratios, std::uint64_t seed = 0);

}  // namespace lidar_normals
