#pragma once

#include "lidar_normals/core.hpp"
#include "lidar_normals/refine.hpp"
#include "lidar_normals/scene.hpp"

#include <filesystem>
#include <string>

namespace lidar_normals {

/// Scene file contents: geometry plus the sensor drive through it.
/// Schema: docs/scene_format.md.
struct SceneSpec {
  Scene scene;
  Vec3 start_position{0.0, 0.0, 2.0};
  double start_yaw_deg = 0.0;
  Vec3 velocity = Vec3::Zero();  // m/s, world frame
  double yaw_rate_deg = 0.0;     // deg/s

  Pose start_pose() const;
};

SceneSpec parse_scene(const std::string& yaml_text, const std::string& origin = "<string>");
SceneSpec load_scene(const std::filesystem::path& path);

/// Keys absent from the file keep their defaults.
SensorConfig parse_sensor(const std::string& yaml_text, const std::string& origin = "<string>");
SensorConfig load_sensor(const std::filesystem::path& path);

RefineConfig parse_refine_config(const std::string& yaml_text, const std::string& origin = "<string>");
RefineConfig load_refine_config(const std::filesystem::path& path);

}  // namespace lidar_normals
