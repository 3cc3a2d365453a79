#include "lidar_normals/config.hpp"

#include "lidar_normals/io.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace lidar_normals {

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
  throw IoError(IoErrorKind::kParse, origin + ": " + msg);
}

YAML::Node parse_yaml(const std::string& text, const std::string& origin) {
  try {
    YAML::Node n = YAML::Load(text);
    if (n.IsNull()) return YAML::Node(YAML::NodeType::Map);
    if (!n.IsMap()) fail(origin, "expected a mapping at the top level");
    return n;
  } catch (const YAML::Exception& e) {
    fail(origin, e.what());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoErrorKind::kMissingFile, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
T get(const YAML::Node& node, const char* key, const std::string& origin) {
  if (!node[key]) fail(origin, std::string("missing key '") + key + "'");
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception& e) {
    fail(origin, std::string("key '") + key + "': " + e.what());
  }
}

template <typename T>
void get_opt(const YAML::Node& node, const char* key, T& dst, const std::string& origin) {
  if (node[key]) dst = get<T>(node, key, origin);
}

Vec3 get_vec3(const YAML::Node& node, const char* key, const std::string& origin) {
  const auto v = get<std::vector<double>>(node, key, origin);
  if (v.size() != 3) fail(origin, std::string("key '") + key + "' must have 3 components");
  return Vec3(v[0], v[1], v[2]);
}

void check_keys(const YAML::Node& node, std::initializer_list<const char*> allowed, const std::string& origin) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(origin, "unknown key '" + key + "'");
  }
}

ScenePrimitive parse_primitive(const YAML::Node& node, const std::string& origin) {
  const auto type = get<std::string>(node, "type", origin);
  ScenePrimitive prim;
  get_opt(node, "material", prim.material_id, origin);
  if (type == "plane") {
    check_keys(node, {"type", "material", "point", "normal"}, origin);
    prim.shape = Plane{get_vec3(node, "point", origin), get_vec3(node, "normal", origin)};
  } else if (type == "box") {
    check_keys(node, {"type", "material", "min", "max"}, origin);
    prim.shape = Box{get_vec3(node, "min", origin), get_vec3(node, "max", origin)};
  } else if (type == "cylinder") {
    check_keys(node, {"type", "material", "center", "axis", "radius", "half_length"}, origin);
    prim.shape = Cylinder{get_vec3(node, "center", origin), get_vec3(node, "axis", origin),
                          get<double>(node, "radius", origin), get<double>(node, "half_length", origin)};
  } else if (type == "tunnel") {
    check_keys(node, {"type", "material", "start", "direction", "length", "radius"}, origin);
    prim.shape = TunnelArc{get_vec3(node, "start", origin), get_vec3(node, "direction", origin),
                           get<double>(node, "length", origin), get<double>(node, "radius", origin)};
  } else {
    fail(origin, "unknown primitive type '" + type + "'");
  }
  return prim;
}

}  // namespace

Pose SceneSpec::start_pose() const { return Pose::rotation_z(deg2rad(start_yaw_deg), start_position); }

SceneSpec parse_scene(const std::string& text, const std::string& origin) {
  const YAML::Node root = parse_yaml(text, origin);
  check_keys(root, {"name", "primitives", "trajectory"}, origin);
  SceneSpec spec;
  spec.scene.name = get<std::string>(root, "name", origin);
  const YAML::Node prims = root["primitives"];
  if (!prims || !prims.IsSequence()) fail(origin, "missing 'primitives' list");
  for (const auto& p : prims) spec.scene.primitives.push_back(parse_primitive(p, origin));
  if (const YAML::Node traj = root["trajectory"]) {
    check_keys(traj, {"start", "yaw_deg", "velocity", "yaw_rate_deg"}, origin);
    if (traj["start"]) spec.start_position = get_vec3(traj, "start", origin);
    if (traj["velocity"]) spec.velocity = get_vec3(traj, "velocity", origin);
    get_opt(traj, "yaw_deg", spec.start_yaw_deg, origin);
    get_opt(traj, "yaw_rate_deg", spec.yaw_rate_deg, origin);
  }
  try {
    spec.scene.validate();
  } catch (const InvalidArgument& e) {
    fail(origin, e.what());
  }
  return spec;
}

SceneSpec load_scene(const fs::path& path) { return parse_scene(read_file(path), path.string()); }

SensorConfig parse_sensor(const std::string& text, const std::string& origin) {
  const YAML::Node root = parse_yaml(text, origin);
  check_keys(root, {"beams", "upper_fov_deg", "lower_fov_deg", "horizontal_fov_deg", "max_range_m",
                    "points_per_second", "rotation_hz", "drop_ratio", "noise_std_m"},
             origin);
  SensorConfig s;
  get_opt(root, "beams", s.beams, origin);
  get_opt(root, "upper_fov_deg", s.upper_fov_deg, origin);
  get_opt(root, "lower_fov_deg", s.lower_fov_deg, origin);
  get_opt(root, "horizontal_fov_deg", s.horizontal_fov_deg, origin);
  get_opt(root, "max_range_m", s.max_range_m, origin);
  get_opt(root, "points_per_second", s.points_per_second, origin);
  get_opt(root, "rotation_hz", s.rotation_hz, origin);
  get_opt(root, "drop_ratio", s.drop_ratio, origin);
  get_opt(root, "noise_std_m", s.noise_std_m, origin);
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    fail(origin, e.what());
  }
  return s;
}

SensorConfig load_sensor(const fs::path& path) { return parse_sensor(read_file(path), path.string()); }

RefineConfig parse_refine_config(const std::string& text, const std::string& origin) {
  const YAML::Node root = parse_yaml(text, origin);
  check_keys(root, {"gamma", "max_iters", "step_size", "huber_delta", "convergence_tol", "renormalize_each_iter", "k",
                    "sigma", "use_sgtv", "use_tgtv", "use_eikonal", "weight_bins"},
             origin);
  RefineConfig c;
  get_opt(root, "gamma", c.gamma, origin);
  get_opt(root, "max_iters", c.max_iters, origin);
  get_opt(root, "step_size", c.step_size, origin);
  get_opt(root, "huber_delta", c.huber_delta, origin);
  get_opt(root, "convergence_tol", c.convergence_tol, origin);
  get_opt(root, "renormalize_each_iter", c.renormalize_each_iter, origin);
  get_opt(root, "k", c.k, origin);
  get_opt(root, "sigma", c.sigma, origin);
  get_opt(root, "use_sgtv", c.use_sgtv, origin);
  get_opt(root, "use_tgtv", c.use_tgtv, origin);
  get_opt(root, "use_eikonal", c.use_eikonal, origin);
  get_opt(root, "weight_bins", c.weight_bins, origin);
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    fail(origin, e.what());
  }
  return c;
}

RefineConfig load_refine_config(const fs::path& path) { return parse_refine_config(read_file(path), path.string()); }

}  // namespace lidar_normals
