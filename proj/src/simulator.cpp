#include "lidar_normals/simulator.hpp"

#include "lidar_normals/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lidar_normals {

Vec3 ray_direction(double elevation_rad, double azimuth_rad) {
  const double ce = std::cos(elevation_rad);
  return Vec3(ce * std::cos(azimuth_rad), ce * std::sin(azimuth_rad), std::sin(elevation_rad));
}

std::vector<double> beam_elevations(const SensorConfig& sensor) {
  std::vector<double> out(sensor.beams);
  const double lo = deg2rad(sensor.lower_fov_deg), hi = deg2rad(sensor.upper_fov_deg);
  if (sensor.beams == 1) {
    out[0] = lo;
    return out;
  }
  for (int b = 0; b < sensor.beams; ++b) out[b] = lo + (hi - lo) * b / (sensor.beams - 1);
  return out;
}

std::vector<double> beam_azimuths(const SensorConfig& sensor) {
  const int n = sensor.azimuth_count();
  const double fov = deg2rad(sensor.horizontal_fov_deg);
  std::vector<double> out(n);
  for (int a = 0; a < n; ++a) out[a] = -0.5 * fov + fov * a / n;
  return out;
}

Frame raycast_frame(const Scene& scene, const SensorConfig& sensor, const Pose& pose,
                    std::uint64_t seed) {
  sensor.validate();
  scene.validate();
  const auto elevations = beam_elevations(sensor);
  const auto azimuths = beam_azimuths(sensor);
  const Mat3& rot = pose.rotation();
  const Vec3& origin = pose.translation();
  const double range_cap = sensor.max_range_m + 3.0 * sensor.noise_std_m;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sensor.noise_std_m > 0 ? sensor.noise_std_m : 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Frame frame;
  frame.pose = pose;
  std::vector<UnitVec3> normals;
  const std::size_t rays = elevations.size() * azimuths.size();
  frame.points.reserve(rays);
  normals.reserve(rays);

  for (double az : azimuths) {
    for (double el : elevations) {
      const Vec3 dir_sensor = ray_direction(el, az);
      const Vec3 dir_world = rot * dir_sensor;
      auto hit = scene.intersect(origin, dir_world, sensor.max_range_m);
      if (!hit) continue;
      Vec3 n = hit->normal;
      const double facing = n.dot(dir_world);
      if (facing == 0.0) continue;  // grazing hit has no sensor-facing side
      if (facing > 0.0) n = -n;

      double range = hit->range;
      if (sensor.noise_std_m > 0.0) range = std::clamp(range + noise(rng), 0.0, range_cap);
      if (sensor.drop_ratio > 0.0 && uniform(rng) < sensor.drop_ratio) continue;

      frame.points.push_back(range * dir_sensor);
      normals.push_back(UnitVec3::normalized(rot.transpose() * n));
    }
  }
  frame.gt_normals = std::move(normals);
  return frame;
}

void Trajectory::validate(double rotation_hz) const {
  if (poses.empty()) throw InvalidArgument("Trajectory: no poses");
  const double dt = 1.0 / rotation_hz;
  for (std::size_t i = 1; i < poses.size(); ++i) {
    const double step = poses[i].first - poses[i - 1].first;
    if (!(step > 0.0) || std::abs(step - dt) > 1e-9)
      throw InvalidArgument("Trajectory: timestamps must advance by 1/rotation_hz");
  }
}

Trajectory Trajectory::linear(const Pose& start, const Vec3& velocity, double yaw_rate_rad, int frames,
                              double rotation_hz, double t0) {
  if (frames < 1) throw InvalidArgument("Trajectory::linear: frames must be >= 1");
  Trajectory traj;
  const double dt = 1.0 / rotation_hz;
  for (int i = 0; i < frames; ++i) {
    const double elapsed = i * dt;
    const Pose yaw = Pose::rotation_z(yaw_rate_rad * elapsed);
    const Pose p(yaw.rotation() * start.rotation(), start.translation() + velocity * elapsed);
    traj.poses.emplace_back(t0 + elapsed, p);
  }
  return traj;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<Frame> simulate_sequence(const Scene& scene, const SensorConfig& sensor,
                                     const Trajectory& trajectory, std::uint64_t seed) {
  trajectory.validate(sensor.rotation_hz);
  std::vector<Frame> frames(trajectory.poses.size());
  parallel_for(frames.size(), [&](std::size_t i) {
    const auto& [stamp, pose] = trajectory.poses[i];
    frames[i] = raycast_frame(scene, sensor, pose, derive_seed(seed, i));
    frames[i].timestamp = stamp;
    frames[i].frame_id = static_cast<std::int64_t>(i);
  });
  return frames;
}

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    case Split::kVal: return "val";
  }
  return "train";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  if (s == "val") return Split::kVal;
  throw InvalidArgument("unknown split '" + s + "'");
}

std::vector<std::string> SplitManifest::scenes_in(Split s) const {
  std::vector<std::string> out;
  for (const auto& [name, split] : assignment)
    if (split == s) out.push_back(name);
  return out;
}

SplitManifest assign_splits(const std::vector<std::string>& scenes, const std::array<double, 3>& ratios,
                            std::uint64_t seed) {
  double total_ratio = 0.0;
  int nonzero = 0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw InvalidArgument("assign_splits: ratios must be non-negative");
    total_ratio += r;
    nonzero += r > 0.0;
  }
  if (nonzero == 0) throw InvalidArgument("assign_splits: all ratios are zero");
  std::vector<std::string> names = scenes;
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw InvalidArgument("assign_splits: scene names must be distinct");
  const auto n = static_cast<int>(names.size());
  if (n < nonzero) throw InvalidArgument("assign_splits: fewer scenes than non-zero splits");

  // Largest-remainder apportionment.
  std::array<int, 3> counts{};
  std::array<double, 3> remainder{};
  int assigned = 0;
  for (int s = 0; s < 3; ++s) {
    const double ideal = n * ratios[s] / total_ratio;
    counts[s] = static_cast<int>(std::floor(ideal));
    remainder[s] = ideal - counts[s];
    assigned += counts[s];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (int i = 0; assigned < n; i = (i + 1) % 3) {
    if (ratios[order[i]] > 0.0) {
      ++counts[order[i]];
      ++assigned;
    }
  }
  for (int s = 0; s < 3; ++s) {
    if (ratios[s] > 0.0 && counts[s] == 0) {
      const int donor = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      --counts[donor];
      ++counts[s];
    }
  }

  std::mt19937_64 rng(seed);
  std::shuffle(names.begin(), names.end(), rng);
  SplitManifest manifest;
  int pos = 0;
  for (int s = 0; s < 3; ++s)
    for (int c = 0; c < counts[s]; ++c) manifest.assignment[names[pos++]] = static_cast<Split>(s);
  return manifest;
}

}  // namespace lidar_normals
