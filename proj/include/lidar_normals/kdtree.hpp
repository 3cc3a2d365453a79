#pragma once

#include "lidar_normals/core.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace lidar_normals {

struct Neighbor {
  std::uint32_t index;
  double dist2;
};

/// Static 3-d tree with exact k-nearest-neighbor queries. Results are ordered
/// by (squared distance, index), so equal distances resolve to the lower index.
class KdTree {
 public:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  explicit KdTree(std::span<const Vec3> points, int leaf_size = 10);

  std::size_t size() const { return points_.size(); }

  /// Up to k neighbors of q; `exclude` is skipped (use for self queries).
  void knn(const Vec3& q, std::size_t k, std::vector<Neighbor>& out,
           std::uint32_t exclude = kNone) const;
  std::vector<Neighbor> knn(const Vec3& q, std::size_t k, std::uint32_t exclude = kNone) const {
    std::vector<Neighbor> out;
    knn(q, k, out, exclude);
    return out;
  }

  /// Number of points with distance <= radius from q.
  std::size_t count_within(const Vec3& q, double radius) const;

 private:
  struct Node {
    std::uint32_t begin, end;
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, int leaf_size);
  void search(std::int32_t node, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap,
              std::uint32_t exclude) const;
  std::size_t count(std::int32_t node, const Vec3& q, double r2) const;

  std::vector<Vec3> points_;  // reordered by tree position
  std::vector<std::uint32_t> index_;
  std::vector<Node> nodes_;
};

}  // namespace lidar_normals
