#include "lidar_normals/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace lidar_normals {

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

// Keeps `heap` sorted ascending with at most k entries.
void offer(std::vector<Neighbor>& heap, std::size_t k, const Neighbor& n) {
  if (heap.size() == k) {
    if (!closer(n, heap.back())) return;
    heap.pop_back();
  }
  auto pos = std::upper_bound(heap.begin(), heap.end(), n, closer);
  heap.insert(pos, n);
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points, int leaf_size) {
  if (points.size() >= kNone) throw InvalidArgument("KdTree: too many points");
  index_.resize(points.size());
  std::iota(index_.begin(), index_.end(), 0u);
  points_.assign(points.begin(), points.end());
  if (!points.empty()) {
    nodes_.reserve(2 * points.size() / std::max(1, leaf_size) + 1);
    build(0, static_cast<std::uint32_t>(points.size()), std::max(1, leaf_size));
  }
  // Reorder coordinates to tree order for locality.
  std::vector<Vec3> ordered(points_.size());
  for (std::size_t i = 0; i < index_.size(); ++i) ordered[i] = points[index_[i]];
  points_ = std::move(ordered);
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, int leaf_size) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= static_cast<std::uint32_t>(leaf_size)) return id;

  Vec3 lo = points_[index_[begin]], hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[index_[i]]);
    hi = hi.cwiseMax(points_[index_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all coincident: keep as leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  nodes_[id].axis = axis;
  nodes_[id].split = points_[index_[mid]][axis];
  const auto left = build(begin, mid, leaf_size);
  const auto right = build(mid, end, leaf_size);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::knn(const Vec3& q, std::size_t k, std::vector<Neighbor>& out,
                 std::uint32_t exclude) const {
  out.clear();
  if (k == 0 || nodes_.empty()) return;
  out.reserve(k + 1);
  search(0, q, k, out, exclude);
}

void KdTree::search(std::int32_t node_id, const Vec3& q, std::size_t k,
                    std::vector<Neighbor>& heap, std::uint32_t exclude) const {
  const Node& node = nodes_[node_id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = index_[i];
      if (idx == exclude) continue;
      offer(heap, k, Neighbor{idx, (points_[i] - q).squaredNorm()});
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0 ? node.left : node.right;
  const std::int32_t far = diff < 0 ? node.right : node.left;
  search(near, q, k, heap, exclude);
  // Equal distances must still be visited so the lower index can win a tie.
  if (heap.size() < k || diff * diff <= heap.back().dist2) search(far, q, k, heap, exclude);
}

std::size_t KdTree::count_within(const Vec3& q, double radius) const {
  if (nodes_.empty()) return 0;
  return count(0, q, radius * radius);
}

std::size_t KdTree::count(std::int32_t node_id, const Vec3& q, double r2) const {
  const Node& node = nodes_[node_id];
  if (node.left < 0) {
    std::size_t c = 0;
    for (std::uint32_t i = node.begin; i < node.end; ++i) c += (points_[i] - q).squaredNorm() <= r2;
    return c;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0 ? node.left : node.right;
  const std::int32_t far = diff < 0 ? node.right : node.left;
  std::size_t c = count(near, q, r2);
  if (diff * diff <= r2) c += count(far, q, r2);
  return c;
}

}  // namespace lidar_normals
