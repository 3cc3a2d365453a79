#include "lidar_normals/graph.hpp"

#include "lidar_normals/kdtree.hpp"
#include "lidar_normals/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace lidar_normals {

namespace {

void check_params(int k, double sigma) {
  if (k < 1) throw InvalidArgument("graph: k must be >= 1");
  if (!(sigma > 0.0)) throw InvalidArgument("graph: sigma must be > 0");
}

// Fills edges[i*k ...] per query; shorter neighbor lists leave gaps that are
// compacted afterwards.
WeightedGraph knn_edges(std::span<const Vec3> queries, std::span<const Vec3> targets, int k, double sigma,
                        bool exclude_self) {
  const KdTree tree(targets);
  const std::size_t kk = static_cast<std::size_t>(k);
  const std::size_t n = queries.size();
  std::vector<Edge> slots(n * kk, Edge{KdTree::kNone, KdTree::kNone, 0.0});
  const double inv_s2 = 1.0 / (sigma * sigma);

  parallel_for(n, [&](std::size_t i) {
    thread_local std::vector<Neighbor> nbrs;
    tree.knn(queries[i], kk, nbrs, exclude_self ? static_cast<std::uint32_t>(i) : KdTree::kNone);
    for (std::size_t m = 0; m < nbrs.size(); ++m)
      slots[i * kk + m] = Edge{static_cast<std::uint32_t>(i), nbrs[m].index, std::exp(-nbrs[m].dist2 * inv_s2)};
  });

  WeightedGraph g;
  g.sigma = sigma;
  g.k = k;
  g.source_count = n;
  g.target_count = targets.size();
  g.edges.reserve(slots.size());
  for (const auto& e : slots)
    if (e.source != KdTree::kNone) g.edges.push_back(e);
  return g;
}

}  // namespace

double edge_weight(double distance, double sigma) { return std::exp(-(distance * distance) / (sigma * sigma)); }

WeightedGraph build_knn_graph(std::span<const Vec3> points, int k, double sigma) {
  check_params(k, sigma);
  if (points.size() < 2) throw InvalidArgument("build_knn_graph: need at least 2 points");
  return knn_edges(points, points, k, sigma, true);
}

Pose keyframe_map(const Frame& frame, const Pose& aug) {
  if (!frame.pose) throw InvalidArgument("frame " + std::to_string(frame.frame_id) + " has no pose");
  return compose(*frame.pose, aug).inverse();
}

WeightedGraph build_temporal_graph(const Frame& frame_t, const Frame& frame_t1, const Pose& aug_t,
                                   const Pose& aug_t1, int k, double sigma) {
  check_params(k, sigma);
  if (frame_t.size() == 0 || frame_t1.size() == 0) throw InvalidArgument("build_temporal_graph: empty frame");
  const Pose map_t = keyframe_map(frame_t, aug_t);
  const Pose map_t1 = keyframe_map(frame_t1, aug_t1);

  // Frames hold A T P; (T A)^-1 brings them back to the key frame.
  std::vector<Vec3> mapped_t(frame_t.size()), mapped_t1(frame_t1.size());
  parallel_for(mapped_t.size(), [&](std::size_t i) { mapped_t[i] = transform_point(map_t, frame_t.points[i]); });
  parallel_for(mapped_t1.size(), [&](std::size_t i) { mapped_t1[i] = transform_point(map_t1, frame_t1.points[i]); });

  WeightedGraph g = knn_edges(mapped_t, mapped_t1, k, sigma, false);
  g.bipartite = true;
  return g;
}

int suggest_k(std::span<const Vec3> points, double radius) {
  if (points.empty()) throw InvalidArgument("suggest_k: no points");
  const KdTree tree(points);
  std::vector<std::size_t> counts(points.size());
  parallel_for(points.size(), [&](std::size_t i) { counts[i] = tree.count_within(points[i], radius) - 1; });
  auto mid = counts.begin() + static_cast<std::ptrdiff_t>((counts.size() - 1) / 2);
  std::nth_element(counts.begin(), mid, counts.end());
  return std::max<int>(1, static_cast<int>(*mid));
}

Adjacency Adjacency::of(const WeightedGraph& graph) {
  Adjacency adj;
  auto fill = [&](std::size_t nodes, auto key, std::vector<std::uint32_t>& offsets, std::vector<std::uint32_t>& ids) {
    offsets.assign(nodes + 1, 0);
    for (const auto& e : graph.edges) ++offsets[key(e) + 1];
    for (std::size_t i = 0; i < nodes; ++i) offsets[i + 1] += offsets[i];
    ids.resize(graph.edges.size());
    std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::uint32_t e = 0; e < graph.edges.size(); ++e) ids[cursor[key(graph.edges[e])]++] = e;
  };
  fill(graph.source_count, [](const Edge& e) { return e.source; }, adj.out_offsets, adj.out_edges);
  fill(graph.target_count, [](const Edge& e) { return e.target; }, adj.in_offsets, adj.in_edges);
  return adj;
}

}  // namespace lidar_normals
