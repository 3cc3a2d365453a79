#pragma once

#include "lidar_normals/core.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace lidar_normals {

inline constexpr int kDefaultGraphK = 8;
inline constexpr double kDefaultSigma = 0.1;

struct Edge {
  std::uint32_t source;
  std::uint32_t target;
  double weight;
};

/// Directed k-neighborhood graph with Gaussian-decay weights
/// w = exp(-d^2 / sigma^2). In bipartite form sources index one frame and
/// targets the next; otherwise both index the same node set.
struct WeightedGraph {
  std::vector<Edge> edges;  // grouped by source, nearest first
  std::size_t source_count = 0;
  std::size_t target_count = 0;
  double sigma = kDefaultSigma;
  int k = kDefaultGraphK;
  bool bipartite = false;

  std::size_t edge_count() const { return edges.size(); }
};

double edge_weight(double distance, double sigma);
inline double edge_weight(const Vec3& a, const Vec3& b, double sigma) {
  return edge_weight((a - b).norm(), sigma);
}

WeightedGraph build_knn_graph(std::span<const Vec3> points, int k = kDefaultGraphK,
                              double sigma = kDefaultSigma);

/// Points of frame t and t+1 are mapped by (T A)^-1 of their own frame, then
/// every node of frame t is linked to its k nearest mapped nodes of frame t+1.
WeightedGraph build_temporal_graph(const Frame& frame_t, const Frame& frame_t1, const Pose& aug_t,
                                   const Pose& aug_t1, int k = kDefaultGraphK,
                                   double sigma = kDefaultSigma);

/// (T A)^-1 for a frame's pose and augmentation; throws if the pose is absent.
Pose keyframe_map(const Frame& frame, const Pose& aug);

/// Median neighbor count within `radius` (self excluded), floored at 1. A
/// data-driven default for k.
int suggest_k(std::span<const Vec3> points, double radius = 0.1);

/// Incoming/outgoing edge lists per node, used for race-free gradient gathers.
struct Adjacency {
  std::vector<std::uint32_t> out_offsets, out_edges;
  std::vector<std::uint32_t> in_offsets, in_edges;

  static Adjacency of(const WeightedGraph& graph);
};

}  // namespace lidar_normals
