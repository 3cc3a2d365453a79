#pragma once

#include "lidar_normals/core.hpp"
#include "lidar_normals/graph.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace lidar_normals {

inline constexpr double kDefaultHuberDelta = 1e-3;
inline constexpr double kDefaultGamma = 0.1;

/// Value and gradient of one objective term with respect to the normals.
/// An empty gradient with zero value marks an absent term.
struct EnergyReport {
  double value = 0.0;
  std::vector<Vec3> gradient;
};

/// Non-negative per-point weights with mean 1.
struct SampleWeights {
  std::vector<double> values;

  static SampleWeights uniform(std::size_t n) { return SampleWeights{std::vector<double>(n, 1.0)}; }
  void validate() const;
};

/// Smoothed absolute value: x^2/(2 delta) inside [-delta, delta], |x| - delta/2 outside.
double huber(double x, double delta);
double huber_derivative(double x, double delta);

/// (1/N) sum_i w_i |n_i - n̂_i|_1 with each absolute value Huber-smoothed.
/// Pass nullptr for unit weights.
EnergyReport l1_data_energy(const NormalField& field, const NormalField& labels,
                            const SampleWeights* weights = nullptr, double delta = kDefaultHuberDelta);

/// (1/|E|) sum_(i,j) w_ij |n̂_i - n̂_j|_1 over a same-frame graph.
EnergyReport sgtv_energy(const NormalField& field, const WeightedGraph& graph,
                         double delta = kDefaultHuberDelta);

/// (1/|E|) sum_(i,j) w_ij |R_t n̂_i - R_t1 n̂_j|_1 with R the rotation parts of
/// the two key-frame maps. The gradient is [d/dfield_t ; d/dfield_t1].
EnergyReport tgtv_energy(const NormalField& field_t, const NormalField& field_t1, const WeightedGraph& bigraph,
                         const Pose& map_t, const Pose& map_t1, double delta = kDefaultHuberDelta);

/// (1/N) sum_i (|n̂_i| - 1)^2; the gradient at a zero vector is defined as 0.
EnergyReport eikonal_energy(const NormalField& field);

/// data + gamma (sgtv + tgtv + eikonal), gradients combined the same way.
EnergyReport total_objective(const EnergyReport& data, const EnergyReport& sgtv, const EnergyReport& tgtv,
                             const EnergyReport& eikonal, double gamma);

/// Unit vertices of an icosphere with `bin_count` = 10 * 4^s + 2 vertices.
std::vector<Vec3> icosphere_vertices(int bin_count);

/// Labels binned to their nearest icosphere vertex; w_i proportional to
/// total / count(bin_i), normalized to mean 1.
SampleWeights inverse_frequency_weights(const NormalField& labels, int bin_count = 42);

/// Terms of a TV edge sum over a flat state vector. Sources live at
/// state[source_offset + i], targets at state[target_offset + j]; each side is
/// rotated before differencing. Used by both the free energy functions and the
/// multi-frame refiner.
class GraphTvTerm {
 public:
  GraphTvTerm(const WeightedGraph& graph, std::size_t source_offset, std::size_t target_offset,
              const Mat3& rot_source = Mat3::Identity(), const Mat3& rot_target = Mat3::Identity());

  std::size_t edge_count() const { return graph_->edge_count(); }

  /// Returns sum_e w_e sum_c huber(diff_c); adds scale * gradient into grad
  /// when grad is non-empty.
  double evaluate(std::span<const Vec3> state, double delta, double scale, std::span<Vec3> grad) const;

 private:
  struct InEdge {
    std::uint32_t source;
    double weight;
  };

  const WeightedGraph* graph_;
  Adjacency adjacency_;
  std::vector<InEdge> in_edges_;  // adjacency_.in_edges resolved, for a streaming target pass
  std::size_t source_offset_, target_offset_;
  Mat3 rot_source_, rot_target_;
  bool rotate_;
};

}  // namespace lidar_normals
