#pragma once

#include "lidar_normals/core.hpp"
#include "lidar_normals/energy.hpp"
#include "lidar_normals/graph.hpp"

#include <memory>
#include <stdexcept>
#include <vector>

namespace lidar_normals {

struct RefineConfig {
  double gamma = kDefaultGamma;
  int max_iters = 100;
  /// Per-point step: the update is x -= step * N * grad, since every term is a mean.
  double step_size = 0.05;
  double huber_delta = kDefaultHuberDelta;
  double convergence_tol = 1e-7;
  bool renormalize_each_iter = false;
  int k = kDefaultGraphK;
  double sigma = kDefaultSigma;
  bool use_sgtv = true;
  bool use_tgtv = true;
  bool use_eikonal = true;
  /// Icosphere bins for inverse-frequency data weights; 0 means unit weights.
  int weight_bins = 0;

  void validate() const;
};

class RefineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TermValues {
  double data = 0, sgtv = 0, tgtv = 0, eikonal = 0, total = 0;
};

/// The full objective over all frames' normals stacked in one state vector.
/// Data and Eikonal terms average over all points, SGTV over all intra-frame
/// edges, TGTV over all edges between consecutive frames.
class Objective {
 public:
  Objective(const std::vector<Frame>& frames, const std::vector<NormalField>& labels, const RefineConfig& config);
  Objective(const Objective&) = delete;
  Objective& operator=(const Objective&) = delete;

  std::size_t size() const { return labels_.size(); }
  const std::vector<Vec3>& labels() const { return labels_; }
  const std::vector<std::size_t>& offsets() const { return offsets_; }
  bool has_temporal() const { return !temporal_.empty(); }

  /// Objective value; fills grad (resized to size()) when non-null.
  double evaluate(std::span<const Vec3> x, std::vector<Vec3>* grad = nullptr, TermValues* terms = nullptr) const;

 private:
  RefineConfig config_;
  std::vector<Vec3> labels_;
  std::vector<double> weights_;
  std::vector<std::size_t> offsets_;
  std::vector<std::unique_ptr<WeightedGraph>> graphs_;
  std::vector<GraphTvTerm> spatial_, temporal_;
  std::size_t spatial_edges_ = 0, temporal_edges_ = 0;
};

struct RefineResult {
  std::vector<NormalField> fields;  // unit length
  std::vector<double> trace;        // objective at each accepted iterate, starting with the initial one
  int iterations = 0;
  bool converged = false;
};

/// Gradient descent with step halving on the combined objective, using the
/// initial fields as labels. Consecutive frames with poses add the temporal
/// term; a single frame never does.
RefineResult refine_normals(const std::vector<Frame>& frames, const std::vector<NormalField>& init_fields,
                            const RefineConfig& config);

}  // namespace lidar_normals
