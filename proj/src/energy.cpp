#include "lidar_normals/energy.hpp"

#include "lidar_normals/kdtree.hpp"
#include "lidar_normals/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

namespace lidar_normals {

void SampleWeights::validate() const {
  if (values.empty()) return;
  double sum = 0.0;
  for (double w : values) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidArgument("SampleWeights: weights must be finite and >= 0");
    sum += w;
  }
  if (std::abs(sum / values.size() - 1.0) > 1e-9) throw InvalidArgument("SampleWeights: mean must be 1");
}

namespace {

inline double huber_impl(double x, double delta) {
  const double a = std::abs(x);
  return a <= delta ? 0.5 * x * x / delta : a - 0.5 * delta;
}

inline double huber_derivative_impl(double x, double delta) { return std::clamp(x / delta, -1.0, 1.0); }

// Branch-free forms of the per-component sums; q = min(|x|, delta) gives both pieces.
inline double huber3(const Vec3& d, double delta) {
  const Eigen::Array3d a = d.array().abs();
  const Eigen::Array3d q = a.min(delta);
  return (q * (a - 0.5 * q)).sum() / delta;
}

inline Vec3 huber3_derivative(const Vec3& d, double delta) {
  return (d.array() / delta).max(-1.0).min(1.0).matrix();
}

}  // namespace

double huber(double x, double delta) { return huber_impl(x, delta); }
double huber_derivative(double x, double delta) { return huber_derivative_impl(x, delta); }

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("huber delta must be > 0");
}

}  // namespace

EnergyReport l1_data_energy(const NormalField& field, const NormalField& labels, const SampleWeights* weights,
                            double delta) {
  check_delta(delta);
  const std::size_t n = field.size();
  if (labels.size() != n) throw InvalidArgument("l1_data_energy: field/label length mismatch");
  if (weights && weights->values.size() != n) throw InvalidArgument("l1_data_energy: weight length mismatch");
  EnergyReport r;
  r.gradient.assign(n, Vec3::Zero());
  if (n == 0) return r;
  const double inv_n = 1.0 / static_cast<double>(n);
  r.value = inv_n * parallel_sum(n, [&](std::size_t i) {
              const double w = weights ? weights->values[i] : 1.0;
              const Vec3 d = field.normals[i] - labels.normals[i];
              r.gradient[i] = (w * inv_n) * huber3_derivative(d, delta);
              return w * huber3(d, delta);
            });
  return r;
}

GraphTvTerm::GraphTvTerm(const WeightedGraph& graph, std::size_t source_offset, std::size_t target_offset,
                         const Mat3& rot_source, const Mat3& rot_target)
    : graph_(&graph),
      adjacency_(Adjacency::of(graph)),
      source_offset_(source_offset),
      target_offset_(target_offset),
      rot_source_(rot_source),
      rot_target_(rot_target),
      rotate_(!rot_source.isIdentity(0.0) || !rot_target.isIdentity(0.0)) {
  in_edges_.reserve(adjacency_.in_edges.size());
  for (std::uint32_t id : adjacency_.in_edges) in_edges_.push_back({graph.edges[id].source, graph.edges[id].weight});
}

double GraphTvTerm::evaluate(std::span<const Vec3> state, double delta, double scale, std::span<Vec3> grad) const {
  const auto& edges = graph_->edges;
  const bool want_grad = !grad.empty();
  auto diff = [&](const Edge& e) {
    const Vec3& a = state[source_offset_ + e.source];
    const Vec3& b = state[target_offset_ + e.target];
    return rotate_ ? Vec3(rot_source_ * a - rot_target_ * b) : Vec3(a - b);
  };

  // Per-node gathers keep accumulation race-free and ordered. The source pass
  // also sums the value, so it is identical with and without a gradient.
  const Mat3 rs_t = scale * rot_source_.transpose();
  const Mat3 rt_t = scale * rot_target_.transpose();
  const double value = parallel_sum(graph_->source_count, [&](std::size_t i) {
    double v = 0.0;
    Vec3 acc = Vec3::Zero();
    for (std::uint32_t p = adjacency_.out_offsets[i]; p < adjacency_.out_offsets[i + 1]; ++p) {
      const Edge& e = edges[adjacency_.out_edges[p]];
      const Vec3 d = diff(e);
      v += e.weight * huber3(d, delta);
      if (want_grad) acc += e.weight * huber3_derivative(d, delta);
    }
    if (want_grad) grad[source_offset_ + i] += rs_t * acc;
    return v;
  });

  if (want_grad) {
    parallel_for(graph_->target_count, [&](std::size_t j) {
      Vec3 acc = Vec3::Zero();
      for (std::uint32_t p = adjacency_.in_offsets[j]; p < adjacency_.in_offsets[j + 1]; ++p) {
        const InEdge& e = in_edges_[p];
        acc += e.weight * huber3_derivative(diff(Edge{e.source, static_cast<std::uint32_t>(j), e.weight}), delta);
      }
      grad[target_offset_ + j] -= rt_t * acc;
    });
  }
  return value;
}

EnergyReport sgtv_energy(const NormalField& field, const WeightedGraph& graph, double delta) {
  check_delta(delta);
  if (graph.bipartite) throw InvalidArgument("sgtv_energy: graph is bipartite");
  if (graph.source_count != field.size() || graph.target_count != field.size())
    throw InvalidArgument("sgtv_energy: graph node count does not match field");
  for (const auto& e : graph.edges)
    if (e.source >= field.size() || e.target >= field.size()) throw InvalidArgument("sgtv_energy: edge index out of range");
  EnergyReport r;
  r.gradient.assign(field.size(), Vec3::Zero());
  if (graph.edges.empty()) return r;
  const double inv_e = 1.0 / static_cast<double>(graph.edge_count());
  const GraphTvTerm term(graph, 0, 0);
  r.value = inv_e * term.evaluate(field.normals, delta, inv_e, r.gradient);
  return r;
}

EnergyReport tgtv_energy(const NormalField& field_t, const NormalField& field_t1, const WeightedGraph& bigraph,
                         const Pose& map_t, const Pose& map_t1, double delta) {
  check_delta(delta);
  if (bigraph.source_count != field_t.size() || bigraph.target_count != field_t1.size())
    throw InvalidArgument("tgtv_energy: graph does not match fields");
  for (const auto& e : bigraph.edges)
    if (e.source >= field_t.size() || e.target >= field_t1.size())
      throw InvalidArgument("tgtv_energy: edge index out of range");
  std::vector<Vec3> state(field_t.normals);
  state.insert(state.end(), field_t1.normals.begin(), field_t1.normals.end());
  EnergyReport r;
  r.gradient.assign(state.size(), Vec3::Zero());
  if (bigraph.edges.empty()) return r;
  const double inv_e = 1.0 / static_cast<double>(bigraph.edge_count());
  const GraphTvTerm term(bigraph, 0, field_t.size(), map_t.rotation(), map_t1.rotation());
  r.value = inv_e * term.evaluate(state, delta, inv_e, r.gradient);
  return r;
}

EnergyReport eikonal_energy(const NormalField& field) {
  const std::size_t n = field.size();
  EnergyReport r;
  r.gradient.assign(n, Vec3::Zero());
  if (n == 0) return r;
  const double inv_n = 1.0 / static_cast<double>(n);
  r.value = inv_n * parallel_sum(n, [&](std::size_t i) {
              const Vec3& v = field.normals[i];
              const double len = v.norm();
              const double gap = len - 1.0;
              if (len > 0.0) r.gradient[i] = (2.0 * gap * inv_n / len) * v;
              return gap * gap;
            });
  return r;
}

EnergyReport total_objective(const EnergyReport& data, const EnergyReport& sgtv, const EnergyReport& tgtv,
                             const EnergyReport& eikonal, double gamma) {
  if (!(gamma >= 0.0)) throw InvalidArgument("total_objective: gamma must be >= 0");
  EnergyReport r;
  r.value = data.value + gamma * (sgtv.value + tgtv.value + eikonal.value);
  std::size_t n = 0;
  for (const auto* t : {&data, &sgtv, &tgtv, &eikonal}) {
    if (t->gradient.empty()) continue;
    if (n != 0 && t->gradient.size() != n) throw InvalidArgument("total_objective: gradient length mismatch");
    n = t->gradient.size();
  }
  r.gradient.assign(n, Vec3::Zero());
  auto add = [&](const EnergyReport& t, double c) {
    if (t.gradient.empty() || c == 0.0) return;
    for (std::size_t i = 0; i < n; ++i) r.gradient[i] += c * t.gradient[i];
  };
  add(data, 1.0);
  add(sgtv, gamma);
  add(tgtv, gamma);
  add(eikonal, gamma);
  return r;
}

std::vector<Vec3> icosphere_vertices(int bin_count) {
  int levels = -1;
  for (int s = 0, count = 12; count <= bin_count; ++s, count = 10 * (1 << (2 * s)) + 2) {
    if (count == bin_count) levels = s;
  }
  if (levels < 0) throw InvalidArgument("icosphere: bin_count must be 10*4^s+2 (12, 42, 162, ...)");

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                         {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                         {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& x : v) x.normalize();
  std::vector<std::array<int, 3>> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                           {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                           {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                           {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < levels; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  return v;
}

SampleWeights inverse_frequency_weights(const NormalField& labels, int bin_count) {
  if (labels.size() == 0) throw InvalidArgument("inverse_frequency_weights: no labels");
  const auto centers = icosphere_vertices(bin_count);
  const KdTree tree(centers);
  const std::size_t n = labels.size();
  std::vector<std::uint32_t> bin(n);
  parallel_for(n, [&](std::size_t i) {
    thread_local std::vector<Neighbor> nb;
    tree.knn(labels.normals[i].normalized(), 1, nb);
    bin[i] = nb.front().index;
  });
  std::vector<std::size_t> count(centers.size(), 0);
  for (auto b : bin) ++count[b];

  SampleWeights w;
  w.values.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w.values[i] = static_cast<double>(n) / static_cast<double>(count[bin[i]]);
    sum += w.values[i];
  }
  const double mean = sum / static_cast<double>(n);
  for (auto& x : w.values) x /= mean;
  return w;
}

}  // namespace lidar_normals
