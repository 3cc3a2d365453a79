#include "lidar_normals/refine.hpp"

#include "lidar_normals/parallel.hpp"

#include <cmath>
#include <string>

namespace lidar_normals {

void RefineConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidArgument("refine: gamma must be >= 0");
  if (max_iters < 0) throw InvalidArgument("refine: max_iters must be >= 0");
  if (!(step_size > 0.0)) throw InvalidArgument("refine: step_size must be > 0");
  if (!(huber_delta > 0.0)) throw InvalidArgument("refine: huber_delta must be > 0");
  if (!(convergence_tol >= 0.0)) throw InvalidArgument("refine: convergence_tol must be >= 0");
  if (k < 1) throw InvalidArgument("refine: k must be >= 1");
  if (!(sigma > 0.0)) throw InvalidArgument("refine: sigma must be > 0");
  if (weight_bins < 0) throw InvalidArgument("refine: weight_bins must be >= 0");
}

Objective::Objective(const std::vector<Frame>& frames, const std::vector<NormalField>& labels,
                     const RefineConfig& config)
    : config_(config) {
  config.validate();
  if (frames.empty()) throw InvalidArgument("refine: no frames");
  if (labels.size() != frames.size()) throw InvalidArgument("refine: need one initial field per frame");

  offsets_.push_back(0);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (labels[f].size() != frames[f].size())
      throw InvalidArgument("refine: field " + std::to_string(f) + " does not match its frame");
    labels_.insert(labels_.end(), labels[f].normals.begin(), labels[f].normals.end());
    offsets_.push_back(labels_.size());
  }

  if (config.weight_bins > 0) {
    weights_ = inverse_frequency_weights(NormalField{labels_, 0}, config.weight_bins).values;
  }

  spatial_.reserve(frames.size());
  if (config.use_sgtv) {
    for (std::size_t f = 0; f < frames.size(); ++f) {
      if (frames[f].size() < 2) continue;
      graphs_.push_back(std::make_unique<WeightedGraph>(build_knn_graph(frames[f].points, config.k, config.sigma)));
      spatial_.emplace_back(*graphs_.back(), offsets_[f], offsets_[f]);
      spatial_edges_ += graphs_.back()->edge_count();
    }
  }
  if (config.use_tgtv && frames.size() > 1) {
    temporal_.reserve(frames.size() - 1);
    for (std::size_t f = 0; f + 1 < frames.size(); ++f) {
      if (frames[f].size() == 0 || frames[f + 1].size() == 0) continue;
      const Pose aug = Pose::identity();
      graphs_.push_back(std::make_unique<WeightedGraph>(
          build_temporal_graph(frames[f], frames[f + 1], aug, aug, config.k, config.sigma)));
      temporal_.emplace_back(*graphs_.back(), offsets_[f], offsets_[f + 1],
                             keyframe_map(frames[f], aug).rotation(), keyframe_map(frames[f + 1], aug).rotation());
      temporal_edges_ += graphs_.back()->edge_count();
    }
  }
}

double Objective::evaluate(std::span<const Vec3> x, std::vector<Vec3>* grad, TermValues* terms) const {
  const std::size_t n = labels_.size();
  if (x.size() != n) throw InvalidArgument("Objective: state length mismatch");
  const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  const double gamma = config_.gamma;
  const double delta = config_.huber_delta;
  const bool eikonal = config_.use_eikonal && gamma > 0.0;

  std::span<Vec3> g;
  if (grad) {
    grad->assign(n, Vec3::Zero());
    g = *grad;
  }

  // Data and Eikonal terms are per point.
  double eik_sum = 0.0;
  const double data_sum = parallel_sum(n, [&](std::size_t i) {
    const double w = weights_.empty() ? 1.0 : weights_[i];
    const Vec3 d = x[i] - labels_[i];
    double value = 0.0;
    Vec3 dg = Vec3::Zero();
    for (int c = 0; c < 3; ++c) {
      value += huber(d[c], delta);
      if (grad) dg[c] = huber_derivative(d[c], delta);
    }
    if (grad) g[i] = (w * inv_n) * dg;
    return w * value;
  });
  if (eikonal) {
    eik_sum = parallel_sum(n, [&](std::size_t i) {
      const double len = x[i].norm();
      const double gap = len - 1.0;
      if (grad && len > 0.0) g[i] += (gamma * 2.0 * gap * inv_n / len) * x[i];
      return gap * gap;
    });
  }

  double sgtv = 0.0, tgtv = 0.0;
  if (gamma > 0.0 && spatial_edges_ > 0) {
    const double inv_e = 1.0 / static_cast<double>(spatial_edges_);
    for (const auto& term : spatial_) sgtv += term.evaluate(x, delta, gamma * inv_e, g);
    sgtv *= inv_e;
  }
  if (gamma > 0.0 && temporal_edges_ > 0) {
    const double inv_e = 1.0 / static_cast<double>(temporal_edges_);
    for (const auto& term : temporal_) tgtv += term.evaluate(x, delta, gamma * inv_e, g);
    tgtv *= inv_e;
  }

  TermValues tv;
  tv.data = data_sum * inv_n;
  tv.eikonal = eik_sum * inv_n;
  tv.sgtv = sgtv;
  tv.tgtv = tgtv;
  tv.total = tv.data + gamma * (tv.sgtv + tv.tgtv + tv.eikonal);
  if (terms) *terms = tv;
  return tv.total;
}

RefineResult refine_normals(const std::vector<Frame>& frames, const std::vector<NormalField>& init_fields,
                            const RefineConfig& config) {
  const Objective objective(frames, init_fields, config);
  const std::size_t n = objective.size();
  std::vector<Vec3> x = objective.labels();
  std::vector<Vec3> grad, trial(n), trial_grad;

  RefineResult result;
  double f = objective.evaluate(x, &grad);
  if (!std::isfinite(f)) throw RefineError("refine: non-finite objective at the initial field");
  result.trace.push_back(f);

  const double scale = static_cast<double>(n);
  double step = config.step_size;
  constexpr int kMaxHalvings = 40;

  for (int it = 0; it < config.max_iters; ++it) {
    if (f == 0.0) {
      result.converged = true;
      break;
    }
    bool accepted = false;
    double f_trial = f;
    for (int h = 0; h <= kMaxHalvings; ++h) {
      const double alpha = step * scale;
      parallel_for(n, [&](std::size_t i) {
        Vec3 v = x[i] - alpha * grad[i];
        if (config.renormalize_each_iter) {
          const double len = v.norm();
          if (len > 0.0) v /= len;
        }
        trial[i] = v;
      });
      // The gradient at an accepted trial point is reused for the next step.
      f_trial = objective.evaluate(trial, &trial_grad);
      if (!std::isfinite(f_trial)) throw RefineError("refine: non-finite objective (check step_size / gamma)");
      if (f_trial <= f) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.converged = true;
      break;
    }
    const double decrease = (f - f_trial) / std::abs(f);
    std::swap(x, trial);
    std::swap(grad, trial_grad);
    f = f_trial;
    result.trace.push_back(f);
    result.iterations = it + 1;
    if (decrease < config.convergence_tol) {
      result.converged = true;
      break;
    }
  }

  const auto& offsets = objective.offsets();
  result.fields.resize(frames.size());
  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    NormalField field;
    field.frame_id = frames[fi].frame_id;
    field.normals.assign(x.begin() + static_cast<std::ptrdiff_t>(offsets[fi]),
                         x.begin() + static_cast<std::ptrdiff_t>(offsets[fi + 1]));
    // Zero entries fall back to their label direction.
    for (std::size_t i = 0; i < field.size(); ++i) {
      const double len = field.normals[i].norm();
      if (len > 0.0 && std::isfinite(len)) {
        field.normals[i] /= len;
      } else {
        const Vec3& label = init_fields[fi].normals[i];
        field.normals[i] = label.norm() > 0.0 ? Vec3(label.normalized()) : Vec3::UnitZ();
      }
    }
    result.fields[fi] = std::move(field);
  }
  return result;
}

}  // namespace lidar_normals
