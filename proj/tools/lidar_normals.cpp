// Command-line front end: generate, estimate, refine, eval, analyze, bench, convert.

#include "lidar_normals/config.hpp"
#include "lidar_normals/estimators.hpp"
#include "lidar_normals/io.hpp"
#include "lidar_normals/metrics.hpp"
#include "lidar_normals/parallel.hpp"
#include "lidar_normals/refine.hpp"
#include "lidar_normals/simulator.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace lidar_normals;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

/// Bad flags or config files; reported with exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string frame_file(std::int64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06lld.lsnf", static_cast<long long>(id));
  return buf;
}

std::string normals_file(std::int64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "normals_%06lld.lsnf", static_cast<long long>(id));
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs a config-loading step, turning its failures into usage errors.
template <typename Fn>
auto as_usage(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const IoError& e) {
    throw UsageError(e.what());
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(IoErrorKind::kWrite, dir.string() + ": " + ec.message());
}

struct GenerateOpts {
  std::string scene, sensor, out, split = "train";
  int frames = 1;
  std::uint64_t seed = 0;
  std::optional<double> noise, drop;
  std::optional<int> pps;
};

int run_generate(const GenerateOpts& o) {
  if (o.frames < 1) throw UsageError("--frames must be >= 1");
  const SceneSpec spec = as_usage([&] { return load_scene(o.scene); });
  SensorConfig sensor = o.sensor.empty() ? SensorConfig{} : as_usage([&] { return load_sensor(o.sensor); });
  if (o.noise) sensor.noise_std_m = *o.noise;
  if (o.drop) sensor.drop_ratio = *o.drop;
  if (o.pps) sensor.points_per_second = *o.pps;
  as_usage([&] {
    sensor.validate();
    return 0;
  });
  const Split split = as_usage([&] { return parse_split(o.split); });

  const auto traj = Trajectory::linear(spec.start_pose(), spec.velocity, deg2rad(spec.yaw_rate_deg), o.frames,
                                       sensor.rotation_hz);
  const auto frames = simulate_sequence(spec.scene, sensor, traj, o.seed);

  ensure_dir(o.out);
  SequenceManifest m;
  m.scene = spec.scene.name;
  m.split = split;
  m.sensor = sensor;
  for (const auto& f : frames) {
    const std::string name = frame_file(f.frame_id);
    write_frame(f, fs::path(o.out) / name);
    m.frames.push_back({f.frame_id, name});
    std::printf("frame %lld: %zu points\n", static_cast<long long>(f.frame_id), f.size());
  }
  write_manifest(m, fs::path(o.out) / "sequence.yaml");
  return 0;
}

struct EstimateOpts {
  std::string in, out, method = "pca";
  int k = kDefaultEstimatorK;
  int degree = 2;
};

int run_estimate(const EstimateOpts& o) {
  if (o.method != "pca" && o.method != "jet") throw UsageError("--method must be pca or jet");
  if (o.k < 3) throw UsageError("--k must be >= 3");
  if (o.degree < 1) throw UsageError("--degree must be >= 1");
  const auto frames = read_sequence(o.in);
  ensure_dir(o.out);
  FieldSet set;
  set.method = o.method;
  for (const auto& f : frames) {
    const auto t0 = std::chrono::steady_clock::now();
    EstimatorDiagnostics diag;
    NormalField field = o.method == "pca" ? estimate_pca(f, o.k, &diag) : estimate_jet(f, o.k, o.degree, &diag);
    const double secs = seconds_since(t0);
    const std::string name = normals_file(f.frame_id);
    write_normal_field(field, fs::path(o.out) / name, &f);
    set.fields.push_back({f.frame_id, name, secs});
    std::printf("frame %lld: %zu normals, %zu degenerate, %.3f s\n", static_cast<long long>(f.frame_id), field.size(),
                diag.degenerate.size(), secs);
  }
  write_field_set(set, o.out);
  return 0;
}

struct RefineOpts {
  std::string in, init, out, config;
  std::optional<double> gamma, sigma, step, tol;
  std::optional<int> k, iters, weight_bins;
  bool no_sgtv = false, no_tgtv = false, no_eikonal = false, renormalize = false;
};

int run_refine(const RefineOpts& o) {
  RefineConfig cfg = o.config.empty() ? RefineConfig{} : as_usage([&] { return load_refine_config(o.config); });
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.sigma) cfg.sigma = *o.sigma;
  if (o.step) cfg.step_size = *o.step;
  if (o.tol) cfg.convergence_tol = *o.tol;
  if (o.k) cfg.k = *o.k;
  if (o.iters) cfg.max_iters = *o.iters;
  if (o.weight_bins) cfg.weight_bins = *o.weight_bins;
  if (o.no_sgtv) cfg.use_sgtv = false;
  if (o.no_tgtv) cfg.use_tgtv = false;
  if (o.no_eikonal) cfg.use_eikonal = false;
  if (o.renormalize) cfg.renormalize_each_iter = true;
  as_usage([&] {
    cfg.validate();
    return 0;
  });

  const auto frames = read_sequence(o.in);
  FieldSet init_set;
  auto init = read_fields(o.init, &init_set);
  if (init.size() != frames.size())
    throw IoError(IoErrorKind::kCountMismatch, "initial fields: " + std::to_string(init.size()) + " for " +
                                                   std::to_string(frames.size()) + " frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (init[i].frame_id != frames[i].frame_id || init[i].size() != frames[i].size())
      throw IoError(IoErrorKind::kCountMismatch,
                    "initial field for frame " + std::to_string(frames[i].frame_id) + " does not match the frame");
  }

  const auto t0 = std::chrono::steady_clock::now();
  const RefineResult r = refine_normals(frames, init, cfg);
  const double secs = seconds_since(t0);
  for (std::size_t i = 0; i < r.trace.size(); ++i) std::printf("iter %zu objective %.12g\n", i, r.trace[i]);
  std::printf("iterations %d converged %s time %.3f s\n", r.iterations, r.converged ? "yes" : "no", secs);

  ensure_dir(o.out);
  FieldSet set;
  set.method = init_set.method.empty() ? "refined" : "refined-" + init_set.method;
  const double per_frame = secs / static_cast<double>(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string name = normals_file(frames[i].frame_id);
    write_normal_field(r.fields[i], fs::path(o.out) / name, &frames[i]);
    set.fields.push_back({frames[i].frame_id, name, init_set.fields[i].runtime_s + per_frame});
  }
  write_field_set(set, o.out);
  return 0;
}

struct EvalOpts {
  std::string pred, gt, out;
};

int run_eval(const EvalOpts& o) {
  const auto frames = read_sequence(o.gt);
  FieldSet set;
  const auto pred = read_fields(o.pred, &set);
  if (pred.size() != frames.size())
    throw IoError(IoErrorKind::kCountMismatch, "prediction has " + std::to_string(pred.size()) + " fields for " +
                                                   std::to_string(frames.size()) + " frames");
  std::vector<double> errors;
  double runtime = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!frames[i].has_gt())
      throw IoError(IoErrorKind::kParse, "frame " + std::to_string(frames[i].frame_id) + " has no ground truth");
    if (pred[i].frame_id != frames[i].frame_id || pred[i].size() != frames[i].size())
      throw IoError(IoErrorKind::kCountMismatch,
                    "prediction for frame " + std::to_string(frames[i].frame_id) + " does not match the frame");
    const auto e = angular_errors(pred[i], NormalField::from_gt(frames[i]));
    if (!e.zero_norm.empty())
      std::fprintf(stderr, "frame %lld: %zu zero-length predictions scored as 90 deg\n",
                   static_cast<long long>(frames[i].frame_id), e.zero_norm.size());
    errors.insert(errors.end(), e.degrees.begin(), e.degrees.end());
    runtime += set.fields[i].runtime_s;
  }
  const auto report = summarize(errors, kDefaultThresholds, runtime / static_cast<double>(frames.size()));
  const std::string text = format_report(report);
  std::fputs(text.c_str(), stdout);
  if (!o.out.empty()) {
    std::ofstream out(o.out, std::ios::trunc);
    out << text;
    if (!out) throw IoError(IoErrorKind::kWrite, o.out);
  }
  return 0;
}

struct AnalyzeOpts {
  std::string in, pred, out;
  double kappa = kDefaultKappa;
  int grid = 90;
  std::size_t max_normals = 20000;
};

int run_analyze(const AnalyzeOpts& o) {
  if (!(o.kappa > 0.0)) throw UsageError("--kappa must be > 0");
  if (o.grid < 1) throw UsageError("--grid must be >= 1");
  if (o.max_normals < 1) throw UsageError("--max-normals must be >= 1");
  std::vector<Vec3> all;
  if (!o.pred.empty()) {
    for (const auto& f : read_fields(o.pred)) all.insert(all.end(), f.normals.begin(), f.normals.end());
  } else {
    for (const auto& f : read_sequence(o.in)) {
      if (!f.has_gt()) throw IoError(IoErrorKind::kParse, "frame " + std::to_string(f.frame_id) + " has no ground truth");
      for (const auto& n : *f.gt_normals) all.push_back(n.vec());
    }
  }
  if (all.empty()) throw IoError(IoErrorKind::kCountMismatch, "no normals to analyze");
  // Even stride subsampling keeps the kernel sum affordable.
  NormalField sample;
  const std::size_t stride = (all.size() + o.max_normals - 1) / o.max_normals;
  for (std::size_t i = 0; i < all.size(); i += stride) sample.normals.push_back(all[i]);

  const DensityMap map = vmf_kde(sample, o.kappa, o.grid);
  if (o.out.empty()) {
    map.write_csv(std::cout);
  } else {
    std::ofstream out(o.out, std::ios::trunc);
    map.write_csv(out);
    if (!out) throw IoError(IoErrorKind::kWrite, o.out);
    std::printf("%zu normals, %zu cells, integral %.6f\n", sample.size(), map.cells.size(), map.integral());
  }
  return 0;
}

struct BenchOpts {
  std::string in, method = "pca";
  int k = kDefaultEstimatorK;
  int iters = 100;
};

int run_bench(const BenchOpts& o) {
  if (o.method != "pca" && o.method != "jet") throw UsageError("--method must be pca or jet");
  if (o.k < 3) throw UsageError("--k must be >= 3");
  if (o.iters < 0) throw UsageError("--iters must be >= 0");
  const auto frames = read_sequence(o.in);
  RefineConfig cfg;
  cfg.max_iters = o.iters;
  cfg.convergence_tol = 0.0;
  double est_sum = 0.0, ref_sum = 0.0;
  std::printf("threads %d\n", thread_count());
  for (const auto& f : frames) {
    auto t0 = std::chrono::steady_clock::now();
    const NormalField init = o.method == "pca" ? estimate_pca(f, o.k) : estimate_jet(f, o.k);
    const double est = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const auto r = refine_normals({f}, {init}, cfg);
    const double ref = seconds_since(t0);
    est_sum += est;
    ref_sum += ref;
    std::printf("frame %lld: %zu points, estimate %.3f s, refine %.3f s (%d iterations)\n",
                static_cast<long long>(f.frame_id), f.size(), est, ref, r.iterations);
  }
  const double n = static_cast<double>(frames.size());
  std::printf("mean: estimate %.3f s, refine %.3f s, total %.3f s\n", est_sum / n, ref_sum / n, (est_sum + ref_sum) / n);
  return 0;
}

struct ConvertOpts {
  std::string in, out;
};

int run_convert(const ConvertOpts& o) {
  const Frame f = read_xyz_text(o.in);
  write_frame(f, o.out);
  std::printf("%zu points%s\n", f.size(), f.has_gt() ? " with normals" : "");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic LiDAR normals: simulate, estimate, refine, evaluate"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores; env LIDAR_NORMALS_THREADS)")
      ->envname("LIDAR_NORMALS_THREADS")
      ->check(CLI::NonNegativeNumber);

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Ray-cast a frame sequence through a scene");
  g->add_option("--scene", gen.scene, "Scene YAML")->required()->check(CLI::ExistingFile);
  g->add_option("--sensor", gen.sensor, "Sensor YAML (defaults when omitted)")->check(CLI::ExistingFile);
  g->add_option("--frames", gen.frames, "Number of sweeps")->default_val(1);
  g->add_option("--seed", gen.seed, "Master seed")->default_val(0);
  g->add_option("--split", gen.split, "train, test or val")->default_val("train");
  g->add_option("--noise", gen.noise, "Override range noise std (m)");
  g->add_option("--drop", gen.drop, "Override dropout ratio");
  g->add_option("--pps", gen.pps, "Override points per second");
  g->add_option("--out", gen.out, "Output directory")->required();

  EstimateOpts est;
  auto* e = app.add_subcommand("estimate", "Classical normal estimation per frame");
  e->add_option("--in", est.in, "Sequence manifest")->required();
  e->add_option("--method", est.method, "pca or jet")->default_val("pca");
  e->add_option("--k", est.k, "Neighborhood size")->default_val(kDefaultEstimatorK);
  e->add_option("--degree", est.degree, "Jet polynomial degree")->default_val(2);
  e->add_option("--out", est.out, "Output directory")->required();

  RefineOpts ref;
  auto* r = app.add_subcommand("refine", "Refine initial fields with the regularized objective");
  r->add_option("--in", ref.in, "Sequence manifest")->required();
  r->add_option("--init", ref.init, "Directory of initial fields")->required();
  r->add_option("--config", ref.config, "Refine config YAML; flags override it");
  r->add_option("--gamma", ref.gamma, "Regularizer weight");
  r->add_option("--k", ref.k, "Graph neighbors");
  r->add_option("--sigma", ref.sigma, "Edge weight scale (m)");
  r->add_option("--iters", ref.iters, "Maximum iterations");
  r->add_option("--step", ref.step, "Initial per-point step size");
  r->add_option("--tol", ref.tol, "Relative decrease to stop at");
  r->add_option("--weight-bins", ref.weight_bins, "Icosphere bins for inverse-frequency weights (0 = off)");
  r->add_flag("--no-sgtv", ref.no_sgtv, "Drop the spatial term");
  r->add_flag("--no-tgtv", ref.no_tgtv, "Drop the temporal term");
  r->add_flag("--no-eikonal", ref.no_eikonal, "Drop the unit-length term");
  r->add_flag("--renormalize", ref.renormalize, "Project onto the sphere after each step");
  r->add_option("--out", ref.out, "Output directory")->required();

  EvalOpts ev;
  auto* v = app.add_subcommand("eval", "Angular-error report against ground truth");
  v->add_option("--pred", ev.pred, "Directory of predicted fields")->required();
  v->add_option("--gt", ev.gt, "Sequence manifest with ground truth")->required();
  v->add_option("--out", ev.out, "Report file (also printed)");

  AnalyzeOpts an;
  auto* a = app.add_subcommand("analyze", "Spherical vMF density of normals as CSV");
  auto* an_in = a->add_option("--in", an.in, "Sequence manifest (ground-truth normals)");
  auto* an_pred = a->add_option("--pred", an.pred, "Directory of predicted fields instead");
  an_in->excludes(an_pred);
  a->add_option("--kappa", an.kappa, "Kernel concentration")->default_val(kDefaultKappa);
  a->add_option("--grid", an.grid, "Latitude bands (2x longitudes)")->default_val(90);
  a->add_option("--max-normals", an.max_normals, "Subsample to at most this many normals")->default_val(20000);
  a->add_option("--out", an.out, "CSV path (stdout when omitted)");

  BenchOpts bn;
  auto* b = app.add_subcommand("bench", "Per-frame estimate and refine wall-clock");
  b->add_option("--in", bn.in, "Sequence manifest")->required();
  b->add_option("--method", bn.method, "pca or jet")->default_val("pca");
  b->add_option("--k", bn.k, "Estimator neighborhood size")->default_val(kDefaultEstimatorK);
  b->add_option("--iters", bn.iters, "Refine iterations")->default_val(100);

  ConvertOpts cv;
  auto* c = app.add_subcommand("convert", "Text 'x y z [nx ny nz]' to a frame file");
  c->add_option("--in", cv.in, "Text point file")->required();
  c->add_option("--out", cv.out, "Frame file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitUsage;
  }
  if (a->parsed() && an.in.empty() && an.pred.empty()) {
    std::fprintf(stderr, "analyze: one of --in or --pred is required\n");
    return kExitUsage;
  }

  set_thread_count(threads);
  try {
    if (g->parsed()) return run_generate(gen);
    if (e->parsed()) return run_estimate(est);
    if (r->parsed()) return run_refine(ref);
    if (v->parsed()) return run_eval(ev);
    if (a->parsed()) return run_analyze(an);
    if (b->parsed()) return run_bench(bn);
    if (c->parsed()) return run_convert(cv);
  } catch (const UsageError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitUsage;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitData;
  }
  return kExitUsage;
}
