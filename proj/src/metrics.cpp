#include "lidar_normals/metrics.hpp"

#include "lidar_normals/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace lidar_normals {

AngularErrors angular_errors(const NormalField& pred, const NormalField& gt) {
  if (pred.size() != gt.size()) throw InvalidArgument("angular_errors: length mismatch");
  AngularErrors out;
  out.degrees.resize(pred.size());
  std::vector<char> zero(pred.size(), 0);
  parallel_for(pred.size(), [&](std::size_t i) {
    const double len = pred.normals[i].norm();
    if (!(len > 0.0) || !std::isfinite(len)) {
      out.degrees[i] = 90.0;
      zero[i] = 1;
      return;
    }
    const double c = std::clamp(pred.normals[i].dot(gt.normals[i]) / len, -1.0, 1.0);
    out.degrees[i] = rad2deg(std::acos(c));
  });
  for (std::size_t i = 0; i < zero.size(); ++i)
    if (zero[i]) out.zero_norm.push_back(i);
  return out;
}

MetricsReport summarize(const std::vector<double>& errors, const std::vector<double>& thresholds, double runtime_s) {
  if (errors.empty()) throw InvalidArgument("summarize: no errors");
  MetricsReport r;
  r.n_points = errors.size();
  r.runtime_s = runtime_s;
  const double n = static_cast<double>(errors.size());

  double sum = 0.0, sq = 0.0;
  for (double e : errors) {
    sum += e;
    sq += e * e;
  }
  r.mean_deg = sum / n;
  r.rmse_deg = std::sqrt(sq / n);

  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  r.median_deg = sorted[(sorted.size() - 1) / 2];
  for (double t : thresholds) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    r.threshold_acc[t] = static_cast<double>(below) / n;
  }
  return r;
}

void write_report(std::ostream& os, const MetricsReport& r) {
  char buf[128];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s: %.6f\n", key, v);
    os << buf;
  };
  os << "n_points: " << r.n_points << "\n";
  line("mean_deg", r.mean_deg);
  line("median_deg", r.median_deg);
  line("rmse_deg", r.rmse_deg);
  for (const auto& [t, acc] : r.threshold_acc) {
    std::snprintf(buf, sizeof buf, "acc_%.2f: %.6f\n", t, acc);
    os << buf;
  }
  line("runtime_s", r.runtime_s);
}

std::string format_report(const MetricsReport& report) {
  std::ostringstream os;
  write_report(os, report);
  return os.str();
}

double vmf_normalizer(double kappa) { return kappa / (4.0 * M_PI * std::sinh(kappa)); }

double DensityMap::cell_area() const { return grid_res > 0 ? 4.0 * M_PI / (2.0 * grid_res * grid_res) : 0.0; }

double DensityMap::integral() const {
  double s = 0.0;
  for (const auto& c : cells) s += c.density;
  return s * cell_area();
}

void DensityMap::write_csv(std::ostream& os) const {
  os << "x,y,z,lat_deg,lon_deg,density\n";
  char buf[160];
  for (const auto& c : cells) {
    const Vec3& d = c.direction;
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.4f,%.4f,%.9g\n", d.x(), d.y(), d.z(),
                  rad2deg(std::asin(std::clamp(d.z(), -1.0, 1.0))), rad2deg(std::atan2(d.y(), d.x())), c.density);
    os << buf;
  }
}

DensityMap vmf_kde(const NormalField& normals, double kappa, int grid_res) {
  if (normals.size() == 0) throw InvalidArgument("vmf_kde: no normals");
  if (!(kappa > 0.0)) throw InvalidArgument("vmf_kde: kappa must be > 0");
  if (grid_res < 1) throw InvalidArgument("vmf_kde: grid_res must be >= 1");

  DensityMap map;
  map.kappa = kappa;
  map.grid_res = grid_res;
  const int bands = grid_res, lons = 2 * grid_res;
  map.cells.resize(static_cast<std::size_t>(bands) * lons);
  for (int b = 0; b < bands; ++b) {
    const double z = -1.0 + (b + 0.5) * 2.0 / bands;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int l = 0; l < lons; ++l) {
      const double phi = -M_PI + (l + 0.5) * 2.0 * M_PI / lons;
      map.cells[static_cast<std::size_t>(b) * lons + l].direction = Vec3(r * std::cos(phi), r * std::sin(phi), z);
    }
  }

  // C exp(k <x,n>) rewritten as k / (2 pi (1 - e^{-2k})) exp(k (<x,n> - 1)) to stay finite for large k.
  const double coef = kappa / (2.0 * M_PI * -std::expm1(-2.0 * kappa)) / static_cast<double>(normals.size());
  std::vector<Vec3> unit(normals.size());
  for (std::size_t i = 0; i < unit.size(); ++i) unit[i] = normals.normals[i].normalized();
  parallel_for(map.cells.size(), [&](std::size_t c) {
    const Vec3& x = map.cells[c].direction;
    double s = 0.0;
    for (const auto& n : unit) s += std::exp(kappa * (x.dot(n) - 1.0));
    map.cells[c].density = coef * s;
  });
  return map;
}

}  // namespace lidar_normals
