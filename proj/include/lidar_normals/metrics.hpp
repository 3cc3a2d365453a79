#pragma once

#include "lidar_normals/core.hpp"

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace lidar_normals {

inline const std::vector<double> kDefaultThresholds = {5.0, 7.5, 11.25, 22.5, 30.0};
inline constexpr double kDefaultKappa = 50.0;

struct AngularErrors {
  std::vector<double> degrees;
  std::vector<std::size_t> zero_norm;  // scored as 90 degrees
};

/// Orientation-aware angle between each prediction and its ground truth,
/// in [0, 180] degrees.
AngularErrors angular_errors(const NormalField& pred, const NormalField& gt);

struct MetricsReport {
  double mean_deg = 0, median_deg = 0, rmse_deg = 0;
  std::map<double, double> threshold_acc;  // fraction strictly below
  double runtime_s = 0;
  std::size_t n_points = 0;
};

/// Median is the lower middle element for even counts.
MetricsReport summarize(const std::vector<double>& errors, const std::vector<double>& thresholds = kDefaultThresholds,
                        double runtime_s = 0.0);

/// Canonical key order, fixed precision.
void write_report(std::ostream& os, const MetricsReport& report);
std::string format_report(const MetricsReport& report);

/// Equal-area grid: `res` bands uniform in z times 2*res longitudes.
struct DensityCell {
  Vec3 direction;
  double density;
};

struct DensityMap {
  std::vector<DensityCell> cells;
  double kappa = kDefaultKappa;
  int grid_res = 0;

  double cell_area() const;
  /// Midpoint quadrature of the density over the sphere.
  double integral() const;
  void write_csv(std::ostream& os) const;
};

/// vMF normalizer kappa / (4 pi sinh kappa).
double vmf_normalizer(double kappa);

/// Spherical kernel density with a von Mises-Fisher kernel of concentration kappa.
DensityMap vmf_kde(const NormalField& normals, double kappa = kDefaultKappa, int grid_res = 90);

}  // namespace lidar_normals
