#pragma once

#include "lidar_normals/core.hpp"
#include "lidar_normals/kdtree.hpp"

#include <vector>

namespace lidar_normals {

inline constexpr int kDefaultEstimatorK = 32;

/// Indices whose neighborhood was rank deficient. Those points carry the
/// placeholder normal (0,0,1) before orientation.
struct EstimatorDiagnostics {
  std::vector<std::size_t> degenerate;
};

/// Smallest-eigenvalue direction of each point's k-NN covariance (the point
/// itself counts as one of the k), oriented toward the sensor.
NormalField estimate_pca(const Frame& frame, int k = kDefaultEstimatorK,
                         EstimatorDiagnostics* diagnostics = nullptr);

/// Least-squares bivariate polynomial height field of the given degree over
/// the PCA tangent frame; the normal is taken from the fitted gradient at the
/// query point.
NormalField estimate_jet(const Frame& frame, int k = kDefaultEstimatorK, int degree = 2,
                         EstimatorDiagnostics* diagnostics = nullptr);

/// Flips n when n . p > 0 so that it faces the sensor at the origin.
NormalField orient_viewpoint(const NormalField& field, const Frame& frame);

/// Number of coefficients of a bivariate polynomial of the given degree.
constexpr int jet_monomial_count(int degree) { return (degree + 1) * (degree + 2) / 2; }

}  // namespace lidar_normals
