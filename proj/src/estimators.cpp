#include "lidar_normals/estimators.hpp"

#include "lidar_normals/parallel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace lidar_normals {

namespace {

constexpr double kRankTolerance = 1e-10;

struct LocalFrame {
  Vec3 tangent_u, tangent_v, normal;
  bool degenerate;
};

LocalFrame pca_frame(const std::vector<Vec3>& pts, const std::vector<Neighbor>& nbrs) {
  Vec3 mean = Vec3::Zero();
  for (const auto& n : nbrs) mean += pts[n.index];
  mean /= static_cast<double>(nbrs.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& n : nbrs) {
    const Vec3 d = pts[n.index] - mean;
    cov.noalias() += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  const Vec3& ev = solver.eigenvalues();  // ascending
  const bool degenerate = !(ev[2] > 0.0) || ev[1] <= kRankTolerance * ev[2];
  const Mat3& vecs = solver.eigenvectors();
  return LocalFrame{vecs.col(2), vecs.col(1), vecs.col(0), degenerate};
}

void check_input(const Frame& frame, int k, int min_k) {
  if (k < min_k) throw InvalidArgument("estimator: k must be >= " + std::to_string(min_k));
  if (frame.size() < static_cast<std::size_t>(k))
    throw InvalidArgument("estimator: frame has fewer than k points");
}

template <typename Fit>
NormalField estimate_with(const Frame& frame, int k, EstimatorDiagnostics* diagnostics, Fit&& fit) {
  const KdTree tree(frame.points);
  const std::size_t n = frame.size();
  NormalField field;
  field.frame_id = frame.frame_id;
  field.normals.resize(n);
  std::vector<char> degenerate(n, 0);

  parallel_for(n, [&](std::size_t i) {
    thread_local std::vector<Neighbor> nbrs;
    tree.knn(frame.points[i], static_cast<std::size_t>(k), nbrs);
    Vec3 normal;
    if (fit(i, nbrs, normal)) {
      field.normals[i] = normal.normalized();
    } else {
      field.normals[i] = Vec3::UnitZ();
      degenerate[i] = 1;
    }
  });

  if (diagnostics) {
    diagnostics->degenerate.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (degenerate[i]) diagnostics->degenerate.push_back(i);
  }
  return orient_viewpoint(field, frame);
}

}  // namespace

NormalField estimate_pca(const Frame& frame, int k, EstimatorDiagnostics* diagnostics) {
  check_input(frame, k, 3);
  return estimate_with(frame, k, diagnostics,
                       [&](std::size_t, const std::vector<Neighbor>& nbrs, Vec3& out) {
                         const LocalFrame lf = pca_frame(frame.points, nbrs);
                         out = lf.normal;
                         return !lf.degenerate;
                       });
}

NormalField estimate_jet(const Frame& frame, int k, int degree, EstimatorDiagnostics* diagnostics) {
  if (degree < 1) throw InvalidArgument("estimate_jet: degree must be >= 1");
  const int monomials = jet_monomial_count(degree);
  check_input(frame, k, std::max(3, monomials));

  return estimate_with(frame, k, diagnostics, [&](std::size_t i, const std::vector<Neighbor>& nbrs, Vec3& out) {
    const LocalFrame lf = pca_frame(frame.points, nbrs);
    if (lf.degenerate) return false;
    const Vec3& origin = frame.points[i];

    // Coordinates scaled by the neighborhood radius for conditioning.
    double scale = 0.0;
    for (const auto& nb : nbrs) scale = std::max(scale, std::sqrt(nb.dist2));
    if (!(scale > 0.0)) return false;

    Eigen::MatrixXd design(nbrs.size(), monomials);
    Eigen::VectorXd height(nbrs.size());
    for (std::size_t r = 0; r < nbrs.size(); ++r) {
      const Vec3 d = (frame.points[nbrs[r].index] - origin) / scale;
      const double u = d.dot(lf.tangent_u), v = d.dot(lf.tangent_v);
      height[r] = d.dot(lf.normal);
      int c = 0;
      for (int total = 0; total <= degree; ++total) {
        for (int j = 0; j <= total; ++j) {
          design(r, c++) = std::pow(u, total - j) * std::pow(v, j);
        }
      }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < monomials) return false;
    const Eigen::VectorXd coef = qr.solve(height);
    // Monomial order: 1, u, v, u^2, uv, v^2, ...
    out = lf.normal - coef[1] * lf.tangent_u - coef[2] * lf.tangent_v;
    return std::isfinite(out.squaredNorm());
  });
}

NormalField orient_viewpoint(const NormalField& field, const Frame& frame) {
  if (field.size() != frame.size()) throw InvalidArgument("orient_viewpoint: length mismatch");
  NormalField out = field;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.normals[i].dot(frame.points[i]) > 0.0) out.normals[i] = -out.normals[i];
  }
  return out;
}

}  // namespace lidar_normals
