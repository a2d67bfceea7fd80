#include "rextra/manifold.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

#include "rextra/errors.hpp"
#include "rextra/rng.hpp"

namespace rextra {

namespace {

void check_spec(const ManifoldSpec& spec) {
  if (spec.rows <= 0 || spec.cols <= 0)
    throw InvalidArgument("manifold dimensions must be positive, got " +
                          std::to_string(spec.rows) + " x " + std::to_string(spec.cols));
  if (spec.kind == ManifoldKind::Stiefel && spec.cols > spec.rows)
    throw InvalidArgument("orthonormal frame needs r <= d, got r = " + std::to_string(spec.cols) +
                          " > d = " + std::to_string(spec.rows));
}

void check_shape(const ManifoldSpec& spec, const Matrix& m, const char* what) {
  if (m.rows() != spec.rows || m.cols() != spec.cols)
    throw DimensionMismatch(std::string(what) + " is " + std::to_string(m.rows()) + " x " +
                            std::to_string(m.cols()) + ", manifold expects " +
                            std::to_string(spec.rows) + " x " + std::to_string(spec.cols));
}

}  // namespace

ManifoldSpec ManifoldSpec::stiefel(int d, int r) {
  ManifoldSpec spec{ManifoldKind::Stiefel, d, r};
  check_spec(spec);
  return spec;
}

ManifoldSpec ManifoldSpec::euclidean(int d, int r) {
  ManifoldSpec spec{ManifoldKind::Euclidean, d, r};
  check_spec(spec);
  return spec;
}

double ManifoldSpec::proximal_radius() const {
  return kind == ManifoldKind::Stiefel ? 1.0 : std::numeric_limits<double>::infinity();
}

Matrix project_to_manifold(const ManifoldSpec& spec, const Matrix& y) {
  check_shape(spec, y, "projection input");
  if (spec.kind == ManifoldKind::Euclidean) return y;
  if (!y.allFinite()) throw SingularProjection("projection input has non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  // The polar factor is unique iff y has full column rank; at sigma_min = 0
  // every singular direction gives a different nearest point.
  double sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  if (sigma_min <= 1e-12)
    throw SingularProjection("projection undefined: smallest singular value " +
                             std::to_string(sigma_min) + " is at or below 1e-12");
  return svd.matrixU() * svd.matrixV().transpose();
}

Matrix project_to_tangent(const ManifoldSpec& spec, const Matrix& base, const Matrix& u) {
  check_shape(spec, base, "tangent base");
  check_shape(spec, u, "tangent direction");
  if (spec.kind == ManifoldKind::Euclidean) return u;
  return u - base * sym(base.transpose() * u);
}

Matrix riemannian_gradient(const ManifoldSpec& spec, const Matrix& base,
                           const Matrix& euclidean_grad) {
  return project_to_tangent(spec, base, euclidean_grad);
}

double distance_to_manifold(const ManifoldSpec& spec, const Matrix& y) {
  check_shape(spec, y, "distance input");
  if (spec.kind == ManifoldKind::Euclidean) return 0.0;
  return (y - project_to_manifold(spec, y)).norm();
}

bool is_on_manifold(const ManifoldSpec& spec, const Matrix& x, double tol) {
  check_shape(spec, x, "feasibility input");
  if (spec.kind == ManifoldKind::Euclidean) return x.allFinite();
  if (!x.allFinite()) return false;
  Matrix gram = x.transpose() * x;
  return (gram - Matrix::Identity(spec.cols, spec.cols)).norm() <= tol;
}

double quadratic_projection_probe(const ManifoldSpec& spec, const Matrix& base, const Matrix& u) {
  check_shape(spec, base, "probe base");
  check_shape(spec, u, "probe direction");
  if (spec.kind == ManifoldKind::Euclidean) return 0.0;
  double norm_u = u.norm();
  if (norm_u == 0.0) return 0.0;
  double radius = spec.proximal_radius() / 2.0;
  if (norm_u > radius)
    throw TubeViolation("probe step of norm " + std::to_string(norm_u) +
                        " leaves the half-tube of radius " + std::to_string(radius));
  Matrix tangent = project_to_tangent(spec, base, u);
  Matrix moved = project_to_manifold(spec, base + u);
  return (moved - base - tangent).norm() / (norm_u * norm_u);
}

double lipschitz_projection_probe(const ManifoldSpec& spec, const Matrix& x, const Matrix& y,
                                  double tau) {
  check_shape(spec, x, "probe point");
  check_shape(spec, y, "probe point");
  double radius = spec.proximal_radius();
  if (!(tau > 0.0) || tau >= radius)
    throw InvalidArgument("tube radius must satisfy 0 < tau < " + std::to_string(radius));
  if (spec.kind == ManifoldKind::Euclidean) return 1.0;
  double dx = distance_to_manifold(spec, x);
  double dy = distance_to_manifold(spec, y);
  if (dx > tau || dy > tau)
    throw TubeViolation("probe points at distances " + std::to_string(dx) + ", " +
                        std::to_string(dy) + " from the manifold exceed the tube radius " +
                        std::to_string(tau));
  double gap = (x - y).norm();
  if (gap == 0.0) return 1.0;
  return (project_to_manifold(spec, x) - project_to_manifold(spec, y)).norm() / gap;
}

Matrix random_point(const ManifoldSpec& spec, std::mt19937_64& engine) {
  check_spec(spec);
  Matrix g = gaussian_matrix(spec.rows, spec.cols, engine);
  if (spec.kind == ManifoldKind::Euclidean) return g;
  return project_to_manifold(spec, g);
}

Matrix random_tangent(const ManifoldSpec& spec, const Matrix& base, std::mt19937_64& engine) {
  check_shape(spec, base, "tangent base");
  Matrix g = gaussian_matrix(spec.rows, spec.cols, engine);
  return project_to_tangent(spec, base, g);
}

}  // namespace rextra
