#pragma once

#include <random>

#include "rextra/types.hpp"

namespace rextra {

enum class ManifoldKind { Stiefel, Euclidean };

/// Shape descriptor for the feasible set of one agent block.
///
/// Stiefel St(d, r) is the set of d x r matrices with orthonormal columns; it
/// is a compact embedded submanifold and is 1-proximally smooth, so metric
/// projection is single-valued on the open unit tube around it. The Euclidean
/// kind makes every projection the identity, which degenerates all algorithms
/// in this library to their classic unconstrained forms.
struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::Stiefel;
  int rows = 0;  // d
  int cols = 0;  // r, with r <= d

  static ManifoldSpec stiefel(int d, int r);
  static ManifoldSpec euclidean(int d, int r);

  /// Proximal smoothness radius: 1 for Stiefel, +inf for Euclidean.
  double proximal_radius() const;

  bool operator==(const ManifoldSpec&) const = default;
};

/// Metric projection onto the manifold.
///
/// Stiefel: the polar factor U V^T of the thin SVD of y. Throws
/// SingularProjection if the smallest singular value of y is <= 1e-12 (the
/// projection stops being well defined) or if y has non-finite entries.
Matrix project_to_manifold(const ManifoldSpec& spec, const Matrix& y);

/// Orthogonal projection of an ambient direction u onto the tangent space at
/// `base` (which must lie on the manifold). Stiefel: u - base sym(base^T u).
Matrix project_to_tangent(const ManifoldSpec& spec, const Matrix& base, const Matrix& u);

/// Riemannian gradient: tangent projection of the Euclidean gradient.
Matrix riemannian_gradient(const ManifoldSpec& spec, const Matrix& base,
                           const Matrix& euclidean_grad);

/// Frobenius distance from y to the manifold, ||y - P(y)||_F.
double distance_to_manifold(const ManifoldSpec& spec, const Matrix& y);

/// ||x^T x - I|| <= tol feasibility test (always true for Euclidean).
bool is_on_manifold(const ManifoldSpec& spec, const Matrix& x, double tol = 1e-12);

/// Second-order projection probe: ||P(base + u) - base - P_T(u)|| / ||u||^2.
///
/// The ratio is bounded by a manifold constant whenever ||u|| <= R/2; the
/// probe throws TubeViolation beyond that radius, returns 0 for u = 0, and
/// returns 0 identically for the Euclidean kind.
double quadratic_projection_probe(const ManifoldSpec& spec, const Matrix& base, const Matrix& u);

/// Projection Lipschitz probe: ||P(x) - P(y)|| / ||x - y|| for two points in
/// the tau-tube around the manifold (tau in (0, R)). Inside the tube the ratio
/// is at most R/(R - tau). Throws TubeViolation when either point is outside
/// the tube. Returns 1 by convention when x = y.
double lipschitz_projection_probe(const ManifoldSpec& spec, const Matrix& x, const Matrix& y,
                                  double tau);

/// Random manifold point: projected standard normal matrix (Stiefel) or a raw
/// standard normal matrix (Euclidean).
Matrix random_point(const ManifoldSpec& spec, std::mt19937_64& engine);

/// Tangent projection of a standard normal ambient matrix at `base`.
Matrix random_tangent(const ManifoldSpec& spec, const Matrix& base, std::mt19937_64& engine);

}  // namespace rextra
