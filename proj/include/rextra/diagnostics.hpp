#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>

#include "rextra/manifold.hpp"
#include "rextra/problems.hpp"
#include "rextra/topology.hpp"
#include "rextra/types.hpp"

namespace rextra {

/// One row of the per-epoch trace written by the harness.
struct MetricsRow {
  int k = 0;      // iteration index
  int epoch = 0;  // epochs of data touched so far (== k for full gradients)
  std::int64_t comm_entries_cum = 0;
  double consensus_err = 0.0;  // (1/n) sum_i ||x_i - xbar||_F^2
  double grad_norm = 0.0;      // Riemannian gradient norm of the mean objective at xbar
  double fval = 0.0;           // global objective at xbar
  double ds = -1.0;            // subspace distance to ground truth, -1 when unknown
};

/// Projection of the Euclidean average onto the manifold. The average of
/// feasible points generally leaves the manifold; this is the canonical
/// representative used by every metric.
Matrix induced_mean(const AgentStack& x, const ManifoldSpec& spec);

/// (consensus error, Riemannian gradient norm at the induced mean).
std::pair<double, double> stationarity(const AgentStack& x, const Problem& problem);

/// Frobenius distance min_Q ||x Q - ref||_F over orthogonal Q (polar factor
/// of x^T ref); identifies a subspace with its orthonormal bases.
double subspace_distance(const Matrix& x, const Matrix& ref);

/// Consensus potential phi(x) = 1/4 sum_{ij} W_ij ||x_i - x_j||_F^2 and its
/// Euclidean gradient, the stack (I - W) x. phi equals 1/2 <x, (I - W) x>.
std::pair<double, AgentStack> consensus_potential(const AgentStack& x, const MixingMatrix& w);

/// Returns (lhs, rhs) for the near-consensus bound
///   || sum_i P_{T_{x_i}}(grad phi_i) ||  <=  2 sqrt(n) L_P sum_i ||x_i - xbar||^2
/// with xbar the induced mean and L_P = 2 on Stiefel, 0 in the Euclidean case.
/// The per-agent tangent components are first order in the spread; only their
/// sum cancels to second order, which is what the right side controls.
std::pair<double, double> consensus_gradient_bound_probe(const AgentStack& x,
                                                         const MixingMatrix& w,
                                                         const ManifoldSpec& spec);

/// Cumulative communication counters aggregated from per-step reports.
struct CommTotals {
  std::int64_t comm_entries = 0;
  std::int64_t comm_rounds = 0;
  std::int64_t grad_evals = 0;
};

CommTotals comm_tally(const std::vector<StepReport>& reports);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

}  // namespace rextra
