#include "rextra/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <Eigen/SVD>

#include "rextra/errors.hpp"

namespace rextra {

Matrix induced_mean(const AgentStack& x, const ManifoldSpec& spec) {
  return project_to_manifold(spec, x.mean());
}

std::pair<double, double> stationarity(const AgentStack& x, const Problem& problem) {
  if (x.size() != problem.agents())
    throw DimensionMismatch("stack has " + std::to_string(x.size()) + " blocks, problem has " +
                            std::to_string(problem.agents()) + " agents");
  Matrix xbar = induced_mean(x, problem.manifold());
  double consensus = 0.0;
  for (int i = 0; i < x.size(); ++i) consensus += (x[i] - xbar).squaredNorm();
  consensus /= static_cast<double>(x.size());
  Matrix grad = riemannian_gradient(problem.manifold(), xbar,
                                    problem.global_euclidean_gradient(xbar));
  return {consensus, grad.norm()};
}

double subspace_distance(const Matrix& x, const Matrix& ref) {
  if (x.rows() != ref.rows() || x.cols() != ref.cols())
    throw DimensionMismatch("subspace distance needs equal shapes, got " +
                            std::to_string(x.rows()) + " x " + std::to_string(x.cols()) + " vs " +
                            std::to_string(ref.rows()) + " x " + std::to_string(ref.cols()));
  // Polar factor of x^T ref minimizes ||x Q - ref|| over orthogonal Q. Unlike
  // the manifold projection, a rank-deficient overlap is fine: any polar
  // factor of it attains the minimum.
  Eigen::JacobiSVD<Matrix> svd(x.transpose() * ref, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix Q = svd.matrixU() * svd.matrixV().transpose();
  return (x * Q - ref).norm();
}

std::pair<double, AgentStack> consensus_potential(const AgentStack& x, const MixingMatrix& w) {
  int n = x.size();
  if (n != w.n())
    throw DimensionMismatch("stack has " + std::to_string(n) + " blocks, mixing matrix has " +
                            std::to_string(w.n()));
  double phi = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double wij = w.W(i, j);
      if (wij != 0.0) phi += 0.5 * wij * (x[i] - x[j]).squaredNorm();
    }
  // Gradient of 1/4 sum_ij W_ij ||x_i - x_j||^2 is the stack (I - W) x.
  AgentStack grad = AgentStack::zeros_like(x);
  for (int i = 0; i < n; ++i) {
    grad[i] = x[i];
    for (int j = 0; j < n; ++j)
      if (w.W(i, j) != 0.0) grad[i] -= w.W(i, j) * x[j];
  }
  return {phi, std::move(grad)};
}

std::pair<double, double> consensus_gradient_bound_probe(const AgentStack& x,
                                                         const MixingMatrix& w,
                                                         const ManifoldSpec& spec) {
  auto [phi, grad] = consensus_potential(x, w);
  (void)phi;
  // Each tangent component is first order in the spread; summing over agents
  // cancels the first-order terms because the columns of I - W sum to zero.
  Matrix lhs_sum = Matrix::Zero(spec.rows, spec.cols);
  for (int i = 0; i < x.size(); ++i) lhs_sum += project_to_tangent(spec, x[i], grad[i]);
  Matrix xbar = induced_mean(x, spec);
  double spread_sq = 0.0;
  for (int i = 0; i < x.size(); ++i) spread_sq += (x[i] - xbar).squaredNorm();
  double projection_curvature = spec.kind == ManifoldKind::Stiefel ? 2.0 : 0.0;
  double rhs = 2.0 * std::sqrt(static_cast<double>(x.size())) * projection_curvature * spread_sq;
  return {lhs_sum.norm(), rhs};
}

CommTotals comm_tally(const std::vector<StepReport>& reports) {
  CommTotals totals;
  for (const StepReport& report : reports) {
    totals.comm_entries += report.comm_entries;
    totals.comm_rounds += report.comm_rounds;
    totals.grad_evals += report.grad_evals;
  }
  return totals;
}

std::string metrics_csv_header() {
  return "k,epoch,comm_entries_cum,consensus_err,grad_norm,fval,ds";
}

std::string metrics_csv_row(const MetricsRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%d,%lld,%.17g,%.17g,%.17g,%.17g", row.k, row.epoch,
                static_cast<long long>(row.comm_entries_cum), row.consensus_err, row.grad_norm,
                row.fval, row.ds);
  return buf;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << metrics_csv_header() << '\n';
  for (const MetricsRow& row : rows) out << metrics_csv_row(row) << '\n';
}

}  // namespace rextra
