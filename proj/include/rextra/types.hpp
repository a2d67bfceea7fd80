#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rextra/errors.hpp"

namespace rextra {

using Matrix = Eigen::MatrixXd;

/// Symmetric part (A + A^T)/2.
inline Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// Stacked decision variable: one d x r block per agent. The Kronecker-lifted
/// mixing matrix is never materialized; everything operates block-wise.
struct AgentStack {
  std::vector<Matrix> blocks;

  AgentStack() = default;
  explicit AgentStack(std::vector<Matrix> b) : blocks(std::move(b)) {}

  /// n copies of one block (consensual stack).
  static AgentStack broadcast(const Matrix& x, int n) {
    AgentStack s;
    s.blocks.assign(static_cast<std::size_t>(n), x);
    return s;
  }

  static AgentStack zeros_like(const AgentStack& other) {
    AgentStack s;
    s.blocks.reserve(other.blocks.size());
    for (const Matrix& b : other.blocks) s.blocks.push_back(Matrix::Zero(b.rows(), b.cols()));
    return s;
  }

  int size() const { return static_cast<int>(blocks.size()); }
  Matrix& operator[](int i) { return blocks[static_cast<std::size_t>(i)]; }
  const Matrix& operator[](int i) const { return blocks[static_cast<std::size_t>(i)]; }

  /// Arithmetic block mean (1/n) sum_i x_i.
  Matrix mean() const {
    if (blocks.empty()) throw DimensionMismatch("mean of an empty stack");
    Matrix acc = blocks[0];
    for (std::size_t i = 1; i < blocks.size(); ++i) acc += blocks[i];
    return acc / static_cast<double>(blocks.size());
  }

  /// Sum of squared Frobenius norms over blocks.
  double squared_norm() const {
    double s = 0.0;
    for (const Matrix& b : blocks) s += b.squaredNorm();
    return s;
  }

  bool all_finite() const {
    for (const Matrix& b : blocks)
      if (!b.allFinite()) return false;
    return true;
  }
};

/// Per-iteration accounting emitted by every step function.
struct StepReport {
  std::int64_t comm_entries = 0;  // scalar entries sent over directed edges
  int comm_rounds = 0;            // mixing applications this iteration
  int grad_evals = 0;             // gradient oracle calls per agent
};

}  // namespace rextra
