#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rextra/manifold.hpp"
#include "rextra/types.hpp"

namespace rextra {

enum class ObjectiveKind { Pca, Lrmc, Quadratic };

/// A decentralized problem instance: n agents, each holding an immutable
/// local term f_i over a common manifold. The global objective is the mean
/// (1/n) sum_i f_i; algorithms consume the per-agent terms, diagnostics the
/// mean.
class Problem {
 public:
  Problem(ManifoldSpec spec, int n_agents);
  virtual ~Problem() = default;

  const ManifoldSpec& manifold() const { return spec_; }
  int agents() const { return n_; }

  virtual ObjectiveKind kind() const = 0;
  virtual double local_objective(int i, const Matrix& x) const = 0;
  virtual Matrix local_euclidean_gradient(int i, const Matrix& x) const = 0;

  /// Smoothness bound L_f used by step-size heuristics; exact for the
  /// quadratic and PCA objectives, a documented estimate for LRMC.
  virtual double smoothness_bound() const = 0;

  double global_objective(const Matrix& x) const;
  Matrix global_euclidean_gradient(const Matrix& x) const;

  /// Reference solution when one is known (synthetic data); nullptr otherwise.
  virtual const Matrix* ground_truth() const { return nullptr; }

  /// Rows of local data available for subsampled gradients; 0 means the
  /// objective does not support batching.
  virtual int local_sample_count(int /*i*/) const { return 0; }

  /// Unbiased gradient estimate from a subset of local rows. Only meaningful
  /// when local_sample_count > 0.
  virtual Matrix local_euclidean_gradient_sampled(int i, const Matrix& x,
                                                  const std::vector<int>& rows) const;

 protected:
  void check_block(const Matrix& x, const char* where) const;

 private:
  ManifoldSpec spec_;
  int n_;
};

/// ---- Principal component analysis ----------------------------------------
///
/// f_i(x) = -1/2 tr(x^T A_i^T A_i x) over St(d, r). Minimizing the mean over
/// agents recovers the top-r right singular subspace of the stacked data.

struct PcaData {
  std::vector<Matrix> blocks;  // per-agent row blocks A_i (m_i x d)
  Matrix ground_truth;         // d x r, empty when unknown
};

/// Synthetic recipe with a controlled spectrum: draw B (n*m_per x d) with
/// standard normal entries, take its thin SVD B = U S V^T, replace the
/// singular values with scale * xi^j for j = 1..d, and split the rows of the
/// resulting matrix across agents by a seeded uniform permutation. The first
/// r columns of V are recorded as ground truth. scale = 1 reproduces the
/// bare xi^j profile; scale = sqrt(n*m_per) restores the energy scale of the
/// raw Gaussian sample.
PcaData generate_synthetic_pca(int n, int m_per, int d, int r, double xi, std::uint64_t seed,
                               double scale = 1.0);

/// Splits the rows of a loaded matrix across n agents by a seeded uniform
/// permutation. Row count must be divisible by n.
PcaData split_pca_rows(const Matrix& A, int n, std::uint64_t seed);

class PcaProblem : public Problem {
 public:
  PcaProblem(int r, PcaData data);

  ObjectiveKind kind() const override { return ObjectiveKind::Pca; }
  double local_objective(int i, const Matrix& x) const override;
  Matrix local_euclidean_gradient(int i, const Matrix& x) const override;
  double smoothness_bound() const override { return smoothness_; }
  const Matrix* ground_truth() const override;
  int local_sample_count(int i) const override;
  Matrix local_euclidean_gradient_sampled(int i, const Matrix& x,
                                          const std::vector<int>& rows) const override;

  const Matrix& block(int i) const { return data_.blocks[static_cast<std::size_t>(i)]; }

 private:
  PcaData data_;
  std::vector<Matrix> grams_;  // A_i^T A_i, cached
  Matrix mean_gram_;           // (1/n) sum_i A_i^T A_i
  double smoothness_ = 0.0;
};

/// ---- Low-rank matrix completion ------------------------------------------
///
/// Each agent holds a column block A_i of a rank-r matrix observed through a
/// binary mask. The local term is f_i(X) = 1/2 || mask .* (X V_i(X) - A_i) ||^2
/// where V_i(X) solves the per-column ridge least-squares fit of the observed
/// entries; the gradient treats V_i as fixed at the inner solution.

struct LrmcData {
  std::vector<Matrix> blocks;  // per-agent column blocks (d x T_i)
  std::vector<Matrix> masks;   // same shapes, entries in {0, 1}
  double ridge = 1e-8;
  double mu = 0.0;      // observation density used to draw the masks
  Matrix ground_truth;  // polar factor of the planted factor L, empty if unknown
};

/// Planted model A = L R with standard normal factors, Bernoulli(mu) mask,
/// columns split across agents by a seeded uniform permutation. The default
/// density mu = r (d + T - r) / (d T) matches the degrees of freedom of the
/// rank-r model. T must be divisible by n.
LrmcData generate_synthetic_lrmc(int n, int d, int T, int r, std::uint64_t seed,
                                 double ridge = 1e-8, double mu = -1.0);

/// Per-column ridge least squares: for every column t of A, solves
/// (S^T S + ridge I) v = S^T a over the rows observed in that column, where S
/// is the corresponding row slice of X. Columns with no observed entries get
/// v = 0.
Matrix lrmc_inner_solve(const Matrix& A, const Matrix& mask, double ridge, const Matrix& X);

class LrmcProblem : public Problem {
 public:
  LrmcProblem(int r, LrmcData data);

  ObjectiveKind kind() const override { return ObjectiveKind::Lrmc; }
  double local_objective(int i, const Matrix& x) const override;
  Matrix local_euclidean_gradient(int i, const Matrix& x) const override;
  double smoothness_bound() const override { return smoothness_; }
  const Matrix* ground_truth() const override;

  const LrmcData& data() const { return data_; }

 private:
  LrmcData data_;
  double smoothness_ = 0.0;  // estimate; see implementation note
};

/// ---- Heterogeneous quadratic ----------------------------------------------
///
/// f_i(x) = 1/2 ||x - b_i||_F^2 over Euclidean space. The consensual optimum
/// is the mean of the targets; used for exactness and degeneration checks.

class QuadraticProblem : public Problem {
 public:
  QuadraticProblem(int n, int d, int r, std::uint64_t seed);

  ObjectiveKind kind() const override { return ObjectiveKind::Quadratic; }
  double local_objective(int i, const Matrix& x) const override;
  Matrix local_euclidean_gradient(int i, const Matrix& x) const override;
  double smoothness_bound() const override { return 1.0; }

  const Matrix& target(int i) const { return targets_[static_cast<std::size_t>(i)]; }
  const Matrix& target_mean() const { return mean_; }

 private:
  std::vector<Matrix> targets_;
  Matrix mean_;
};

/// ---- Matrix file I/O -------------------------------------------------------

enum class MatrixFileFormat { Csv, RawF64 };

/// csv: comma-separated decimal rows. raw_f64: 16-byte header of two
/// little-endian uint64 (rows, cols) followed by row-major little-endian
/// doubles. Parse failures carry row/column context; size mismatches throw
/// ShapeError.
Matrix load_matrix(const std::string& path, MatrixFileFormat format);
void save_matrix(const Matrix& m, const std::string& path, MatrixFileFormat format);

MatrixFileFormat matrix_format_from_name(const std::string& name);

}  // namespace rextra
