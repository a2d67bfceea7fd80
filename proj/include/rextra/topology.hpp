#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rextra/types.hpp"

namespace rextra {

enum class GraphKind { ErdosRenyi, Ring, Complete, File };

/// Undirected simple graph over agents 0..n-1. Edges are stored as (i, j)
/// with i < j in lexicographic order; adjacency lists are sorted.
struct Graph {
  int n = 0;
  GraphKind kind = GraphKind::Complete;
  double er_p = 0.0;  // edge probability; meaningful for ErdosRenyi only
  int resamples = 0;  // connectivity resamples consumed (ErdosRenyi only)
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> adj;          // sorted neighbor lists
  std::vector<std::vector<int>> closed_adj;   // neighbors plus self, sorted

  int degree(int i) const { return static_cast<int>(adj[static_cast<std::size_t>(i)].size()); }
  bool connected() const;
};

/// Builds a graph. Ring connects i with (i+1) mod n; Complete connects all
/// pairs; ErdosRenyi samples every pair independently with probability p and
/// resamples until connected (at most 1000 attempts, then RetryExhausted).
Graph build_graph(GraphKind kind, int n, std::uint64_t seed = 0, double p = 0.0);

/// Edge-list text format: first line "n m", then one "i j" line per edge,
/// 0-indexed. Duplicate edges and self loops are rejected on read.
Graph load_edge_list(const std::string& path);
Graph read_edge_list(std::istream& in, const std::string& origin);
void save_edge_list(const Graph& g, const std::string& path);

/// Symmetric doubly stochastic mixing matrix with its spectral summary:
/// sigma2 is the second largest singular value, eig_min the smallest
/// eigenvalue. A valid matrix has eigenvalues in (-1, 1] and sigma2 < 1.
struct MixingMatrix {
  Matrix W;
  double sigma2 = 0.0;
  double eig_min = 0.0;

  int n() const { return static_cast<int>(W.rows()); }
};

/// Metropolis weights: W_ij = 1/(1 + max(deg_i, deg_j)) on edges, diagonal
/// fills each row to sum 1. Requires a connected graph.
MixingMatrix metropolis_weights(const Graph& g);

/// Wraps an arbitrary symmetric stochastic matrix, computing its spectral
/// summary. Used for hand-built matrices in validation and tests.
MixingMatrix mixing_from_dense(Matrix W);

/// V = theta I + (1 - theta) W with theta in (0, 1/2]. V - W is positive
/// semidefinite and V shares the row-stochastic structure of W.
struct AuxiliaryMatrix {
  Matrix V;
  double theta = 0.5;
};

AuxiliaryMatrix auxiliary_matrix(const MixingMatrix& w, double theta = 0.5);

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

/// Checks the mixing-matrix contract: symmetry, nonnegative off-diagonal,
/// diagonal in (0, 1), unit row sums, eigenvalues in (-1, 1], sigma2 < 1.
/// For n = 1 the only admissible matrix is [1] and the diagonal check is
/// waived.
ValidationReport validate_mixing(const MixingMatrix& w);

/// Spectral diagnostics of the coupled consensus-correction recursion matrix
/// [[W - J, I], [W - V, I - J]] with J = ones/n. The spectral radius governs
/// the linear consensus rate and is < 1 under the mixing contract; the plain
/// spectral norm of this block matrix is >= sqrt(2) and is reported only for
/// reference.
struct CouplingDiagnostic {
  double spectral_radius = 0.0;
  double spectral_norm = 0.0;
};

CouplingDiagnostic recursion_coupling(const MixingMatrix& w, const AuxiliaryMatrix& v);

}  // namespace rextra
