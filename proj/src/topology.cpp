#include "rextra/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "rextra/errors.hpp"
#include "rextra/rng.hpp"

namespace rextra {

namespace {

/// Sorts edges, fills adjacency lists, rejects self loops and duplicates.
void finalize_graph(Graph& g, const std::string& origin) {
  std::sort(g.edges.begin(), g.edges.end());
  g.adj.assign(static_cast<std::size_t>(g.n), {});
  g.closed_adj.assign(static_cast<std::size_t>(g.n), {});
  std::pair<int, int> prev{-1, -1};
  for (auto& [i, j] : g.edges) {
    if (i > j) std::swap(i, j);
    if (i == j) throw ParseError(origin + ": self loop at agent " + std::to_string(i));
    if (i < 0 || j >= g.n)
      throw ParseError(origin + ": edge (" + std::to_string(i) + ", " + std::to_string(j) +
                       ") outside agents 0.." + std::to_string(g.n - 1));
    if (std::make_pair(i, j) == prev)
      throw ParseError(origin + ": duplicate edge (" + std::to_string(i) + ", " +
                       std::to_string(j) + ")");
    prev = {i, j};
    g.adj[static_cast<std::size_t>(i)].push_back(j);
    g.adj[static_cast<std::size_t>(j)].push_back(i);
  }
  for (int i = 0; i < g.n; ++i) {
    auto& nb = g.adj[static_cast<std::size_t>(i)];
    std::sort(nb.begin(), nb.end());
    auto& cl = g.closed_adj[static_cast<std::size_t>(i)];
    cl = nb;
    cl.insert(std::lower_bound(cl.begin(), cl.end(), i), i);
  }
}

std::vector<std::pair<int, int>> sample_er_edges(int n, double p, std::mt19937_64& engine) {
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(engine)) edges.emplace_back(i, j);
  return edges;
}

}  // namespace

bool Graph::connected() const {
  if (n <= 0) return false;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == n;
}

Graph build_graph(GraphKind kind, int n, std::uint64_t seed, double p) {
  if (n <= 0) throw InvalidArgument("graph needs at least one agent, got n = " + std::to_string(n));
  Graph g;
  g.n = n;
  g.kind = kind;
  switch (kind) {
    case GraphKind::Ring: {
      if (n == 2) {
        g.edges = {{0, 1}};
      } else {
        for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
        if (n > 2) g.edges.emplace_back(0, n - 1);
      }
      break;
    }
    case GraphKind::Complete: {
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
      break;
    }
    case GraphKind::ErdosRenyi: {
      if (!(p >= 0.0 && p <= 1.0))
        throw InvalidArgument("edge probability must lie in [0, 1], got " + std::to_string(p));
      g.er_p = p;
      constexpr int kMaxAttempts = 1000;
      for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        auto engine = make_engine(seed, static_cast<std::uint64_t>(attempt));
        g.edges = sample_er_edges(n, p, engine);
        g.resamples = attempt;
        finalize_graph(g, "random graph");
        if (g.connected()) return g;
      }
      throw RetryExhausted("no connected graph on " + std::to_string(n) + " agents with p = " +
                           std::to_string(p) + " after " + std::to_string(kMaxAttempts) +
                           " samples");
    }
    case GraphKind::File:
      throw InvalidArgument("file graphs come from load_edge_list, not build_graph");
  }
  finalize_graph(g, "graph");
  return g;
}

Graph read_edge_list(std::istream& in, const std::string& origin) {
  int n = 0;
  int m = 0;
  if (!(in >> n >> m)) throw ParseError(origin + ": expected header line \"n m\"");
  if (n <= 0) throw ParseError(origin + ": agent count must be positive, got " + std::to_string(n));
  if (m < 0) throw ParseError(origin + ": negative edge count " + std::to_string(m));
  Graph g;
  g.n = n;
  g.kind = GraphKind::File;
  g.edges.reserve(static_cast<std::size_t>(m));
  for (int e = 0; e < m; ++e) {
    int i = 0;
    int j = 0;
    if (!(in >> i >> j))
      throw ParseError(origin + ": expected " + std::to_string(m) + " edges, got " +
                       std::to_string(e));
    g.edges.emplace_back(i, j);
  }
  finalize_graph(g, origin);
  return g;
}

Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list " + path);
  return read_edge_list(in, path);
}

void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write edge list " + path);
  out << g.n << ' ' << g.edges.size() << '\n';
  for (const auto& [i, j] : g.edges) out << i << ' ' << j << '\n';
  if (!out) throw IoError("write failed for edge list " + path);
}

namespace {

/// Spectral summary of a symmetric matrix: (sigma2, eig_min).
std::pair<double, double> spectral_summary(const Matrix& W) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(W);
  const auto& lambda = eig.eigenvalues();  // ascending
  int n = static_cast<int>(lambda.size());
  double sigma2 = 0.0;
  if (n >= 2) sigma2 = std::max(std::abs(lambda(0)), std::abs(lambda(n - 2)));
  return {sigma2, lambda(0)};
}

}  // namespace

MixingMatrix metropolis_weights(const Graph& g) {
  if (!g.connected())
    throw Disconnected("mixing weights need a connected graph; got " + std::to_string(g.n) +
                       " agents, " + std::to_string(g.edges.size()) + " edges");
  Matrix W = Matrix::Zero(g.n, g.n);
  for (const auto& [i, j] : g.edges) {
    double w = 1.0 / (1.0 + std::max(g.degree(i), g.degree(j)));
    W(i, j) = w;
    W(j, i) = w;
  }
  for (int i = 0; i < g.n; ++i) {
    // Ascending-neighbor summation; keeps the diagonal bitwise stable across
    // graph storage layouts.
    double off = 0.0;
    for (int j : g.adj[static_cast<std::size_t>(i)]) off += W(i, j);
    W(i, i) = 1.0 - off;
  }
  MixingMatrix m;
  m.W = std::move(W);
  std::tie(m.sigma2, m.eig_min) = spectral_summary(m.W);
  return m;
}

MixingMatrix mixing_from_dense(Matrix W) {
  if (W.rows() != W.cols())
    throw DimensionMismatch("mixing matrix must be square, got " + std::to_string(W.rows()) +
                            " x " + std::to_string(W.cols()));
  if (W.rows() == 0) throw InvalidArgument("mixing matrix must be nonempty");
  MixingMatrix m;
  m.W = std::move(W);
  std::tie(m.sigma2, m.eig_min) = spectral_summary(m.W);
  return m;
}

AuxiliaryMatrix auxiliary_matrix(const MixingMatrix& w, double theta) {
  if (!(theta > 0.0 && theta <= 0.5))
    throw InvalidArgument("theta must lie in (0, 1/2], got " + std::to_string(theta));
  AuxiliaryMatrix v;
  v.theta = theta;
  v.V = theta * Matrix::Identity(w.n(), w.n()) + (1.0 - theta) * w.W;
  return v;
}

bool ValidationReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

ValidationReport validate_mixing(const MixingMatrix& w) {
  const Matrix& W = w.W;
  int n = w.n();
  ValidationReport report;

  double asym = (W - W.transpose()).cwiseAbs().maxCoeff();
  report.checks.push_back({"symmetry", asym <= 1e-12, asym, "max |W_ij - W_ji|"});

  double off_min = 0.0;
  bool first = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (first || W(i, j) < off_min) off_min = W(i, j);
      first = false;
    }
  report.checks.push_back(
      {"nonnegative_offdiag", off_min >= 0.0, off_min, first ? "no off-diagonal entries" : "min W_ij, i != j"});

  double diag_min = W.diagonal().minCoeff();
  double diag_max = W.diagonal().maxCoeff();
  if (n == 1) {
    report.checks.push_back({"diagonal_range", true, diag_min, "waived for a single agent"});
  } else {
    report.checks.push_back({"diagonal_range", diag_min > 0.0 && diag_max < 1.0, diag_min,
                             "diagonal must lie in (0, 1); max is " + std::to_string(diag_max)});
  }

  double row_err = (W.rowwise().sum() - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff();
  report.checks.push_back({"row_sums", row_err <= 1e-12, row_err, "max |sum_j W_ij - 1|"});

  Eigen::SelfAdjointEigenSolver<Matrix> eig(W);
  double lambda_min = eig.eigenvalues()(0);
  double lambda_max = eig.eigenvalues()(n - 1);
  // An eigenvalue within 1e-12 of -1 never mixes in practice; treat the open
  // endpoint with the same slack the other spectral checks use.
  report.checks.push_back({"eigenvalue_range",
                           lambda_min > -1.0 + 1e-12 && lambda_max <= 1.0 + 1e-12, lambda_min,
                           "eigenvalues must lie in (-1, 1]; max is " +
                               std::to_string(lambda_max)});

  report.checks.push_back({"spectral_gap", w.sigma2 < 1.0 - 1e-10, w.sigma2,
                           "second largest |eigenvalue| must stay below 1"});
  return report;
}

CouplingDiagnostic recursion_coupling(const MixingMatrix& w, const AuxiliaryMatrix& v) {
  int n = w.n();
  if (v.V.rows() != n)
    throw DimensionMismatch("auxiliary matrix is " + std::to_string(v.V.rows()) +
                            " x " + std::to_string(v.V.cols()) + ", mixing matrix has n = " +
                            std::to_string(n));
  Matrix J = Matrix::Constant(n, n, 1.0 / n);
  Matrix I = Matrix::Identity(n, n);
  Matrix Q(2 * n, 2 * n);
  Q.topLeftCorner(n, n) = w.W - J;
  Q.topRightCorner(n, n) = I;
  Q.bottomLeftCorner(n, n) = w.W - v.V;
  Q.bottomRightCorner(n, n) = I - J;

  Eigen::EigenSolver<Matrix> eig(Q);
  double rho = eig.eigenvalues().cwiseAbs().maxCoeff();

  Eigen::JacobiSVD<Matrix> svd(Q);
  double norm = svd.singularValues()(0);

  return {rho, norm};
}

}  // namespace rextra
