#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "rextra/rng.hpp"
#include "rextra/topology.hpp"

using namespace rextra;

namespace {

bool has_edge(const Graph& g, int i, int j) {
  if (i > j) std::swap(i, j);
  for (const auto& e : g.edges)
    if (e.first == i && e.second == j) return true;
  return false;
}

}  // namespace

TEST_CASE("ring graph wiring") {
  Graph g = build_graph(GraphKind::Ring, 5);
  CHECK(g.n == 5);
  CHECK(g.edges.size() == 5);
  CHECK(has_edge(g, 0, 1));
  CHECK(has_edge(g, 4, 0));
  CHECK(!has_edge(g, 0, 2));
  CHECK(g.degree(0) == 2);
  CHECK(g.connected());

  Graph pair = build_graph(GraphKind::Ring, 2);
  CHECK(pair.edges.size() == 1);  // the wraparound edge would be a duplicate
  CHECK(pair.connected());

  Graph single = build_graph(GraphKind::Ring, 1);
  CHECK(single.edges.empty());
  CHECK(single.connected());
}

TEST_CASE("complete graph wiring") {
  Graph g = build_graph(GraphKind::Complete, 6);
  CHECK(g.edges.size() == 15);
  CHECK(g.degree(3) == 5);
  CHECK(g.connected());
}

TEST_CASE("closed adjacency contains self in sorted position") {
  Graph g = build_graph(GraphKind::Ring, 4);
  CHECK(g.adj[2] == std::vector<int>{1, 3});
  CHECK(g.closed_adj[2] == std::vector<int>{1, 2, 3});
  CHECK(g.closed_adj[0] == std::vector<int>{0, 1, 3});
}

TEST_CASE("random graphs are connected, seeded, and deterministic") {
  Graph a = build_graph(GraphKind::ErdosRenyi, 12, 99, 0.4);
  Graph b = build_graph(GraphKind::ErdosRenyi, 12, 99, 0.4);
  CHECK(a.edges == b.edges);
  CHECK(a.connected());
  CHECK(a.resamples == b.resamples);
  Graph c = build_graph(GraphKind::ErdosRenyi, 12, 100, 0.4);
  CHECK(a.edges != c.edges);
}

TEST_CASE("random graph sampling gives up on impossible targets") {
  CHECK_THROWS_AS(build_graph(GraphKind::ErdosRenyi, 4, 1, 0.0), RetryExhausted);
  CHECK_THROWS_AS(build_graph(GraphKind::ErdosRenyi, 4, 1, 1.5), InvalidArgument);
  CHECK_THROWS_AS(build_graph(GraphKind::Ring, 0), InvalidArgument);
}

TEST_CASE("edge list round trip") {
  Graph g = build_graph(GraphKind::ErdosRenyi, 9, 5, 0.5);
  const char* path = "topology_roundtrip.edges";
  save_edge_list(g, path);
  Graph loaded = load_edge_list(path);
  CHECK(loaded.n == g.n);
  CHECK(loaded.edges == g.edges);
  CHECK(loaded.kind == GraphKind::File);
  std::remove(path);
}

TEST_CASE("edge list parsing rejects malformed input") {
  auto parse = [](const char* text) {
    std::istringstream in(text);
    return read_edge_list(in, "test");
  };
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("3 2\n0 1\n"), ParseError);        // short
  CHECK_THROWS_AS(parse("3 1\n0 3\n"), ParseError);        // out of range
  CHECK_THROWS_AS(parse("3 1\n1 1\n"), ParseError);        // self loop
  CHECK_THROWS_AS(parse("3 2\n0 1\n1 0\n"), ParseError);   // duplicate
  CHECK_THROWS_AS(parse("0 0\n"), ParseError);             // no agents
  Graph ok = parse("3 2\n2 1\n0 1\n");                     // order normalized
  CHECK(ok.edges == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
  CHECK_THROWS_AS(load_edge_list("does_not_exist.edges"), IoError);
}

TEST_CASE("metropolis weights on the 4-ring") {
  // Degree 2 everywhere: each edge weight 1/(1 + 2) = 1/3 and the diagonal
  // fills to 1/3. The eigenvalues are (1 + 2 cos(2 pi k / 4)) / 3 for
  // k = 0..3, i.e. {1, 1/3, -1/3, 1/3}.
  Graph g = build_graph(GraphKind::Ring, 4);
  MixingMatrix w = metropolis_weights(g);
  Matrix expected(4, 4);
  double third = 1.0 / 3.0;
  expected << third, third, 0.0, third,
              third, third, third, 0.0,
              0.0, third, third, third,
              third, 0.0, third, third;
  CHECK((w.W - expected).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(w.sigma2 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(w.eig_min == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("metropolis weights on the 6-ring") {
  // Same circulant structure; the slowest mode is (1 + 2 cos(2 pi / 6)) / 3 = 2/3.
  MixingMatrix w = metropolis_weights(build_graph(GraphKind::Ring, 6));
  CHECK(w.sigma2 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("metropolis weights on the complete graph average everything") {
  MixingMatrix w = metropolis_weights(build_graph(GraphKind::Complete, 5));
  CHECK((w.W - Matrix::Constant(5, 5, 0.2)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(w.sigma2 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("metropolis weights on a star") {
  std::istringstream in("4 3\n0 1\n0 2\n0 3\n");
  Graph g = read_edge_list(in, "star");
  MixingMatrix w = metropolis_weights(g);
  CHECK(w.W(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(w.W(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(w.W(1, 1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(w.W(1, 2) == 0.0);
  // Spectrum {1, 3/4, 3/4, 0}: leaf differences give 3/4 twice, the trace
  // forces the last eigenvalue to 0.
  CHECK(w.sigma2 == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(w.eig_min == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("metropolis weights need a connected graph") {
  std::istringstream in("4 2\n0 1\n2 3\n");
  Graph g = read_edge_list(in, "split");
  CHECK(!g.connected());
  CHECK_THROWS_AS(metropolis_weights(g), Disconnected);
}

TEST_CASE("mixing validation passes metropolis matrices") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    Graph g = build_graph(GraphKind::ErdosRenyi, 10, seed, 0.5);
    ValidationReport report = validate_mixing(metropolis_weights(g));
    CHECK(report.all_pass());
    CHECK(report.checks.size() == 6);
  }
}

TEST_CASE("mixing validation catches specific defects") {
  auto find = [](const ValidationReport& r, const std::string& name) {
    for (const auto& c : r.checks)
      if (c.name == name) return c.pass;
    FAIL("missing check ", name);
    return false;
  };

  Matrix asym(2, 2);
  asym << 0.5, 0.5, 0.3, 0.7;
  ValidationReport r1 = validate_mixing(mixing_from_dense(asym));
  CHECK(!find(r1, "symmetry"));

  Matrix negative(2, 2);
  negative << 1.2, -0.2, -0.2, 1.2;
  ValidationReport r2 = validate_mixing(mixing_from_dense(negative));
  CHECK(!find(r2, "nonnegative_offdiag"));
  CHECK(!find(r2, "diagonal_range"));

  Matrix swap(2, 2);
  swap << 0.0, 1.0, 1.0, 0.0;  // eigenvalue -1: oscillates, never mixes
  ValidationReport r3 = validate_mixing(mixing_from_dense(swap));
  CHECK(!find(r3, "eigenvalue_range"));
  CHECK(!find(r3, "spectral_gap"));

  ValidationReport r4 = validate_mixing(mixing_from_dense(Matrix::Identity(3, 3)));
  CHECK(!find(r4, "spectral_gap"));  // disconnected consensus: sigma2 = 1

  Matrix bad_rows(2, 2);
  bad_rows << 0.5, 0.4, 0.4, 0.5;
  ValidationReport r5 = validate_mixing(mixing_from_dense(bad_rows));
  CHECK(!find(r5, "row_sums"));
}

TEST_CASE("single agent mixing is trivially valid") {
  ValidationReport report = validate_mixing(mixing_from_dense(Matrix::Ones(1, 1)));
  CHECK(report.all_pass());
}

TEST_CASE("auxiliary matrix interpolates toward the identity") {
  MixingMatrix w = metropolis_weights(build_graph(GraphKind::Ring, 4));
  AuxiliaryMatrix v = auxiliary_matrix(w, 0.5);
  CHECK(v.V(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(v.V(0, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  // V - W = theta (I - W) is positive semidefinite for theta in (0, 1/2].
  Eigen::SelfAdjointEigenSolver<Matrix> eig(v.V - w.W);
  CHECK(eig.eigenvalues()(0) >= -1e-14);
  CHECK_THROWS_AS(auxiliary_matrix(w, 0.0), InvalidArgument);
  CHECK_THROWS_AS(auxiliary_matrix(w, 0.6), InvalidArgument);
}

TEST_CASE("coupling diagnostic matches the closed form at theta = 1/2") {
  // On the orthogonal complement of consensus the coupled step acts as the
  // 2 x 2 block [[lambda, 1], [(lambda - 1)/2, 1]] per eigenvalue lambda of
  // W, whose roots have modulus sqrt((1 + lambda) / 2).
  MixingMatrix pair = mixing_from_dense(Matrix::Constant(2, 2, 0.5));
  CouplingDiagnostic d2 = recursion_coupling(pair, auxiliary_matrix(pair, 0.5));
  CHECK(d2.spectral_radius == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
  CHECK(d2.spectral_norm >= std::sqrt(2.0) - 1e-12);

  MixingMatrix ring = metropolis_weights(build_graph(GraphKind::Ring, 4));
  CouplingDiagnostic d4 = recursion_coupling(ring, auxiliary_matrix(ring, 0.5));
  CHECK(d4.spectral_radius == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-10));
  CHECK(d4.spectral_radius < 1.0);
  CHECK(d4.spectral_norm >= std::sqrt(2.0) - 1e-12);
}

TEST_CASE("metropolis weights on the 3-ring average everything") {
  // Every degree is 2 and every pair is adjacent, so W is the rank-one
  // averaging matrix with a zero spectral gap complement.
  MixingMatrix w = metropolis_weights(build_graph(GraphKind::Ring, 3));
  CHECK((w.W - Matrix::Constant(3, 3, 1.0 / 3.0)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(w.sigma2 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("metropolis weights on the two-agent complete graph") {
  MixingMatrix w = metropolis_weights(build_graph(GraphKind::Complete, 2));
  CHECK((w.W - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() <= 1e-15);
}

namespace {

// One neighbor-averaging round applied blockwise with plain dense products.
std::vector<Matrix> mix_blocks(const MixingMatrix& w, const std::vector<Matrix>& x) {
  std::vector<Matrix> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = Matrix::Zero(x[i].rows(), x[i].cols());
    for (std::size_t j = 0; j < x.size(); ++j) out[i] += w.W(static_cast<int>(i), static_cast<int>(j)) * x[j];
  }
  return out;
}

}  // namespace

TEST_CASE("mixing fixes exactly the consensual stacks") {
  auto engine = make_engine(61, 0);
  Graph g = build_graph(GraphKind::ErdosRenyi, 7, 3, 0.5);
  MixingMatrix w = metropolis_weights(g);

  Matrix common = gaussian_matrix(5, 2, engine);
  std::vector<Matrix> consensual(7, common);
  std::vector<Matrix> mixed = mix_blocks(w, consensual);
  double residual = 0.0;
  for (int i = 0; i < 7; ++i) residual = std::max(residual, (mixed[i] - common).norm());
  CHECK(residual <= 1e-12);

  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Matrix> x;
    for (int i = 0; i < 7; ++i) x.push_back(gaussian_matrix(5, 2, engine));
    std::vector<Matrix> y = mix_blocks(w, x);
    double moved = 0.0;
    for (int i = 0; i < 7; ++i) moved = std::max(moved, (y[i] - x[i]).norm());
    CHECK(moved > 0.0);
  }
}

TEST_CASE("mixing preserves the average and contracts deviations by at most two") {
  auto engine = make_engine(67, 0);
  for (int trial = 0; trial < 50; ++trial) {
    Graph g = build_graph(GraphKind::ErdosRenyi, 8, static_cast<std::uint64_t>(trial), 0.5);
    MixingMatrix w = metropolis_weights(g);
    std::vector<Matrix> x;
    for (int i = 0; i < 8; ++i) x.push_back(gaussian_matrix(4, 2, engine));
    Matrix mean = Matrix::Zero(4, 2);
    for (const Matrix& b : x) mean += b / 8.0;
    std::vector<Matrix> y = mix_blocks(w, x);
    Matrix mean_after = Matrix::Zero(4, 2);
    for (const Matrix& b : y) mean_after += b / 8.0;
    CHECK((mean_after - mean).norm() <= 1e-12);  // 1^T W = 1^T

    // (I - W) has spectrum in [0, 2), so the residual never doubles the spread.
    double spread_sq = 0.0;
    double residual_sq = 0.0;
    for (int i = 0; i < 8; ++i) {
      spread_sq += (x[static_cast<std::size_t>(i)] - mean).squaredNorm();
      residual_sq += (x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)]).squaredNorm();
    }
    CHECK(std::sqrt(residual_sq) <= 2.0 * std::sqrt(spread_sq) + 1e-12);
  }
}

TEST_CASE("erdos renyi edge counts track the pair density") {
  // 28 candidate pairs at p = 0.6 give 16.8 expected edges; conditioning on
  // connectivity shifts the conditional mean only slightly at this density.
  double total = 0.0;
  const int trials = 200;
  for (int s = 0; s < trials; ++s) {
    Graph g = build_graph(GraphKind::ErdosRenyi, 8, static_cast<std::uint64_t>(s), 0.6);
    total += static_cast<double>(g.edges.size());
  }
  double mean_edges = total / trials;
  CHECK(mean_edges > 15.0);
  CHECK(mean_edges < 18.6);
}
