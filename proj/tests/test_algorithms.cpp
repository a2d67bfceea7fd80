#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "rextra/algorithms.hpp"
#include "rextra/errors.hpp"
#include "rextra/problems.hpp"
#include "rextra/rng.hpp"

using namespace rextra;

namespace {

GradientOracle full_oracle(const Problem& problem) {
  const ManifoldSpec spec = problem.manifold();
  return [&problem, spec](int i, const Matrix& x) {
    return riemannian_gradient(spec, x, problem.local_euclidean_gradient(i, x));
  };
}

double max_entry_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("algorithm names round trip") {
  for (Algorithm a : {Algorithm::Rextra, Algorithm::Extra, Algorithm::Drdgd, Algorithm::Dprgd,
                      Algorithm::Drgta, Algorithm::Dprgt})
    CHECK(algorithm_from_name(algorithm_name(a)) == a);
  CHECK_THROWS_AS(algorithm_from_name("sgd"), InvalidArgument);
}

TEST_CASE("mixing matches an explicit weighted sum and fixes consensual stacks") {
  Graph g = build_graph(GraphKind::ErdosRenyi, 6, 5, 0.6);
  MixingMatrix w = metropolis_weights(g);
  auto engine = make_engine(2, 0);
  AgentStack x;
  for (int i = 0; i < 6; ++i) x.blocks.push_back(gaussian_matrix(4, 2, engine));

  AgentStack mixed = mix_stack(x, w);
  for (int i = 0; i < 6; ++i) {
    // Same accumulation order as the implementation: ascending j, skip zeros.
    Matrix expect;
    bool assigned = false;
    for (int j = 0; j < 6; ++j) {
      if (w.W(i, j) == 0.0) continue;
      if (!assigned) {
        expect = w.W(i, j) * x[j];
        assigned = true;
      } else {
        expect += w.W(i, j) * x[j];
      }
    }
    CHECK((mixed[i] - expect).norm() == 0.0);
  }

  AgentStack consensual = AgentStack::broadcast(x[0], 6);
  AgentStack fixed = mix_stack(consensual, w);
  for (int i = 0; i < 6; ++i) CHECK((fixed[i] - x[0]).norm() <= 1e-14);

  AgentStack wrong = AgentStack::broadcast(x[0], 5);
  CHECK_THROWS_AS(mix_stack(wrong, w), DimensionMismatch);
}

TEST_CASE("initial stacks are seeded and respect the consensual flag") {
  ManifoldSpec spec = ManifoldSpec::stiefel(6, 2);
  AgentStack a = initial_stack(spec, 4, 9, true);
  AgentStack b = initial_stack(spec, 4, 9, true);
  for (int i = 0; i < 4; ++i) {
    CHECK((a[i] - b[i]).norm() == 0.0);
    CHECK((a[i] - a[0]).norm() == 0.0);
    CHECK(is_on_manifold(spec, a[i]));
  }
  AgentStack c = initial_stack(spec, 4, 9, false);
  CHECK((c[0] - c[1]).norm() > 1e-3);
  for (int i = 0; i < 4; ++i) CHECK(is_on_manifold(spec, c[i]));
  CHECK_THROWS_AS(initial_stack(spec, 0, 9, true), InvalidArgument);
}

TEST_CASE("the corrector starts as the negatively scaled gradient") {
  QuadraticProblem problem(3, 4, 2, 21);
  GradientOracle oracle = full_oracle(problem);
  AgentStack x0 = initial_stack(problem.manifold(), 3, 1, false);
  RextraState state = rextra_init(x0, oracle, problem.manifold(), 0.2, 0.5);
  CHECK(state.k == 0);
  for (int i = 0; i < 3; ++i) {
    CHECK((state.s[i] + 0.2 * oracle(i, x0[i])).norm() == 0.0);
    CHECK((state.g_prev[i] - oracle(i, x0[i])).norm() == 0.0);
  }
  CHECK_THROWS_AS(rextra_init(x0, oracle, problem.manifold(), 0.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(rextra_init(x0, oracle, problem.manifold(), 0.2, 0.0), InvalidArgument);
  CHECK_THROWS_AS(rextra_init(x0, oracle, problem.manifold(), 0.2, 0.6), InvalidArgument);

  ManifoldSpec stiefel = ManifoldSpec::stiefel(4, 2);
  AgentStack off = AgentStack::broadcast(Matrix::Constant(4, 2, 0.3), 3);
  CHECK_THROWS_AS(rextra_init(off, oracle, stiefel, 0.2, 0.5), InfeasibleStart);
}

TEST_CASE("a single agent reduces the corrected recursion to projected descent") {
  PcaData data = generate_synthetic_pca(1, 40, 6, 2, 0.8, 33);
  PcaProblem problem(2, std::move(data));
  ManifoldSpec spec = problem.manifold();
  GradientOracle oracle = full_oracle(problem);
  Graph g = build_graph(GraphKind::Complete, 1);
  MixingMatrix w = metropolis_weights(g);

  AgentStack x0 = initial_stack(spec, 1, 3, true);
  RextraState state = rextra_init(x0, oracle, spec, 0.05, 0.5);
  Matrix ref = x0[0];
  for (int k = 0; k < 200; ++k) {
    rextra_step(state, w, oracle, spec, g);
    ref = project_to_manifold(spec, ref - 0.05 * oracle(0, ref));
    CHECK((state.x[0] - ref).norm() <= 1e-12);
  }
}

TEST_CASE("a single euclidean agent reduces the corrected recursion to plain descent") {
  QuadraticProblem problem(1, 5, 3, 39);
  ManifoldSpec spec = problem.manifold();
  GradientOracle oracle = full_oracle(problem);
  Graph g = build_graph(GraphKind::Complete, 1);
  MixingMatrix w = metropolis_weights(g);

  AgentStack x0 = initial_stack(spec, 1, 8, true);
  RextraState state = rextra_init(x0, oracle, spec, 0.3, 0.5);
  Matrix ref = x0[0];
  for (int k = 0; k < 200; ++k) {
    rextra_step(state, w, oracle, spec, g);
    ref = ref - 0.3 * oracle(0, ref);
    CHECK((state.x[0] - ref).norm() <= 1e-13);
  }
}

TEST_CASE("the euclidean recursion matches its direct two step form") {
  // Direct form: x_{k+2} = x_{k+1} + W x_{k+1} - V x_k - alpha (g_{k+1} - g_k)
  // with V = theta I + (1 - theta) W and x_1 = W x_0 - alpha g(x_0). The
  // single-state corrector variant must agree to roundoff for hundreds of
  // iterations.
  const double alpha = 0.1;
  const double theta = 0.5;
  QuadraticProblem problem(5, 4, 2, 45);
  ManifoldSpec spec = problem.manifold();
  GradientOracle oracle = full_oracle(problem);
  Graph g = build_graph(GraphKind::ErdosRenyi, 5, 11, 0.7);
  MixingMatrix w = metropolis_weights(g);

  AgentStack x0 = initial_stack(spec, 5, 2, false);
  RextraState state = rextra_init(x0, oracle, spec, alpha, theta);

  AgentStack prev = x0;
  AgentStack prev_grad = state.g_prev;
  AgentStack mixed_prev = mix_stack(prev, w);
  AgentStack curr;
  for (int i = 0; i < 5; ++i) curr.blocks.push_back(mixed_prev[i] - alpha * prev_grad[i]);

  rextra_step(state, w, oracle, spec, g);
  for (int i = 0; i < 5; ++i) CHECK(max_entry_diff(state.x[i], curr[i]) <= 1e-14);

  for (int k = 1; k < 200; ++k) {
    AgentStack curr_grad;
    for (int i = 0; i < 5; ++i) curr_grad.blocks.push_back(oracle(i, curr[i]));
    AgentStack mixed_curr = mix_stack(curr, w);
    AgentStack next;
    for (int i = 0; i < 5; ++i) {
      // W x_{k+1} + ((x_{k+1} - W x_k) + (theta (W x_k - x_k) - alpha dg)) equals
      // x_{k+1} + W x_{k+1} - V x_k - alpha dg; this association matches the
      // corrector's own evaluation order, keeping the gap at the ulp level.
      next.blocks.push_back(mixed_curr[i] +
                            ((curr[i] - mixed_prev[i]) +
                             (theta * (mixed_prev[i] - prev[i]) -
                              alpha * (curr_grad[i] - prev_grad[i]))));
    }
    rextra_step(state, w, oracle, spec, g);
    for (int i = 0; i < 5; ++i) CHECK(max_entry_diff(state.x[i], next[i]) <= 1e-14);
    prev = std::move(curr);
    prev_grad = std::move(curr_grad);
    mixed_prev = std::move(mixed_curr);
    curr = std::move(next);
  }
}

TEST_CASE("the corrected recursion tracks the mean gradient and stays feasible") {
  PcaData data = generate_synthetic_pca(6, 30, 6, 2, 0.8, 51);
  PcaProblem problem(2, std::move(data));
  ManifoldSpec spec = problem.manifold();
  GradientOracle oracle = full_oracle(problem);
  Graph g = build_graph(GraphKind::Ring, 6);
  MixingMatrix w = metropolis_weights(g);

  AgentStack x0 = initial_stack(spec, 6, 7, false);
  RextraState state = rextra_init(x0, oracle, spec, 0.05, 0.5);
  CHECK(tracking_residual(state) <= 1e-14);
  for (int k = 0; k < 100; ++k) {
    rextra_step(state, w, oracle, spec, g);
    CHECK(tracking_residual(state) <= 1e-10);
    for (int i = 0; i < 6; ++i) CHECK(is_on_manifold(spec, state.x[i]));
  }
}

TEST_CASE("uncorrected descent reads gradients at the pre-mix local iterates") {
  QuadraticProblem problem(4, 3, 2, 57);
  ManifoldSpec spec = problem.manifold();
  Graph g = build_graph(GraphKind::Complete, 4);
  MixingMatrix w = metropolis_weights(g);

  AgentStack x = initial_stack(spec, 4, 5, false);
  AgentStack before = x;
  std::vector<Matrix> queried(4);
  GradientOracle recording = [&](int i, const Matrix& xi) {
    queried[static_cast<std::size_t>(i)] = xi;
    return riemannian_gradient(spec, xi, problem.local_euclidean_gradient(i, xi));
  };
  drdgd_step(x, w, recording, spec, g, 0.1, 1);
  for (int i = 0; i < 4; ++i) CHECK((queried[static_cast<std::size_t>(i)] - before[i]).norm() == 0.0);

  // A zero step from consensus only re-averages, which changes nothing.
  ManifoldSpec stiefel = ManifoldSpec::stiefel(5, 2);
  GradientOracle zero = [](int, const Matrix& xi) { return Matrix::Zero(xi.rows(), xi.cols()); };
  AgentStack consensual = initial_stack(stiefel, 4, 6, true);
  AgentStack kept = consensual;
  drdgd_step(consensual, w, zero, stiefel, g, 0.0, 1);
  for (int i = 0; i < 4; ++i) CHECK((consensual[i] - kept[i]).norm() <= 1e-14);

  CHECK_THROWS_AS(drdgd_step(x, w, recording, spec, g, 0.1, 0), InvalidArgument);
}

TEST_CASE("gradient tracking keeps the tracker mean on the gradient mean") {
  PcaData data = generate_synthetic_pca(6, 30, 6, 2, 0.8, 63);
  PcaProblem problem(2, std::move(data));
  ManifoldSpec spec = problem.manifold();
  GradientOracle oracle = full_oracle(problem);
  Graph g = build_graph(GraphKind::Ring, 6);
  MixingMatrix w = metropolis_weights(g);

  AgentStack x0 = initial_stack(spec, 6, 9, false);
  TrackingState state = tracking_init(x0, oracle, spec, 0.05);
  for (int k = 0; k < 50; ++k) {
    gradient_tracking_step(state, w, oracle, spec, g, 1);
    AgentStack g_now;
    for (int i = 0; i < 6; ++i) g_now.blocks.push_back(oracle(i, state.x[i]));
    CHECK((state.y.mean() - g_now.mean()).norm() <= 1e-10);
    for (int i = 0; i < 6; ++i) CHECK(is_on_manifold(spec, state.x[i]));
  }
}

TEST_CASE("single agent gradient tracking is projected descent") {
  PcaData data = generate_synthetic_pca(1, 40, 6, 2, 0.8, 69);
  PcaProblem problem(2, std::move(data));
  ManifoldSpec spec = problem.manifold();
  GradientOracle oracle = full_oracle(problem);
  Graph g = build_graph(GraphKind::Complete, 1);
  MixingMatrix w = metropolis_weights(g);

  AgentStack x0 = initial_stack(spec, 1, 4, true);
  TrackingState state = tracking_init(x0, oracle, spec, 0.05);
  Matrix ref = x0[0];
  for (int k = 0; k < 50; ++k) {
    gradient_tracking_step(state, w, oracle, spec, g, 1);
    ref = project_to_manifold(spec, ref - 0.05 * oracle(0, ref));
    CHECK((state.x[0] - ref).norm() <= 1e-12);
  }
}

TEST_CASE("a zero epoch budget yields only the initial metrics row") {
  QuadraticProblem problem(4, 3, 2, 71);
  Graph g = build_graph(GraphKind::Ring, 4);
  MixingMatrix w = metropolis_weights(g);
  RunOptions options;
  options.algorithm = Algorithm::Extra;
  options.alpha = 0.2;
  options.max_epochs = 0;
  options.consensual_init = false;
  RunResult result = run(problem, g, w, options);
  CHECK(result.rows.size() == 1);
  CHECK(result.rows[0].k == 0);
  CHECK(result.iterations == 0);
  CHECK(result.termination == Termination::MaxEpochs);
  CHECK(result.comm_entries == 0);
}

TEST_CASE("an already stationary start converges at iteration zero") {
  QuadraticProblem problem(4, 3, 2, 73);
  Graph g = build_graph(GraphKind::Ring, 4);
  MixingMatrix w = metropolis_weights(g);
  RunOptions options;
  options.algorithm = Algorithm::Extra;
  options.alpha = 0.2;
  options.grad_tol = 1e6;  // anything counts as stationary
  RunResult result = run(problem, g, w, options);
  CHECK(result.termination == Termination::Converged);
  CHECK(result.iterations == 0);
  CHECK(result.rows.size() == 1);
}

TEST_CASE("identical options reproduce bitwise identical traces") {
  PcaData data = generate_synthetic_pca(5, 20, 6, 2, 0.8, 77);
  PcaProblem problem(2, std::move(data));
  Graph g = build_graph(GraphKind::ErdosRenyi, 5, 13, 0.7);
  MixingMatrix w = metropolis_weights(g);
  RunOptions options;
  options.algorithm = Algorithm::Rextra;
  options.alpha = 0.05;
  options.max_epochs = 60;
  options.grad_tol = 1e-30;
  options.seed = 19;
  options.consensual_init = false;

  RunResult a = run(problem, g, w, options);
  RunResult b = run(problem, g, w, options);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].k == b.rows[i].k);
    CHECK(a.rows[i].epoch == b.rows[i].epoch);
    CHECK(a.rows[i].comm_entries_cum == b.rows[i].comm_entries_cum);
    CHECK(a.rows[i].consensus_err == b.rows[i].consensus_err);
    CHECK(a.rows[i].grad_norm == b.rows[i].grad_norm);
    CHECK(a.rows[i].fval == b.rows[i].fval);
    CHECK(a.rows[i].ds == b.rows[i].ds);
  }
  CHECK(a.termination == b.termination);
  CHECK(a.comm_entries == b.comm_entries);
  CHECK(a.max_tracking_residual == b.max_tracking_residual);
}

TEST_CASE("the record cadence thins the trace but keeps the final row") {
  QuadraticProblem problem(4, 3, 2, 79);
  Graph g = build_graph(GraphKind::Ring, 4);
  MixingMatrix w = metropolis_weights(g);
  RunOptions options;
  options.algorithm = Algorithm::Extra;
  options.alpha = 0.1;
  options.max_epochs = 17;
  options.grad_tol = 1e-30;
  options.record_every = 5;
  options.consensual_init = false;
  RunResult result = run(problem, g, w, options);
  REQUIRE(result.rows.size() == 5);
  CHECK(result.rows[0].k == 0);
  CHECK(result.rows[1].k == 5);
  CHECK(result.rows[2].k == 10);
  CHECK(result.rows[3].k == 15);
  CHECK(result.rows[4].k == 17);
  CHECK(result.iterations == 17);
}

TEST_CASE("the driver rejects inconsistent option combinations") {
  QuadraticProblem problem(4, 3, 2, 81);
  Graph g = build_graph(GraphKind::Ring, 4);
  MixingMatrix w = metropolis_weights(g);
  RunOptions options;

  options.algorithm = Algorithm::Rextra;
  options.diminishing = true;
  CHECK_THROWS_AS(run(problem, g, w, options), InvalidArgument);

  options.diminishing = false;
  options.t_rounds = 2;
  CHECK_THROWS_AS(run(problem, g, w, options), InvalidArgument);

  options.t_rounds = 1;
  options.alpha = 0.0;
  CHECK_THROWS_AS(run(problem, g, w, options), InvalidArgument);

  options.alpha = 0.1;
  options.max_epochs = -1;
  CHECK_THROWS_AS(run(problem, g, w, options), InvalidArgument);

  options.max_epochs = 10;
  options.record_every = 0;
  CHECK_THROWS_AS(run(problem, g, w, options), InvalidArgument);

  options.record_every = 1;
  options.batch_size = 4;  // quadratic terms expose no sample rows
  CHECK_THROWS_AS(run(problem, g, w, options), InvalidArgument);

  options.batch_size = 0;
  Graph small = build_graph(GraphKind::Ring, 3);
  MixingMatrix small_w = metropolis_weights(small);
  CHECK_THROWS_AS(run(problem, small, small_w, options), DimensionMismatch);
}

TEST_CASE("a divergent step size terminates as a failed run") {
  QuadraticProblem problem(4, 3, 2, 83);
  Graph g = build_graph(GraphKind::Ring, 4);
  MixingMatrix w = metropolis_weights(g);
  RunOptions options;
  options.algorithm = Algorithm::Extra;
  options.alpha = 1e6;
  options.max_epochs = 500;
  options.consensual_init = false;
  RunResult result = run(problem, g, w, options);
  CHECK(result.termination == Termination::Failed);
  CHECK(!result.failure_reason.empty());
  CHECK(!result.rows.empty());
}

TEST_CASE("subsampled gradients stretch the iteration budget") {
  PcaData data = generate_synthetic_pca(4, 20, 6, 2, 0.8, 87);
  PcaProblem problem(2, std::move(data));
  Graph g = build_graph(GraphKind::Ring, 4);
  MixingMatrix w = metropolis_weights(g);
  RunOptions options;
  options.algorithm = Algorithm::Rextra;
  options.alpha = 0.02;
  options.max_epochs = 3;
  options.grad_tol = 1e-30;
  options.batch_size = 5;  // quarter epochs per iteration
  RunResult quarter = run(problem, g, w, options);
  CHECK(quarter.iterations == 12);
  CHECK(quarter.rows.back().epoch == 3);

  options.batch_size = 50;  // larger than the local row count: full gradients
  RunResult full = run(problem, g, w, options);
  CHECK(full.iterations == 3);
}

TEST_CASE("communication accounting separates the algorithm families") {
  PcaData data = generate_synthetic_pca(5, 20, 6, 2, 0.8, 91);
  PcaProblem problem(2, std::move(data));
  Graph g = build_graph(GraphKind::ErdosRenyi, 5, 17, 0.7);
  MixingMatrix w = metropolis_weights(g);
  RunOptions options;
  options.alpha = 1e-3;
  options.max_epochs = 10;
  options.grad_tol = 1e-30;

  options.algorithm = Algorithm::Rextra;
  RunResult corrected = run(problem, g, w, options);
  options.algorithm = Algorithm::Dprgd;
  RunResult descent = run(problem, g, w, options);
  options.algorithm = Algorithm::Dprgt;
  RunResult tracked = run(problem, g, w, options);

  REQUIRE(corrected.iterations == 10);
  REQUIRE(descent.iterations == 10);
  REQUIRE(tracked.iterations == 10);
  CHECK(corrected.comm_entries == descent.comm_entries);
  CHECK(tracked.comm_entries == 2 * corrected.comm_entries);
  CHECK(corrected.grad_evals == 11);  // ten steps plus the seeding evaluation
  CHECK(descent.grad_evals == 10);
  CHECK(tracked.grad_evals == 11);

  options.algorithm = Algorithm::Drgta;
  options.t_rounds = 3;
  RunResult multi = run(problem, g, w, options);
  REQUIRE(multi.iterations == 10);
  CHECK(multi.comm_entries == 3 * tracked.comm_entries);
}

TEST_CASE("exactness separates the corrected recursion from plain descent") {
  // With a fixed step the uncorrected iteration stalls at a consensus floor;
  // the corrected one drives both the gradient and the spread to zero.
  QuadraticProblem problem(5, 4, 2, 95);
  Graph g = build_graph(GraphKind::Ring, 5);
  MixingMatrix w = metropolis_weights(g);
  RunOptions options;
  options.alpha = 0.2;
  options.max_epochs = 400;
  options.grad_tol = 1e-30;
  options.consensual_init = false;

  options.algorithm = Algorithm::Extra;
  RunResult corrected = run(problem, g, w, options);
  options.algorithm = Algorithm::Drdgd;
  RunResult descent = run(problem, g, w, options);

  double corrected_floor = corrected.rows.back().consensus_err;
  double descent_floor = descent.rows.back().consensus_err;
  CHECK(corrected_floor < 1e-10);
  CHECK(descent_floor >= 10.0 * std::max(corrected_floor, 1e-30));
  CHECK(descent_floor > 1e-8);
}
