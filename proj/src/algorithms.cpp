#include "rextra/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rextra/errors.hpp"
#include "rextra/rng.hpp"

namespace rextra {

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "rextra") return Algorithm::Rextra;
  if (name == "extra") return Algorithm::Extra;
  if (name == "drdgd") return Algorithm::Drdgd;
  if (name == "dprgd") return Algorithm::Dprgd;
  if (name == "drgta") return Algorithm::Drgta;
  if (name == "dprgt") return Algorithm::Dprgt;
  throw InvalidArgument("unknown algorithm \"" + name +
                        "\" (want rextra, extra, drdgd, dprgd, drgta, dprgt)");
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Rextra: return "rextra";
    case Algorithm::Extra: return "extra";
    case Algorithm::Drdgd: return "drdgd";
    case Algorithm::Dprgd: return "dprgd";
    case Algorithm::Drgta: return "drgta";
    case Algorithm::Dprgt: return "dprgt";
  }
  throw InvalidArgument("unhandled algorithm value");
}

AgentStack mix_stack(const AgentStack& x, const MixingMatrix& w) {
  int n = x.size();
  if (n != w.n())
    throw DimensionMismatch("stack has " + std::to_string(n) + " blocks, mixing matrix has " +
                            std::to_string(w.n()));
  AgentStack out;
  out.blocks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Ascending-j accumulation, first term assigned: the floating-point sum
    // order is fixed by agent index alone, so sparse and dense layouts of the
    // same weights produce bitwise identical mixes.
    Matrix acc;
    bool assigned = false;
    for (int j = 0; j < n; ++j) {
      double wij = w.W(i, j);
      if (wij == 0.0) continue;
      if (!assigned) {
        acc = wij * x[j];
        assigned = true;
      } else {
        acc += wij * x[j];
      }
    }
    if (!assigned) acc = Matrix::Zero(x[i].rows(), x[i].cols());
    out.blocks.push_back(std::move(acc));
  }
  return out;
}

AgentStack initial_stack(const ManifoldSpec& spec, int n, std::uint64_t seed, bool consensual) {
  if (n <= 0) throw InvalidArgument("need a positive agent count");
  if (consensual) {
    auto engine = make_engine(seed, 0);
    return AgentStack::broadcast(random_point(spec, engine), n);
  }
  AgentStack x;
  x.blocks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto engine = make_engine(seed, static_cast<std::uint64_t>(i));
    x.blocks.push_back(random_point(spec, engine));
  }
  return x;
}

namespace {

AgentStack evaluate_gradients(const AgentStack& x, const GradientOracle& grad) {
  AgentStack g;
  g.blocks.reserve(x.blocks.size());
  for (int i = 0; i < x.size(); ++i) g.blocks.push_back(grad(i, x[i]));
  return g;
}

void require_feasible(const AgentStack& x, const ManifoldSpec& spec) {
  for (int i = 0; i < x.size(); ++i) {
    if (!x[i].allFinite())
      throw InfeasibleStart("initial block " + std::to_string(i) + " has non-finite entries");
    if (spec.kind != ManifoldKind::Stiefel) continue;
    try {
      if (distance_to_manifold(spec, x[i]) > 1e-10)
        throw InfeasibleStart("initial block " + std::to_string(i) +
                              " is further than 1e-10 from the manifold");
    } catch (const SingularProjection&) {
      // Rank-deficient blocks have no nearest-point projection at all.
      throw InfeasibleStart("initial block " + std::to_string(i) + " is rank deficient");
    }
  }
}

void require_finite(const AgentStack& x, int k) {
  if (!x.all_finite())
    throw NonFiniteIterate("non-finite iterate at iteration " + std::to_string(k));
}

AgentStack repeated_mix(const AgentStack& x, const MixingMatrix& w, int t_rounds) {
  AgentStack out = mix_stack(x, w);
  for (int t = 1; t < t_rounds; ++t) out = mix_stack(out, w);
  return out;
}

// Every directed edge carries `quantities` dense d x r matrices per round.
std::int64_t round_entries(const Graph& graph, const ManifoldSpec& spec, int rounds,
                           int quantities) {
  std::int64_t directed_edges = 2 * static_cast<std::int64_t>(graph.edges.size());
  std::int64_t per_message = static_cast<std::int64_t>(spec.rows) * spec.cols;
  return directed_edges * per_message * rounds * quantities;
}

}  // namespace

RextraState rextra_init(const AgentStack& x0, const GradientOracle& grad,
                        const ManifoldSpec& spec, double alpha, double theta) {
  if (!(alpha > 0.0)) throw InvalidArgument("step size must be positive");
  if (!(theta > 0.0 && theta <= 0.5))
    throw InvalidArgument("theta must lie in (0, 1/2], got " + std::to_string(theta));
  require_feasible(x0, spec);
  RextraState state;
  state.x = x0;
  state.g_prev = evaluate_gradients(x0, grad);
  state.s = AgentStack::zeros_like(x0);
  for (int i = 0; i < x0.size(); ++i) state.s[i] = -alpha * state.g_prev[i];
  state.k = 0;
  state.alpha = alpha;
  state.theta = theta;
  return state;
}

StepReport rextra_step(RextraState& state, const MixingMatrix& w, const GradientOracle& grad,
                       const ManifoldSpec& spec, const Graph& graph) {
  int n = state.x.size();
  AgentStack mixed = mix_stack(state.x, w);

  AgentStack x_next;
  x_next.blocks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    x_next.blocks.push_back(project_to_manifold(spec, mixed[i] + state.s[i]));
  require_finite(x_next, state.k + 1);

  AgentStack g_next = evaluate_gradients(x_next, grad);

  // theta (m - x) is (W - V) x for V = theta I + (1 - theta) W, so the
  // correction reuses the mix already paid for above: one round per step.
  for (int i = 0; i < n; ++i) {
    state.s[i] += state.theta * (mixed[i] - state.x[i]) -
                  state.alpha * (g_next[i] - state.g_prev[i]);
  }
  require_finite(state.s, state.k + 1);

  state.x = std::move(x_next);
  state.g_prev = std::move(g_next);
  ++state.k;

  StepReport report;
  report.comm_rounds = 1;
  report.grad_evals = 1;
  report.comm_entries = round_entries(graph, spec, 1, 1);
  return report;
}

double tracking_residual(const RextraState& state) {
  return (state.s.mean() + state.alpha * state.g_prev.mean()).norm();
}

StepReport drdgd_step(AgentStack& x, const MixingMatrix& w, const GradientOracle& grad,
                      const ManifoldSpec& spec, const Graph& graph, double alpha_k, int t_rounds) {
  if (t_rounds < 1) throw InvalidArgument("need at least one consensus round");
  int n = x.size();
  AgentStack mixed = repeated_mix(x, w, t_rounds);
  AgentStack x_next;
  x_next.blocks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Matrix g = grad(i, x[i]);
    x_next.blocks.push_back(project_to_manifold(spec, mixed[i] - alpha_k * g));
  }
  require_finite(x_next, 0);
  x = std::move(x_next);

  StepReport report;
  report.comm_rounds = t_rounds;
  report.grad_evals = 1;
  report.comm_entries = round_entries(graph, spec, t_rounds, 1);
  return report;
}

TrackingState tracking_init(const AgentStack& x0, const GradientOracle& grad,
                            const ManifoldSpec& spec, double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("step size must be positive");
  require_feasible(x0, spec);
  TrackingState state;
  state.x = x0;
  state.g_prev = evaluate_gradients(x0, grad);
  state.y = state.g_prev;
  state.k = 0;
  state.alpha = alpha;
  return state;
}

StepReport gradient_tracking_step(TrackingState& state, const MixingMatrix& w,
                                  const GradientOracle& grad, const ManifoldSpec& spec,
                                  const Graph& graph, int t_rounds) {
  if (t_rounds < 1) throw InvalidArgument("need at least one consensus round");
  int n = state.x.size();
  AgentStack mixed_x = repeated_mix(state.x, w, t_rounds);

  AgentStack x_next;
  x_next.blocks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Matrix dir = project_to_tangent(spec, state.x[i], state.y[i]);
    x_next.blocks.push_back(project_to_manifold(spec, mixed_x[i] - state.alpha * dir));
  }
  require_finite(x_next, state.k + 1);

  AgentStack g_next = evaluate_gradients(x_next, grad);
  AgentStack mixed_y = repeated_mix(state.y, w, t_rounds);
  for (int i = 0; i < n; ++i) state.y[i] = mixed_y[i] + g_next[i] - state.g_prev[i];
  require_finite(state.y, state.k + 1);

  state.x = std::move(x_next);
  state.g_prev = std::move(g_next);
  ++state.k;

  StepReport report;
  report.comm_rounds = t_rounds;
  report.grad_evals = 1;
  // Both the iterate and the tracker travel every round.
  report.comm_entries = round_entries(graph, spec, t_rounds, 2);
  return report;
}

namespace {

GradientOracle make_oracle(const Problem& problem, const RunOptions& options,
                           double* epoch_per_iter) {
  const ManifoldSpec& spec = problem.manifold();
  *epoch_per_iter = 1.0;
  if (options.batch_size < 0) throw InvalidArgument("batch size must be nonnegative");
  if (options.batch_size == 0) {
    return [&problem, spec](int i, const Matrix& x) {
      return riemannian_gradient(spec, x, problem.local_euclidean_gradient(i, x));
    };
  }
  int m0 = problem.local_sample_count(0);
  if (m0 <= 0) throw InvalidArgument("this objective does not support subsampled gradients");
  for (int i = 1; i < problem.agents(); ++i)
    if (problem.local_sample_count(i) != m0)
      throw InvalidArgument("subsampling expects equal local sample counts");
  if (options.batch_size >= m0) {
    return [&problem, spec](int i, const Matrix& x) {
      return riemannian_gradient(spec, x, problem.local_euclidean_gradient(i, x));
    };
  }
  *epoch_per_iter = static_cast<double>(options.batch_size) / m0;

  struct SamplerState {
    std::vector<std::mt19937_64> engines;
    std::vector<int> population;
  };
  auto shared = std::make_shared<SamplerState>();
  shared->engines.reserve(static_cast<std::size_t>(problem.agents()));
  for (int i = 0; i < problem.agents(); ++i)
    shared->engines.push_back(make_engine(options.seed, 1000 + static_cast<std::uint64_t>(i)));
  shared->population.resize(static_cast<std::size_t>(m0));
  std::iota(shared->population.begin(), shared->population.end(), 0);

  int batch = options.batch_size;
  return [&problem, spec, shared, batch](int i, const Matrix& x) {
    std::vector<int> rows;
    rows.reserve(static_cast<std::size_t>(batch));
    std::sample(shared->population.begin(), shared->population.end(), std::back_inserter(rows),
                batch, shared->engines[static_cast<std::size_t>(i)]);
    return riemannian_gradient(spec, x, problem.local_euclidean_gradient_sampled(i, x, rows));
  };
}

}  // namespace

RunResult run(const Problem& problem, const Graph& graph, const MixingMatrix& w,
              const RunOptions& options) {
  const ManifoldSpec& spec = problem.manifold();
  int n = problem.agents();
  if (graph.n != n || w.n() != n)
    throw DimensionMismatch("problem, graph and mixing matrix disagree on the agent count");
  if (!(options.alpha > 0.0)) throw InvalidArgument("step size must be positive");
  if (options.max_epochs < 0) throw InvalidArgument("epoch budget must be nonnegative");
  if (options.record_every < 1) throw InvalidArgument("record cadence must be positive");
  if (options.t_rounds < 1) throw InvalidArgument("need at least one consensus round");
  bool is_dgd = options.algorithm == Algorithm::Drdgd || options.algorithm == Algorithm::Dprgd;
  bool is_tracking = options.algorithm == Algorithm::Drgta || options.algorithm == Algorithm::Dprgt;
  bool is_corrected = options.algorithm == Algorithm::Rextra || options.algorithm == Algorithm::Extra;
  if (options.diminishing && !is_dgd)
    throw InvalidArgument("diminishing steps apply to the uncorrected descent methods only");
  if (!is_dgd && !is_tracking && options.t_rounds != 1)
    throw InvalidArgument("the corrected recursion always uses one consensus round per step");

  double epoch_per_iter = 1.0;
  GradientOracle oracle = make_oracle(problem, options, &epoch_per_iter);

  AgentStack x0 = initial_stack(spec, n, options.seed, options.consensual_init);

  RunResult out;
  std::int64_t comm = 0;
  int grad_evals = 0;

  // The budget counts passes over the local data, so subsampled runs get
  // proportionally more iterations.
  int iter_budget = static_cast<int>(std::llround(std::ceil(options.max_epochs / epoch_per_iter)));

  RextraState corrected;
  TrackingState tracking;
  AgentStack plain;

  const AgentStack* current = nullptr;
  try {
    if (is_corrected) {
      corrected = rextra_init(x0, oracle, spec, options.alpha, options.theta);
      out.max_tracking_residual = tracking_residual(corrected);
      grad_evals += 1;
      current = &corrected.x;
    } else if (is_tracking) {
      tracking = tracking_init(x0, oracle, spec, options.alpha);
      grad_evals += 1;
      current = &tracking.x;
    } else {
      require_feasible(x0, spec);
      plain = x0;
      current = &plain;
    }
  } catch (const InfeasibleStart&) {
    throw;  // a bad start is a caller error, not a run outcome
  }

  auto record_row = [&](int k) {
    auto [consensus, grad_norm] = stationarity(*current, problem);
    Matrix xbar = induced_mean(*current, spec);
    MetricsRow row;
    row.k = k;
    row.epoch = static_cast<int>(std::floor(k * epoch_per_iter + 1e-9));
    row.comm_entries_cum = comm;
    row.consensus_err = consensus;
    row.grad_norm = grad_norm;
    row.fval = problem.global_objective(xbar);
    const Matrix* truth = problem.ground_truth();
    row.ds = truth ? subspace_distance(xbar, *truth) : -1.0;
    out.rows.push_back(row);
    return grad_norm;
  };

  int k = 0;
  try {
    if (record_row(0) <= options.grad_tol) {
      out.termination = Termination::Converged;
      out.iterations = 0;
      out.comm_entries = comm;
      out.grad_evals = grad_evals;
      return out;
    }
    while (k < iter_budget) {
      StepReport report;
      if (is_corrected) {
        report = rextra_step(corrected, w, oracle, spec, graph);
        out.max_tracking_residual =
            std::max(out.max_tracking_residual, tracking_residual(corrected));
      } else if (is_tracking) {
        report = gradient_tracking_step(tracking, w, oracle, spec, graph, options.t_rounds);
      } else {
        double alpha_k = options.diminishing
                             ? options.alpha / std::sqrt(static_cast<double>(k + 1))
                             : options.alpha;
        report = drdgd_step(plain, w, oracle, spec, graph, alpha_k, options.t_rounds);
      }
      ++k;
      comm += report.comm_entries;
      grad_evals += report.grad_evals;
      if (k % options.record_every == 0 || k == iter_budget) {
        double grad_norm = record_row(k);
        if (grad_norm <= options.grad_tol) {
          out.termination = Termination::Converged;
          break;
        }
      }
    }
  } catch (const SingularProjection& e) {
    out.termination = Termination::Failed;
    out.failure_reason = "iteration " + std::to_string(k + 1) + ": " + e.what();
  } catch (const NonFiniteIterate& e) {
    out.termination = Termination::Failed;
    out.failure_reason = e.what();
  }

  out.iterations = k;
  out.comm_entries = comm;
  out.grad_evals = grad_evals;
  return out;
}

}  // namespace rextra
