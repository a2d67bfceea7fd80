#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rextra/diagnostics.hpp"
#include "rextra/manifold.hpp"
#include "rextra/problems.hpp"
#include "rextra/topology.hpp"
#include "rextra/types.hpp"

namespace rextra {

enum class Algorithm { Rextra, Extra, Drdgd, Dprgd, Drgta, Dprgt };

Algorithm algorithm_from_name(const std::string& name);
std::string algorithm_name(Algorithm a);

/// Returns the Riemannian gradient of agent i's local term at x. The stepper
/// does not care how it is produced (full data, minibatch, test stub).
using GradientOracle = std::function<Matrix(int, const Matrix&)>;

/// One neighbor-averaging pass: out_i = sum_j W_ij x_j. Sums over the closed
/// neighborhood in ascending agent order, first term assigned then accumulated,
/// so the result is bitwise reproducible across graph representations.
AgentStack mix_stack(const AgentStack& x, const MixingMatrix& w);

/// Feasible start: every agent at the same seeded random manifold point when
/// consensual, independent points otherwise.
AgentStack initial_stack(const ManifoldSpec& spec, int n, std::uint64_t seed, bool consensual);

/// ---- Corrected single-round recursion ---------------------------------------
///
/// x_{k+1,i} = P( sum_j W_ij x_{k,j} + s_{k,i} )
/// s_{k+1,i} = theta (sum_j W_ij x_{k,j} - x_{k,i}) + s_{k,i}
///             - alpha (g_i(x_{k+1}) - g_i(x_k))
/// with s_0 = -alpha g(x_0). The correction term theta (W - I) x is the
/// difference (W - V) x for V = theta I + (1 - theta) W, so each iteration
/// costs one communication round and one gradient evaluation per agent.
/// On the Euclidean factor P is the identity and the recursion reduces to the
/// classic exact first-order corrected scheme.

struct RextraState {
  AgentStack x;
  AgentStack s;
  AgentStack g_prev;  // gradients at the current x, reused next step
  int k = 0;
  double alpha = 0.0;
  double theta = 0.5;
};

/// Throws InfeasibleStart when a block is further than 1e-10 from the manifold.
RextraState rextra_init(const AgentStack& x0, const GradientOracle& grad,
                        const ManifoldSpec& spec, double alpha, double theta = 0.5);

StepReport rextra_step(RextraState& state, const MixingMatrix& w, const GradientOracle& grad,
                       const ManifoldSpec& spec, const Graph& graph);

/// Residual of the tracking identity mean(s) + alpha * mean(g_prev) = 0,
/// measured in Frobenius norm. Exactly preserved by the update in exact
/// arithmetic; the harness records the running maximum.
double tracking_residual(const RextraState& state);

/// ---- Projected gradient with diminishing steps -------------------------------
///
/// x_{k+1,i} = P( sum_j W_ij^t x_{k,j} - alpha_k g_i(x_{k,i}) ). Multiple
/// consensus rounds per iteration are folded into W^t. Riemannian (projected)
/// and Euclidean variants differ only through the oracle and P.

StepReport drdgd_step(AgentStack& x, const MixingMatrix& w, const GradientOracle& grad,
                      const ManifoldSpec& spec, const Graph& graph, double alpha_k, int t_rounds);

/// ---- Gradient tracking ---------------------------------------------------
///
/// x_{k+1,i} = P( sum_j W_ij^t x_{k,j} - alpha P_tan(y_{k,i}) )
/// y_{k+1,i} = sum_j W_ij^t y_{k,j} + g_i(x_{k+1,i}) - g_i(x_{k,i})
/// with y_0 = g(x_0). Two quantities move per round.

struct TrackingState {
  AgentStack x;
  AgentStack y;
  AgentStack g_prev;
  int k = 0;
  double alpha = 0.0;
};

TrackingState tracking_init(const AgentStack& x0, const GradientOracle& grad,
                            const ManifoldSpec& spec, double alpha);

StepReport gradient_tracking_step(TrackingState& state, const MixingMatrix& w,
                                  const GradientOracle& grad, const ManifoldSpec& spec,
                                  const Graph& graph, int t_rounds);

/// ---- Driver ----------------------------------------------------------------

enum class Termination { Converged, MaxEpochs, Failed };

struct RunOptions {
  Algorithm algorithm = Algorithm::Rextra;
  double alpha = 1e-3;
  bool diminishing = false;  // alpha_k = alpha / sqrt(k + 1), DRDGD/DPRGD only
  double theta = 0.5;
  int t_rounds = 1;  // consensus rounds per iteration for DGD/tracking families
  int max_epochs = 2000;
  double grad_tol = 1e-8;
  std::uint64_t seed = 0;
  bool consensual_init = true;
  int batch_size = 0;   // 0 = full local gradients
  int record_every = 1;  // metrics cadence; termination is checked at recorded iterations
};

struct RunResult {
  std::vector<MetricsRow> rows;
  Termination termination = Termination::MaxEpochs;
  std::string failure_reason;
  double max_tracking_residual = 0.0;  // corrected recursion only
  int iterations = 0;
  std::int64_t comm_entries = 0;
  int grad_evals = 0;
};

/// Runs `options.algorithm` on `problem` over `w` until the Riemannian
/// gradient norm at the induced mean drops below grad_tol or the epoch budget
/// is exhausted. Non-finite iterates terminate with Termination::Failed and
/// the offending iteration in failure_reason.
RunResult run(const Problem& problem, const Graph& graph, const MixingMatrix& w,
              const RunOptions& options);

}  // namespace rextra
