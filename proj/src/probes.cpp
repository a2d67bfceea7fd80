#include "rextra/probes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "rextra/algorithms.hpp"
#include "rextra/diagnostics.hpp"
#include "rextra/problems.hpp"
#include "rextra/rng.hpp"

namespace rextra {

namespace {

ProbeResult upper_bound_probe(std::string name, int samples, double worst, double bound) {
  return {std::move(name), samples, worst, bound, worst <= bound};
}

ProbeResult lower_bound_probe(std::string name, int samples, double worst, double bound) {
  return {std::move(name), samples, worst, bound, worst > bound};
}

}  // namespace

std::vector<ProbeResult> manifold_probe_suite(int samples, std::uint64_t seed) {
  if (samples <= 0) throw InvalidArgument("need a positive sample count");
  const int d = 10;
  const int r = 5;
  ManifoldSpec spec = ManifoldSpec::stiefel(d, r);
  std::vector<ProbeResult> out;

  {
    // ||P(x + u) - x - P_T(u)|| / ||u||^2 stays uniformly bounded inside the
    // half-tube; 10 is a generous ceiling for frames of this width, and the
    // recorded worst value is the regression baseline.
    auto engine = make_engine(seed, 0);
    std::uniform_real_distribution<double> radius(0.05, 0.5);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      Matrix x = random_point(spec, engine);
      Matrix u = gaussian_matrix(d, r, engine);
      u *= radius(engine) / u.norm();
      worst = std::max(worst, quadratic_projection_probe(spec, x, u));
    }
    out.push_back(upper_bound_probe("quadratic_projection_ratio", samples, worst, 10.0));
  }

  {
    // Projection is Lipschitz with constant R/(R - tau) on the tau-tube.
    auto engine = make_engine(seed, 1);
    const double tau = 0.25;
    std::uniform_real_distribution<double> radius(0.0, tau);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      Matrix a = random_point(spec, engine);
      Matrix b = random_point(spec, engine);
      Matrix na = gaussian_matrix(d, r, engine);
      Matrix nb = gaussian_matrix(d, r, engine);
      a += na * (0.9 * radius(engine) / na.norm());
      b += nb * (0.9 * radius(engine) / nb.norm());
      worst = std::max(worst, lipschitz_projection_probe(spec, a, b, tau));
    }
    out.push_back(upper_bound_probe("tube_lipschitz_ratio", samples, worst,
                                    1.0 / (1.0 - tau) + 1e-9));
  }

  {
    // Tangent projection is 1-Lipschitz (it is an orthogonal projection).
    auto engine = make_engine(seed, 2);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      Matrix x = random_point(spec, engine);
      Matrix u = gaussian_matrix(d, r, engine);
      worst = std::max(worst, project_to_tangent(spec, x, u).norm() / u.norm());
    }
    out.push_back(upper_bound_probe("tangent_projection_contraction", samples, worst,
                                    1.0 + 1e-12));
  }

  {
    // A tangent step of norm t leaves the manifold by at most t^2 / 2.
    auto engine = make_engine(seed, 3);
    std::uniform_real_distribution<double> radius(0.05, 0.45);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      Matrix x = random_point(spec, engine);
      Matrix u = random_tangent(spec, x, engine);
      u *= radius(engine) / u.norm();
      worst = std::max(worst, distance_to_manifold(spec, x + u) / u.squaredNorm());
    }
    out.push_back(upper_bound_probe("tangent_departure_ratio", samples, worst, 0.5));
  }

  {
    // Projected points are feasible to round-off.
    auto engine = make_engine(seed, 4);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      Matrix x = random_point(spec, engine);
      Matrix noise = gaussian_matrix(d, r, engine);
      Matrix y = x + noise * (0.4 / noise.norm());
      Matrix p = project_to_manifold(spec, y);
      worst = std::max(worst, (p.transpose() * p - Matrix::Identity(r, r)).norm());
    }
    out.push_back(upper_bound_probe("projected_feasibility", samples, worst, 1e-12));
  }

  return out;
}

namespace {

MixingMatrix random_mixing(std::mt19937_64& engine, Graph* graph_out) {
  std::uniform_int_distribution<int> size(4, 12);
  std::uniform_real_distribution<double> prob(0.3, 0.9);
  int n = size(engine);
  double p = prob(engine);
  Graph g = build_graph(GraphKind::ErdosRenyi, n, engine(), p);
  if (graph_out) *graph_out = g;
  return metropolis_weights(g);
}

}  // namespace

std::vector<ProbeResult> mixing_probe_suite(int samples, std::uint64_t seed) {
  if (samples <= 0) throw InvalidArgument("need a positive sample count");
  std::vector<ProbeResult> out;

  double row_err = 0.0;
  double asym = 0.0;
  double eig_floor = 0.0;
  double gap = 0.0;
  double contraction_slack = 0.0;
  double mean_drift = 0.0;

  auto engine = make_engine(seed, 0);
  for (int s = 0; s < samples; ++s) {
    MixingMatrix w = random_mixing(engine, nullptr);
    int n = w.n();
    row_err = std::max(
        row_err, (w.W.rowwise().sum() - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff());
    asym = std::max(asym, (w.W - w.W.transpose()).cwiseAbs().maxCoeff());
    eig_floor = std::min(eig_floor, w.eig_min);
    gap = std::max(gap, w.sigma2);

    // Deviation from the stack mean contracts by sigma2 under one mix.
    AgentStack x;
    for (int i = 0; i < n; ++i) x.blocks.push_back(gaussian_matrix(6, 2, engine));
    Matrix mean = x.mean();
    AgentStack mixed = mix_stack(x, w);
    double before = 0.0;
    double after = 0.0;
    for (int i = 0; i < n; ++i) {
      before += (x[i] - mean).squaredNorm();
      after += (mixed[i] - mean).squaredNorm();
    }
    contraction_slack =
        std::max(contraction_slack, std::sqrt(after) - w.sigma2 * std::sqrt(before));

    mean_drift = std::max(mean_drift, (mixed.mean() - mean).norm());
  }

  out.push_back(upper_bound_probe("row_sum_error", samples, row_err, 1e-12));
  out.push_back(upper_bound_probe("symmetry_error", samples, asym, 1e-12));
  out.push_back(lower_bound_probe("eigenvalue_floor", samples, eig_floor, -1.0));
  out.push_back(upper_bound_probe("spectral_gap", samples, gap, 1.0 - 1e-10));
  out.push_back(upper_bound_probe("consensus_contraction_slack", samples, contraction_slack,
                                  1e-10));
  out.push_back(upper_bound_probe("mean_preservation", samples, mean_drift, 1e-12));
  return out;
}

std::vector<ProbeResult> lemma_probe_suite(int samples, std::uint64_t seed) {
  if (samples <= 0) throw InvalidArgument("need a positive sample count");
  std::vector<ProbeResult> out;
  const int d = 10;
  const int r = 5;
  ManifoldSpec spec = ManifoldSpec::stiefel(d, r);

  {
    // Near-consensus stacks: blocks projected back from 0.1-perturbations of a
    // common frame. Three bounds share the sampling.
    auto engine = make_engine(seed, 0);
    double worst_sum = 0.0;   // ||sum_i grad phi_i|| - 4 sqrt(n) ||x - xbar||^2
    double worst_mean = 0.0;  // ||xbar - xhat|| - 2 sqrt(r) ||x - xbar||^2 / n
    double worst_grad = 0.0;  // ||grad phi(x)|| - 2 ||x - xbar||
    for (int s = 0; s < samples; ++s) {
      Graph g = build_graph(GraphKind::ErdosRenyi, 6, engine(), 0.7);
      MixingMatrix w = metropolis_weights(g);
      Matrix base = random_point(spec, engine);
      AgentStack x;
      for (int i = 0; i < g.n; ++i) {
        Matrix noise = gaussian_matrix(d, r, engine);
        x.blocks.push_back(project_to_manifold(spec, base + 0.1 * noise / noise.norm()));
      }

      auto [lhs, rhs] = consensus_gradient_bound_probe(x, w, spec);
      worst_sum = std::max(worst_sum, lhs - rhs);

      Matrix xhat = x.mean();
      Matrix xbar = induced_mean(x, spec);
      double spread_sq = 0.0;
      for (int i = 0; i < g.n; ++i) spread_sq += (x[i] - xbar).squaredNorm();
      worst_mean = std::max(worst_mean, (xbar - xhat).norm() -
                                            2.0 * std::sqrt(static_cast<double>(r)) * spread_sq /
                                                static_cast<double>(g.n));

      auto [phi, grad_phi] = consensus_potential(x, w);
      (void)phi;
      worst_grad =
          std::max(worst_grad, std::sqrt(grad_phi.squared_norm()) - 2.0 * std::sqrt(spread_sq));
    }
    out.push_back(upper_bound_probe("consensus_gradient_bound", samples, worst_sum, 1e-9));
    out.push_back(upper_bound_probe("induced_mean_quadratic_bound", samples, worst_mean, 1e-12));
    out.push_back(upper_bound_probe("potential_gradient_bound", samples, worst_grad, 1e-12));
  }

  {
    // The corrected recursion keeps mean(s) = -alpha mean(grad) exactly.
    auto engine = make_engine(seed, 1);
    double worst = 0.0;
    int trajectories = std::max(1, samples / 10);
    for (int s = 0; s < trajectories; ++s) {
      Graph g = build_graph(GraphKind::ErdosRenyi, 6, engine(), 0.7);
      MixingMatrix w = metropolis_weights(g);
      QuadraticProblem problem(g.n, 5, 2, engine());
      ManifoldSpec espec = problem.manifold();
      GradientOracle oracle = [&problem, espec](int i, const Matrix& xi) {
        return riemannian_gradient(espec, xi, problem.local_euclidean_gradient(i, xi));
      };
      AgentStack x0 = initial_stack(espec, g.n, engine(), false);
      RextraState state = rextra_init(x0, oracle, espec, 0.1, 0.5);
      for (int k = 0; k < 20; ++k) {
        rextra_step(state, w, oracle, espec, g);
        worst = std::max(worst, tracking_residual(state));
      }
    }
    out.push_back(upper_bound_probe("tracking_identity", trajectories, worst, 1e-10));
  }

  {
    // A small projected gradient step on a smooth objective decreases it by
    // at least a quarter of the first-order prediction.
    auto engine = make_engine(seed, 2);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      Matrix root = gaussian_matrix(d, d, engine);
      Matrix G = root.transpose() * root;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
      double L = eig.eigenvalues()(d - 1);
      auto value = [&G](const Matrix& p) { return -0.5 * (G * p).cwiseProduct(p).sum(); };
      Matrix x = random_point(spec, engine);
      Matrix grad = riemannian_gradient(spec, x, -(G * x));
      double alpha = 0.05 / L;
      Matrix x_next = project_to_manifold(spec, x - alpha * grad);
      double slack = value(x_next) - value(x) + 0.25 * alpha * grad.squaredNorm();
      worst = std::max(worst, slack);
    }
    out.push_back(upper_bound_probe("projected_descent", samples, worst, 0.0));
  }

  {
    // The coupled consensus-correction recursion is a strict contraction in
    // the spectral radius sense at theta = 1/2.
    auto engine = make_engine(seed, 3);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      MixingMatrix w = random_mixing(engine, nullptr);
      CouplingDiagnostic diag = recursion_coupling(w, auxiliary_matrix(w, 0.5));
      worst = std::max(worst, diag.spectral_radius);
    }
    out.push_back(upper_bound_probe("coupled_spectral_radius", samples, worst, 1.0 - 1e-10));
  }

  return out;
}

std::string format_probe_table(const std::vector<ProbeResult>& results) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-34s %8s %14s %14s %6s\n", "probe", "samples", "worst",
                "bound", "pass");
  os << line;
  for (const ProbeResult& p : results) {
    std::snprintf(line, sizeof line, "%-34s %8d %14.6g %14.6g %6s\n", p.name.c_str(), p.samples,
                  p.worst, p.bound, p.pass ? "PASS" : "FAIL");
    os << line;
  }
  return os.str();
}

}  // namespace rextra
