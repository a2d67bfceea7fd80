#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rextra/errors.hpp"
#include "rextra/harness.hpp"
#include "rextra/probes.hpp"

namespace {

int do_validate(const std::string& config_path) {
  rextra::ExperimentConfig cfg = rextra::load_config(config_path);
  rextra::Graph graph = rextra::build_graph(cfg.graph, cfg.n, cfg.graph_seed, cfg.er_p);
  rextra::MixingMatrix mixing = rextra::metropolis_weights(graph);
  rextra::ValidationReport report = rextra::validate_mixing(mixing);
  for (const auto& check : report.checks)
    std::printf("%-22s %-4s value = %-14.6g %s\n", check.name.c_str(),
                check.pass ? "PASS" : "FAIL", check.value, check.detail.c_str());
  rextra::AuxiliaryMatrix aux = rextra::auxiliary_matrix(mixing, cfg.theta);
  rextra::CouplingDiagnostic coupling = rextra::recursion_coupling(mixing, aux);
  std::printf("agents = %d, edges = %zu, sigma2 = %.12g, eig_min = %.12g\n", graph.n,
              graph.edges.size(), mixing.sigma2, mixing.eig_min);
  std::printf("coupling spectral radius = %.12g (norm %.12g) at theta = %g\n",
              coupling.spectral_radius, coupling.spectral_norm, cfg.theta);
  return report.all_pass() ? 0 : 1;
}

int do_probe(const std::string& which, int samples, std::uint64_t seed) {
  std::vector<rextra::ProbeResult> results;
  auto append = [&results](std::vector<rextra::ProbeResult> more) {
    results.insert(results.end(), more.begin(), more.end());
  };
  if (which == "manifold" || which == "all") append(rextra::manifold_probe_suite(samples, seed));
  if (which == "mixing" || which == "all") append(rextra::mixing_probe_suite(samples, seed));
  if (which == "lemmas" || which == "all") append(rextra::lemma_probe_suite(samples, seed));
  std::fputs(rextra::format_probe_table(results).c_str(), stdout);
  for (const auto& p : results)
    if (!p.pass) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized first-order optimization over orthonormal frames"};
  app.require_subcommand(1);

  std::string config_path;
  bool quiet = false;

  CLI::App* run_cmd = app.add_subcommand("run", "run every step size listed in a config");
  run_cmd->add_option("config", config_path, "experiment config file")->required();
  run_cmd->add_flag("--quiet", quiet, "suppress progress lines");

  std::string grid_alphas;
  CLI::App* grid_cmd =
      app.add_subcommand("grid", "run a config with a step-size grid from the command line");
  grid_cmd->add_option("config", config_path, "experiment config file")->required();
  grid_cmd->add_option("--alphas", grid_alphas, "comma-separated step sizes replacing the config's");
  grid_cmd->add_flag("--quiet", quiet, "suppress progress lines");

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check the mixing matrix a config induces");
  validate_cmd->add_option("config", config_path, "experiment config file")->required();

  std::string probe_name;
  int samples = 200;
  std::uint64_t probe_seed = 0;
  CLI::App* probe_cmd = app.add_subcommand("probe", "sample randomized inequality checks");
  probe_cmd->add_option("suite", probe_name, "manifold, mixing, lemmas or all")
      ->required()
      ->check(CLI::IsMember({"manifold", "mixing", "lemmas", "all"}));
  probe_cmd->add_option("--samples", samples, "draws per probe")->check(CLI::PositiveNumber);
  probe_cmd->add_option("--seed", probe_seed, "probe seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      rextra::run_experiment(rextra::load_config(config_path), quiet);
      return 0;
    }
    if (grid_cmd->parsed()) {
      rextra::ExperimentConfig cfg = rextra::load_config(config_path);
      if (!grid_alphas.empty()) {
        // Reuse the config parser so list syntax and positivity checks match.
        cfg.alphas = rextra::parse_config("grid = " + grid_alphas).alphas;
        cfg.has_grid = true;
      }
      rextra::run_experiment(cfg, quiet);
      return 0;
    }
    if (validate_cmd->parsed()) return do_validate(config_path);
    if (probe_cmd->parsed()) return do_probe(probe_name, samples, probe_seed);
  } catch (const rextra::ConfigError& e) {
    if (e.line > 0)
      std::fprintf(stderr, "config error (line %d): %s\n", e.line, e.what());
    else
      std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const rextra::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
