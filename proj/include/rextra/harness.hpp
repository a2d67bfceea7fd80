#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rextra/algorithms.hpp"
#include "rextra/problems.hpp"
#include "rextra/topology.hpp"

namespace rextra {

enum class ProblemKind { PcaSynthetic, LrmcSynthetic, PcaFile, Quadratic };

std::string problem_kind_name(ProblemKind kind);

/// Experiment description parsed from line-oriented `key = value` text with
/// optional [problem], [graph], [algorithm], [run] section headers (the
/// sections organize the file; keys are unique across the whole config).
/// Unknown keys, type errors, and inconsistent combinations are reported with
/// the line number; every field has a default so a config names only what it
/// changes.
struct ExperimentConfig {
  std::string name = "experiment";

  // problem
  ProblemKind problem = ProblemKind::PcaSynthetic;
  int n = 8;
  int d = 10;
  int r = 5;
  int m_per = 1000;    // pca rows per agent
  double xi = 0.8;     // pca spectral decay
  double data_scale = 1.0;
  int T = 1000;        // lrmc total columns
  double mu = -1.0;    // lrmc observation density, <0 = degrees-of-freedom default
  double ridge = 1e-8;
  std::string data_file;  // pca_file input path
  std::string data_format = "csv";
  std::uint64_t data_seed = 7;

  // graph: "er(p)", "ring", or "complete"
  GraphKind graph = GraphKind::ErdosRenyi;
  double er_p = 0.6;
  std::uint64_t graph_seed = 1;

  // algorithm + run
  Algorithm algorithm = Algorithm::Rextra;
  std::vector<double> alphas = {1e-3};  // single `alpha =` or a `grid =` list
  bool has_grid = false;
  bool diminishing = false;
  double theta = 0.5;
  int t_rounds = 1;
  int max_epochs = 2000;
  double grad_tol = 1e-8;
  std::uint64_t seed = 0;
  bool consensual_init = true;
  int batch_size = 0;
  int record_every = 1;
  std::string output_dir = "runs";  // excluded from the fingerprint

  /// Deterministic `key = value` rendering of every field that affects the
  /// computation, sorted by key; two configs with equal canonical text are
  /// the same experiment. The output destination is deliberately left out.
  std::string canonical_text() const;

  /// FNV-1a over the canonical text, rendered as 16 hex digits. Output files
  /// carry it so every artifact is self-identifying.
  std::string fingerprint() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Problem + graph + mixing matrix materialized from a config.
struct Experiment {
  std::unique_ptr<Problem> problem;
  Graph graph;
  MixingMatrix mixing;
};

Experiment build_experiment(const ExperimentConfig& config);

/// One grid cell: the step size it ran at and what came back.
struct RunSummary {
  double alpha = 0.0;
  Termination termination = Termination::MaxEpochs;
  int iterations = 0;
  int epochs = 0;
  std::int64_t comm_entries = 0;
  int grad_evals = 0;
  double final_consensus_err = 0.0;
  double final_grad_norm = 0.0;
  double final_fval = 0.0;
  double final_ds = -1.0;
  double max_tracking_residual = 0.0;
  double wall_seconds = 0.0;
};

struct GridResult {
  std::vector<RunSummary> cells;
  std::vector<RunResult> runs;  // aligned with cells
  int best = -1;                // index of the preferred cell, -1 when every run failed
};

/// Runs every step size in config.alphas against one shared experiment.
/// Best cell: smallest final gradient norm (failed runs rank last), ties
/// broken by fewer epochs to tolerance, then by the smaller step size.
GridResult grid_search(const Experiment& experiment, const ExperimentConfig& config);

/// Directory the experiment writes into: $REXTRA_OUTPUT_DIR when set, else
/// the config's output_dir. Created on demand.
std::string resolve_output_dir(const ExperimentConfig& config);

/// Full pipeline: build, run every step size, then write into the output
/// directory: one <run-fingerprint>.csv trace per step size, the canonical
/// config as <fingerprint>.config.txt, per-cell lines in <fingerprint>.grid.csv,
/// and one experiment line appended to summary.csv. Returns the grid result;
/// `quiet` suppresses the progress lines.
GridResult run_experiment(const ExperimentConfig& config, bool quiet = false);

/// Per-cell (one step size) CSV row used by <fingerprint>.grid.csv.
std::string grid_csv_header();
std::string grid_csv_row(const RunSummary& s);

/// Experiment-level line appended to summary.csv for the best cell.
std::string summary_csv_header();
std::string summary_csv_row(const ExperimentConfig& config, const RunSummary& best);

}  // namespace rextra
