#include "rextra/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rextra/diagnostics.hpp"
#include "rextra/errors.hpp"

namespace rextra {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& value, int line, const std::string& key) {
  const char* begin = value.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ConfigError(ConfigError::Kind::TypeError, line, key,
                      key + ": expected a number, got \"" + value + "\"");
  return v;
}

long long parse_int(const std::string& value, int line, const std::string& key) {
  const char* begin = value.c_str();
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ConfigError(ConfigError::Kind::TypeError, line, key,
                      key + ": expected an integer, got \"" + value + "\"");
  return v;
}

std::uint64_t parse_uint(const std::string& value, int line, const std::string& key) {
  const char* begin = value.c_str();
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE || value.find('-') != std::string::npos)
    throw ConfigError(ConfigError::Kind::TypeError, line, key,
                      key + ": expected a nonnegative integer, got \"" + value + "\"");
  return v;
}

bool parse_bool(const std::string& value, int line, const std::string& key) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError(ConfigError::Kind::TypeError, line, key,
                    key + ": expected true or false, got \"" + value + "\"");
}

std::vector<double> parse_double_list(const std::string& value, int line, const std::string& key) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t comma = value.find(',', pos);
    std::string field =
        trim(value.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (field.empty())
      throw ConfigError(ConfigError::Kind::TypeError, line, key, key + ": empty list entry");
    out.push_back(parse_double(field, line, key));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty())
    throw ConfigError(ConfigError::Kind::TypeError, line, key, key + ": empty list");
  return out;
}

ProblemKind problem_from_name(const std::string& name, int line) {
  if (name == "pca_synthetic") return ProblemKind::PcaSynthetic;
  if (name == "lrmc_synthetic") return ProblemKind::LrmcSynthetic;
  if (name == "pca_file") return ProblemKind::PcaFile;
  if (name == "quadratic") return ProblemKind::Quadratic;
  throw ConfigError(ConfigError::Kind::BadValue, line, "problem",
                    "problem: want pca_synthetic, lrmc_synthetic, pca_file or quadratic, got \"" +
                        name + "\"");
}

std::string render_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string graph_value(const ExperimentConfig& cfg) {
  switch (cfg.graph) {
    case GraphKind::ErdosRenyi: return "er(" + render_double(cfg.er_p) + ")";
    case GraphKind::Ring: return "ring";
    case GraphKind::Complete: return "complete";
    case GraphKind::File: break;
  }
  throw InvalidArgument("config graphs are er(p), ring or complete");
}

void parse_graph_value(const std::string& value, int line, ExperimentConfig* cfg) {
  if (value == "ring") {
    cfg->graph = GraphKind::Ring;
    return;
  }
  if (value == "complete") {
    cfg->graph = GraphKind::Complete;
    return;
  }
  if (value.rfind("er(", 0) == 0 && value.back() == ')') {
    cfg->graph = GraphKind::ErdosRenyi;
    cfg->er_p = parse_double(trim(value.substr(3, value.size() - 4)), line, "graph");
    return;
  }
  throw ConfigError(ConfigError::Kind::BadValue, line, "graph",
                    "graph: want er(p), ring or complete, got \"" + value + "\"");
}

void check_range(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(ConfigError::Kind::BadValue, 0, key, key + ": " + message);
}

}  // namespace

std::string problem_kind_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::PcaSynthetic: return "pca_synthetic";
    case ProblemKind::LrmcSynthetic: return "lrmc_synthetic";
    case ProblemKind::PcaFile: return "pca_file";
    case ProblemKind::Quadratic: return "quadratic";
  }
  throw InvalidArgument("unhandled problem kind");
}

std::string ExperimentConfig::canonical_text() const {
  std::map<std::string, std::string> kv;
  kv["name"] = name;
  kv["problem"] = problem_kind_name(problem);
  kv["n"] = std::to_string(n);
  kv["d"] = std::to_string(d);
  kv["r"] = std::to_string(r);
  kv["m_per"] = std::to_string(m_per);
  kv["xi"] = render_double(xi);
  kv["data_scale"] = render_double(data_scale);
  kv["T"] = std::to_string(T);
  kv["mu"] = render_double(mu);
  kv["ridge"] = render_double(ridge);
  kv["data_file"] = data_file;
  kv["data_format"] = data_format;
  kv["data_seed"] = std::to_string(data_seed);
  kv["graph"] = graph_value(*this);
  kv["graph_seed"] = std::to_string(graph_seed);
  kv["algorithm"] = algorithm_name(algorithm);
  std::string alpha_list;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (i) alpha_list += ",";
    alpha_list += render_double(alphas[i]);
  }
  kv[has_grid ? "grid" : "alpha"] = alpha_list;
  kv["diminishing"] = diminishing ? "true" : "false";
  kv["theta"] = render_double(theta);
  kv["t_rounds"] = std::to_string(t_rounds);
  kv["max_epochs"] = std::to_string(max_epochs);
  kv["grad_tol"] = render_double(grad_tol);
  kv["seed"] = std::to_string(seed);
  kv["consensual_init"] = consensual_init ? "true" : "false";
  kv["batch_size"] = std::to_string(batch_size);
  kv["record_every"] = std::to_string(record_every);

  std::string out;
  for (const auto& [key, value] : kv) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

std::string ExperimentConfig::fingerprint() const {
  std::string text = canonical_text();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool saw_alpha = false;
  bool saw_grid = false;
  int alpha_line = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(ConfigError::Kind::TypeError, line_no, "",
                          "unterminated section header \"" + line + "\"");
      std::string section = trim(line.substr(1, line.size() - 2));
      if (section != "problem" && section != "graph" && section != "algorithm" &&
          section != "run")
        throw ConfigError(ConfigError::Kind::UnknownKey, line_no, section,
                          "unknown section [" + section +
                              "] (want [problem], [graph], [algorithm] or [run])");
      continue;  // headers organize the file; keys are global
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(ConfigError::Kind::TypeError, line_no, "",
                        "expected \"key = value\", got \"" + line + "\"");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(ConfigError::Kind::TypeError, line_no, "", "missing key before '='");
    if (!seen.insert(key).second)
      throw ConfigError(ConfigError::Kind::Conflict, line_no, key,
                        key + " is set twice; keep one assignment");

    if (key == "name") {
      if (value.empty())
        throw ConfigError(ConfigError::Kind::BadValue, line_no, key, "name must be nonempty");
      cfg.name = value;
    } else if (key == "problem") {
      cfg.problem = problem_from_name(value, line_no);
    } else if (key == "n") {
      cfg.n = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "d") {
      cfg.d = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "r") {
      cfg.r = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "m_per") {
      cfg.m_per = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "xi") {
      cfg.xi = parse_double(value, line_no, key);
    } else if (key == "data_scale") {
      cfg.data_scale = parse_double(value, line_no, key);
    } else if (key == "T") {
      cfg.T = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "mu") {
      cfg.mu = parse_double(value, line_no, key);
    } else if (key == "ridge") {
      cfg.ridge = parse_double(value, line_no, key);
    } else if (key == "data_file") {
      cfg.data_file = value;
    } else if (key == "data_format") {
      try {
        matrix_format_from_name(value);
      } catch (const InvalidArgument& e) {
        throw ConfigError(ConfigError::Kind::BadValue, line_no, key, e.what());
      }
      cfg.data_format = value;
    } else if (key == "data_seed") {
      cfg.data_seed = parse_uint(value, line_no, key);
    } else if (key == "graph") {
      parse_graph_value(value, line_no, &cfg);
    } else if (key == "graph_seed") {
      cfg.graph_seed = parse_uint(value, line_no, key);
    } else if (key == "algorithm") {
      try {
        cfg.algorithm = algorithm_from_name(value);
      } catch (const InvalidArgument& e) {
        throw ConfigError(ConfigError::Kind::BadValue, line_no, key, e.what());
      }
    } else if (key == "alpha") {
      cfg.alphas = {parse_double(value, line_no, key)};
      cfg.has_grid = false;
      saw_alpha = true;
      alpha_line = line_no;
    } else if (key == "grid") {
      cfg.alphas = parse_double_list(value, line_no, key);
      cfg.has_grid = true;
      saw_grid = true;
      alpha_line = line_no;
    } else if (key == "diminishing") {
      cfg.diminishing = parse_bool(value, line_no, key);
    } else if (key == "theta") {
      cfg.theta = parse_double(value, line_no, key);
    } else if (key == "t_rounds") {
      cfg.t_rounds = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "max_epochs") {
      cfg.max_epochs = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "grad_tol") {
      cfg.grad_tol = parse_double(value, line_no, key);
    } else if (key == "seed") {
      cfg.seed = parse_uint(value, line_no, key);
    } else if (key == "consensual_init") {
      cfg.consensual_init = parse_bool(value, line_no, key);
    } else if (key == "batch_size") {
      cfg.batch_size = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "record_every") {
      cfg.record_every = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "output_dir") {
      if (value.empty())
        throw ConfigError(ConfigError::Kind::BadValue, line_no, key,
                          "output_dir must be nonempty");
      cfg.output_dir = value;
    } else {
      throw ConfigError(ConfigError::Kind::UnknownKey, line_no, key,
                        "unknown key \"" + key + "\"");
    }
  }

  if (saw_alpha && saw_grid)
    throw ConfigError(ConfigError::Kind::Conflict, alpha_line, "grid",
                      "alpha and grid are mutually exclusive; keep one");

  check_range(cfg.n >= 1, "n", "need at least one agent");
  check_range(cfg.d >= 1, "d", "need a positive row dimension");
  check_range(cfg.r >= 1 && cfg.r <= cfg.d, "r", "need 1 <= r <= d");
  check_range(cfg.m_per >= 1, "m_per", "need at least one row per agent");
  check_range(cfg.xi > 0.0 && cfg.xi <= 1.0, "xi", "decay must lie in (0, 1]");
  check_range(cfg.data_scale > 0.0, "data_scale", "scale must be positive");
  check_range(cfg.T >= 1, "T", "need at least one column");
  check_range(cfg.mu < 0.0 || (cfg.mu > 0.0 && cfg.mu <= 1.0), "mu",
              "density must lie in (0, 1], or be negative for the default");
  check_range(cfg.ridge >= 0.0, "ridge", "ridge must be nonnegative");
  check_range(cfg.er_p >= 0.0 && cfg.er_p <= 1.0, "graph", "er probability must lie in [0, 1]");
  for (double a : cfg.alphas)
    check_range(a > 0.0, saw_grid ? "grid" : "alpha", "step sizes must be positive");
  check_range(cfg.theta > 0.0 && cfg.theta <= 0.5, "theta", "theta must lie in (0, 1/2]");
  check_range(cfg.t_rounds >= 1, "t_rounds", "need at least one consensus round");
  check_range(cfg.max_epochs >= 0, "max_epochs", "epoch budget must be nonnegative");
  check_range(cfg.grad_tol > 0.0, "grad_tol", "tolerance must be positive");
  check_range(cfg.batch_size >= 0, "batch_size", "batch size must be nonnegative");
  check_range(cfg.record_every >= 1, "record_every", "cadence must be positive");

  if (cfg.problem == ProblemKind::PcaFile && cfg.data_file.empty())
    throw ConfigError(ConfigError::Kind::MissingKey, 0, "data_file",
                      "problem = pca_file needs data_file");
  if (cfg.problem != ProblemKind::PcaFile && !cfg.data_file.empty())
    throw ConfigError(ConfigError::Kind::Conflict, 0, "data_file",
                      "data_file is only read when problem = pca_file");
  bool pca = cfg.problem == ProblemKind::PcaSynthetic || cfg.problem == ProblemKind::PcaFile;
  if (cfg.batch_size > 0 && !pca)
    throw ConfigError(ConfigError::Kind::Conflict, 0, "batch_size",
                      "subsampled gradients need a pca problem");
  bool corrected = cfg.algorithm == Algorithm::Rextra || cfg.algorithm == Algorithm::Extra;
  bool dgd = cfg.algorithm == Algorithm::Drdgd || cfg.algorithm == Algorithm::Dprgd;
  if (cfg.diminishing && !dgd)
    throw ConfigError(ConfigError::Kind::Conflict, 0, "diminishing",
                      "diminishing steps apply to drdgd and dprgd only");
  if (corrected && cfg.t_rounds != 1)
    throw ConfigError(ConfigError::Kind::Conflict, 0, "t_rounds",
                      "the corrected recursion always uses one consensus round per step");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

Experiment build_experiment(const ExperimentConfig& config) {
  Experiment exp;
  exp.graph = build_graph(config.graph, config.n, config.graph_seed, config.er_p);
  exp.mixing = metropolis_weights(exp.graph);

  switch (config.problem) {
    case ProblemKind::PcaSynthetic: {
      PcaData data = generate_synthetic_pca(config.n, config.m_per, config.d, config.r, config.xi,
                                            config.data_seed, config.data_scale);
      exp.problem = std::make_unique<PcaProblem>(config.r, std::move(data));
      break;
    }
    case ProblemKind::PcaFile: {
      Matrix A = load_matrix(config.data_file, matrix_format_from_name(config.data_format));
      if (A.cols() != config.d)
        throw ConfigError(ConfigError::Kind::Conflict, 0, "d",
                          "config names d = " + std::to_string(config.d) + " but " +
                              config.data_file + " has " + std::to_string(A.cols()) + " columns");
      exp.problem =
          std::make_unique<PcaProblem>(config.r, split_pca_rows(A, config.n, config.data_seed));
      break;
    }
    case ProblemKind::LrmcSynthetic: {
      LrmcData data = generate_synthetic_lrmc(config.n, config.d, config.T, config.r,
                                              config.data_seed, config.ridge, config.mu);
      exp.problem = std::make_unique<LrmcProblem>(config.r, std::move(data));
      break;
    }
    case ProblemKind::Quadratic: {
      exp.problem =
          std::make_unique<QuadraticProblem>(config.n, config.d, config.r, config.data_seed);
      break;
    }
  }
  return exp;
}

namespace {

RunOptions options_for(const ExperimentConfig& config, double alpha) {
  RunOptions opt;
  opt.algorithm = config.algorithm;
  opt.alpha = alpha;
  opt.diminishing = config.diminishing;
  opt.theta = config.theta;
  opt.t_rounds = config.t_rounds;
  opt.max_epochs = config.max_epochs;
  opt.grad_tol = config.grad_tol;
  opt.seed = config.seed;
  opt.consensual_init = config.consensual_init;
  opt.batch_size = config.batch_size;
  opt.record_every = config.record_every;
  return opt;
}

RunSummary summarize(double alpha, const RunResult& result, double wall_seconds) {
  RunSummary s;
  s.alpha = alpha;
  s.termination = result.termination;
  s.iterations = result.iterations;
  s.comm_entries = result.comm_entries;
  s.grad_evals = result.grad_evals;
  if (!result.rows.empty()) {
    const MetricsRow& last = result.rows.back();
    s.epochs = last.epoch;
    s.final_consensus_err = last.consensus_err;
    s.final_grad_norm = last.grad_norm;
    s.final_fval = last.fval;
    s.final_ds = last.ds;
  }
  s.max_tracking_residual = result.max_tracking_residual;
  s.wall_seconds = wall_seconds;
  return s;
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxEpochs: return "max_epochs";
    case Termination::Failed: return "failed";
  }
  return "unknown";
}

// Failed runs rank behind everything; otherwise smaller final gradient norm,
// then fewer epochs spent, then the smaller step size.
bool better_cell(const RunSummary& a, const RunSummary& b) {
  double ga = a.termination == Termination::Failed ? std::numeric_limits<double>::infinity()
                                                   : a.final_grad_norm;
  double gb = b.termination == Termination::Failed ? std::numeric_limits<double>::infinity()
                                                   : b.final_grad_norm;
  if (ga != gb) return ga < gb;
  if (a.epochs != b.epochs) return a.epochs < b.epochs;
  return a.alpha < b.alpha;
}

}  // namespace

GridResult grid_search(const Experiment& experiment, const ExperimentConfig& config) {
  GridResult grid;
  for (double alpha : config.alphas) {
    auto start = std::chrono::steady_clock::now();
    RunResult result = run(*experiment.problem, experiment.graph, experiment.mixing,
                           options_for(config, alpha));
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    grid.cells.push_back(summarize(alpha, result, wall));
    grid.runs.push_back(std::move(result));
  }

  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    if (grid.cells[i].termination == Termination::Failed) continue;
    if (grid.best < 0 ||
        better_cell(grid.cells[i], grid.cells[static_cast<std::size_t>(grid.best)]))
      grid.best = static_cast<int>(i);
  }
  return grid;
}

std::string resolve_output_dir(const ExperimentConfig& config) {
  const char* env = std::getenv("REXTRA_OUTPUT_DIR");
  std::filesystem::path dir = env && *env ? env : config.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir.string();
}

std::string grid_csv_header() {
  return "alpha,termination,iterations,epochs,comm_entries,grad_evals,consensus_err,grad_norm,"
         "fval,ds,max_tracking_residual,wall_seconds";
}

std::string grid_csv_row(const RunSummary& s) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%s,%d,%d,%lld,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.6f",
                s.alpha, termination_name(s.termination), s.iterations, s.epochs,
                static_cast<long long>(s.comm_entries), s.grad_evals, s.final_consensus_err,
                s.final_grad_norm, s.final_fval, s.final_ds, s.max_tracking_residual,
                s.wall_seconds);
  return buf;
}

std::string summary_csv_header() {
  return "fingerprint,name,algorithm,best_alpha,termination,epochs,grad_norm,consensus_err,"
         "comm_entries_cum";
}

std::string summary_csv_row(const ExperimentConfig& config, const RunSummary& best) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%s,%s,%.17g,%s,%d,%.17g,%.17g,%lld",
                config.fingerprint().c_str(), config.name.c_str(),
                algorithm_name(config.algorithm).c_str(), best.alpha,
                termination_name(best.termination), best.epochs, best.final_grad_norm,
                best.final_consensus_err, static_cast<long long>(best.comm_entries));
  return buf;
}

GridResult run_experiment(const ExperimentConfig& config, bool quiet) {
  Experiment experiment = build_experiment(config);
  std::string dir = resolve_output_dir(config);
  std::string fp = config.fingerprint();

  if (!quiet) {
    std::printf("%s [%s]: %s on %s, n = %d, sigma2 = %.6f, writing to %s\n", config.name.c_str(),
                fp.c_str(), algorithm_name(config.algorithm).c_str(),
                problem_kind_name(config.problem).c_str(), config.n, experiment.mixing.sigma2,
                dir.c_str());
    if (!config.consensual_init)
      std::printf("  note: non-consensual start; the near-consensus analysis does not cover it\n");
  }

  GridResult grid = grid_search(experiment, config);

  {
    std::ofstream out(dir + "/" + fp + ".config.txt");
    if (!out) throw IoError("cannot write " + dir + "/" + fp + ".config.txt");
    out << config.canonical_text();
  }
  {
    std::ofstream out(dir + "/" + fp + ".grid.csv");
    if (!out) throw IoError("cannot write " + dir + "/" + fp + ".grid.csv");
    out << grid_csv_header() << '\n';
    for (const RunSummary& cell : grid.cells) out << grid_csv_row(cell) << '\n';
  }
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    // Each trace is named by the fingerprint of the single-alpha config it
    // realizes, so grid cells are addressable as standalone experiments.
    ExperimentConfig cell_cfg = config;
    cell_cfg.alphas = {grid.cells[i].alpha};
    cell_cfg.has_grid = false;
    std::string path = dir + "/" + cell_cfg.fingerprint() + ".csv";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    write_metrics_csv(out, grid.runs[i].rows);
    if (!quiet) {
      const RunSummary& c = grid.cells[i];
      std::printf("  alpha = %-12.6g %-10s iters = %-7d grad_norm = %-12.4g comm = %lld\n",
                  c.alpha, termination_name(c.termination), c.iterations, c.final_grad_norm,
                  static_cast<long long>(c.comm_entries));
    }
  }
  if (grid.best >= 0) {
    const RunSummary& best = grid.cells[static_cast<std::size_t>(grid.best)];
    std::string path = dir + "/summary.csv";
    bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot write " + path);
    if (fresh) out << summary_csv_header() << '\n';
    out << summary_csv_row(config, best) << '\n';
    if (!quiet)
      std::printf("  best: alpha = %.6g (%s, %d epochs)\n", best.alpha,
                  termination_name(best.termination), best.epochs);
  }
  return grid;
}

}  // namespace rextra
