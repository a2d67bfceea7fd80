#include "rextra/problems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "rextra/errors.hpp"
#include "rextra/rng.hpp"

namespace rextra {

Problem::Problem(ManifoldSpec spec, int n_agents) : spec_(spec), n_(n_agents) {
  if (n_agents <= 0)
    throw InvalidArgument("problem needs at least one agent, got " + std::to_string(n_agents));
}

void Problem::check_block(const Matrix& x, const char* where) const {
  if (x.rows() != spec_.rows || x.cols() != spec_.cols)
    throw DimensionMismatch(std::string(where) + ": block is " + std::to_string(x.rows()) + " x " +
                            std::to_string(x.cols()) + ", problem expects " +
                            std::to_string(spec_.rows) + " x " + std::to_string(spec_.cols));
}

double Problem::global_objective(const Matrix& x) const {
  double acc = 0.0;
  for (int i = 0; i < n_; ++i) acc += local_objective(i, x);
  return acc / n_;
}

Matrix Problem::global_euclidean_gradient(const Matrix& x) const {
  Matrix acc = local_euclidean_gradient(0, x);
  for (int i = 1; i < n_; ++i) acc += local_euclidean_gradient(i, x);
  return acc / n_;
}

Matrix Problem::local_euclidean_gradient_sampled(int, const Matrix&,
                                                 const std::vector<int>&) const {
  throw InvalidArgument("this objective does not support subsampled gradients");
}

/// ---- PCA -------------------------------------------------------------------

PcaData generate_synthetic_pca(int n, int m_per, int d, int r, double xi, std::uint64_t seed,
                               double scale) {
  if (n <= 0 || m_per <= 0) throw InvalidArgument("need positive agent and row counts");
  if (d <= 0 || r <= 0 || r > d)
    throw InvalidArgument("need 1 <= r <= d, got r = " + std::to_string(r) +
                          ", d = " + std::to_string(d));
  if (!(xi > 0.0 && xi <= 1.0))
    throw InvalidArgument("spectral decay must lie in (0, 1], got " + std::to_string(xi));
  if (!(scale > 0.0)) throw InvalidArgument("scale must be positive");
  int m = n * m_per;
  if (m < d)
    throw InvalidArgument("need at least d = " + std::to_string(d) + " rows total, got " +
                          std::to_string(m));

  auto engine = make_engine(seed, 0);
  Matrix B = gaussian_matrix(m, d, engine);
  Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues()(d - 1) <= 1e-9)
    throw RankDeficient("sampled data matrix is numerically rank deficient");

  Eigen::VectorXd s(d);
  for (int j = 0; j < d; ++j) s(j) = scale * std::pow(xi, j + 1);
  Matrix A = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();

  PcaData data = split_pca_rows(A, n, seed);
  data.ground_truth = svd.matrixV().leftCols(r);
  return data;
}

PcaData split_pca_rows(const Matrix& A, int n, std::uint64_t seed) {
  if (n <= 0) throw InvalidArgument("need a positive agent count");
  int m = static_cast<int>(A.rows());
  if (m == 0 || A.cols() == 0) throw ShapeError("data matrix is empty");
  if (m % n != 0)
    throw IndivisibleSplit(std::to_string(m) + " rows do not split evenly across " +
                           std::to_string(n) + " agents");
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  auto engine = make_engine(seed, 1);
  std::shuffle(perm.begin(), perm.end(), engine);

  int m_per = m / n;
  PcaData data;
  data.blocks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Matrix block(m_per, A.cols());
    for (int k = 0; k < m_per; ++k)
      block.row(k) = A.row(perm[static_cast<std::size_t>(i * m_per + k)]);
    data.blocks.push_back(std::move(block));
  }
  return data;
}

PcaProblem::PcaProblem(int r, PcaData data)
    : Problem(ManifoldSpec::stiefel(data.blocks.empty() ? 0 : static_cast<int>(data.blocks[0].cols()), r),
              static_cast<int>(data.blocks.size())),
      data_(std::move(data)) {
  int d = manifold().rows;
  grams_.reserve(data_.blocks.size());
  mean_gram_ = Matrix::Zero(d, d);
  double l_max = 0.0;
  for (const Matrix& block : data_.blocks) {
    if (block.cols() != d) throw DimensionMismatch("agent data blocks disagree on width");
    grams_.push_back(block.transpose() * block);
    mean_gram_ += grams_.back();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(grams_.back());
    l_max = std::max(l_max, eig.eigenvalues()(d - 1));
  }
  mean_gram_ /= static_cast<double>(agents());
  smoothness_ = l_max;
  if (!data_.ground_truth.size()) return;
  if (data_.ground_truth.rows() != d || data_.ground_truth.cols() != r)
    throw DimensionMismatch("ground truth shape disagrees with the manifold");
}

double PcaProblem::local_objective(int i, const Matrix& x) const {
  check_block(x, "pca objective");
  return -0.5 * (grams_[static_cast<std::size_t>(i)] * x).cwiseProduct(x).sum();
}

Matrix PcaProblem::local_euclidean_gradient(int i, const Matrix& x) const {
  check_block(x, "pca gradient");
  return -(grams_[static_cast<std::size_t>(i)] * x);
}

const Matrix* PcaProblem::ground_truth() const {
  return data_.ground_truth.size() ? &data_.ground_truth : nullptr;
}

int PcaProblem::local_sample_count(int i) const {
  return static_cast<int>(data_.blocks[static_cast<std::size_t>(i)].rows());
}

Matrix PcaProblem::local_euclidean_gradient_sampled(int i, const Matrix& x,
                                                    const std::vector<int>& rows) const {
  check_block(x, "pca sampled gradient");
  const Matrix& block = data_.blocks[static_cast<std::size_t>(i)];
  if (rows.empty()) throw InvalidArgument("sampled gradient needs at least one row");
  Matrix sub(static_cast<int>(rows.size()), block.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    int row = rows[k];
    if (row < 0 || row >= block.rows())
      throw InvalidArgument("sampled row " + std::to_string(row) + " outside block of " +
                            std::to_string(block.rows()) + " rows");
    sub.row(static_cast<int>(k)) = block.row(row);
  }
  // Scaled so the estimator is unbiased for the full local gradient.
  double factor = static_cast<double>(block.rows()) / static_cast<double>(rows.size());
  return -factor * (sub.transpose() * (sub * x));
}

/// ---- LRMC ------------------------------------------------------------------

Matrix lrmc_inner_solve(const Matrix& A, const Matrix& mask, double ridge, const Matrix& X) {
  if (A.rows() != mask.rows() || A.cols() != mask.cols())
    throw DimensionMismatch("data and mask shapes disagree");
  if (X.rows() != A.rows())
    throw DimensionMismatch("factor has " + std::to_string(X.rows()) + " rows, data has " +
                            std::to_string(A.rows()));
  int r = static_cast<int>(X.cols());
  int T = static_cast<int>(A.cols());
  Matrix V = Matrix::Zero(r, T);
  Matrix S(A.rows(), r);
  Eigen::VectorXd a(A.rows());
  for (int t = 0; t < T; ++t) {
    int cnt = 0;
    for (int i = 0; i < A.rows(); ++i) {
      if (mask(i, t) > 0.5) {
        S.row(cnt) = X.row(i);
        a(cnt) = A(i, t);
        ++cnt;
      }
    }
    if (cnt == 0) continue;  // nothing observed in this column
    Matrix gram = S.topRows(cnt).transpose() * S.topRows(cnt);
    gram.diagonal().array() += ridge;
    V.col(t) = gram.ldlt().solve(S.topRows(cnt).transpose() * a.head(cnt));
  }
  return V;
}

LrmcData generate_synthetic_lrmc(int n, int d, int T, int r, std::uint64_t seed, double ridge,
                                 double mu) {
  if (n <= 0) throw InvalidArgument("need a positive agent count");
  if (d <= 0 || T <= 0 || r <= 0 || r > std::min(d, T))
    throw InvalidArgument("need 1 <= r <= min(d, T)");
  if (T % n != 0)
    throw IndivisibleSplit(std::to_string(T) + " columns do not split evenly across " +
                           std::to_string(n) + " agents");
  if (mu < 0.0) mu = static_cast<double>(r) * (d + T - r) / (static_cast<double>(d) * T);
  if (!(mu > 0.0 && mu <= 1.0))
    throw InvalidArgument("observation density must lie in (0, 1], got " + std::to_string(mu));
  if (!(ridge >= 0.0)) throw InvalidArgument("ridge must be nonnegative");

  auto engine_l = make_engine(seed, 0);
  auto engine_r = make_engine(seed, 1);
  Matrix L = gaussian_matrix(d, r, engine_l);
  Matrix R = gaussian_matrix(r, T, engine_r);
  Matrix A = L * R;

  auto engine_mask = make_engine(seed, 2);
  std::bernoulli_distribution coin(mu);
  Matrix mask(d, T);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < d; ++i) mask(i, t) = coin(engine_mask) ? 1.0 : 0.0;

  std::vector<int> perm(static_cast<std::size_t>(T));
  std::iota(perm.begin(), perm.end(), 0);
  auto engine_perm = make_engine(seed, 3);
  std::shuffle(perm.begin(), perm.end(), engine_perm);

  int per = T / n;
  LrmcData data;
  data.ridge = ridge;
  data.mu = mu;
  data.blocks.reserve(static_cast<std::size_t>(n));
  data.masks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Matrix block(d, per);
    Matrix mblock(d, per);
    for (int k = 0; k < per; ++k) {
      int col = perm[static_cast<std::size_t>(i * per + k)];
      block.col(k) = A.col(col);
      mblock.col(k) = mask.col(col);
    }
    data.blocks.push_back(std::move(block));
    data.masks.push_back(std::move(mblock));
  }
  data.ground_truth = project_to_manifold(ManifoldSpec::stiefel(d, r), L);
  return data;
}

LrmcProblem::LrmcProblem(int r, LrmcData data)
    : Problem(ManifoldSpec::stiefel(
                  data.blocks.empty() ? 0 : static_cast<int>(data.blocks[0].rows()), r),
              static_cast<int>(data.blocks.size())),
      data_(std::move(data)) {
  if (data_.blocks.size() != data_.masks.size())
    throw DimensionMismatch("need one mask per data block");
  if (data_.ground_truth.size() && data_.ground_truth.cols() != r)
    throw DimensionMismatch("ground truth width disagrees with the factor rank");
  double worst = 0.0;
  for (std::size_t i = 0; i < data_.blocks.size(); ++i) {
    const Matrix& block = data_.blocks[i];
    const Matrix& mask = data_.masks[i];
    if (block.rows() != manifold().rows) throw DimensionMismatch("agent blocks disagree on height");
    if (block.rows() != mask.rows() || block.cols() != mask.cols())
      throw DimensionMismatch("mask shape disagrees with its data block");
    worst = std::max(worst, (mask.cwiseProduct(block)).squaredNorm());
  }
  // Crude curvature proxy: the observed energy bounds the objective Hessian
  // on the manifold up to constants. Used only by step-size heuristics.
  smoothness_ = worst;
}

double LrmcProblem::local_objective(int i, const Matrix& x) const {
  check_block(x, "completion objective");
  const Matrix& A = data_.blocks[static_cast<std::size_t>(i)];
  const Matrix& mask = data_.masks[static_cast<std::size_t>(i)];
  Matrix V = lrmc_inner_solve(A, mask, data_.ridge, x);
  return 0.5 * mask.cwiseProduct(x * V - A).squaredNorm();
}

Matrix LrmcProblem::local_euclidean_gradient(int i, const Matrix& x) const {
  check_block(x, "completion gradient");
  const Matrix& A = data_.blocks[static_cast<std::size_t>(i)];
  const Matrix& mask = data_.masks[static_cast<std::size_t>(i)];
  Matrix V = lrmc_inner_solve(A, mask, data_.ridge, x);
  // V is held fixed at the inner minimizer; its variation contributes nothing
  // to first order when ridge is negligible.
  return mask.cwiseProduct(x * V - A) * V.transpose();
}

const Matrix* LrmcProblem::ground_truth() const {
  return data_.ground_truth.size() ? &data_.ground_truth : nullptr;
}

/// ---- Quadratic ---------------------------------------------------------------

QuadraticProblem::QuadraticProblem(int n, int d, int r, std::uint64_t seed)
    : Problem(ManifoldSpec::euclidean(d, r), n) {
  targets_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto engine = make_engine(seed, static_cast<std::uint64_t>(i));
    targets_.push_back(gaussian_matrix(d, r, engine));
  }
  mean_ = Matrix::Zero(d, r);
  for (const Matrix& t : targets_) mean_ += t;
  mean_ /= static_cast<double>(n);
}

double QuadraticProblem::local_objective(int i, const Matrix& x) const {
  check_block(x, "quadratic objective");
  return 0.5 * (x - targets_[static_cast<std::size_t>(i)]).squaredNorm();
}

Matrix QuadraticProblem::local_euclidean_gradient(int i, const Matrix& x) const {
  check_block(x, "quadratic gradient");
  return x - targets_[static_cast<std::size_t>(i)];
}

/// ---- Matrix file I/O -----------------------------------------------------------

namespace {

Matrix load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Skip blank lines (covers a trailing newline).
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      std::string field = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                      : comma - pos);
      const char* begin = field.c_str();
      char* end = nullptr;
      double value = std::strtod(begin, &end);
      while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
      if (end == begin || (end && *end))
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad number \"" + field + "\"");
      row.push_back(value);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows[0].size())
      throw ParseError(path + ":" + std::to_string(line_no) + ": row has " +
                       std::to_string(row.size()) + " fields, expected " +
                       std::to_string(rows[0].size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void save_csv(const Matrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  char buf[32];
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

constexpr std::uint64_t kRawLimit = 1ULL << 30;  // sanity cap on declared dims

Matrix load_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::uint64_t dims[2];
  if (!in.read(reinterpret_cast<char*>(dims), sizeof dims))
    throw ParseError(path + ": short header, expected 16 bytes");
  if (dims[0] == 0 || dims[1] == 0 || dims[0] > kRawLimit || dims[1] > kRawLimit ||
      dims[0] * dims[1] > kRawLimit)
    throw ShapeError(path + ": implausible dimensions " + std::to_string(dims[0]) + " x " +
                     std::to_string(dims[1]));
  int rows = static_cast<int>(dims[0]);
  int cols = static_cast<int>(dims[1]);
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  if (!in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(data.size() * sizeof(double))))
    throw ShapeError(path + ": payload shorter than the declared " + std::to_string(rows) + " x " +
                     std::to_string(cols));
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = data[static_cast<std::size_t>(i) * cols + j];
  return m;
}

void save_raw(const Matrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()),
                           static_cast<std::uint64_t>(m.cols())};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  std::vector<double> row(static_cast<std::size_t>(m.cols()));
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace

Matrix load_matrix(const std::string& path, MatrixFileFormat format) {
  return format == MatrixFileFormat::Csv ? load_csv(path) : load_raw(path);
}

void save_matrix(const Matrix& m, const std::string& path, MatrixFileFormat format) {
  if (format == MatrixFileFormat::Csv)
    save_csv(m, path);
  else
    save_raw(m, path);
}

MatrixFileFormat matrix_format_from_name(const std::string& name) {
  if (name == "csv") return MatrixFileFormat::Csv;
  if (name == "raw_f64") return MatrixFileFormat::RawF64;
  throw InvalidArgument("unknown matrix format \"" + name + "\" (want csv or raw_f64)");
}

}  // namespace rextra
