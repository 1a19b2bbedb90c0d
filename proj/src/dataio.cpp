#include "kssl/dataio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "kssl/matrixkit.hpp"
#include "kssl/rng.hpp"

namespace kssl::dataio {

namespace {

constexpr char kMagic[4] = {'K', 'S', 'S', 'L'};

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  // Tolerate surrounding spaces from hand-edited files.
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' ||
                         *(end - 1) == '\r'))
    --end;
  if (begin == end) return false;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> tokens;
  std::string token;
  std::stringstream ss(line);
  while (std::getline(ss, token, ',')) tokens.push_back(token);
  // A trailing comma means a trailing empty field.
  if (!line.empty() && line.back() == ',') tokens.emplace_back();
  return tokens;
}

Eigen::MatrixXd read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_matrix: cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  bool first_line = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const std::vector<std::string> tokens = split_csv_line(line);
    std::vector<double> row(tokens.size());
    bool ok = true;
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (!parse_double(tokens[i], row[i])) {
        ok = false;
        break;
      }

    if (!ok) {
      // A single non-numeric leading line is treated as a header.
      if (first_line) {
        first_line = false;
        continue;
      }
      throw ParseError("read_matrix: non-numeric CSV field in '" + path + "'");
    }
    first_line = false;

    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("read_matrix: ragged CSV rows in '" + path + "'");
    rows.push_back(std::move(row));
  }

  if (rows.empty())
    throw ParseError("read_matrix: no data rows in '" + path + "'");

  Eigen::MatrixXd A(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return A;
}

Eigen::MatrixXd read_mat64(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_matrix: cannot open '" + path + "'");

  in.seekg(0, std::ios::end);
  const std::streamoff file_size = in.tellg();
  in.seekg(0, std::ios::beg);
  if (file_size < 12)
    throw ParseError("read_matrix: '" + path + "' is too short for MAT64");

  char magic[4];
  std::uint32_t rows = 0, cols = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&rows), 4);
  in.read(reinterpret_cast<char*>(&cols), 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw ParseError("read_matrix: '" + path + "' lacks the MAT64 magic");

  const std::uint64_t expected =
      12ULL + 8ULL * static_cast<std::uint64_t>(rows) * cols;
  if (static_cast<std::uint64_t>(file_size) != expected)
    throw ParseError("read_matrix: MAT64 size header disagrees with '" + path +
                     "'");

  Eigen::MatrixXd A(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j) {
      double v = 0.0;
      in.read(reinterpret_cast<char*>(&v), 8);
      A(i, j) = v;
    }
  if (!in) throw IoError("read_matrix: short read from '" + path + "'");
  return A;
}

void write_csv(const Eigen::MatrixXd& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_matrix: cannot open '" + path + "'");
  char buf[64];
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", A(i, j));
      out << buf;
      if (j + 1 < A.cols()) out << ',';
    }
    out << '\n';
  }
  if (!out) throw IoError("write_matrix: failed writing '" + path + "'");
}

void write_mat64(const Eigen::MatrixXd& A, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_matrix: cannot open '" + path + "'");
  const std::uint32_t rows = static_cast<std::uint32_t>(A.rows());
  const std::uint32_t cols = static_cast<std::uint32_t>(A.cols());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&rows), 4);
  out.write(reinterpret_cast<const char*>(&cols), 4);
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j) {
      const double v = A(i, j);
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
  if (!out) throw IoError("write_matrix: failed writing '" + path + "'");
}

void check_target_covariance(const Eigen::MatrixXd& F, const char* who) {
  const Eigen::MatrixXd cov = matrixkit::sample_covariance(F);
  const matrixkit::SymEig eig = matrixkit::sym_eig(cov);
  const double lambda_max = eig.eigenvalues(0);
  const double lambda_min = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (lambda_max <= 0.0 ||
      lambda_min <= matrixkit::kDefaultRankTol * lambda_max)
    throw RankDeficientTargetError(
        std::string(who) + ": target covariance is rank-deficient");
}

}  // namespace

Eigen::MatrixXd read_matrix(const std::string& path, MatrixFormat format) {
  return format == MatrixFormat::Csv ? read_csv(path) : read_mat64(path);
}

void write_matrix(const Eigen::MatrixXd& A, const std::string& path,
                  MatrixFormat format) {
  if (format == MatrixFormat::Csv)
    write_csv(A, path);
  else
    write_mat64(A, path);
}

MatrixFormat format_from_path(const std::string& path) {
  const auto ends_with = [&](const char* suffix) {
    const std::size_t len = std::strlen(suffix);
    return path.size() >= len &&
           path.compare(path.size() - len, len, suffix) == 0;
  };
  if (ends_with(".csv")) return MatrixFormat::Csv;
  if (ends_with(".mat64")) return MatrixFormat::Mat64;
  throw ParseError("unknown matrix file suffix on '" + path +
                   "' (expected .csv or .mat64)");
}

DataMatrix gen_spiked(const SpikedCovarianceSpec& spec) {
  if (spec.m < 1 || spec.n < 1)
    throw DimensionMismatchError("gen_spiked: m and n must be positive");
  if (spec.theta.size() != spec.m)
    throw DimensionMismatchError("gen_spiked: theta length must equal m");
  if (std::abs(spec.theta.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("gen_spiked: theta must have unit norm");
  if (spec.nu < 0.0)
    throw std::invalid_argument("gen_spiked: nu must be nonnegative");

  rng::Rng rng(spec.seed);
  DataMatrix out;
  out.values.resize(spec.m, spec.n);
  const double spike_sd = std::sqrt(spec.nu);
  // x = g + √ν·θ·g₀ has covariance I + ν·θθᵀ.
  for (Eigen::Index j = 0; j < spec.n; ++j) {
    const Eigen::VectorXd g = rng.gaussian_vector(spec.m);
    const double g0 = rng.gaussian();
    out.values.col(j) = g + spike_sd * g0 * spec.theta;
  }
  return out;
}

Eigen::MatrixXd gen_target_random_linear(const Eigen::MatrixXd& X,
                                         Eigen::Index d, std::uint64_t seed) {
  if (d < 1) throw DimensionMismatchError("gen_target_random_linear: d < 1");
  rng::Rng rng(seed);
  const Eigen::MatrixXd G = rng.gaussian_matrix(d, X.rows());
  Eigen::MatrixXd F = G * X;
  check_target_covariance(F, "gen_target_random_linear");
  return F;
}

Eigen::MatrixXd gen_target_spike_projection(const Eigen::MatrixXd& X,
                                            const Eigen::VectorXd& theta) {
  if (theta.size() != X.rows())
    throw DimensionMismatchError(
        "gen_target_spike_projection: theta length must equal m");
  Eigen::MatrixXd F = theta.transpose() * X;
  check_target_covariance(F, "gen_target_spike_projection");
  return F;
}

Eigen::MatrixXd pca_reduce_rows(const Eigen::MatrixXd& F, Eigen::Index d) {
  if (d < 1 || d > F.rows())
    throw DimensionMismatchError(
        "pca_reduce_rows: d must be in 1..rows(F)");
  const Eigen::MatrixXd cov = matrixkit::sample_covariance(F);
  const matrixkit::SymEig eig = matrixkit::sym_eig(cov);
  const Eigen::MatrixXd top = eig.eigenvectors.leftCols(d);  // descending λ
  const Eigen::VectorXd mean = F.rowwise().mean();
  return top.transpose() * (F.colwise() - mean);
}

}  // namespace kssl::dataio
