#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "kssl/dataio.hpp"
#include "kssl/evalkit.hpp"
#include "kssl/matrixkit.hpp"
#include "kssl/rng.hpp"

using namespace kssl;
using namespace kssl::dataio;

namespace {

// Scratch directory for round-trip files; recreated empty on first use.
std::filesystem::path scratch_dir() {
  static const std::filesystem::path dir = [] {
    std::filesystem::path p =
        std::filesystem::temp_directory_path() / "kssl_dataio_tests";
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
  }();
  return dir;
}

std::string scratch_file(const std::string& name) {
  return (scratch_dir() / name).string();
}

void write_text(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << contents;
}

SpikedCovarianceSpec spiked_spec(Eigen::Index m, double nu, Eigen::Index n,
                                 std::uint64_t seed) {
  SpikedCovarianceSpec spec;
  spec.m = m;
  spec.nu = nu;
  spec.theta = Eigen::VectorXd::Zero(m);
  spec.theta(0) = 1.0;
  spec.n = n;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("read_matrix parses plain CSV") {
  const std::string path = scratch_file("plain.csv");
  write_text(path, "1.0,2.0\n3.0,4.0\n");
  Eigen::MatrixXd A = read_matrix(path, MatrixFormat::Csv);
  REQUIRE(A.rows() == 2);
  REQUIRE(A.cols() == 2);
  CHECK(A(0, 0) == 1.0);
  CHECK(A(0, 1) == 2.0);
  CHECK(A(1, 0) == 3.0);
  CHECK(A(1, 1) == 4.0);
}

TEST_CASE("read_matrix auto-detects a single header line") {
  const std::string path = scratch_file("header.csv");
  write_text(path, "alpha,beta\n1.5,2.5\n-3.0,4.0\n");
  Eigen::MatrixXd A = read_matrix(path, MatrixFormat::Csv);
  REQUIRE(A.rows() == 2);
  CHECK(A(0, 0) == 1.5);
  CHECK(A(1, 1) == 4.0);

  // A non-numeric line later in the file is an error, not a header.
  const std::string bad = scratch_file("mid_header.csv");
  write_text(bad, "1.0,2.0\nalpha,beta\n");
  CHECK_THROWS_AS(read_matrix(bad, MatrixFormat::Csv), ParseError);
}

TEST_CASE("read_matrix rejects malformed CSV") {
  SUBCASE("empty file") {
    const std::string path = scratch_file("empty.csv");
    write_text(path, "");
    CHECK_THROWS_AS(read_matrix(path, MatrixFormat::Csv), ParseError);
  }
  SUBCASE("header only") {
    const std::string path = scratch_file("header_only.csv");
    write_text(path, "a,b,c\n");
    CHECK_THROWS_AS(read_matrix(path, MatrixFormat::Csv), ParseError);
  }
  SUBCASE("ragged rows") {
    const std::string path = scratch_file("ragged.csv");
    write_text(path, "1.0,2.0\n3.0\n");
    CHECK_THROWS_AS(read_matrix(path, MatrixFormat::Csv), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_matrix(scratch_file("does_not_exist.csv"),
                                MatrixFormat::Csv),
                    IoError);
  }
}

TEST_CASE("matrix round trips") {
  rng::Rng rng(91);
  Eigen::MatrixXd A = rng.gaussian_matrix(7, 3);
  A(0, 0) = 1.0 / 3.0;  // not exactly representable in decimal
  A(1, 2) = -1e-15;

  SUBCASE("MAT64 is bitwise") {
    const std::string path = scratch_file("roundtrip.mat64");
    write_matrix(A, path, MatrixFormat::Mat64);
    Eigen::MatrixXd B = read_matrix(path, MatrixFormat::Mat64);
    REQUIRE(B.rows() == A.rows());
    REQUIRE(B.cols() == A.cols());
    CHECK((A.array() == B.array()).all());
  }
  SUBCASE("CSV survives within 1e-12") {
    const std::string path = scratch_file("roundtrip.csv");
    write_matrix(A, path, MatrixFormat::Csv);
    Eigen::MatrixXd B = read_matrix(path, MatrixFormat::Csv);
    REQUIRE(B.rows() == A.rows());
    CHECK((A - B).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("single zero entry") {
    const std::string path = scratch_file("zero.csv");
    write_matrix(Eigen::MatrixXd::Zero(1, 1), path, MatrixFormat::Csv);
    Eigen::MatrixXd B = read_matrix(path, MatrixFormat::Csv);
    CHECK(B(0, 0) == 0.0);
  }
}

TEST_CASE("write_matrix surfaces unwritable paths") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Ones(2, 2);
  const std::string path =
      (scratch_dir() / "no_such_subdir" / "out.csv").string();
  CHECK_THROWS_AS(write_matrix(A, path, MatrixFormat::Csv), IoError);
  CHECK_THROWS_AS(write_matrix(A, path, MatrixFormat::Mat64), IoError);
}

TEST_CASE("MAT64 validates its header strictly") {
  rng::Rng rng(92);
  Eigen::MatrixXd A = rng.gaussian_matrix(3, 2);
  const std::string good = scratch_file("good.mat64");
  write_matrix(A, good, MatrixFormat::Mat64);

  SUBCASE("declared size must match the byte length") {
    // Append one stray byte; the declared 3×2 payload no longer matches.
    const std::string padded = scratch_file("padded.mat64");
    std::filesystem::copy_file(good, padded);
    std::ofstream out(padded, std::ios::binary | std::ios::app);
    out.put('\0');
    out.close();
    CHECK_THROWS_AS(read_matrix(padded, MatrixFormat::Mat64), ParseError);

    // Truncate the last value: too short for the declared payload.
    const std::string truncated = scratch_file("truncated.mat64");
    std::filesystem::copy_file(good, truncated);
    std::filesystem::resize_file(truncated,
                                 std::filesystem::file_size(good) - 8);
    CHECK_THROWS_AS(read_matrix(truncated, MatrixFormat::Mat64), ParseError);
  }
  SUBCASE("wrong magic") {
    const std::string path = scratch_file("badmagic.mat64");
    write_text(path, "NOPE makes this file invalid from byte zero");
    CHECK_THROWS_AS(read_matrix(path, MatrixFormat::Mat64), ParseError);
  }
  SUBCASE("short file") {
    const std::string path = scratch_file("short.mat64");
    write_text(path, "KS");
    CHECK_THROWS_AS(read_matrix(path, MatrixFormat::Mat64), ParseError);
  }
}

TEST_CASE("format_from_path maps suffixes") {
  CHECK(format_from_path("data/x.csv") == MatrixFormat::Csv);
  CHECK(format_from_path("deep/path/y.mat64") == MatrixFormat::Mat64);
  CHECK_THROWS_AS(format_from_path("matrix.txt"), ParseError);
  CHECK_THROWS_AS(format_from_path("noextension"), ParseError);
}

TEST_CASE("gen_spiked without a spike is standard normal") {
  DataMatrix data = gen_spiked(spiked_spec(5, 0.0, 10000, 123));
  REQUIRE(data.values.rows() == 5);
  REQUIRE(data.values.cols() == 10000);
  Eigen::MatrixXd cov = matrixkit::sample_covariance(data.values);
  CHECK((cov - Eigen::MatrixXd::Identity(5, 5)).norm() < 0.2);
}

TEST_CASE("gen_spiked plants the signal direction") {
  DataMatrix data = gen_spiked(spiked_spec(5, 100.0, 10000, 124));
  Eigen::MatrixXd cov = matrixkit::sample_covariance(data.values);
  matrixkit::SymEig eig = matrixkit::sym_eig(cov);
  // Leading eigenvector of ν·θθᵀ + I is θ itself (ν ≫ 1 separates it).
  Eigen::VectorXd top = eig.eigenvectors.col(0);
  CHECK(std::abs(top(0)) > 0.99);
  CHECK(eig.eigenvalues(0) > 50.0);
}

TEST_CASE("gen_spiked is deterministic in its seed") {
  SpikedCovarianceSpec spec = spiked_spec(4, 2.0, 50, 999);
  Eigen::MatrixXd a = gen_spiked(spec).values;
  Eigen::MatrixXd b = gen_spiked(spec).values;
  CHECK((a.array() == b.array()).all());

  spec.seed = 1000;
  Eigen::MatrixXd c = gen_spiked(spec).values;
  CHECK((a - c).norm() > 1e-6);
}

TEST_CASE("gen_spiked validates its spec") {
  SpikedCovarianceSpec spec = spiked_spec(3, 1.0, 10, 1);
  spec.theta *= 2.0;  // not unit norm
  CHECK_THROWS_AS(gen_spiked(spec), std::invalid_argument);

  SpikedCovarianceSpec bad_dim = spiked_spec(3, 1.0, 10, 1);
  bad_dim.theta = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(gen_spiked(bad_dim), DimensionMismatchError);
}

TEST_CASE("gen_target_spike_projection extracts the signal row") {
  rng::Rng rng(93);
  Eigen::MatrixXd X = rng.gaussian_matrix(4, 20);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(4);
  e1(0) = 1.0;
  Eigen::MatrixXd F = gen_target_spike_projection(X, e1);
  REQUIRE(F.rows() == 1);
  CHECK((F.row(0) - X.row(0)).norm() < 1e-12);
}

TEST_CASE("gen_target_random_linear produces a full-rank-covariance target") {
  rng::Rng rng(94);
  Eigen::MatrixXd X = rng.gaussian_matrix(5, 30);
  Eigen::MatrixXd F = gen_target_random_linear(X, 2, 7);
  REQUIRE(F.rows() == 2);
  REQUIRE(F.cols() == 30);

  matrixkit::SymEig eig = matrixkit::sym_eig(matrixkit::sample_covariance(F));
  CHECK(eig.eigenvalues(1) > 1e-8 * eig.eigenvalues(0));

  // Same seed, same target.
  CHECK((F - gen_target_random_linear(X, 2, 7)).norm() == 0.0);
}

TEST_CASE("targets on constant data are rejected") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 10);  // identical points
  CHECK_THROWS_AS(gen_target_random_linear(X, 2, 7),
                  RankDeficientTargetError);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
  e1(0) = 1.0;
  CHECK_THROWS_AS(gen_target_spike_projection(X, e1),
                  RankDeficientTargetError);
}

TEST_CASE("pca_reduce_rows keeps the dominant directions") {
  rng::Rng rng(95);

  SUBCASE("shape and full-dimension behavior") {
    Eigen::MatrixXd F = rng.gaussian_matrix(4, 100);
    Eigen::MatrixXd R = pca_reduce_rows(F, 2);
    CHECK(R.rows() == 2);
    CHECK(R.cols() == 100);
    // Keeping every component only rotates and centers the rows.
    CHECK(evalkit::affine_equivalent(pca_reduce_rows(F, 4), F, 1e-8));
  }
  SUBCASE("a strong signal row survives reduction to one dimension") {
    Eigen::MatrixXd signal = 10.0 * rng.gaussian_matrix(1, 200);
    Eigen::MatrixXd F(3, 200);
    F.row(0) = signal + 0.01 * rng.gaussian_matrix(1, 200);
    F.row(1) = 0.01 * rng.gaussian_matrix(1, 200);
    F.row(2) = -signal + 0.01 * rng.gaussian_matrix(1, 200);
    Eigen::MatrixXd R = pca_reduce_rows(F, 1);

    // Correlation with the planted signal is essentially perfect.
    Eigen::VectorXd a = R.row(0).transpose();
    Eigen::VectorXd b = signal.row(0).transpose();
    a.array() -= a.mean();
    b.array() -= b.mean();
    CHECK(std::abs(a.dot(b)) / (a.norm() * b.norm()) > 0.999);
  }
  SUBCASE("dimension bounds are enforced") {
    Eigen::MatrixXd F = rng.gaussian_matrix(3, 10);
    CHECK_THROWS_AS(pca_reduce_rows(F, 0), DimensionMismatchError);
    CHECK_THROWS_AS(pca_reduce_rows(F, 4), DimensionMismatchError);
  }
}
