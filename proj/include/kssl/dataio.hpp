#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "kssl/errors.hpp"

namespace kssl::dataio {

// Dataset container: column j of `values` is point x_j.
struct DataMatrix {
  Eigen::MatrixXd values;
};

// Gaussian data with covariance ν·θθᵀ + I: an isotropic bulk plus one
// planted signal direction of strength ν.
struct SpikedCovarianceSpec {
  Eigen::Index m = 0;      // ambient dimension
  double nu = 0.0;         // spike strength
  Eigen::VectorXd theta;   // unit-norm signal direction
  Eigen::Index n = 0;      // sample count
  std::uint64_t seed = 0;
};

enum class MatrixFormat { Csv, Mat64 };

// CSV: comma-separated decimal rows, one optional header line auto-detected.
// MAT64: "KSSL" magic, u32 row/col counts (little-endian), then row-major
// f64 payload; the declared size must match the file length exactly.
Eigen::MatrixXd read_matrix(const std::string& path, MatrixFormat format);

// CSV is written with 17 significant digits so values survive the round trip
// within 1e-12; MAT64 round-trips bitwise.
void write_matrix(const Eigen::MatrixXd& A, const std::string& path,
                  MatrixFormat format);

// Infers the format from the path suffix (".csv" / ".mat64");
// throws ParseError for anything else.
MatrixFormat format_from_path(const std::string& path);

// n i.i.d. samples from N(0, ν·θθᵀ + I); deterministic in spec.seed.
DataMatrix gen_spiked(const SpikedCovarianceSpec& spec);

// Target representations for a dataset X (m×n):
//   RandomLinear: F = G·X with Gaussian G (d×m), drawn from `seed`;
//   SpikeProjection: F = θᵀ·X (d = 1).
// Both verify the produced target has full-rank covariance, else
// RankDeficientTargetError.
Eigen::MatrixXd gen_target_random_linear(const Eigen::MatrixXd& X,
                                         Eigen::Index d, std::uint64_t seed);
Eigen::MatrixXd gen_target_spike_projection(const Eigen::MatrixXd& X,
                                            const Eigen::VectorXd& theta);

// Reduce an ingested target to d rows by projecting onto the top-d principal
// components of its rows (rows centered first).
Eigen::MatrixXd pca_reduce_rows(const Eigen::MatrixXd& F, Eigen::Index d);

}  // namespace kssl::dataio
