#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "kssl/errors.hpp"
#include "kssl/matrixkit.hpp"

namespace kssl::kernels {

enum class KernelFamily { Rbf, Linear, Polynomial };

// Kernel choice plus its parameters. Use the factory functions; they validate
// the parameter ranges.
struct KernelSpec {
  KernelFamily family = KernelFamily::Rbf;
  double sigma = 1.0;   // RBF length-scale
  int degree = 2;       // polynomial degree
  double offset = 0.0;  // polynomial additive constant

  static KernelSpec rbf(double sigma);
  static KernelSpec linear();
  static KernelSpec polynomial(int degree, double offset);
};

// Gram matrix with its eigenvalue range and a full-rank flag
// (full_rank iff min_eig > rank_tol · max_eig). The fingerprint identifies
// the (kernel, data) pair so downstream operators can detect being applied
// to the wrong Gram matrix.
struct GramMatrix {
  Eigen::MatrixXd K;
  double min_eig = 0.0;
  double max_eig = 0.0;
  bool full_rank = false;
  KernelSpec spec;
  std::uint64_t fingerprint = 0;
};

// κ(x, y) for the chosen kernel:
//   RBF: exp(−‖x−y‖² / (2σ²)); Linear: xᵀy; Polynomial: (xᵀy + offset)^degree.
double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y);

// Gram matrix on the columns of X (m×n, column j = point x_j). Symmetry is
// enforced by averaging with the transpose; `jitter` (default 0) is added to
// the diagonal for numerically borderline data.
GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& X,
                double jitter = 0.0,
                double rank_tol = matrixkit::kDefaultRankTol);

// n×k matrix of kernel values between the columns of X (m×n) and Xhat (m×k).
Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& Xhat);

}  // namespace kssl::kernels
