#pragma once

#include <Eigen/Dense>

#include "kssl/errors.hpp"

namespace kssl::matrixkit {

// Relative tolerance used for every rank decision in the library
// (singular values / eigenvalues below rank_tol times the largest are
// treated as zero).
inline constexpr double kDefaultRankTol = 1e-10;

// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending,
// eigenvectors in the matching column order (A = U diag(λ) Uᵀ).
struct SymEig {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

// Solution of the continuous-time Lyapunov equation K B + B Kᵀ = RHS
// together with the achieved residual ‖KB + BKᵀ − RHS‖_F.
struct LyapunovSolution {
  Eigen::MatrixXd B;
  double residual_norm = 0.0;
};

// Spectral decomposition of a symmetric matrix. Throws NonSymmetricError if
// ‖A − Aᵀ‖_F exceeds sym_tol · max(1, ‖A‖_F).
SymEig sym_eig(const Eigen::MatrixXd& A, double sym_tol = 1e-10);

// U diag(λ^p) Uᵀ for symmetric PSD A. Fractional powers clamp tiny negative
// eigenvalues to zero; negative powers require A numerically full rank
// (smallest eigenvalue > rank_tol · largest), else SingularMatrixError.
Eigen::MatrixXd matrix_power_sym(const Eigen::MatrixXd& A, double p,
                                 double rank_tol = kDefaultRankTol);

// Moore–Penrose pseudo-inverse via SVD; singular values ≤ rank_tol · σ_max
// are truncated. The zero matrix maps to the (transposed) zero matrix.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& A,
                     double rank_tol = kDefaultRankTol);

// Unique solution of K B + B Kᵀ = RHS for symmetric positive definite K:
// diagonalize K = U Λ Uᵀ, transform R̃ = Uᵀ·RHS·U, divide entrywise by
// λ_i + λ_j, and transform back. Throws SingularMatrixError if K is not
// numerically PD and NonSymmetricError if either input is asymmetric.
LyapunovSolution lyapunov_solve(const Eigen::MatrixXd& K,
                                const Eigen::MatrixXd& RHS,
                                double rank_tol = kDefaultRankTol);

// H = I − (1/n)·1·1ᵀ. Right-multiplying a d×n matrix by H subtracts row means.
Eigen::MatrixXd centering_matrix(Eigen::Index n);

// Biased sample covariance of the columns of Z: (1/n)(ZH)(ZH)ᵀ.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& Z);

}  // namespace kssl::matrixkit
