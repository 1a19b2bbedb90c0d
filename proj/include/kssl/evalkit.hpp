#pragma once

#include <Eigen/Dense>

#include "kssl/errors.hpp"
#include "kssl/matrixkit.hpp"
#include "kssl/rng.hpp"

namespace kssl::evalkit {

// Result of the orthogonal Procrustes alignment of F onto Fstar:
// distance = (1/n)‖F − Q·Fstar‖_F at the optimal orthogonal Q
// (reflections allowed).
struct ProcrustesReport {
  double distance = 0.0;
  Eigen::MatrixXd Q;
};

ProcrustesReport procrustes(const Eigen::MatrixXd& F,
                            const Eigen::MatrixXd& Fstar);

// Covariance mode: subtract row means and apply the symmetric inverse square
// root of the sample covariance, so cov(Fw) = I.
// Correlation mode: no centering; apply ((1/n)FFᵀ)^{−1/2}, so (1/n)FwFwᵀ = I.
enum class WhitenMode { Covariance, Correlation };

struct WhitenResult {
  Eigen::MatrixXd W;   // whitening map
  Eigen::VectorXd b;   // subtracted offset (zero in Correlation mode)
  Eigen::MatrixXd Fw;  // W·(F − b·1ᵀ)
};

WhitenResult whiten(const Eigen::MatrixXd& F, WhitenMode mode,
                    double rank_tol = matrixkit::kDefaultRankTol);

// True iff some invertible A and offset b satisfy F ≈ A·G + b·1ᵀ:
// the least-squares fit must reach residual (1/n)‖·‖_F ≤ tol and A must be
// well conditioned (condition number < 1e8).
bool affine_equivalent(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                       double tol);

// Verifies W·Γ·Wᵀ = I within tol. Every solution has the form Q·S^{−1/2}·Uᵀ
// for Γ = U·S·Uᵀ and orthogonal Q; whitening_solution(Gamma, Q) generates one
// for a given Q so tests can sweep the solution set.
bool whitening_solution_set_check(const Eigen::MatrixXd& Gamma,
                                  const Eigen::MatrixXd& W, double tol = 1e-8);
Eigen::MatrixXd whitening_solution(const Eigen::MatrixXd& Gamma,
                                   const Eigen::MatrixXd& Q);

// Random representations with the same covariance as F (via a factor of
// cov(F)), the comparison baseline for recovery traces.
Eigen::MatrixXd matched_covariance_baseline(const Eigen::MatrixXd& F,
                                            rng::Rng& rng);

// Haar-ish random orthogonal d×d matrix (QR of a Gaussian matrix with sign
// fixup); test helper for sweeping equivalence classes.
Eigen::MatrixXd random_orthogonal(Eigen::Index d, rng::Rng& rng);

}  // namespace kssl::evalkit
