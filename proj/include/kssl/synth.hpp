#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "kssl/errors.hpp"
#include "kssl/kernels.hpp"
#include "kssl/matrixkit.hpp"

namespace kssl::synth {

enum class CoefficientSource { Exact, Ridge };

// Representer coefficients C of a model f = C·Φᵀ, with full row rank
// guaranteed at construction time (rank(C) = d).
struct CoefficientMatrix {
  Eigen::MatrixXd C;
  CoefficientSource source = CoefficientSource::Exact;
  double lambda_ridge = 0.0;
};

enum class OperatorFamily { VicregScl, BarlowTwins };

// Augmentation operator T = Φ·M·Φᵀ, stored as its n×n coefficient matrix M.
// gram_fingerprint ties the operator to the Gram matrix it was built from.
struct AugmentationOperator {
  Eigen::MatrixXd M;
  OperatorFamily family = OperatorFamily::VicregScl;
  std::uint64_t gram_fingerprint = 0;
  double lyapunov_residual = 0.0;  // BarlowTwins construction only
};

// How the per-point view pair (T_i, T'_i) is drawn from {identity, T}:
// IndependentPair draws both uniformly and independently; ConditionedDistinct
// draws the ordered pair uniformly from {(identity,T), (T,identity)}.
enum class PairingScheme { IndependentPair, ConditionedDistinct };

struct AugmentationDistribution {
  AugmentationOperator op;
  PairingScheme pairing = PairingScheme::IndependentPair;
};

// Builds a distribution, enforcing that BarlowTwins operators are always
// paired ConditionedDistinct (their loss conditions on T ≠ T').
AugmentationDistribution make_distribution(AugmentationOperator op,
                                           PairingScheme pairing);

// Kernel ridge regression: C = F·(K + λ_ridge·I)⁻¹. With λ_ridge = 0 this is
// exact interpolation (C·K = F) and requires a full-rank Gram matrix.
// Throws RankDeficientTargetError if d ≥ n or if the fitted C has rank < d.
CoefficientMatrix krr_fit(const Eigen::MatrixXd& F,
                          const kernels::GramMatrix& K, double lambda_ridge,
                          double rank_tol = matrixkit::kDefaultRankTol);

// M = Cᵀ·(CKCᵀ)⁻¹·C. Satisfies M·K·M = M (T is an idempotent map) and the
// invariance identity C·K·M·K = C·K; eigenvalues of MK are d ones and n−d
// zeros.
AugmentationOperator build_vicreg_scl_operator(const CoefficientMatrix& C,
                                               const kernels::GramMatrix& K);

// M = K^{−1/2}·B·K^{−1/2}, where B solves the continuous-time Lyapunov
// equation K·B + B·Kᵀ = 2n·K^{1/2}·Cᵀ(CKCᵀ)⁻²C·K^{1/2}. The resulting views
// make the symmetrized cross-correlation of C's representations the identity:
// C·[KCᵀ(CKCᵀ)⁻²CK]·Cᵀ = I.
AugmentationOperator build_barlow_twins_operator(const CoefficientMatrix& C,
                                                 const kernels::GramMatrix& K);

// Coefficients of the augmented points: M·K_cross, column j describing the
// Hilbert-space point Φ·θ_j for query x̂_j. The Gram matrix must be the one
// the operator was built from (fingerprint check).
Eigen::MatrixXd augment_coefficients(const AugmentationOperator& op,
                                     const kernels::GramMatrix& K,
                                     const Eigen::MatrixXd& K_cross);

// Representation of the Hilbert-space point Φ·θ under the model C_model·Φᵀ:
// C_model·K·θ (all kernel-trick, no feature space materialized).
Eigen::VectorXd representation_of_augmented(const Eigen::MatrixXd& C_model,
                                            const kernels::GramMatrix& K,
                                            const Eigen::VectorXd& theta);

}  // namespace kssl::synth
