#pragma once

#include <Eigen/Dense>

#include "kssl/errors.hpp"
#include "kssl/kernels.hpp"
#include "kssl/matrixkit.hpp"

namespace kssl::preimage {

// Parameters of the closed-form pre-image map. mu_p weights the kernel
// regularization term; rank_tol feeds the pseudo-inverse.
struct PreimageConfig {
  double mu_p = 1.0;
  double rank_tol = matrixkit::kDefaultRankTol;
};

// Input-space point x' whose feature image best matches the Hilbert-space
// point Φθ: x' = (Xᵀ)⁺ (XᵀX − μ_P·K⁻¹) θ. The minimum-norm least-squares
// solution is returned. Requires a full-rank Gram matrix whenever mu_p > 0
// (K⁻¹ appears), else SingularMatrixError.
Eigen::VectorXd preimage(const Eigen::MatrixXd& X,
                         const kernels::GramMatrix& K,
                         const Eigen::VectorXd& theta,
                         const PreimageConfig& cfg);

// Column-wise batch variant: column j of the result is the pre-image of the
// coefficient vector in column j of Theta.
Eigen::MatrixXd preimage_batch(const Eigen::MatrixXd& X,
                               const kernels::GramMatrix& K,
                               const Eigen::MatrixXd& Theta,
                               const PreimageConfig& cfg);

}  // namespace kssl::preimage
