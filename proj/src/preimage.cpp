#include "kssl/preimage.hpp"

namespace kssl::preimage {

namespace {

// Shared setup for single and batch pre-images: the m×n map
// (Xᵀ)⁺(XᵀX − μ_P·K⁻¹) applied to coefficient vectors.
Eigen::MatrixXd preimage_map(const Eigen::MatrixXd& X,
                             const kernels::GramMatrix& K,
                             const PreimageConfig& cfg) {
  if (X.cols() != K.K.rows())
    throw DimensionMismatchError("preimage: X and K disagree on n");
  if (cfg.mu_p < 0.0)
    throw std::invalid_argument("preimage: mu_p must be nonnegative");

  Eigen::MatrixXd target = X.transpose() * X;
  if (cfg.mu_p > 0.0) {
    if (!K.full_rank)
      throw SingularMatrixError(
          "preimage: mu_p > 0 needs an invertible Gram matrix");
    target -= cfg.mu_p * matrixkit::matrix_power_sym(K.K, -1.0, cfg.rank_tol);
  }
  return matrixkit::pinv(X.transpose(), cfg.rank_tol) * target;
}

}  // namespace

Eigen::VectorXd preimage(const Eigen::MatrixXd& X,
                         const kernels::GramMatrix& K,
                         const Eigen::VectorXd& theta,
                         const PreimageConfig& cfg) {
  if (theta.size() != X.cols())
    throw DimensionMismatchError("preimage: theta length must equal n");
  return preimage_map(X, K, cfg) * theta;
}

Eigen::MatrixXd preimage_batch(const Eigen::MatrixXd& X,
                               const kernels::GramMatrix& K,
                               const Eigen::MatrixXd& Theta,
                               const PreimageConfig& cfg) {
  if (Theta.rows() != X.cols())
    throw DimensionMismatchError("preimage_batch: Theta rows must equal n");
  return preimage_map(X, K, cfg) * Theta;
}

}  // namespace kssl::preimage
