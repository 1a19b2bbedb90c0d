#include "kssl/synth.hpp"

#include <stdexcept>

namespace kssl::synth {

namespace {

// (CKCᵀ)⁻¹ with an explicit positive-definiteness check; CKCᵀ is d×d and
// tiny, so a full eigendecomposition is the robust route.
Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& S, const char* who) {
  const matrixkit::SymEig eig = matrixkit::sym_eig(0.5 * (S + S.transpose()));
  const double lambda_max = eig.eigenvalues(0);
  const double lambda_min = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (lambda_max <= 0.0 ||
      lambda_min <= matrixkit::kDefaultRankTol * lambda_max)
    throw SingularMatrixError(std::string(who) +
                              ": CKCᵀ is numerically singular");
  return eig.eigenvectors * eig.eigenvalues.cwiseInverse().asDiagonal() *
         eig.eigenvectors.transpose();
}

void require_operator_inputs(const CoefficientMatrix& C,
                             const kernels::GramMatrix& K, const char* who) {
  if (C.C.cols() != K.K.rows())
    throw DimensionMismatchError(std::string(who) +
                                 ": C and K disagree on n");
}

}  // namespace

AugmentationDistribution make_distribution(AugmentationOperator op,
                                           PairingScheme pairing) {
  if (op.family == OperatorFamily::BarlowTwins &&
      pairing != PairingScheme::ConditionedDistinct)
    throw std::invalid_argument(
        "make_distribution: BarlowTwins operators require "
        "ConditionedDistinct pairing");
  AugmentationDistribution dist;
  dist.op = std::move(op);
  dist.pairing = pairing;
  return dist;
}

CoefficientMatrix krr_fit(const Eigen::MatrixXd& F,
                          const kernels::GramMatrix& K, double lambda_ridge,
                          double rank_tol) {
  const Eigen::Index d = F.rows();
  const Eigen::Index n = K.K.rows();
  if (F.cols() != n)
    throw DimensionMismatchError("krr_fit: F and K disagree on n");
  if (lambda_ridge < 0.0)
    throw std::invalid_argument("krr_fit: lambda_ridge must be nonnegative");
  if (d >= n)
    throw RankDeficientTargetError(
        "krr_fit: target dimension d must be smaller than the sample count n");
  if (lambda_ridge == 0.0 && !K.full_rank)
    throw SingularMatrixError(
        "krr_fit: exact interpolation needs a full-rank Gram matrix");

  Eigen::MatrixXd A = K.K;
  A.diagonal().array() += lambda_ridge;
  // A is symmetric positive definite here; Cᵀ = A⁻¹Fᵀ via Cholesky.
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw SingularMatrixError("krr_fit: K + λI is not positive definite");

  CoefficientMatrix out;
  out.C = llt.solve(F.transpose()).transpose();
  out.source =
      lambda_ridge == 0.0 ? CoefficientSource::Exact : CoefficientSource::Ridge;
  out.lambda_ridge = lambda_ridge;

  // Full row rank of C is what the operator constructions rely on.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.C);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() < d || sv(d - 1) <= rank_tol * sv(0))
    throw RankDeficientTargetError(
        "krr_fit: fitted coefficients are rank-deficient (redundant target "
        "rows)");
  return out;
}

AugmentationOperator build_vicreg_scl_operator(const CoefficientMatrix& C,
                                               const kernels::GramMatrix& K) {
  require_operator_inputs(C, K, "build_vicreg_scl_operator");
  const Eigen::MatrixXd S = C.C * K.K * C.C.transpose();
  const Eigen::MatrixXd S_inv = inverse_spd(S, "build_vicreg_scl_operator");

  AugmentationOperator op;
  op.M = C.C.transpose() * S_inv * C.C;
  op.family = OperatorFamily::VicregScl;
  op.gram_fingerprint = K.fingerprint;
  return op;
}

AugmentationOperator build_barlow_twins_operator(const CoefficientMatrix& C,
                                                 const kernels::GramMatrix& K) {
  require_operator_inputs(C, K, "build_barlow_twins_operator");
  if (!K.full_rank)
    throw SingularMatrixError(
        "build_barlow_twins_operator: K^{±1/2} needs a full-rank Gram matrix");

  const double n = static_cast<double>(K.K.rows());
  const Eigen::MatrixXd K_half = matrixkit::matrix_power_sym(K.K, 0.5);
  const Eigen::MatrixXd K_neg_half = matrixkit::matrix_power_sym(K.K, -0.5);

  const Eigen::MatrixXd S = C.C * K.K * C.C.transpose();
  const Eigen::MatrixXd S_inv = inverse_spd(S, "build_barlow_twins_operator");
  const Eigen::MatrixXd rhs =
      2.0 * n * K_half * C.C.transpose() * S_inv * S_inv * C.C * K_half;

  const matrixkit::LyapunovSolution lyap = matrixkit::lyapunov_solve(K.K, rhs);

  AugmentationOperator op;
  op.M = K_neg_half * lyap.B * K_neg_half;
  op.M = 0.5 * (op.M + op.M.transpose()).eval();
  op.family = OperatorFamily::BarlowTwins;
  op.gram_fingerprint = K.fingerprint;
  op.lyapunov_residual = lyap.residual_norm;
  return op;
}

Eigen::MatrixXd augment_coefficients(const AugmentationOperator& op,
                                     const kernels::GramMatrix& K,
                                     const Eigen::MatrixXd& K_cross) {
  if (op.gram_fingerprint != K.fingerprint)
    throw GramMismatchError(
        "augment_coefficients: operator was built from a different Gram "
        "matrix");
  if (K_cross.rows() != op.M.cols())
    throw DimensionMismatchError(
        "augment_coefficients: cross-Gram row count must equal n");
  return op.M * K_cross;
}

Eigen::VectorXd representation_of_augmented(const Eigen::MatrixXd& C_model,
                                            const kernels::GramMatrix& K,
                                            const Eigen::VectorXd& theta) {
  if (C_model.cols() != K.K.rows())
    throw DimensionMismatchError(
        "representation_of_augmented: C and K disagree on n");
  if (theta.size() != K.K.rows())
    throw DimensionMismatchError(
        "representation_of_augmented: theta length must equal n");
  return C_model * (K.K * theta);
}

}  // namespace kssl::synth
