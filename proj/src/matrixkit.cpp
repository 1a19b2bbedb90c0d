#include "kssl/matrixkit.hpp"

#include <cmath>

namespace kssl::matrixkit {

namespace {

void require_square(const Eigen::MatrixXd& A, const char* who) {
  if (A.rows() != A.cols())
    throw DimensionMismatchError(std::string(who) + ": matrix must be square");
}

void require_symmetric(const Eigen::MatrixXd& A, double tol, const char* who) {
  const double scale = std::max(1.0, A.norm());
  if ((A - A.transpose()).norm() > tol * scale)
    throw NonSymmetricError(std::string(who) + ": matrix is not symmetric");
}

}  // namespace

SymEig sym_eig(const Eigen::MatrixXd& A, double sym_tol) {
  require_square(A, "sym_eig");
  require_symmetric(A, sym_tol, "sym_eig");

  // Average away the asymmetric round-off before factorizing.
  const Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw SingularMatrixError("sym_eig: eigendecomposition failed to converge");

  // Eigen returns ascending order; flip to descending.
  const Eigen::Index n = S.rows();
  SymEig out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.eigenvectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    out.eigenvectors.col(j) = es.eigenvectors().col(n - 1 - j);
  return out;
}

Eigen::MatrixXd matrix_power_sym(const Eigen::MatrixXd& A, double p,
                                 double rank_tol) {
  const SymEig eig = sym_eig(A);
  const double lambda_max = eig.eigenvalues.size() > 0 ? eig.eigenvalues(0) : 0.0;

  if (p < 0.0) {
    const double lambda_min = eig.eigenvalues(eig.eigenvalues.size() - 1);
    if (lambda_max <= 0.0 || lambda_min <= rank_tol * lambda_max)
      throw SingularMatrixError(
          "matrix_power_sym: negative power of a rank-deficient matrix");
  }

  Eigen::VectorXd powered(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < powered.size(); ++i) {
    // PSD input may carry tiny negative eigenvalues from round-off.
    const double lam = std::max(eig.eigenvalues(i), 0.0);
    powered(i) = std::pow(lam, p);
  }
  return eig.eigenvectors * powered.asDiagonal() * eig.eigenvectors.transpose();
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& A, double rank_tol) {
  if (A.size() == 0) return Eigen::MatrixXd(A.cols(), A.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? rank_tol * sv(0) : 0.0;

  Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) inv_sv(i) = 1.0 / sv(i);

  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

LyapunovSolution lyapunov_solve(const Eigen::MatrixXd& K,
                                const Eigen::MatrixXd& RHS,
                                double rank_tol) {
  require_square(K, "lyapunov_solve");
  if (RHS.rows() != K.rows() || RHS.cols() != K.cols())
    throw DimensionMismatchError("lyapunov_solve: RHS shape must match K");
  require_symmetric(RHS, 1e-10, "lyapunov_solve (RHS)");

  const SymEig eig = sym_eig(K);
  const Eigen::Index n = K.rows();
  const double lambda_max = eig.eigenvalues(0);
  const double lambda_min = eig.eigenvalues(n - 1);
  if (lambda_max <= 0.0 || lambda_min <= rank_tol * lambda_max)
    throw SingularMatrixError("lyapunov_solve: K is not positive definite");

  const Eigen::MatrixXd& U = eig.eigenvectors;
  const Eigen::MatrixXd R = 0.5 * (RHS + RHS.transpose());
  const Eigen::MatrixXd Rt = U.transpose() * R * U;

  Eigen::MatrixXd Bt(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      Bt(i, j) = Rt(i, j) / (eig.eigenvalues(i) + eig.eigenvalues(j));

  LyapunovSolution out;
  out.B = U * Bt * U.transpose();
  // Divisor symmetry makes B̃ symmetric; enforce it exactly against round-off.
  out.B = 0.5 * (out.B + out.B.transpose()).eval();
  out.residual_norm = (K * out.B + out.B * K.transpose() - R).norm();
  return out;
}

Eigen::MatrixXd centering_matrix(Eigen::Index n) {
  if (n < 1)
    throw DimensionMismatchError("centering_matrix: n must be positive");
  return Eigen::MatrixXd::Identity(n, n) -
         Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& Z) {
  if (Z.cols() < 1)
    throw DimensionMismatchError("sample_covariance: need at least one column");
  const double n = static_cast<double>(Z.cols());
  const Eigen::VectorXd mean = Z.rowwise().mean();
  const Eigen::MatrixXd Zc = Z.colwise() - mean;
  return (Zc * Zc.transpose()) / n;
}

}  // namespace kssl::matrixkit
