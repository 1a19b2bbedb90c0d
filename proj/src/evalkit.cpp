#include "kssl/evalkit.hpp"

#include <cmath>

namespace kssl::evalkit {

ProcrustesReport procrustes(const Eigen::MatrixXd& F,
                            const Eigen::MatrixXd& Fstar) {
  if (F.rows() != Fstar.rows() || F.cols() != Fstar.cols())
    throw DimensionMismatchError("procrustes: shapes differ");
  const double n = static_cast<double>(F.cols());

  // argmin over orthogonal Q of ‖F − Q·Fstar‖_F = U·Vᵀ from F·Fstarᵀ = UΣVᵀ.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      F * Fstar.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);

  ProcrustesReport out;
  out.Q = svd.matrixU() * svd.matrixV().transpose();
  out.distance = (F - out.Q * Fstar).norm() / n;
  return out;
}

WhitenResult whiten(const Eigen::MatrixXd& F, WhitenMode mode,
                    double rank_tol) {
  if (F.rows() < 1 || F.cols() < 1)
    throw DimensionMismatchError("whiten: empty matrix");

  WhitenResult out;
  if (mode == WhitenMode::Covariance) {
    out.b = F.rowwise().mean();
    const Eigen::MatrixXd cov = matrixkit::sample_covariance(F);
    out.W = matrixkit::matrix_power_sym(cov, -0.5, rank_tol);
    out.Fw = out.W * (F.colwise() - out.b);
  } else {
    out.b = Eigen::VectorXd::Zero(F.rows());
    const Eigen::MatrixXd corr =
        (F * F.transpose()) / static_cast<double>(F.cols());
    out.W = matrixkit::matrix_power_sym(corr, -0.5, rank_tol);
    out.Fw = out.W * F;
  }
  return out;
}

bool affine_equivalent(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                       double tol) {
  if (F.rows() != G.rows() || F.cols() != G.cols())
    throw DimensionMismatchError("affine_equivalent: shapes differ");
  const Eigen::Index d = F.rows();
  const Eigen::Index n = F.cols();
  if (n <= d)
    throw DimensionMismatchError(
        "affine_equivalent: need more points than dimensions");

  // Least squares for [A b] with the design matrix [G; 1ᵀ].
  Eigen::MatrixXd design(d + 1, n);
  design.topRows(d) = G;
  design.bottomRows(1).setOnes();
  const Eigen::MatrixXd Ab = F * matrixkit::pinv(design);
  const Eigen::MatrixXd A = Ab.leftCols(d);
  const Eigen::VectorXd b = Ab.col(d);

  const double residual =
      (F - (A * G + b * Eigen::RowVectorXd::Ones(n))).norm() /
      static_cast<double>(n);
  if (residual > tol) return false;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  return smin > 0.0 && smax / smin < 1e8;
}

bool whitening_solution_set_check(const Eigen::MatrixXd& Gamma,
                                  const Eigen::MatrixXd& W, double tol) {
  if (Gamma.rows() != Gamma.cols() || W.rows() != W.cols() ||
      W.rows() != Gamma.rows())
    throw DimensionMismatchError("whitening_solution_set_check: shapes differ");
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(W.rows(), W.cols());
  return (W * Gamma * W.transpose() - I).cwiseAbs().maxCoeff() <= tol;
}

Eigen::MatrixXd whitening_solution(const Eigen::MatrixXd& Gamma,
                                   const Eigen::MatrixXd& Q) {
  const matrixkit::SymEig eig = matrixkit::sym_eig(Gamma);
  const double lambda_max = eig.eigenvalues(0);
  const double lambda_min = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (lambda_max <= 0.0 || lambda_min <= matrixkit::kDefaultRankTol * lambda_max)
    throw SingularMatrixError("whitening_solution: Gamma not positive definite");
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues.cwiseSqrt().cwiseInverse();
  return Q * inv_sqrt.asDiagonal() * eig.eigenvectors.transpose();
}

Eigen::MatrixXd matched_covariance_baseline(const Eigen::MatrixXd& F,
                                            rng::Rng& rng) {
  const Eigen::MatrixXd cov = matrixkit::sample_covariance(F);
  // Symmetric PSD factor; tolerant of semidefinite covariance, unlike LLT.
  const Eigen::MatrixXd L = matrixkit::matrix_power_sym(cov, 0.5);
  return L * rng.gaussian_matrix(F.rows(), F.cols());
}

Eigen::MatrixXd random_orthogonal(Eigen::Index d, rng::Rng& rng) {
  const Eigen::MatrixXd G = rng.gaussian_matrix(d, d);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix signs so the factorization is unique (diag(R) > 0).
  for (Eigen::Index j = 0; j < d; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

}  // namespace kssl::evalkit
