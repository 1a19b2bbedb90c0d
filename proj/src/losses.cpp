#include "kssl/losses.hpp"

#include <cmath>

#include "kssl/matrixkit.hpp"

namespace kssl::losses {

namespace {

void require_same_shape(const RepresentationMatrix& Z,
                        const RepresentationMatrix& Zp, const char* who) {
  if (Z.rows() != Zp.rows() || Z.cols() != Zp.cols())
    throw DimensionMismatchError(std::string(who) +
                                 ": view matrices have different shapes");
  if (Z.rows() < 1 || Z.cols() < 1)
    throw DimensionMismatchError(std::string(who) + ": empty representation");
}

double variance_term(const Eigen::MatrixXd& cov, const VicregWeights& w) {
  const double d = static_cast<double>(cov.rows());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    const double cii = cov(i, i);
    if (w.variance_mode == VarianceMode::Variance) {
      acc += (1.0 - cii) * (1.0 - cii);
    } else {
      acc += std::max(0.0, 1.0 - std::sqrt(cii + w.epsilon));
    }
  }
  return acc / d;
}

double covariance_term(const Eigen::MatrixXd& cov) {
  const double d = static_cast<double>(cov.rows());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    for (Eigen::Index j = 0; j < cov.cols(); ++j)
      if (i != j) acc += cov(i, j) * cov(i, j);
  return acc / d;
}

Eigen::MatrixXd cross_correlation(const RepresentationMatrix& Z,
                                  const RepresentationMatrix& Zp) {
  const double n = static_cast<double>(Z.cols());
  return (Z * Zp.transpose() + Zp * Z.transpose()) / (2.0 * n);
}

}  // namespace

double loss_vicreg(const RepresentationMatrix& Z,
                   const RepresentationMatrix& Zp, const VicregWeights& w) {
  require_same_shape(Z, Zp, "loss_vicreg");
  const double n = static_cast<double>(Z.cols());

  const double s = (Z - Zp).squaredNorm() / n;
  const Eigen::MatrixXd cov_z = matrixkit::sample_covariance(Z);
  const Eigen::MatrixXd cov_zp = matrixkit::sample_covariance(Zp);

  return w.lambda * s + w.mu * (variance_term(cov_z, w) + variance_term(cov_zp, w)) +
         w.nu * (covariance_term(cov_z) + covariance_term(cov_zp));
}

double loss_barlow_twins(const RepresentationMatrix& Z,
                         const RepresentationMatrix& Zp, double lambda,
                         bool squared_offdiag) {
  require_same_shape(Z, Zp, "loss_barlow_twins");
  const Eigen::MatrixXd C = cross_correlation(Z, Zp);

  double diag = 0.0, offdiag = 0.0;
  for (Eigen::Index i = 0; i < C.rows(); ++i) {
    diag += (1.0 - C(i, i)) * (1.0 - C(i, i));
    for (Eigen::Index j = 0; j < C.cols(); ++j) {
      if (i == j) continue;
      offdiag += squared_offdiag ? C(i, j) * C(i, j)
                                 : (1.0 - C(i, j)) * (1.0 - C(i, j));
    }
  }
  return diag + lambda * offdiag;
}

double loss_scl(const RepresentationMatrix& Z, const RepresentationMatrix& Zp) {
  require_same_shape(Z, Zp, "loss_scl");
  const double n = static_cast<double>(Z.cols());

  const Eigen::MatrixXd P = Z.transpose() * Zp;  // P_ij = z_iᵀ z'_j
  double offdiag_sq = 0.0;
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      if (i != j) offdiag_sq += P(i, j) * P(i, j);

  double norm4 = 0.0;
  for (Eigen::Index i = 0; i < Z.cols(); ++i) {
    const double a = Z.col(i).squaredNorm();
    const double b = Zp.col(i).squaredNorm();
    norm4 += a * a + b * b;
  }

  return offdiag_sq / (n * n) - 2.0 * P.trace() / n + norm4 / (2.0 * n * n);
}

bool zero_loss_conditions(LossKind kind, const RepresentationMatrix& Z,
                          const RepresentationMatrix& Zp, double tol) {
  require_same_shape(Z, Zp, "zero_loss_conditions");
  const Eigen::Index d = Z.rows();
  const double n = static_cast<double>(Z.cols());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);

  const bool views_equal = ((Z - Zp).cwiseAbs().maxCoeff()) <= tol;

  switch (kind) {
    case LossKind::Vicreg:
    case LossKind::VicregOriginal: {
      const Eigen::MatrixXd cov = matrixkit::sample_covariance(Z);
      return views_equal && (cov - I).cwiseAbs().maxCoeff() <= tol;
    }
    case LossKind::Scl: {
      const Eigen::MatrixXd corr = (Z * Z.transpose()) / n;
      return views_equal && (corr - I).cwiseAbs().maxCoeff() <= tol;
    }
    case LossKind::BarlowTwins: {
      const Eigen::MatrixXd C = cross_correlation(Z, Zp);
      return (C.array() - 1.0).abs().maxCoeff() <= tol;
    }
  }
  return false;
}

}  // namespace kssl::losses
