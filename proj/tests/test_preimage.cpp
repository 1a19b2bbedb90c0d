#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "kssl/kernels.hpp"
#include "kssl/matrixkit.hpp"
#include "kssl/preimage.hpp"
#include "kssl/rng.hpp"

using namespace kssl;
using namespace kssl::kernels;
using kssl::preimage::PreimageConfig;

namespace {

PreimageConfig config(double mu_p) {
  PreimageConfig cfg;
  cfg.mu_p = mu_p;
  return cfg;
}

// Squared data-fit residual the pre-image minimizes over x.
double fit_residual(const Eigen::MatrixXd& X, const kernels::GramMatrix& K,
                    const Eigen::VectorXd& theta, double mu_p,
                    const Eigen::VectorXd& x) {
  Eigen::MatrixXd target = X.transpose() * X;
  if (mu_p > 0.0) target -= mu_p * matrixkit::matrix_power_sym(K.K, -1.0);
  return (X.transpose() * x - target * theta).squaredNorm();
}

}  // namespace

TEST_CASE("preimage of a linear-kernel point is the data combination itself") {
  rng::Rng rng(61);
  Eigen::MatrixXd X = rng.gaussian_matrix(3, 5);
  GramMatrix K = gram(KernelSpec::linear(), X);
  Eigen::VectorXd theta = rng.gaussian_vector(5);

  Eigen::VectorXd x = preimage::preimage(X, K, theta, config(0.0));
  CHECK((x - X * theta).norm() < 1e-8 * std::max(1.0, (X * theta).norm()));
}

TEST_CASE("preimage of zero coefficients is the zero vector") {
  rng::Rng rng(62);
  Eigen::MatrixXd X = rng.gaussian_matrix(3, 4);
  GramMatrix K = gram(KernelSpec::rbf(1.0), X);
  Eigen::VectorXd x = preimage::preimage(X, K, Eigen::VectorXd::Zero(4), config(0.0));
  CHECK(x.norm() == 0.0);
}

TEST_CASE("preimage is a local least-squares optimum") {
  rng::Rng rng(63);
  Eigen::MatrixXd X = rng.gaussian_matrix(3, 5);
  GramMatrix K = gram(KernelSpec::rbf(1.0), X);
  REQUIRE(K.full_rank);
  Eigen::VectorXd theta = rng.gaussian_vector(5);
  const double mu_p = 1.0;

  Eigen::VectorXd x = preimage::preimage(X, K, theta, config(mu_p));
  const double base = fit_residual(X, K, theta, mu_p, x);
  for (int j = 0; j < 3; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
    e(j) = 1e-4;
    CHECK(base <= fit_residual(X, K, theta, mu_p, x + e) + 1e-15);
    CHECK(base <= fit_residual(X, K, theta, mu_p, x - e) + 1e-15);
  }
}

TEST_CASE("preimage is linear in the coefficients") {
  rng::Rng rng(64);
  Eigen::MatrixXd X = rng.gaussian_matrix(4, 6);
  GramMatrix K = gram(KernelSpec::rbf(1.0), X);
  Eigen::VectorXd a = rng.gaussian_vector(6);
  Eigen::VectorXd b = rng.gaussian_vector(6);
  PreimageConfig cfg = config(0.5);

  Eigen::VectorXd sum = preimage::preimage(X, K, a + b, cfg);
  Eigen::VectorXd parts = preimage::preimage(X, K, a, cfg) + preimage::preimage(X, K, b, cfg);
  CHECK((sum - parts).norm() < 1e-10);

  Eigen::VectorXd scaled = preimage::preimage(X, K, 3.5 * a, cfg);
  CHECK((scaled - 3.5 * preimage::preimage(X, K, a, cfg)).norm() < 1e-10);
}

TEST_CASE("preimage satisfies the normal equations without regularization") {
  rng::Rng rng(65);
  Eigen::MatrixXd X = rng.gaussian_matrix(3, 7);  // full row rank a.s.
  GramMatrix K = gram(KernelSpec::rbf(1.0), X);
  Eigen::VectorXd theta = rng.gaussian_vector(7);

  Eigen::VectorXd x = preimage::preimage(X, K, theta, config(0.0));
  Eigen::VectorXd lhs = X * (X.transpose() * x);
  Eigen::VectorXd rhs = X * (X.transpose() * X) * theta;
  CHECK((lhs - rhs).norm() <= 1e-8 * std::max(1.0, rhs.norm()));
}

TEST_CASE("preimage requires an invertible Gram when regularized") {
  Eigen::MatrixXd X(2, 3);
  X << 1.0, 1.0, 0.0,  // duplicate points
      0.0, 0.0, 1.0;
  GramMatrix K = gram(KernelSpec::rbf(1.0), X);
  REQUIRE_FALSE(K.full_rank);
  Eigen::VectorXd theta = Eigen::VectorXd::Ones(3);

  CHECK_THROWS_AS(preimage::preimage(X, K, theta, config(1.0)), SingularMatrixError);
  // Without the kernel term the map never touches K⁻¹.
  CHECK_NOTHROW(preimage::preimage(X, K, theta, config(0.0)));
}

TEST_CASE("preimage_batch equals per-column application") {
  rng::Rng rng(66);
  Eigen::MatrixXd X = rng.gaussian_matrix(3, 5);
  GramMatrix K = gram(KernelSpec::rbf(1.0), X);
  Eigen::MatrixXd Theta = rng.gaussian_matrix(5, 4);
  PreimageConfig cfg = config(1.0);

  Eigen::MatrixXd batch = preimage::preimage_batch(X, K, Theta, cfg);
  CHECK(batch.rows() == 3);
  CHECK(batch.cols() == 4);
  for (int j = 0; j < 4; ++j)
    CHECK((batch.col(j) - preimage::preimage(X, K, Theta.col(j), cfg)).norm() < 1e-12);
}

TEST_CASE("preimage validates its shapes") {
  rng::Rng rng(67);
  Eigen::MatrixXd X = rng.gaussian_matrix(3, 5);
  GramMatrix K = gram(KernelSpec::rbf(1.0), X);
  CHECK_THROWS_AS(preimage::preimage(X, K, rng.gaussian_vector(4), config(0.0)),
                  DimensionMismatchError);
  CHECK_THROWS_AS(preimage::preimage_batch(X, K, rng.gaussian_matrix(4, 2), config(0.0)),
                  DimensionMismatchError);
}
