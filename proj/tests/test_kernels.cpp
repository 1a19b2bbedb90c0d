#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "kssl/kernels.hpp"
#include "kssl/rng.hpp"

using namespace kssl;
using namespace kssl::kernels;

TEST_CASE("kernel_eval closed forms") {
  Eigen::VectorXd x(2), y(2);

  SUBCASE("rbf at zero distance is one") {
    x << 0.7, -0.3;
    CHECK(kernel_eval(KernelSpec::rbf(2.5), x, x) == doctest::Approx(1.0));
  }
  SUBCASE("linear kernel is the dot product") {
    x << 1.0, 2.0;
    y << 3.0, 4.0;
    CHECK(kernel_eval(KernelSpec::linear(), x, y) == doctest::Approx(11.0));
  }
  SUBCASE("rbf with unit length-scale at squared distance two") {
    x << 1.0, 0.0;
    y << 0.0, 1.0;  // ‖x−y‖² = 2, σ = 1 → exp(−1)
    CHECK(kernel_eval(KernelSpec::rbf(1.0), x, y) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  }
  SUBCASE("polynomial kernel is (xᵀy + offset)^degree") {
    x << 1.0, 2.0;
    y << 3.0, 4.0;
    CHECK(kernel_eval(KernelSpec::polynomial(2, 1.0), x, y) ==
          doctest::Approx(144.0));
    CHECK(kernel_eval(KernelSpec::polynomial(3, 0.0), x, y) ==
          doctest::Approx(1331.0));
  }
  SUBCASE("mismatched point dimensions are rejected") {
    Eigen::VectorXd z(3);
    z << 1.0, 2.0, 3.0;
    x << 1.0, 2.0;
    CHECK_THROWS_AS(kernel_eval(KernelSpec::linear(), x, z),
                    DimensionMismatchError);
  }
}

TEST_CASE("kernel spec factories validate their parameters") {
  CHECK_THROWS_AS(KernelSpec::rbf(0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::rbf(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::polynomial(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::polynomial(2, -0.5), std::invalid_argument);
  CHECK_NOTHROW(KernelSpec::polynomial(1, 0.0));
}

TEST_CASE("gram on a single point") {
  Eigen::MatrixXd X(3, 1);
  X << 0.1, 0.2, 0.3;
  GramMatrix g = gram(KernelSpec::rbf(1.0), X);
  CHECK(g.K.rows() == 1);
  CHECK(g.K(0, 0) == doctest::Approx(1.0));
  CHECK(g.full_rank);
}

TEST_CASE("gram flags duplicate points as rank deficient") {
  Eigen::MatrixXd X(2, 2);
  X << 0.5, 0.5, -1.0, -1.0;  // two identical columns
  GramMatrix g = gram(KernelSpec::rbf(1.0), X);
  CHECK(g.K(0, 0) == doctest::Approx(1.0));
  CHECK(g.K(0, 1) == doctest::Approx(1.0));
  CHECK(g.K(1, 0) == doctest::Approx(1.0));
  CHECK(g.K(1, 1) == doctest::Approx(1.0));
  CHECK_FALSE(g.full_rank);
  CHECK(g.min_eig == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("gram matches the entrywise kernel oracle on random points") {
  rng::Rng rng(21);
  Eigen::MatrixXd X = rng.gaussian_matrix(3, 5);
  for (const KernelSpec& spec :
       {KernelSpec::rbf(1.0), KernelSpec::linear(),
        KernelSpec::polynomial(2, 1.0)}) {
    GramMatrix g = gram(spec, X);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        CHECK(g.K(i, j) ==
              doctest::Approx(kernel_eval(spec, X.col(i), X.col(j)))
                  .epsilon(1e-12));
    CHECK((g.K - g.K.transpose()).norm() < 1e-10);
    CHECK(g.min_eig >= -1e-10 * std::max(1.0, g.max_eig));
  }
  // Distinct random points with the RBF kernel give a full-rank Gram.
  CHECK(gram(KernelSpec::rbf(1.0), X).full_rank);
}

TEST_CASE("gram of the linear kernel equals X'X") {
  rng::Rng rng(22);
  Eigen::MatrixXd X = rng.gaussian_matrix(4, 6);
  GramMatrix g = gram(KernelSpec::linear(), X);
  CHECK((g.K - X.transpose() * X).norm() < 1e-12);
}

TEST_CASE("gram jitter adds to the diagonal only") {
  rng::Rng rng(23);
  Eigen::MatrixXd X = rng.gaussian_matrix(3, 4);
  GramMatrix plain = gram(KernelSpec::rbf(1.0), X);
  GramMatrix jittered = gram(KernelSpec::rbf(1.0), X, 0.25);
  Eigen::MatrixXd expected =
      plain.K + 0.25 * Eigen::MatrixXd::Identity(4, 4);
  CHECK((jittered.K - expected).norm() < 1e-12);
}

TEST_CASE("gram rejects an empty sample") {
  Eigen::MatrixXd X(3, 0);
  CHECK_THROWS_AS(gram(KernelSpec::rbf(1.0), X), DimensionMismatchError);
}

TEST_CASE("cross_gram special cases and oracle") {
  rng::Rng rng(24);
  Eigen::MatrixXd X = rng.gaussian_matrix(3, 4);

  SUBCASE("self cross-Gram equals the Gram matrix") {
    KernelSpec spec = KernelSpec::rbf(1.0);
    Eigen::MatrixXd cross = cross_gram(spec, X, X);
    CHECK((cross - gram(spec, X).K).norm() < 1e-12);
  }
  SUBCASE("empty evaluation batch yields an n by 0 matrix") {
    Eigen::MatrixXd empty(3, 0);
    Eigen::MatrixXd cross = cross_gram(KernelSpec::linear(), X, empty);
    CHECK(cross.rows() == 4);
    CHECK(cross.cols() == 0);
  }
  SUBCASE("entries match the pairwise kernel oracle") {
    Eigen::MatrixXd Xhat = rng.gaussian_matrix(3, 2);
    for (const KernelSpec& spec :
         {KernelSpec::rbf(0.7), KernelSpec::linear(),
          KernelSpec::polynomial(3, 0.5)}) {
      Eigen::MatrixXd cross = cross_gram(spec, X, Xhat);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j)
          CHECK(cross(i, j) ==
                doctest::Approx(kernel_eval(spec, X.col(i), Xhat.col(j)))
                    .epsilon(1e-12));
    }
  }
  SUBCASE("mismatched input dimensions are rejected") {
    Eigen::MatrixXd Xhat = rng.gaussian_matrix(2, 2);
    CHECK_THROWS_AS(cross_gram(KernelSpec::linear(), X, Xhat),
                    DimensionMismatchError);
  }
}
