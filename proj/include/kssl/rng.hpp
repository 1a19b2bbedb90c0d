#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace kssl::rng {

// Deterministic random source shared by generators and the trainer.
// Wraps std::mt19937_64; identical seeds give identical streams on a given
// platform, which is all the reproducibility contracts require.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(engine_);
  }

  double gaussian() {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(engine_);
  }

  // Fair coin; used for per-column view selection.
  bool coin() { return uniform() < 0.5; }

  // d×n matrix of i.i.d. N(0, sd²) entries, filled column by column so the
  // draw order is well defined.
  Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                                  double sd = 1.0) {
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = sd * gaussian();
    return out;
  }

  Eigen::VectorXd gaussian_vector(Eigen::Index n, double sd = 1.0) {
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = sd * gaussian();
    return out;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace kssl::rng
