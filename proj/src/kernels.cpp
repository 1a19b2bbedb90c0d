#include "kssl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kssl::kernels {

namespace {

// FNV-1a over a byte view; used for the Gram fingerprint.
void hash_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

void hash_u64(std::uint64_t& h, std::uint64_t v) { hash_bytes(h, &v, 8); }

// Hash a double after rounding to 1e-12 so fingerprints tolerate sub-epsilon
// reconstruction noise but nothing visible at the library's tolerances.
void hash_rounded(std::uint64_t& h, double v) {
  const double scaled = v * 1e12;
  const double clamped =
      std::clamp(scaled, -9.0e18, 9.0e18);  // keep llround defined
  const long long r = std::llround(clamped);
  hash_bytes(h, &r, sizeof(r));
}

std::uint64_t fingerprint_of(const KernelSpec& spec,
                             const Eigen::MatrixXd& K) {
  std::uint64_t h = 14695981039346656037ULL;
  hash_u64(h, static_cast<std::uint64_t>(K.rows()));
  hash_u64(h, static_cast<std::uint64_t>(spec.family));
  hash_rounded(h, spec.sigma);
  hash_u64(h, static_cast<std::uint64_t>(spec.degree));
  hash_rounded(h, spec.offset);
  for (Eigen::Index j = 0; j < K.cols(); ++j)
    for (Eigen::Index i = 0; i < K.rows(); ++i) hash_rounded(h, K(i, j));
  return h;
}

}  // namespace

KernelSpec KernelSpec::rbf(double sigma) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("KernelSpec::rbf: sigma must be positive");
  KernelSpec s;
  s.family = KernelFamily::Rbf;
  s.sigma = sigma;
  return s;
}

KernelSpec KernelSpec::linear() {
  KernelSpec s;
  s.family = KernelFamily::Linear;
  return s;
}

KernelSpec KernelSpec::polynomial(int degree, double offset) {
  if (degree < 1)
    throw std::invalid_argument(
        "KernelSpec::polynomial: degree must be at least 1");
  if (offset < 0.0)
    throw std::invalid_argument(
        "KernelSpec::polynomial: offset must be nonnegative");
  KernelSpec s;
  s.family = KernelFamily::Polynomial;
  s.degree = degree;
  s.offset = offset;
  return s;
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y) {
  if (x.size() != y.size())
    throw DimensionMismatchError("kernel_eval: points have different sizes");
  switch (spec.family) {
    case KernelFamily::Rbf:
      return std::exp(-(x - y).squaredNorm() / (2.0 * spec.sigma * spec.sigma));
    case KernelFamily::Linear:
      return x.dot(y);
    case KernelFamily::Polynomial:
      return std::pow(x.dot(y) + spec.offset, spec.degree);
  }
  throw std::logic_error("kernel_eval: unknown kernel family");
}

GramMatrix gram(const KernelSpec& spec, const Eigen::MatrixXd& X,
                double jitter, double rank_tol) {
  const Eigen::Index n = X.cols();
  if (n < 1) throw DimensionMismatchError("gram: need at least one point");

  Eigen::MatrixXd K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      K(i, j) = kernel_eval(spec, X.col(i), X.col(j));
      K(j, i) = K(i, j);
    }
  }
  // The loop already fills a symmetric matrix; the averaging below is the
  // documented contract and also covers kernels evaluated asymmetrically.
  K = 0.5 * (K + K.transpose()).eval();
  if (jitter > 0.0) K.diagonal().array() += jitter;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K,
                                                    Eigen::EigenvaluesOnly);
  GramMatrix out;
  out.K = std::move(K);
  out.min_eig = es.eigenvalues().minCoeff();
  out.max_eig = es.eigenvalues().maxCoeff();
  out.full_rank = out.max_eig > 0.0 && out.min_eig > rank_tol * out.max_eig;
  out.spec = spec;
  out.fingerprint = fingerprint_of(spec, out.K);
  return out;
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& X,
                           const Eigen::MatrixXd& Xhat) {
  if (X.rows() != Xhat.rows())
    throw DimensionMismatchError(
        "cross_gram: point sets live in different dimensions");
  Eigen::MatrixXd K(X.cols(), Xhat.cols());
  for (Eigen::Index j = 0; j < Xhat.cols(); ++j)
    for (Eigen::Index i = 0; i < X.cols(); ++i)
      K(i, j) = kernel_eval(spec, X.col(i), Xhat.col(j));
  return K;
}

}  // namespace kssl::kernels
