#include "kssl/trainer.hpp"

#include <cmath>
#include <string>
#include <tuple>

#include "kssl/evalkit.hpp"
#include "kssl/matrixkit.hpp"

namespace kssl::trainer {

namespace {

// Effective loss value for the trainer's configuration (the Barlow Twins
// variant flag and the variance mode both live here).
double loss_value(const TrainConfig& cfg, const Eigen::MatrixXd& Z,
                  const Eigen::MatrixXd& Zp) {
  using losses::LossKind;
  switch (cfg.loss_kind) {
    case LossKind::Vicreg:
    case LossKind::VicregOriginal: {
      losses::VicregWeights w = cfg.vicreg;
      w.variance_mode = cfg.loss_kind == LossKind::Vicreg
                            ? losses::VarianceMode::Variance
                            : losses::VarianceMode::StdHinge;
      return losses::loss_vicreg(Z, Zp, w);
    }
    case LossKind::BarlowTwins:
      return losses::loss_barlow_twins(Z, Zp, cfg.bt_lambda,
                                       cfg.bt_squared_offdiag);
    case LossKind::Scl:
      return losses::loss_scl(Z, Zp);
  }
  throw std::logic_error("loss_value: unknown loss kind");
}

// d(variance+covariance terms)/dZ for one view; shared by both VICReg modes.
Eigen::MatrixXd vicreg_view_gradient(const losses::VicregWeights& w,
                                     const Eigen::MatrixXd& Z) {
  const double n = static_cast<double>(Z.cols());
  const double d = static_cast<double>(Z.rows());
  const Eigen::VectorXd mean = Z.rowwise().mean();
  const Eigen::MatrixXd Zc = Z.colwise() - mean;
  const Eigen::MatrixXd cov = (Zc * Zc.transpose()) / n;

  // dL/dcov, split into the diagonal (variance) and off-diagonal
  // (covariance) parts; both are symmetric, so dL/dZc = (2/n)·G·Zc.
  Eigen::MatrixXd G = (2.0 * w.nu / d) * cov;
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    double gv = 0.0;
    if (w.variance_mode == losses::VarianceMode::Variance) {
      gv = (2.0 / d) * (cov(i, i) - 1.0);
    } else {
      const double root = std::sqrt(cov(i, i) + w.epsilon);
      gv = (1.0 - root > 0.0) ? -1.0 / (2.0 * d * root) : 0.0;
    }
    G(i, i) = w.mu * gv;
  }
  // dL/dZ = dL/dZc·H = (2/n)·G·Zc (H is idempotent and Zc·H = Zc).
  return (2.0 / n) * (G * Zc);
}

struct PairGrad {
  Eigen::MatrixXd dZ;
  Eigen::MatrixXd dZp;
};

PairGrad loss_gradients(const TrainConfig& cfg, const Eigen::MatrixXd& Z,
                        const Eigen::MatrixXd& Zp) {
  using losses::LossKind;
  const double n = static_cast<double>(Z.cols());
  PairGrad g;

  switch (cfg.loss_kind) {
    case LossKind::Vicreg:
    case LossKind::VicregOriginal: {
      losses::VicregWeights w = cfg.vicreg;
      w.variance_mode = cfg.loss_kind == LossKind::Vicreg
                            ? losses::VarianceMode::Variance
                            : losses::VarianceMode::StdHinge;
      const Eigen::MatrixXd ds = (2.0 / n) * (Z - Zp);
      g.dZ = w.lambda * ds + vicreg_view_gradient(w, Z);
      g.dZp = -w.lambda * ds + vicreg_view_gradient(w, Zp);
      return g;
    }
    case LossKind::BarlowTwins: {
      const Eigen::MatrixXd C =
          (Z * Zp.transpose() + Zp * Z.transpose()) / (2.0 * n);
      Eigen::MatrixXd D(C.rows(), C.cols());
      for (Eigen::Index i = 0; i < C.rows(); ++i)
        for (Eigen::Index j = 0; j < C.cols(); ++j) {
          if (i == j)
            D(i, j) = 2.0 * (C(i, i) - 1.0);
          else
            D(i, j) = cfg.bt_lambda * (cfg.bt_squared_offdiag
                                           ? 2.0 * C(i, j)
                                           : 2.0 * (C(i, j) - 1.0));
        }
      // D is symmetric, so d𝒞-chain collapses to (1/n)·D·(other view).
      g.dZ = (D * Zp) / n;
      g.dZp = (D * Z) / n;
      return g;
    }
    case LossKind::Scl: {
      const Eigen::MatrixXd P = Z.transpose() * Zp;
      Eigen::MatrixXd P_off = P;
      P_off.diagonal().setZero();

      const Eigen::VectorXd z_sq = Z.colwise().squaredNorm();
      const Eigen::VectorXd zp_sq = Zp.colwise().squaredNorm();

      g.dZ = (2.0 / (n * n)) * (Zp * P_off.transpose()) - (2.0 / n) * Zp +
             (2.0 / (n * n)) * (Z * z_sq.asDiagonal());
      g.dZp = (2.0 / (n * n)) * (Z * P_off) - (2.0 / n) * Z +
              (2.0 / (n * n)) * (Zp * zp_sq.asDiagonal());
      return g;
    }
  }
  throw std::logic_error("loss_gradients: unknown loss kind");
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> make_views_from(
    const Eigen::MatrixXd& K, const Eigen::MatrixXd& TK,
    synth::PairingScheme pairing, PairingMode mode, rng::Rng& rng) {
  if (mode == PairingMode::Paired) return {K, TK};

  const Eigen::Index n = K.cols();
  Eigen::MatrixXd V(K.rows(), n), Vp(K.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    bool first_is_t, second_is_t;
    if (pairing == synth::PairingScheme::ConditionedDistinct) {
      // Ordered pair uniform over {(identity,T), (T,identity)}.
      first_is_t = rng.coin();
      second_is_t = !first_is_t;
    } else {
      first_is_t = rng.coin();
      second_is_t = rng.coin();
    }
    V.col(i) = first_is_t ? TK.col(i) : K.col(i);
    Vp.col(i) = second_is_t ? TK.col(i) : K.col(i);
  }
  return {V, Vp};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> make_views(
    const kernels::GramMatrix& K, const synth::AugmentationDistribution& dist,
    PairingMode mode, rng::Rng& rng) {
  if (dist.op.gram_fingerprint != K.fingerprint)
    throw GramMismatchError(
        "make_views: distribution was built from a different Gram matrix");
  const Eigen::MatrixXd TK = K.K * dist.op.M * K.K;
  return make_views_from(K.K, TK, dist.pairing, mode, rng);
}

losses::RepresentationMatrix forward(const Eigen::MatrixXd& C_learn,
                                     const Eigen::MatrixXd& V) {
  if (C_learn.cols() != V.rows())
    throw DimensionMismatchError("forward: C_learn and V disagree on n");
  return C_learn * V;
}

LossGrad loss_and_gradient(const TrainConfig& cfg,
                           const Eigen::MatrixXd& C_learn,
                           const Eigen::MatrixXd& V,
                           const Eigen::MatrixXd& Vp) {
  const Eigen::MatrixXd Z = forward(C_learn, V);
  const Eigen::MatrixXd Zp = forward(C_learn, Vp);

  LossGrad out;
  out.loss = loss_value(cfg, Z, Zp);
  const PairGrad g = loss_gradients(cfg, Z, Zp);
  out.grad = g.dZ * V.transpose() + g.dZp * Vp.transpose();
  return out;
}

std::pair<TrainState, TrainTrace> train(const Eigen::MatrixXd& X,
                                        const kernels::KernelSpec& kernel,
                                        const synth::AugmentationDistribution& dist,
                                        const Eigen::MatrixXd& target_F,
                                        const TrainConfig& cfg) {
  if (cfg.epochs < 0 || cfg.eval_every < 1)
    throw std::invalid_argument("train: bad epochs/eval_every");
  if (!(cfg.learning_rate > 0.0) || !(cfg.adam_beta1 > 0.0) ||
      cfg.adam_beta1 >= 1.0 || !(cfg.adam_beta2 > 0.0) || cfg.adam_beta2 >= 1.0)
    throw std::invalid_argument("train: bad optimizer parameters");

  const kernels::GramMatrix K = kernels::gram(kernel, X);
  if (!K.full_rank)
    throw SingularMatrixError("train: Gram matrix is rank-deficient");
  if (dist.op.gram_fingerprint != K.fingerprint)
    throw GramMismatchError(
        "train: distribution was built from a different Gram matrix");
  if (target_F.cols() != K.K.rows())
    throw DimensionMismatchError("train: target and data disagree on n");

  const Eigen::Index d = target_F.rows();
  const Eigen::Index n = K.K.rows();

  // Recovery holds only up to the whitening affine map, so compare against
  // the whitened target (uncentered correlation whitening for SCL).
  const evalkit::WhitenMode mode = cfg.loss_kind == losses::LossKind::Scl
                                       ? evalkit::WhitenMode::Correlation
                                       : evalkit::WhitenMode::Covariance;
  const Eigen::MatrixXd F_cmp = evalkit::whiten(target_F, mode).Fw;

  TrainState state;
  state.rng = rng::Rng(cfg.seed);
  const Eigen::MatrixXd baseline =
      evalkit::matched_covariance_baseline(F_cmp, state.rng);
  const double baseline_dist = evalkit::procrustes(baseline, F_cmp).distance;

  state.C_learn = state.rng.gaussian_matrix(d, n, 1.0 / std::sqrt(double(n)));
  state.adam_m = Eigen::MatrixXd::Zero(d, n);
  state.adam_v = Eigen::MatrixXd::Zero(d, n);

  const Eigen::MatrixXd TK = K.K * dist.op.M * K.K;

  TrainTrace trace;
  const auto record = [&](int epoch, double loss) {
    TraceRecord r;
    r.epoch = epoch;
    r.loss = loss;
    r.procrustes_to_target =
        evalkit::procrustes(state.C_learn * K.K, F_cmp).distance;
    r.procrustes_random_baseline = baseline_dist;
    trace.records.push_back(r);
  };

  // Paired mode keeps the same (K, KMK) views every epoch; only IidSampled
  // needs fresh per-epoch column draws.
  const bool resample = cfg.pairing_mode == PairingMode::IidSampled;
  Eigen::MatrixXd V_drawn, Vp_drawn;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Eigen::MatrixXd* V = &K.K;
    const Eigen::MatrixXd* Vp = &TK;
    if (resample) {
      std::tie(V_drawn, Vp_drawn) =
          make_views_from(K.K, TK, dist.pairing, cfg.pairing_mode, state.rng);
      V = &V_drawn;
      Vp = &Vp_drawn;
    }
    const LossGrad lg = loss_and_gradient(cfg, state.C_learn, *V, *Vp);

    if (!std::isfinite(lg.loss) || !lg.grad.allFinite())
      throw NonFiniteLossError("train: loss diverged at epoch " +
                               std::to_string(epoch) + " (last good epoch " +
                               std::to_string(epoch - 1) + ")");

    if (epoch % cfg.eval_every == 0) record(epoch, lg.loss);

    // Adam with bias correction; t is 1-based.
    const double t = static_cast<double>(epoch + 1);
    state.adam_m = cfg.adam_beta1 * state.adam_m + (1.0 - cfg.adam_beta1) * lg.grad;
    state.adam_v = cfg.adam_beta2 * state.adam_v +
                   (1.0 - cfg.adam_beta2) * lg.grad.cwiseProduct(lg.grad);
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
    const Eigen::MatrixXd m_hat = state.adam_m / bc1;
    const Eigen::MatrixXd v_hat = state.adam_v / bc2;
    state.C_learn -=
        cfg.learning_rate *
        (m_hat.array() / (v_hat.array().sqrt() + cfg.adam_eps)).matrix();
    state.epoch = epoch + 1;
  }

  // Closing record at the final parameters.
  const auto [V, Vp] =
      make_views_from(K.K, TK, dist.pairing, cfg.pairing_mode, state.rng);
  const double final_loss =
      loss_value(cfg, forward(state.C_learn, V), forward(state.C_learn, Vp));
  if (!std::isfinite(final_loss))
    throw NonFiniteLossError("train: final loss is not finite (last good epoch " +
                             std::to_string(cfg.epochs - 1) + ")");
  record(cfg.epochs, final_loss);

  return {std::move(state), std::move(trace)};
}

double gradient_check(const TrainConfig& cfg, const Eigen::MatrixXd& C_learn,
                      const Eigen::MatrixXd& V, const Eigen::MatrixXd& Vp) {
  const Eigen::MatrixXd analytic = loss_and_gradient(cfg, C_learn, V, Vp).grad;

  const double h = 1e-5;
  Eigen::MatrixXd numeric(C_learn.rows(), C_learn.cols());
  Eigen::MatrixXd C = C_learn;
  for (Eigen::Index i = 0; i < C.rows(); ++i)
    for (Eigen::Index j = 0; j < C.cols(); ++j) {
      const double saved = C(i, j);
      C(i, j) = saved + h;
      const double up = loss_value(cfg, forward(C, V), forward(C, Vp));
      C(i, j) = saved - h;
      const double down = loss_value(cfg, forward(C, V), forward(C, Vp));
      C(i, j) = saved;
      numeric(i, j) = (up - down) / (2.0 * h);
    }

  const double scale = std::max(1.0, numeric.cwiseAbs().maxCoeff());
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

}  // namespace kssl::trainer
