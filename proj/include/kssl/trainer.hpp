#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "kssl/errors.hpp"
#include "kssl/kernels.hpp"
#include "kssl/losses.hpp"
#include "kssl/rng.hpp"
#include "kssl/synth.hpp"

namespace kssl::trainer {

// Paired uses the deterministic view pair (identity, T) for every point each
// epoch; IidSampled re-draws per-point view assignments every epoch according
// to the distribution's pairing scheme.
enum class PairingMode { Paired, IidSampled };

struct TrainConfig {
  losses::LossKind loss_kind = losses::LossKind::Vicreg;
  losses::VicregWeights vicreg;  // weights for the VICReg variants
  double bt_lambda = 1.0;        // Barlow Twins off-diagonal weight
  // The trainer optimizes the squared off-diagonal form of Barlow Twins
  // (zero set 𝒞 = I); the printed (1−𝒞_ij)² form has zero set 𝒞 = all-ones
  // and cannot recover a target.
  bool bt_squared_offdiag = true;
  int epochs = 5000;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  PairingMode pairing_mode = PairingMode::Paired;
  int eval_every = 50;
};

// Mutable optimization state; evolution is deterministic in
// (seed, config, inputs).
struct TrainState {
  Eigen::MatrixXd C_learn;
  Eigen::MatrixXd adam_m;
  Eigen::MatrixXd adam_v;
  int epoch = 0;
  rng::Rng rng{0};
};

struct TraceRecord {
  int epoch = 0;
  double loss = 0.0;
  double procrustes_to_target = 0.0;
  double procrustes_random_baseline = 0.0;
};

struct TrainTrace {
  std::vector<TraceRecord> records;
};

// View matrices (V, Vp) for one epoch: column i of V is K[:,i] when T_i is
// the identity and (K·M·K)[:,i] when T_i = T, so that forward() yields
// z_i = f(T_i φ_i) = C·K·(M k_i) for augmented points. Paired mode returns
// (K, KMK) deterministically.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> make_views(
    const kernels::GramMatrix& K, const synth::AugmentationDistribution& dist,
    PairingMode mode, rng::Rng& rng);

// Fast path for callers that precomputed TK = K·M·K once.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> make_views_from(
    const Eigen::MatrixXd& K, const Eigen::MatrixXd& TK,
    synth::PairingScheme pairing, PairingMode mode, rng::Rng& rng);

// Z = C_learn · V.
losses::RepresentationMatrix forward(const Eigen::MatrixXd& C_learn,
                                     const Eigen::MatrixXd& V);

// Loss value plus analytic gradient w.r.t. C_learn for the configured loss,
// on the given epoch views.
struct LossGrad {
  double loss = 0.0;
  Eigen::MatrixXd grad;
};
LossGrad loss_and_gradient(const TrainConfig& cfg,
                           const Eigen::MatrixXd& C_learn,
                           const Eigen::MatrixXd& V, const Eigen::MatrixXd& Vp);

// Full-batch Adam on C_learn. The trace compares learned representations
// C_learn·K against the whitened target (Covariance mode; Correlation mode —
// uncentered — for SCL) every eval_every epochs, plus epoch 0 and the final
// epoch; the random baseline has covariance matched to the whitened target
// and is fixed per run. Throws NonFiniteLossError on divergence.
std::pair<TrainState, TrainTrace> train(
    const Eigen::MatrixXd& X, const kernels::KernelSpec& kernel,
    const synth::AugmentationDistribution& dist, const Eigen::MatrixXd& target_F,
    const TrainConfig& cfg);

// Max deviation between the analytic gradient and central finite differences
// (step 1e-5), relative to max(1, ‖numeric‖_∞). Meant for small instances
// (n ≤ 10, d ≤ 3).
double gradient_check(const TrainConfig& cfg, const Eigen::MatrixXd& C_learn,
                      const Eigen::MatrixXd& V, const Eigen::MatrixXd& Vp);

}  // namespace kssl::trainer
