#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace kssl::cli {

// One run description shared by all commands. Optional fields fall back to
// per-command defaults (synthesize: sigma 3, lambda_ridge 1, mu_p 1;
// train/demo-spiked: sigma 1, lambda_ridge 0).
struct RunConfig {
  // Data: a .csv/.mat64 path or a generator spec
  // "spiked:nu=<v>,m=<dim>,n=<count>".
  std::string data_source;
  std::string kernel = "rbf";  // rbf | linear | polynomial
  std::optional<double> sigma;
  int degree = 2;
  double offset = 0.0;
  // Target: a path, "random-linear:d=<dim>,seed=<s>", or "spike"
  // (projection onto the spiked generator's signal direction).
  std::string target_source;
  int pca_dim = 0;  // 0 disables PCA reduction of an ingested target
  std::string method = "vicreg";  // vicreg | vicreg-original | barlow-twins | scl
  std::optional<double> lambda_ridge;
  std::optional<double> mu_p;
  int epochs = 5000;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  int repeats = 3;
  std::string pairing = "paired";  // paired | iid | conditioned-distinct
  std::string out_dir = ".";

  double bt_lambda = 1.0;       // Barlow Twins off-diagonal weight
  double jitter = 0.0;          // optional Gram diagonal jitter
  int eval_every = 50;
  bool emit_preimages = false;  // synthesize: also write preimages.csv
};

// Exit codes, one per error class (0 = success).
inline constexpr int kExitOk = 0;
inline constexpr int kExitGeneric = 1;
inline constexpr int kExitParseError = 10;
inline constexpr int kExitSingularMatrix = 11;
inline constexpr int kExitRankDeficientTarget = 12;
inline constexpr int kExitNonFiniteLoss = 13;
inline constexpr int kExitIoError = 14;
inline constexpr int kExitDimensionMismatch = 15;
inline constexpr int kExitGramMismatch = 16;
inline constexpr int kExitNonSymmetric = 17;

// Fit the target, build the augmentation operator for the chosen method, and
// write M.mat64, C.mat64, augmented_queries.mat64, optionally preimages.csv,
// plus manifest.json with the hyperparameters and invariant residuals.
void cmd_synthesize(const RunConfig& config);

// Whiten the target, build the operator, optimize the chosen loss over
// `repeats` seeds, and write trace.csv, C_learned.mat64 and report.json
// (final Procrustes distance as mean ± standard error over seeds).
void cmd_train(const RunConfig& config);

// Spiked-covariance end-to-end demonstration: generate data with one planted
// signal direction, synthesize the optimal operator for the 1-d projection
// target, train, and report recovery plus the |cosine| alignment between the
// effective learned direction and the planted one.
void cmd_demo_spiked(const RunConfig& config);

// Loads JSON config-file values into `config`. The binary applies this before
// parsing flags, so explicit flags override file values. Throws ParseError on
// unknown keys or wrong value types.
void apply_config_file(const std::string& path, RunConfig& config);

// Maps a thrown error to its exit code; used by the binary's main().
int exit_code_for_current_exception();

}  // namespace kssl::cli
