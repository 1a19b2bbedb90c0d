#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "kssl/cli.hpp"

namespace {

using kssl::cli::RunConfig;

// The config file must apply before CLI11 binds flag values (so explicit
// flags override it), which requires finding --config ahead of parsing.
std::string config_path_from_args(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return {};
}

void add_run_options(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path,
                  "JSON config file; explicit flags override its values");
  cmd->add_option("--data", cfg.data_source,
                  "data matrix (.csv/.mat64, columns = points) or generator "
                  "spec spiked:nu=<v>,m=<dim>,n=<count>");
  cmd->add_option("--kernel", cfg.kernel, "kernel family")
      ->check(CLI::IsMember({"rbf", "linear", "polynomial"}));
  cmd->add_option_function<double>(
      "--sigma", [&cfg](double v) { cfg.sigma = v; }, "RBF length-scale");
  cmd->add_option("--degree", cfg.degree, "polynomial kernel degree");
  cmd->add_option("--offset", cfg.offset, "polynomial kernel offset");
  cmd->add_option("--target", cfg.target_source,
                  "target matrix path, random-linear:d=<dim>,seed=<s>, or "
                  "spike (projection onto the spiked signal direction)");
  cmd->add_option("--pca-dim", cfg.pca_dim,
                  "reduce an ingested target to this many rows (0 = off)");
  cmd->add_option("--method", cfg.method, "loss family the operator targets")
      ->check(
          CLI::IsMember({"vicreg", "vicreg-original", "barlow-twins", "scl"}));
  cmd->add_option_function<double>(
      "--lambda-ridge", [&cfg](double v) { cfg.lambda_ridge = v; },
      "ridge parameter of the target fit");
  cmd->add_option_function<double>(
      "--mu-p", [&cfg](double v) { cfg.mu_p = v; },
      "pre-image regularization weight");
  cmd->add_option("--epochs", cfg.epochs, "training epochs");
  cmd->add_option("--lr", cfg.lr, "Adam learning rate");
  cmd->add_option("--seed", cfg.seed, "base seed for all randomness");
  cmd->add_option("--repeats", cfg.repeats, "independent training repeats");
  cmd->add_option("--pairing", cfg.pairing, "view-pair sampling")
      ->check(CLI::IsMember({"paired", "iid", "conditioned-distinct"}));
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_option("--bt-lambda", cfg.bt_lambda,
                  "Barlow Twins off-diagonal weight");
  cmd->add_option("--jitter", cfg.jitter, "Gram diagonal jitter");
  cmd->add_option("--eval-every", cfg.eval_every,
                  "epochs between trace records");
  cmd->add_flag("--emit-preimages", cfg.emit_preimages,
                "synthesize: also write input-space pre-images");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  std::string config_path;

  CLI::App app{
      "kssl: closed-form augmentation operators in kernel space, with "
      "joint-embedding training to verify target recovery"};
  app.require_subcommand(1);

  CLI::App* synthesize = app.add_subcommand(
      "synthesize",
      "fit the target and write the optimal augmentation operator");
  CLI::App* train = app.add_subcommand(
      "train", "optimize a student model under the synthesized augmentation");
  CLI::App* demo = app.add_subcommand(
      "demo-spiked",
      "end-to-end recovery of a planted signal direction in spiked data");
  for (CLI::App* cmd : {synthesize, train, demo})
    add_run_options(cmd, cfg, config_path);

  try {
    const std::string pre = config_path_from_args(argc, argv);
    if (!pre.empty()) kssl::cli::apply_config_file(pre, cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kssl::cli::exit_code_for_current_exception();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kssl::cli::kExitOk : kssl::cli::kExitParseError;
  }

  try {
    if (synthesize->parsed()) kssl::cli::cmd_synthesize(cfg);
    if (train->parsed()) kssl::cli::cmd_train(cfg);
    if (demo->parsed()) kssl::cli::cmd_demo_spiked(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kssl::cli::exit_code_for_current_exception();
  }
  return kssl::cli::kExitOk;
}
