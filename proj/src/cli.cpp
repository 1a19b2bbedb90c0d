#include "kssl/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "kssl/dataio.hpp"
#include "kssl/errors.hpp"
#include "kssl/evalkit.hpp"
#include "kssl/kernels.hpp"
#include "kssl/losses.hpp"
#include "kssl/matrixkit.hpp"
#include "kssl/preimage.hpp"
#include "kssl/rng.hpp"
#include "kssl/synth.hpp"
#include "kssl/trainer.hpp"

namespace kssl::cli {

namespace {

using nlohmann::json;

// splitmix64 step; decorrelates the seeds of the different random roles
// (signal direction, data, training) derived from one user seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// "name:key=value,key=value" generator specs.
struct GeneratorSpec {
  std::string name;
  std::map<std::string, double> params;
};

GeneratorSpec parse_generator(const std::string& source) {
  GeneratorSpec spec;
  const std::size_t colon = source.find(':');
  spec.name = source.substr(0, colon);
  if (colon == std::string::npos) return spec;

  std::string rest = source.substr(colon + 1);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    const std::size_t comma = rest.find(',', pos);
    const std::string item = rest.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ParseError("malformed generator parameter '" + item + "' in '" +
                       source + "'");
    try {
      spec.params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ParseError("non-numeric generator parameter in '" + source + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return spec;
}

double param_or(const GeneratorSpec& spec, const std::string& key,
                double fallback) {
  const auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

kernels::KernelSpec kernel_from_config(const RunConfig& cfg,
                                       double default_sigma) {
  if (cfg.kernel == "rbf")
    return kernels::KernelSpec::rbf(cfg.sigma.value_or(default_sigma));
  if (cfg.kernel == "linear") return kernels::KernelSpec::linear();
  if (cfg.kernel == "polynomial")
    return kernels::KernelSpec::polynomial(cfg.degree, cfg.offset);
  throw ParseError("unknown kernel '" + cfg.kernel + "'");
}

losses::LossKind method_from_config(const RunConfig& cfg) {
  if (cfg.method == "vicreg") return losses::LossKind::Vicreg;
  if (cfg.method == "vicreg-original") return losses::LossKind::VicregOriginal;
  if (cfg.method == "barlow-twins") return losses::LossKind::BarlowTwins;
  if (cfg.method == "scl") return losses::LossKind::Scl;
  throw ParseError("unknown method '" + cfg.method + "'");
}

// Loaded (or generated) inputs of one run.
struct Inputs {
  Eigen::MatrixXd X;
  Eigen::VectorXd theta;  // spiked generator's signal direction (if any)
};

Inputs load_data(const RunConfig& cfg) {
  if (cfg.data_source.empty())
    throw ParseError("no data source given (--data)");

  Inputs in;
  if (cfg.data_source.rfind("spiked:", 0) == 0 || cfg.data_source == "spiked") {
    const GeneratorSpec gen = parse_generator(cfg.data_source);
    dataio::SpikedCovarianceSpec spec;
    spec.m = static_cast<Eigen::Index>(param_or(gen, "m", 10));
    spec.nu = param_or(gen, "nu", 50.0);
    spec.n = static_cast<Eigen::Index>(param_or(gen, "n", 500));
    spec.seed = derive_seed(cfg.seed, 1);
    rng::Rng theta_rng(derive_seed(cfg.seed, 2));
    spec.theta = theta_rng.gaussian_vector(spec.m).normalized();
    in.theta = spec.theta;
    in.X = dataio::gen_spiked(spec).values;
    return in;
  }
  in.X = dataio::read_matrix(cfg.data_source,
                             dataio::format_from_path(cfg.data_source));
  return in;
}

Eigen::MatrixXd load_target(const RunConfig& cfg, const Inputs& in) {
  if (cfg.target_source.empty())
    throw ParseError("no target source given (--target)");

  Eigen::MatrixXd F;
  if (cfg.target_source.rfind("random-linear", 0) == 0) {
    const GeneratorSpec gen = parse_generator(cfg.target_source);
    const auto d = static_cast<Eigen::Index>(param_or(gen, "d", 8));
    const auto seed = static_cast<std::uint64_t>(
        param_or(gen, "seed", static_cast<double>(derive_seed(cfg.seed, 3))));
    F = dataio::gen_target_random_linear(in.X, d, seed);
  } else if (cfg.target_source == "spike") {
    if (in.theta.size() == 0)
      throw ParseError(
          "target 'spike' needs spiked generator data (--data spiked:...)");
    F = dataio::gen_target_spike_projection(in.X, in.theta);
  } else {
    F = dataio::read_matrix(cfg.target_source,
                            dataio::format_from_path(cfg.target_source));
  }

  if (cfg.pca_dim > 0 && cfg.pca_dim < F.rows())
    F = dataio::pca_reduce_rows(F, cfg.pca_dim);
  return F;
}

synth::AugmentationOperator build_operator(losses::LossKind method,
                                           const synth::CoefficientMatrix& C,
                                           const kernels::GramMatrix& K) {
  if (method == losses::LossKind::BarlowTwins)
    return synth::build_barlow_twins_operator(C, K);
  return synth::build_vicreg_scl_operator(C, K);
}

synth::PairingScheme pairing_scheme(const RunConfig& cfg,
                                    losses::LossKind method) {
  if (method == losses::LossKind::BarlowTwins)
    return synth::PairingScheme::ConditionedDistinct;
  if (cfg.pairing == "conditioned-distinct")
    return synth::PairingScheme::ConditionedDistinct;
  return synth::PairingScheme::IndependentPair;
}

trainer::PairingMode pairing_mode(const RunConfig& cfg) {
  if (cfg.pairing == "paired") return trainer::PairingMode::Paired;
  if (cfg.pairing == "iid" || cfg.pairing == "conditioned-distinct")
    return trainer::PairingMode::IidSampled;
  throw ParseError("unknown pairing '" + cfg.pairing + "'");
}

double mkm_residual_of(const synth::AugmentationOperator& op,
                       const kernels::GramMatrix& K) {
  const double scale = std::max(op.M.norm(), 1e-300);
  return (op.M * K.K * op.M - op.M).norm() / scale;
}

std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "'");
  return dir;
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json base_manifest(const RunConfig& cfg, const kernels::KernelSpec& kernel,
                   double lambda_ridge) {
  json j;
  j["method"] = cfg.method;
  j["kernel"] = cfg.kernel;
  j["sigma"] = kernel.family == kernels::KernelFamily::Rbf ? json(kernel.sigma)
                                                           : json(nullptr);
  j["lambda_ridge"] = lambda_ridge;
  j["mu_p"] = nullptr;
  j["mkm_residual"] = nullptr;
  j["lyapunov_residual"] = nullptr;
  j["final_procrustes_mean"] = nullptr;
  j["final_procrustes_sem"] = nullptr;
  j["baseline_procrustes"] = nullptr;
  return j;
}

struct MeanSem {
  double mean = 0.0;
  double sem = 0.0;
};

MeanSem mean_sem(const std::vector<double>& xs) {
  MeanSem out;
  const double r = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= r;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sem = std::sqrt(ss / (r - 1.0)) / std::sqrt(r);
  }
  return out;
}

void write_trace_csv(const trainer::TrainTrace& trace,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "'");
  out << "epoch,loss,procrustes_to_target,procrustes_random_baseline\n";
  char buf[160];
  for (const trainer::TraceRecord& r : trace.records) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", r.epoch, r.loss,
                  r.procrustes_to_target, r.procrustes_random_baseline);
    out << buf;
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

trainer::TrainConfig train_config_from(const RunConfig& cfg,
                                       losses::LossKind method,
                                       std::uint64_t seed) {
  trainer::TrainConfig tc;
  tc.loss_kind = method;
  tc.bt_lambda = cfg.bt_lambda;
  tc.epochs = cfg.epochs;
  tc.learning_rate = cfg.lr;
  tc.seed = seed;
  tc.pairing_mode = pairing_mode(cfg);
  tc.eval_every = cfg.eval_every;
  return tc;
}

// Shared by cmd_train and cmd_demo_spiked: whiten the target, fit, build the
// operator, run `repeats` seeds, and write trace/report artifacts.
struct TrainRunResult {
  std::vector<double> final_distance;
  std::vector<double> baseline_distance;
  std::vector<double> final_loss;
  std::vector<Eigen::MatrixXd> C_learned;
  double mkm_residual = 0.0;
  double lyapunov_residual = 0.0;
};

TrainRunResult run_training(const RunConfig& cfg, losses::LossKind method,
                            const Eigen::MatrixXd& X,
                            const kernels::KernelSpec& kernel,
                            const Eigen::MatrixXd& target_raw,
                            double lambda_ridge, bool write_trace = true) {
  const kernels::GramMatrix K = kernels::gram(kernel, X, cfg.jitter);

  // The losses identify targets only up to the whitening affine map; fitting
  // the whitened target makes the learnable optimum the whitened target
  // itself, so the traced distance can reach zero.
  const evalkit::WhitenMode mode = method == losses::LossKind::Scl
                                       ? evalkit::WhitenMode::Correlation
                                       : evalkit::WhitenMode::Covariance;
  const Eigen::MatrixXd F_white = evalkit::whiten(target_raw, mode).Fw;

  const synth::CoefficientMatrix C = synth::krr_fit(F_white, K, lambda_ridge);
  const synth::AugmentationOperator op = build_operator(method, C, K);
  const synth::AugmentationDistribution dist =
      synth::make_distribution(op, pairing_scheme(cfg, method));

  TrainRunResult result;
  if (method == losses::LossKind::BarlowTwins)
    result.lyapunov_residual = op.lyapunov_residual;
  else
    result.mkm_residual = mkm_residual_of(op, K);

  const int repeats = std::max(1, cfg.repeats);
  for (int r = 0; r < repeats; ++r) {
    trainer::TrainConfig tc =
        train_config_from(cfg, method, derive_seed(cfg.seed, 100 + r));
    const auto [state, trace] = trainer::train(X, kernel, dist, F_white, tc);
    const trainer::TraceRecord& last = trace.records.back();
    result.final_distance.push_back(last.procrustes_to_target);
    result.baseline_distance.push_back(last.procrustes_random_baseline);
    result.final_loss.push_back(last.loss);
    result.C_learned.push_back(state.C_learn);

    if (r == 0 && write_trace)
      write_trace_csv(trace, std::filesystem::path(cfg.out_dir) / "trace.csv");
  }
  return result;
}

}  // namespace

void cmd_synthesize(const RunConfig& cfg) {
  const double lambda_ridge = cfg.lambda_ridge.value_or(1.0);
  const double mu_p = cfg.mu_p.value_or(1.0);
  const kernels::KernelSpec kernel = kernel_from_config(cfg, 3.0);
  const losses::LossKind method = method_from_config(cfg);

  const Inputs in = load_data(cfg);
  const Eigen::MatrixXd F = load_target(cfg, in);
  const kernels::GramMatrix K = kernels::gram(kernel, in.X, cfg.jitter);

  const synth::CoefficientMatrix C = synth::krr_fit(F, K, lambda_ridge);
  const synth::AugmentationOperator op = build_operator(method, C, K);

  // Queries default to the training set, whose cross-Gram is K itself.
  const Eigen::MatrixXd K_cross = kernels::cross_gram(kernel, in.X, in.X);
  const Eigen::MatrixXd C_aug = synth::augment_coefficients(op, K, K_cross);

  const std::filesystem::path dir = prepare_out_dir(cfg);
  dataio::write_matrix(op.M, (dir / "M.mat64").string(),
                       dataio::MatrixFormat::Mat64);
  dataio::write_matrix(C.C, (dir / "C.mat64").string(),
                       dataio::MatrixFormat::Mat64);
  dataio::write_matrix(C_aug, (dir / "augmented_queries.mat64").string(),
                       dataio::MatrixFormat::Mat64);

  json manifest = base_manifest(cfg, kernel, lambda_ridge);
  manifest["mu_p"] = mu_p;
  if (method == losses::LossKind::BarlowTwins) {
    manifest["lyapunov_residual"] = op.lyapunov_residual;
  } else {
    manifest["mkm_residual"] = mkm_residual_of(op, K);
    // On training queries the augmented representations must reproduce the
    // fitted ones: C·K·(M·K) = C·K.
    const Eigen::MatrixXd FK = C.C * K.K;
    manifest["augment_invariance_residual"] =
        (FK * C_aug - FK).cwiseAbs().maxCoeff();
  }

  if (cfg.emit_preimages) {
    preimage::PreimageConfig pcfg;
    pcfg.mu_p = mu_p;
    const Eigen::MatrixXd pre = preimage::preimage_batch(in.X, K, C_aug, pcfg);
    dataio::write_matrix(pre, (dir / "preimages.csv").string(),
                         dataio::MatrixFormat::Csv);
  }

  write_json(manifest, dir / "manifest.json");
  std::cout << "synthesize: wrote operator (" << op.M.rows() << "x"
            << op.M.cols() << ") and manifest to " << dir.string() << "\n";
}

void cmd_train(const RunConfig& cfg) {
  const double lambda_ridge = cfg.lambda_ridge.value_or(0.0);
  const kernels::KernelSpec kernel = kernel_from_config(cfg, 1.0);
  const losses::LossKind method = method_from_config(cfg);

  const Inputs in = load_data(cfg);
  const Eigen::MatrixXd F = load_target(cfg, in);

  const std::filesystem::path dir = prepare_out_dir(cfg);
  const TrainRunResult result =
      run_training(cfg, method, in.X, kernel, F, lambda_ridge);

  dataio::write_matrix(result.C_learned.front(),
                       (dir / "C_learned.mat64").string(),
                       dataio::MatrixFormat::Mat64);

  const MeanSem dist = mean_sem(result.final_distance);
  const MeanSem base = mean_sem(result.baseline_distance);
  json report = base_manifest(cfg, kernel, lambda_ridge);
  report["mu_p"] = cfg.mu_p.has_value() ? json(*cfg.mu_p) : json(nullptr);
  if (method == losses::LossKind::BarlowTwins)
    report["lyapunov_residual"] = result.lyapunov_residual;
  else
    report["mkm_residual"] = result.mkm_residual;
  report["final_procrustes_mean"] = dist.mean;
  report["final_procrustes_sem"] = dist.sem;
  report["baseline_procrustes"] = base.mean;
  report["final_loss_mean"] = mean_sem(result.final_loss).mean;
  write_json(report, dir / "report.json");

  std::cout << "train: final procrustes " << dist.mean << " +/- " << dist.sem
            << " (baseline " << base.mean << ") over "
            << result.final_distance.size() << " seeds\n";
}

void cmd_demo_spiked(const RunConfig& cfg) {
  RunConfig demo = cfg;
  if (demo.data_source.empty()) demo.data_source = "spiked:nu=50,m=10,n=500";
  if (demo.target_source.empty()) demo.target_source = "spike";
  const double lambda_ridge = demo.lambda_ridge.value_or(0.0);
  const kernels::KernelSpec kernel = kernel_from_config(demo, 1.0);

  const GeneratorSpec gen = parse_generator(demo.data_source);
  const double nu = param_or(gen, "nu", 50.0);

  const std::filesystem::path dir = prepare_out_dir(demo);
  const int repeats = std::max(1, demo.repeats);

  std::vector<double> final_distance, baseline_distance, alignments;
  double mkm_residual = 0.0;
  for (int r = 0; r < repeats; ++r) {
    RunConfig one = demo;
    one.seed = derive_seed(demo.seed, 500 + r);
    one.repeats = 1;

    const Inputs in = load_data(one);
    const Eigen::MatrixXd F = load_target(one, in);
    const TrainRunResult result =
        run_training(one, losses::LossKind::Vicreg, in.X, kernel, F,
                     lambda_ridge, /*write_trace=*/r == 0);

    final_distance.push_back(result.final_distance.front());
    baseline_distance.push_back(result.baseline_distance.front());
    mkm_residual = std::max(mkm_residual, result.mkm_residual);

    if (nu > 0.0) {
      // Effective learned direction: least-squares readout u with
      // uᵀX ≈ learned representations, compared against the planted one.
      const kernels::GramMatrix K = kernels::gram(kernel, in.X, one.jitter);
      const Eigen::MatrixXd F_learn = result.C_learned.front() * K.K;
      const Eigen::VectorXd u =
          matrixkit::pinv(in.X.transpose()) * F_learn.transpose();
      alignments.push_back(std::abs(u.normalized().dot(in.theta)));
    }
  }

  const MeanSem dist = mean_sem(final_distance);
  const MeanSem base = mean_sem(baseline_distance);
  json report = base_manifest(demo, kernel, lambda_ridge);
  report["mkm_residual"] = mkm_residual;
  report["final_procrustes_mean"] = dist.mean;
  report["final_procrustes_sem"] = dist.sem;
  report["baseline_procrustes"] = base.mean;
  if (!alignments.empty()) {
    report["alignment"] = alignments;
    report["alignment_mean"] = mean_sem(alignments).mean;
    report["alignment_min"] =
        *std::min_element(alignments.begin(), alignments.end());
  } else {
    report["alignment"] = nullptr;
    report["alignment_mean"] = nullptr;
    report["alignment_min"] = nullptr;
  }
  write_json(report, dir / "report.json");

  std::cout << "demo-spiked: procrustes " << dist.mean << " (baseline "
            << base.mean << ")";
  if (!alignments.empty())
    std::cout << ", alignment min "
              << *std::min_element(alignments.begin(), alignments.end());
  std::cout << " over " << repeats << " seeds\n";
}

void apply_config_file(const std::string& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError("config file '" + path + "': " + e.what());
  }
  if (!j.is_object())
    throw ParseError("config file '" + path + "' must hold a JSON object");

  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "data") config.data_source = value.get<std::string>();
      else if (key == "kernel") config.kernel = value.get<std::string>();
      else if (key == "sigma") config.sigma = value.get<double>();
      else if (key == "degree") config.degree = value.get<int>();
      else if (key == "offset") config.offset = value.get<double>();
      else if (key == "target") config.target_source = value.get<std::string>();
      else if (key == "pca_dim") config.pca_dim = value.get<int>();
      else if (key == "method") config.method = value.get<std::string>();
      else if (key == "lambda_ridge") config.lambda_ridge = value.get<double>();
      else if (key == "mu_p") config.mu_p = value.get<double>();
      else if (key == "epochs") config.epochs = value.get<int>();
      else if (key == "lr") config.lr = value.get<double>();
      else if (key == "seed") config.seed = value.get<std::uint64_t>();
      else if (key == "repeats") config.repeats = value.get<int>();
      else if (key == "pairing") config.pairing = value.get<std::string>();
      else if (key == "out") config.out_dir = value.get<std::string>();
      else if (key == "bt_lambda") config.bt_lambda = value.get<double>();
      else if (key == "jitter") config.jitter = value.get<double>();
      else if (key == "eval_every") config.eval_every = value.get<int>();
      else if (key == "emit_preimages")
        config.emit_preimages = value.get<bool>();
      else
        throw ParseError("config file '" + path + "': unknown key '" + key +
                         "'");
    }
  } catch (const json::type_error& e) {
    throw ParseError("config file '" + path + "': " + e.what());
  }
}

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const ParseError&) {
    return kExitParseError;
  } catch (const SingularMatrixError&) {
    return kExitSingularMatrix;
  } catch (const RankDeficientTargetError&) {
    return kExitRankDeficientTarget;
  } catch (const NonFiniteLossError&) {
    return kExitNonFiniteLoss;
  } catch (const IoError&) {
    return kExitIoError;
  } catch (const DimensionMismatchError&) {
    return kExitDimensionMismatch;
  } catch (const GramMismatchError&) {
    return kExitGramMismatch;
  } catch (const NonSymmetricError&) {
    return kExitNonSymmetric;
  } catch (...) {
    return kExitGeneric;
  }
}

}  // namespace kssl::cli
