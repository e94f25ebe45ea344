// Command-line front end: Monte Carlo sweeps, analytical curves, and codebook
// construction, all driven by the same JSON config the library consumes.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "afdmscma/analysis.hpp"
#include "afdmscma/channel.hpp"
#include "afdmscma/harness.hpp"
#include "afdmscma/mat_io.hpp"
#include "afdmscma/rng.hpp"
#include "afdmscma/scma.hpp"

namespace {

using namespace afdmscma;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << text;
}

PathEnsemble ensemble_from(const ExperimentConfig& cfg) {
  if (cfg.profile.kind != ProfileConfig::Kind::uniform || cfg.profile.uniform.fixed_dopplers.empty())
    throw std::runtime_error(
        "analyze needs a uniform profile with fixed dopplers (analytical curves "
        "average over gains only)");
  PathEnsemble ens;
  const auto& u = cfg.profile.uniform;
  for (size_t p = 0; p < u.fixed_dopplers.size(); ++p) {
    ChannelPath path;
    path.gain = {1.0, 0.0};
    path.delay = u.delays.empty() ? static_cast<int>(p) : u.delays[p];
    path.doppler = u.fixed_dopplers[p];
    ens.paths.push_back(path);
  }
  ens.variances.assign(ens.paths.size(), 1.0 / static_cast<double>(ens.paths.size()));
  return ens;
}

int cmd_run(const std::string& config_path, const std::string& out_path,
            std::optional<uint64_t> seed, int threads) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  SweepResult res = run_sweep(cfg, threads);
  emit(csv_string(res.points), out_path);
  return 0;
}

int cmd_analyze(const std::string& config_path, const std::string& mode,
                const std::string& out_path, int se_samples, uint64_t se_seed) {
  ExperimentConfig cfg = load_config(config_path);
  if (mode == "union_bound") {
    UnionBoundSystem sys;
    sys.afdm = cfg.afdm_params();
    sys.ensemble = ensemble_from(cfg);
    sys.scma = cfg.scma;
    CodebookSet set =
        build_codebooks(cfg.alphabet(), cfg.scma, cfg.signature_matrix(), cfg.normalization);
    sys.z_eff = set.effective_signature;
    sys.allocation = cfg.allocation;
    sys.alphabet = cfg.alphabet();
    sys.direction = cfg.direction;
    std::vector<double> n0s;
    n0s.reserve(cfg.ebn0_grid_db.size());
    for (double db : cfg.ebn0_grid_db) n0s.push_back(noise_variance(cfg, db));
    std::vector<double> bound = union_bound_curve(sys, n0s);
    std::string text = "ebn0_db,union_bound_ber\n";
    char buf[80];
    for (size_t i = 0; i < bound.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.6g,%.6g\n", cfg.ebn0_grid_db[i], bound[i]);
      text += buf;
    }
    emit(text, out_path);
    return 0;
  }
  if (mode == "se") {
    if (!cfg.code) throw std::runtime_error("state evolution requires a code in the config");
    LdpcCode code = make_code(*cfg.code);
    NleTable table = build_nle_table(code, cfg.alphabet(), cfg.oamp.decoder_iterations,
                                     /*frames_per_point=*/4, /*points=*/20,
                                     /*tau_min=*/1e-4, /*tau_max=*/10.0, se_seed);
    // Channel sample set over which the linear-stage trace is averaged.
    CodebookSet set =
        build_codebooks(cfg.alphabet(), cfg.scma, cfg.signature_matrix(), cfg.normalization);
    AfdmParams params = cfg.afdm_params();
    const int q = cfg.n / cfg.scma.k;
    Rng rng(mix_seed(se_seed, 0xa7u));
    std::vector<Eigen::MatrixXcd> g_blocks;
    g_blocks.reserve(se_samples);
    for (int i = 0; i < se_samples; ++i) {
      Eigen::MatrixXcd g(cfg.n, cfg.scma.j * q);
      if (cfg.direction == Direction::uplink) {
        for (int j = 0; j < cfg.scma.j; ++j) {
          ChannelRealization real =
              cfg.profile.kind == ProfileConfig::Kind::eva
                  ? sample_realization(cfg.profile.eva, cfg.n, rng)
                  : sample_realization(cfg.profile.uniform, rng);
          Eigen::MatrixXcd h = effective_matrix(real, params, params.n);
          g.middleCols(static_cast<Eigen::Index>(j) * q, q) =
              h * user_spreading_matrix(set.effective_signature, j, cfg.allocation, cfg.n);
        }
      } else {
        ChannelRealization real =
            cfg.profile.kind == ProfileConfig::Kind::eva
                ? sample_realization(cfg.profile.eva, cfg.n, rng)
                : sample_realization(cfg.profile.uniform, rng);
        Eigen::MatrixXcd h = effective_matrix(real, params, params.n);
        g = h * symbol_spreading_matrix(set.effective_signature, cfg.allocation, cfg.n);
      }
      g_blocks.push_back(std::move(g));
    }
    std::string text = "ebn0_db,iteration,tau,eta\n";
    char buf[120];
    for (double db : cfg.ebn0_grid_db) {
      const double n0 = noise_variance(cfg, db);
      SeTrace trace = state_evolution(g_blocks, n0, table, cfg.oamp.outer_iterations);
      for (size_t t = 0; t < trace.tau.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%.6g,%zu,%.6g,%.6g\n", db, t + 1, trace.tau[t],
                      trace.eta[t]);
        text += buf;
      }
    }
    emit(text, out_path);
    return 0;
  }
  throw std::runtime_error("unknown analyze mode '" + mode + "'");
}

Eigen::VectorXcd alphabet_by_name(const std::string& name) {
  if (name == "bpsk") return bpsk_alphabet();
  if (name == "qpsk") return qpsk_alphabet();
  throw std::runtime_error("unknown modulation '" + name + "'");
}

Normalization normalization_by_name(const std::string& name) {
  if (name == "none") return Normalization::none;
  if (name == "per_user") return Normalization::per_user;
  if (name == "global") return Normalization::global;
  throw std::runtime_error("unknown normalization '" + name + "'");
}

int cmd_codebook_build(const std::string& direction, const std::string& modulation,
                       const std::string& out_path) {
  ScmaConfig scma;
  Eigen::MatrixXcd z = direction == "uplink" ? uplink_signature(scma) : downlink_signature_seed();
  double d = med(z, alphabet_by_name(modulation), scma);
  std::fprintf(stderr, "signature %dx%d, med %.9f\n", static_cast<int>(z.rows()),
               static_cast<int>(z.cols()), d);
  save_matrix(z, out_path);
  return 0;
}

int cmd_codebook_optimize(long budget, uint64_t seed, const std::string& modulation,
                          const std::string& out_path) {
  ScmaConfig scma;
  Eigen::VectorXcd alphabet = alphabet_by_name(modulation);
  Eigen::MatrixXcd zopt = optimize_signature(scma, alphabet, static_cast<int>(budget), seed);
  std::fprintf(stderr, "seed med %.9f, optimized med %.9f\n",
               med(downlink_signature_seed(), alphabet, scma), med(zopt, alphabet, scma));
  save_matrix(zopt, out_path);
  return 0;
}

int cmd_codebook_serialize(const std::string& in_path, const std::string& modulation,
                           const std::string& normalization, const std::string& out_path) {
  ScmaConfig scma;
  Eigen::MatrixXcd z = load_matrix(in_path);
  CodebookSet set =
      build_codebooks(alphabet_by_name(modulation), scma, z, normalization_by_name(normalization));
  // Stacked per-user codebooks: rows [j*K, (j+1)*K) hold user j's K x M book.
  Eigen::MatrixXcd stacked(static_cast<Eigen::Index>(scma.j) * scma.k,
                           set.codebooks[0].cols());
  for (int j = 0; j < scma.j; ++j)
    stacked.middleRows(static_cast<Eigen::Index>(j) * scma.k, scma.k) = set.codebooks[j];
  save_matrix(stacked, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AFDM-SCMA link-level simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::optional<uint64_t> seed_override;
  int threads = 1;
  CLI::App* run = app.add_subcommand("run", "Monte Carlo BER sweep from a config file");
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->add_option("--out", out_path, "output CSV path (stdout if omitted)");
  run->add_option("--seed", seed_override, "override the config seed");
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  std::string mode = "union_bound";
  int se_samples = 50;
  uint64_t se_seed = 1;
  CLI::App* analyze = app.add_subcommand("analyze", "analytical curves from a config file");
  analyze->add_option("--config", config_path, "JSON experiment config")->required();
  analyze->add_option("--mode", mode, "union_bound or se");
  analyze->add_option("--out", out_path, "output CSV path (stdout if omitted)");
  analyze->add_option("--se-samples", se_samples, "channel samples for the linear-stage average");
  analyze->add_option("--se-seed", se_seed, "seed for table building and channel samples");

  CLI::App* codebook = app.add_subcommand("codebook", "signature and codebook tools");
  std::string direction = "downlink", modulation = "qpsk", normalization = "per_user";
  std::string in_path;
  long budget = 2000;
  uint64_t opt_seed = 1;

  CLI::App* build = codebook->add_subcommand("build", "write a seed signature matrix");
  build->add_option("--direction", direction, "uplink or downlink");
  build->add_option("--modulation", modulation, "bpsk or qpsk");
  build->add_option("--out", out_path, "output matrix path")->required();

  CLI::App* optimize = codebook->add_subcommand("optimize", "distance-optimize the broadcast signature");
  optimize->add_option("--budget", budget, "candidate evaluations");
  optimize->add_option("--seed", opt_seed, "search seed");
  optimize->add_option("--modulation", modulation, "bpsk or qpsk");
  optimize->add_option("--out", out_path, "output matrix path")->required();

  CLI::App* serialize = codebook->add_subcommand("serialize", "expand a signature into per-user codebooks");
  serialize->add_option("--in", in_path, "signature matrix path")->required();
  serialize->add_option("--modulation", modulation, "bpsk or qpsk");
  serialize->add_option("--normalization", normalization, "none, per_user, or global");
  serialize->add_option("--out", out_path, "output stacked codebook path")->required();

  codebook->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out_path, seed_override, threads);
    if (*analyze) return cmd_analyze(config_path, mode, out_path, se_samples, se_seed);
    if (*build) return cmd_codebook_build(direction, modulation, out_path);
    if (*optimize) return cmd_codebook_optimize(budget, opt_seed, modulation, out_path);
    if (*serialize) return cmd_codebook_serialize(in_path, modulation, normalization, out_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
