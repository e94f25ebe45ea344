#include "afdmscma/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "afdmscma/analysis.hpp"
#include "afdmscma/mat_io.hpp"
#include "afdmscma/rng.hpp"
#include "json.hpp"

namespace afdmscma {

AfdmParams ExperimentConfig::afdm_params() const {
  AfdmParams p;
  p.n = n;
  p.n_cpp = n_cpp;
  if (waveform == Waveform::afdm) {
    p.c1 = c1 ? *c1 : select_c1(alpha_max, k_nu, min_delay_gap, n);
    p.c2 = c2 ? *c2 : select_c2(n);
  }
  p.validate();
  return p;
}

Eigen::VectorXcd ExperimentConfig::alphabet() const {
  if (modulation_order == 2) return bpsk_alphabet();
  if (modulation_order == 4) return qpsk_alphabet();
  throw std::invalid_argument("harness: unsupported modulation order");
}

Eigen::MatrixXcd ExperimentConfig::signature_matrix() const {
  if (signature == "auto")
    return direction == Direction::uplink ? uplink_signature(scma) : downlink_signature_seed();
  if (signature == "uplink_indicator") return uplink_signature(scma);
  if (signature == "downlink_seed") return downlink_signature_seed();
  if (signature.rfind("file:", 0) == 0) return load_matrix(signature.substr(5));
  throw std::invalid_argument("harness: unknown signature spec '" + signature + "'");
}

namespace {

using nlohmann::json;

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table,
             const char* what) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  throw std::invalid_argument(std::string("harness: unknown ") + what + " '" + s + "'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j = json::parse(json_text);
  ExperimentConfig cfg;

  if (j.contains("direction"))
    cfg.direction = parse_enum<Direction>(j["direction"], {{"uplink", Direction::uplink},
                                                           {"downlink", Direction::downlink}},
                                          "direction");
  if (j.contains("waveform"))
    cfg.waveform = parse_enum<Waveform>(j["waveform"], {{"afdm", Waveform::afdm},
                                                        {"ofdm", Waveform::ofdm}},
                                        "waveform");
  if (j.contains("receiver"))
    cfg.receiver = parse_enum<ReceiverKind>(j["receiver"], {{"mpa", ReceiverKind::mpa},
                                                            {"two_stage", ReceiverKind::two_stage},
                                                            {"oamp", ReceiverKind::oamp}},
                                            "receiver");
  if (j.contains("allocation"))
    cfg.allocation = parse_enum<Allocation>(j["allocation"],
                                            {{"localized", Allocation::localized},
                                             {"interleaved", Allocation::interleaved}},
                                            "allocation");
  if (j.contains("normalization"))
    cfg.normalization = parse_enum<Normalization>(j["normalization"],
                                                  {{"none", Normalization::none},
                                                   {"per_user", Normalization::per_user},
                                                   {"global", Normalization::global}},
                                                  "normalization");
  cfg.n = j.value("n", cfg.n);
  cfg.n_cpp = j.value("n_cpp", cfg.n_cpp);
  if (j.contains("c1") && !j["c1"].is_null()) cfg.c1 = j["c1"].get<double>();
  if (j.contains("c2") && !j["c2"].is_null()) cfg.c2 = j["c2"].get<double>();
  cfg.alpha_max = j.value("alpha_max", cfg.alpha_max);
  cfg.k_nu = j.value("k_nu", cfg.k_nu);
  cfg.min_delay_gap = j.value("min_delay_gap", cfg.min_delay_gap);

  if (j.contains("modulation")) {
    std::string m = j["modulation"];
    if (m == "bpsk") cfg.modulation_order = 2;
    else if (m == "qpsk") cfg.modulation_order = 4;
    else throw std::invalid_argument("harness: unknown modulation '" + m + "'");
  }
  cfg.signature = j.value("signature", cfg.signature);

  if (j.contains("profile")) {
    const json& p = j["profile"];
    std::string type = p.value("type", "uniform");
    if (type == "uniform") {
      cfg.profile.kind = ProfileConfig::Kind::uniform;
      cfg.profile.uniform.num_paths = p.value("num_paths", 1);
      if (p.contains("delays")) cfg.profile.uniform.delays = p["delays"].get<std::vector<int>>();
      if (p.contains("dopplers"))
        cfg.profile.uniform.fixed_dopplers = p["dopplers"].get<std::vector<double>>();
      cfg.profile.uniform.doppler_max = p.value("doppler_max", 0.0);
    } else if (type == "eva") {
      cfg.profile.kind = ProfileConfig::Kind::eva;
      cfg.profile.eva = EvaProfile::standard();
      cfg.profile.eva.spacing_hz = p.value("spacing_hz", cfg.profile.eva.spacing_hz);
      cfg.profile.eva.doppler_max = p.value("doppler_max", cfg.profile.eva.doppler_max);
    } else {
      throw std::invalid_argument("harness: unknown profile type '" + type + "'");
    }
  }

  if (j.contains("code") && !j["code"].is_null()) {
    CodeConfig cc;
    const json& c = j["code"];
    cc.n = c.value("n", cc.n);
    cc.m = c.value("m", cc.m);
    cc.seed = c.value("seed", cc.seed);
    cc.alist_path = c.value("alist", std::string());
    cfg.code = cc;
  }

  if (j.contains("ebn0_grid_db")) cfg.ebn0_grid_db = j["ebn0_grid_db"].get<std::vector<double>>();
  cfg.min_bit_errors = j.value("min_bit_errors", cfg.min_bit_errors);
  cfg.max_trials = j.value("max_trials", cfg.max_trials);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.mpa_iterations = j.value("mpa_iterations", cfg.mpa_iterations);
  if (j.contains("oamp")) {
    const json& o = j["oamp"];
    cfg.oamp.outer_iterations = o.value("outer_iterations", cfg.oamp.outer_iterations);
    cfg.oamp.kappa = o.value("kappa", cfg.oamp.kappa);
    cfg.oamp.decoder_iterations = o.value("decoder_iterations", cfg.oamp.decoder_iterations);
    cfg.oamp.early_stop = o.value("early_stop", cfg.oamp.early_stop);
  }
  cfg.ebn0_includes_overload = j.value("ebn0_includes_overload", cfg.ebn0_includes_overload);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("harness: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

LdpcCode make_code(const CodeConfig& cc) {
  if (!cc.alist_path.empty()) return load_alist(cc.alist_path);
  return make_ldpc(cc.n, cc.m, cc.seed);
}

double noise_variance(const ExperimentConfig& cfg, double ebn0_db) {
  CodebookSet set =
      build_codebooks(cfg.alphabet(), cfg.scma, cfg.signature_matrix(), cfg.normalization);
  double es = 0.0;
  for (int j = 0; j < cfg.scma.j; ++j) es += set.effective_signature.col(j).squaredNorm();
  es /= cfg.scma.j;
  const double b = std::log2(static_cast<double>(cfg.modulation_order));
  double rate = 1.0;
  if (cfg.code) {
    rate = static_cast<double>(cfg.code->n - cfg.code->m) / cfg.code->n;
  }
  const double xi = cfg.ebn0_includes_overload ? cfg.scma.overload() : 1.0;
  return es * xi / (b * rate * std::pow(10.0, ebn0_db / 10.0));
}

namespace {

struct Tally {
  long bit_errors = 0, bits = 0, frame_errors = 0, frames = 0;
  Tally& operator+=(const Tally& o) {
    bit_errors += o.bit_errors;
    bits += o.bits;
    frame_errors += o.frame_errors;
    frames += o.frames;
    return *this;
  }
};

// Everything a trial needs, computed once per sweep.
struct SweepSetup {
  const ExperimentConfig* cfg = nullptr;
  AfdmParams params;
  Eigen::VectorXcd alphabet;
  CodebookSet set;
  int q_groups = 0, t_vars = 0, bps = 0;

  bool fixed_structure = false;
  UniformProfile uniform;  // delays filled in
  // Fixed-structure precomputation: per path, exact and detector-truncated
  // unit-gain images of the spreading columns.
  std::vector<Eigen::MatrixXcd> user_spread;              // per user, N x Q
  Eigen::MatrixXcd full_spread;                           // N x T
  std::vector<std::vector<Eigen::MatrixXcd>> ps_exact;    // [path][user]
  std::vector<std::vector<Eigen::MatrixXcd>> ps_det;      // [path][user]
  std::vector<Eigen::MatrixXcd> pz_exact, pz_det;         // [path], N x T
  std::vector<Eigen::MatrixXcd> u_exact, u_det;           // [path], N x N

  LdpcCode code;
  std::vector<Interleaver> interleavers;
  int blocks = 0;  // transform blocks per coded frame
  long bits_per_trial = 0;
  long batch_size = 1;
};

ChannelRealization draw_realization(const SweepSetup& s, Rng& rng) {
  if (s.cfg->profile.kind == ProfileConfig::Kind::eva)
    return sample_realization(s.cfg->profile.eva, s.params.n, rng);
  return sample_realization(s.uniform, rng);
}

SweepSetup prepare(const ExperimentConfig& cfg) {
  SweepSetup s;
  s.cfg = &cfg;
  s.params = cfg.afdm_params();
  s.alphabet = cfg.alphabet();
  s.set = build_codebooks(s.alphabet, cfg.scma, cfg.signature_matrix(), cfg.normalization);
  if (cfg.n % cfg.scma.k != 0) throw std::invalid_argument("harness: N must be a multiple of K");
  s.q_groups = cfg.n / cfg.scma.k;
  s.t_vars = cfg.scma.j * s.q_groups;
  s.bps = static_cast<int>(std::log2(cfg.modulation_order));

  if (cfg.receiver == ReceiverKind::two_stage && cfg.direction != Direction::downlink)
    throw std::invalid_argument("harness: the two-stage receiver is a broadcast receiver");
  if (cfg.receiver == ReceiverKind::oamp && !cfg.code)
    throw std::invalid_argument("harness: the iterative receiver requires a code");

  s.uniform = cfg.profile.uniform;
  if (cfg.profile.kind == ProfileConfig::Kind::uniform && s.uniform.delays.empty()) {
    s.uniform.delays.resize(s.uniform.num_paths);
    for (int i = 0; i < s.uniform.num_paths; ++i) s.uniform.delays[i] = i;
  }
  s.fixed_structure = cfg.profile.kind == ProfileConfig::Kind::uniform &&
                      !s.uniform.fixed_dopplers.empty();

  s.user_spread.resize(cfg.scma.j);
  for (int j = 0; j < cfg.scma.j; ++j)
    s.user_spread[j] = user_spreading_matrix(s.set.effective_signature, j, cfg.allocation, cfg.n);
  s.full_spread = symbol_spreading_matrix(s.set.effective_signature, cfg.allocation, cfg.n);

  if (s.fixed_structure) {
    const int paths = s.uniform.num_paths;
    s.u_exact.resize(paths);
    s.u_det.resize(paths);
    s.ps_exact.assign(paths, {});
    s.ps_det.assign(paths, {});
    s.pz_exact.resize(paths);
    s.pz_det.resize(paths);
    for (int p = 0; p < paths; ++p) {
      ChannelPath unit;
      unit.gain = {1.0, 0.0};
      unit.delay = s.uniform.delays[p];
      unit.doppler = s.uniform.fixed_dopplers[p];
      s.u_exact[p] = effective_path_matrix(unit, s.params, s.params.n);
      s.u_det[p] = effective_path_matrix(unit, s.params, cfg.k_nu);
      s.ps_exact[p].resize(cfg.scma.j);
      s.ps_det[p].resize(cfg.scma.j);
      for (int j = 0; j < cfg.scma.j; ++j) {
        s.ps_exact[p][j] = s.u_exact[p] * s.user_spread[j];
        s.ps_det[p][j] = s.u_det[p] * s.user_spread[j];
      }
      s.pz_exact[p] = s.u_exact[p] * s.full_spread;
      s.pz_det[p] = s.u_det[p] * s.full_spread;
    }
  }

  if (cfg.code) {
    s.code = make_code(*cfg.code);
    if (cfg.receiver == ReceiverKind::oamp) {
      const int frame_bits = s.code.n;
      const int bits_per_block = s.t_vars / cfg.scma.j * s.bps;  // per user
      if (frame_bits % bits_per_block != 0)
        throw std::invalid_argument("harness: code length must tile transform blocks");
      s.blocks = frame_bits / bits_per_block;
      s.interleavers.reserve(cfg.scma.j);
      for (int j = 0; j < cfg.scma.j; ++j)
        s.interleavers.push_back(
            Interleaver::seeded(s.code.n, mix_seed(cfg.seed, 0x1111u + static_cast<uint64_t>(j))));
    }
  }

  s.bits_per_trial = cfg.receiver == ReceiverKind::oamp
                         ? static_cast<long>(cfg.scma.j) * s.code.k()
                         : static_cast<long>(s.t_vars) * s.bps;
  s.batch_size = std::clamp(4096L / std::max(s.bits_per_trial, 1L), 1L, 256L);
  return s;
}

// Per-user chirp-domain mixing blocks for one trial. Exact matrices generate
// the observation; detector matrices (band-truncated) are what the receivers
// see. They coincide for integer-Doppler structures with wide-enough bands.
struct TrialChannels {
  Eigen::MatrixXcd g_exact;  // N x T
  Eigen::MatrixXcd g_det;
  Eigen::MatrixXcd h_exact;  // chip-level, downlink only
  Eigen::MatrixXcd h_det;
};

TrialChannels build_channels(const SweepSetup& s, Rng& chan_rng) {
  const auto& cfg = *s.cfg;
  TrialChannels tc;
  const int n = cfg.n;
  if (cfg.direction == Direction::uplink) {
    tc.g_exact.resize(n, s.t_vars);
    tc.g_det.resize(n, s.t_vars);
    for (int j = 0; j < cfg.scma.j; ++j) {
      ChannelRealization real = draw_realization(s, chan_rng);
      Eigen::MatrixXcd ge = Eigen::MatrixXcd::Zero(n, s.q_groups);
      Eigen::MatrixXcd gd = Eigen::MatrixXcd::Zero(n, s.q_groups);
      if (s.fixed_structure) {
        for (size_t p = 0; p < real.paths.size(); ++p) {
          ge += real.paths[p].gain * s.ps_exact[p][j];
          gd += real.paths[p].gain * s.ps_det[p][j];
        }
      } else {
        Eigen::MatrixXcd he = effective_matrix(real, s.params, s.params.n);
        Eigen::MatrixXcd hd = effective_matrix(real, s.params, cfg.k_nu);
        ge = he * s.user_spread[j];
        gd = hd * s.user_spread[j];
      }
      tc.g_exact.middleCols(static_cast<Eigen::Index>(j) * s.q_groups, s.q_groups) = ge;
      tc.g_det.middleCols(static_cast<Eigen::Index>(j) * s.q_groups, s.q_groups) = gd;
    }
  } else {
    ChannelRealization real = draw_realization(s, chan_rng);
    if (s.fixed_structure) {
      tc.h_exact = Eigen::MatrixXcd::Zero(n, n);
      tc.h_det = Eigen::MatrixXcd::Zero(n, n);
      tc.g_exact = Eigen::MatrixXcd::Zero(n, s.t_vars);
      tc.g_det = Eigen::MatrixXcd::Zero(n, s.t_vars);
      for (size_t p = 0; p < real.paths.size(); ++p) {
        tc.h_exact += real.paths[p].gain * s.u_exact[p];
        tc.h_det += real.paths[p].gain * s.u_det[p];
        tc.g_exact += real.paths[p].gain * s.pz_exact[p];
        tc.g_det += real.paths[p].gain * s.pz_det[p];
      }
    } else {
      tc.h_exact = effective_matrix(real, s.params, s.params.n);
      tc.h_det = effective_matrix(real, s.params, cfg.k_nu);
      tc.g_exact = tc.h_exact * s.full_spread;
      tc.g_det = tc.h_det * s.full_spread;
    }
  }
  return tc;
}

Tally uncoded_trial(const SweepSetup& s, double n0, uint64_t trial_seed) {
  const auto& cfg = *s.cfg;
  Rng bits_rng(mix_seed(trial_seed, 1));
  Rng chan_rng(mix_seed(trial_seed, 2));
  Rng noise_rng(mix_seed(trial_seed, 3));

  std::vector<int> tx(s.t_vars);
  Eigen::VectorXcd x(s.t_vars);
  for (int i = 0; i < s.t_vars; ++i) {
    tx[i] = static_cast<int>(bits_rng.uniform_int(static_cast<uint64_t>(cfg.modulation_order)));
    x(i) = s.alphabet(tx[i]);
  }

  TrialChannels tc = build_channels(s, chan_rng);
  Eigen::VectorXcd y = tc.g_exact * x;
  for (int i = 0; i < y.size(); ++i) y(i) += noise_rng.cgaussian(n0);

  std::vector<int> hard;
  if (cfg.receiver == ReceiverKind::mpa) {
    MpaResult res =
        mpa_detect(y, tc.g_det, s.alphabet, n0, cfg.mpa_iterations, nullptr, 1L << 20);
    hard = std::move(res.hard);
  } else {  // two_stage, downlink
    TwoStageResult res = two_stage_detect(y, tc.h_det, s.set.effective_signature, s.alphabet,
                                          cfg.scma, cfg.allocation, n0, cfg.mpa_iterations);
    hard = std::move(res.hard);
  }

  Tally t;
  t.bits = static_cast<long>(s.t_vars) * s.bps;
  t.frames = 1;
  for (int i = 0; i < s.t_vars; ++i)
    t.bit_errors += __builtin_popcount(static_cast<unsigned>(tx[i] ^ hard[i]));
  t.frame_errors = t.bit_errors > 0 ? 1 : 0;
  return t;
}

Tally coded_trial(const SweepSetup& s, double n0, uint64_t trial_seed) {
  const auto& cfg = *s.cfg;
  Rng bits_rng(mix_seed(trial_seed, 1));
  Rng chan_rng(mix_seed(trial_seed, 2));
  Rng noise_rng(mix_seed(trial_seed, 3));
  const int users = cfg.scma.j;
  const int q = s.q_groups;
  const int b = s.bps;

  std::vector<std::vector<uint8_t>> info(users), tx_bits(users);
  for (int j = 0; j < users; ++j) {
    info[j].resize(s.code.k());
    for (auto& bit : info[j]) bit = static_cast<uint8_t>(bits_rng.next_u64() & 1);
    std::vector<uint8_t> cw = encode(info[j], s.code);
    tx_bits[j] = s.interleavers[j].apply(cw);
  }

  OampInput in;
  in.code = &s.code;
  in.interleavers = s.interleavers;
  in.alphabet = s.alphabet;
  in.num_users = users;
  in.symbols_per_block = q;
  in.n0 = n0;
  in.received.resize(s.blocks);
  in.g.resize(s.blocks);
  for (int blk = 0; blk < s.blocks; ++blk) {
    TrialChannels tc = build_channels(s, chan_rng);
    Eigen::VectorXcd x(s.t_vars);
    for (int j = 0; j < users; ++j)
      for (int qq = 0; qq < q; ++qq) {
        const int sym = blk * q + qq;
        int idx = 0;
        for (int bit = 0; bit < b; ++bit)
          idx = (idx << 1) | tx_bits[j][static_cast<size_t>(sym) * b + bit];
        x(static_cast<Eigen::Index>(j) * q + qq) = s.alphabet(idx);
      }
    Eigen::VectorXcd y = tc.g_exact * x;
    for (int i = 0; i < y.size(); ++i) y(i) += noise_rng.cgaussian(n0);
    in.received[blk] = std::move(y);
    in.g[blk] = std::move(tc.g_exact);
  }

  OampResult res = oamp_receive(in, cfg.oamp);
  Tally t;
  for (int j = 0; j < users; ++j) {
    long errs = 0;
    for (int i = 0; i < s.code.k(); ++i)
      if (res.info_bits[j][i] != info[j][i]) ++errs;
    t.bit_errors += errs;
    t.bits += s.code.k();
    t.frames += 1;
    if (errs > 0) t.frame_errors += 1;
  }
  return t;
}

Tally run_batch(const SweepSetup& s, double n0, size_t point_idx, long first_trial,
                long end_trial) {
  Tally t;
  for (long trial = first_trial; trial < end_trial; ++trial) {
    uint64_t trial_seed =
        mix_seed(mix_seed(s.cfg->seed, static_cast<uint64_t>(point_idx)),
                 static_cast<uint64_t>(trial));
    t += s.cfg->receiver == ReceiverKind::oamp ? coded_trial(s, n0, trial_seed)
                                               : uncoded_trial(s, n0, trial_seed);
  }
  return t;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg, int threads) {
  if (threads < 1) throw std::invalid_argument("harness: thread count must be positive");
  SweepSetup setup = prepare(cfg);
  SweepResult result;
  result.points.reserve(cfg.ebn0_grid_db.size());

  for (size_t pt = 0; pt < cfg.ebn0_grid_db.size(); ++pt) {
    const double n0 = noise_variance(cfg, cfg.ebn0_grid_db[pt]);
    Tally total;
    long batch = 0;
    bool stop = false;
    const long bs = setup.batch_size;
    while (!stop) {
      // One wave of `threads` batches; folded in batch order afterwards so
      // the counted trial set never depends on the thread count.
      int wave = 0;
      std::vector<std::pair<long, long>> ranges;
      for (int i = 0; i < threads; ++i) {
        long first = (batch + i) * bs;
        if (first >= cfg.max_trials) break;
        ranges.emplace_back(first, std::min(first + bs, cfg.max_trials));
        ++wave;
      }
      if (wave == 0) break;
      std::vector<Tally> partial(wave);
      if (wave == 1 || threads == 1) {
        for (int i = 0; i < wave; ++i)
          partial[i] = run_batch(setup, n0, pt, ranges[i].first, ranges[i].second);
      } else {
        std::vector<std::thread> pool;
        pool.reserve(wave);
        for (int i = 0; i < wave; ++i)
          pool.emplace_back([&, i] {
            partial[i] = run_batch(setup, n0, pt, ranges[i].first, ranges[i].second);
          });
        for (auto& th : pool) th.join();
      }
      for (int i = 0; i < wave; ++i) {
        total += partial[i];
        if (total.bit_errors >= cfg.min_bit_errors || ranges[i].second >= cfg.max_trials) {
          stop = true;
          break;
        }
      }
      batch += wave;
    }
    BerPoint point;
    point.ebn0_db = cfg.ebn0_grid_db[pt];
    point.bit_errors = total.bit_errors;
    point.bits = total.bits;
    point.frame_errors = total.frame_errors;
    point.frames = total.frames;
    result.points.push_back(point);
  }
  return result;
}

std::string csv_string(const std::vector<BerPoint>& points) {
  std::string out = "ebn0_db,ber,bit_errors,bits,frame_errors,frames\n";
  char buf[160];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%ld,%ld,%ld,%ld\n", p.ebn0_db, p.ber(),
                  p.bit_errors, p.bits, p.frame_errors, p.frames);
    out += buf;
  }
  return out;
}

void write_csv(const std::vector<BerPoint>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("harness: cannot write " + path);
  out << csv_string(points);
}

}  // namespace afdmscma
