#pragma once

#include <optional>
#include <string>
#include <vector>

#include "afdmscma/afdm.hpp"
#include "afdmscma/channel.hpp"
#include "afdmscma/coding.hpp"
#include "afdmscma/detect.hpp"
#include "afdmscma/scma.hpp"

namespace afdmscma {

enum class Waveform { afdm, ofdm };
enum class ReceiverKind { mpa, two_stage, oamp };

struct ProfileConfig {
  enum class Kind { uniform, eva } kind = Kind::uniform;
  UniformProfile uniform;
  EvaProfile eva;
};

struct CodeConfig {
  int n = 2048;
  int m = 683;
  uint64_t seed = 7;
  std::string alist_path;  // when set, load the matrix instead of generating
};

struct ExperimentConfig {
  Direction direction = Direction::uplink;
  Waveform waveform = Waveform::afdm;
  ReceiverKind receiver = ReceiverKind::mpa;
  Allocation allocation = Allocation::localized;
  Normalization normalization = Normalization::per_user;

  int n = 8;
  int n_cpp = 2;
  std::optional<double> c1, c2;  // unset: derived from the band-separation rule
  int alpha_max = 0, k_nu = 0, min_delay_gap = 1;

  int modulation_order = 2;        // 2 = BPSK, 4 = QPSK
  std::string signature = "auto";  // auto | uplink_indicator | downlink_seed | file:<path>
  ProfileConfig profile;
  std::optional<CodeConfig> code;
  ScmaConfig scma = ScmaConfig::standard_4x6();

  std::vector<double> ebn0_grid_db;
  int min_bit_errors = 200;
  long max_trials = 1000000;
  uint64_t seed = 1;
  int mpa_iterations = 10;
  OampConfig oamp;
  // Fold the overload factor J/K into the per-bit energy accounting.
  bool ebn0_includes_overload = false;

  AfdmParams afdm_params() const;  // OFDM zeroes the chirps, same path otherwise
  Eigen::VectorXcd alphabet() const;
  Eigen::MatrixXcd signature_matrix() const;
};

// Structured-text (JSON) configuration mirroring the field names above.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct BerPoint {
  double ebn0_db = 0.0;
  long bit_errors = 0;
  long bits = 0;
  long frame_errors = 0;
  long frames = 0;
  double ber() const { return bits > 0 ? static_cast<double>(bit_errors) / bits : 0.0; }
  double fer() const { return frames > 0 ? static_cast<double>(frame_errors) / frames : 0.0; }
};

struct SweepResult {
  std::vector<BerPoint> points;
};

// Monte-Carlo sweep over the Eb/N0 grid. Trials are partitioned into
// fixed-size batches (a function of the config only) folded in batch order,
// so the counted set of trials -- and therefore the CSV -- is independent of
// the thread count.
SweepResult run_sweep(const ExperimentConfig& cfg, int threads = 1);

// Per-user average symbol energy / (bits per symbol * code rate), prefix
// excluded; returns the noise variance for the given Eb/N0.
double noise_variance(const ExperimentConfig& cfg, double ebn0_db);

std::string csv_string(const std::vector<BerPoint>& points);
void write_csv(const std::vector<BerPoint>& points, const std::string& path);

// The code instance an experiment uses (generated or loaded).
LdpcCode make_code(const CodeConfig& cc);

}  // namespace afdmscma
