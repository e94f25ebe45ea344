#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "afdmscma/afdm.hpp"
#include "afdmscma/rng.hpp"

namespace afdmscma {

// One propagation path: complex gain, integer delay in samples, Doppler
// normalized to the subcarrier spacing (may be fractional).
struct ChannelPath {
  std::complex<double> gain{1.0, 0.0};
  int delay = 0;
  double doppler = 0.0;

  // Nearest-integer split nu = alpha + beta with beta in (-1/2, 1/2].
  int alpha() const;
  double beta() const;
};

struct ChannelRealization {
  std::vector<ChannelPath> paths;
};

// Tapped delay line profile with per-tap average powers in dB. Delays are
// quantized to samples at N * spacing_hz and co-located taps merged.
struct EvaProfile {
  std::vector<double> delays_ns;
  std::vector<double> powers_db;
  double spacing_hz = 15e3;
  double doppler_max = 1.1e3 / 15e3;  // normalized to subcarrier spacing

  static EvaProfile standard();
};

struct QuantizedProfile {
  std::vector<int> delays;     // distinct, ascending
  std::vector<double> powers;  // linear, sums to 1
};
QuantizedProfile quantize_profile(const EvaProfile& profile, int n);

// Synthetic profile with explicit structure; used by the analytical-match
// experiments. Equal powers 1/P. Dopplers either fixed per path or drawn as
// doppler_max * cos(psi), psi ~ U[-pi, pi].
struct UniformProfile {
  int num_paths = 1;
  std::vector<int> delays;             // default 0..P-1
  std::vector<double> fixed_dopplers;  // empty -> random cosine model
  double doppler_max = 0.0;
};

ChannelRealization sample_realization(const EvaProfile& profile, int n, Rng& rng);
ChannelRealization sample_realization(const UniformProfile& profile, Rng& rng);

// Time-domain matrix of one path: gain * prefix-phase * Doppler * cyclic
// shift. The prefix phase term makes the cyclic model match the actual
// prefixed transmission exactly.
Eigen::MatrixXcd time_domain_path_matrix(const ChannelPath& path, const AfdmParams& p);

// Time-varying convolution of a prefixed block, absolute-time Doppler phases
// (prefix samples sit at negative time). Samples in the prefix region of the
// output are partial sums and are meant to be discarded by remove_cpp.
Eigen::VectorXcd apply_channel(const Eigen::VectorXcd& s_cpp, const ChannelRealization& ch,
                               const AfdmParams& p, double n0, Rng& rng);

// Chirp-domain band center of a path: (alpha + 2 N c1 l) mod N. The path's
// energy concentrates on the cyclic diagonal offset by this amount.
double band_center(const ChannelPath& path, const AfdmParams& p);

// Closed-form chirp-domain matrix of one path (gain folded in). Entries
// outside cyclic offset band_center +/- k_nu are zeroed; pass k_nu >= N/2
// for the untruncated matrix. Exact for arbitrary real chirp rates.
Eigen::MatrixXcd effective_path_matrix(const ChannelPath& path, const AfdmParams& p, int k_nu);

// Sum over paths of the closed-form per-path matrices.
Eigen::MatrixXcd effective_matrix(const ChannelRealization& ch, const AfdmParams& p, int k_nu);

// Reference construction A (sum_p gain Gamma Delta Pi) A^H via explicit
// transform conjugation; the closed form must match this.
Eigen::MatrixXcd effective_matrix_direct(const ChannelRealization& ch, const AfdmParams& p);

}  // namespace afdmscma
