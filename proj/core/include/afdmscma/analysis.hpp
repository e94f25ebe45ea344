#pragma once

#include <Eigen/Dense>
#include <vector>

#include "afdmscma/afdm.hpp"
#include "afdmscma/channel.hpp"
#include "afdmscma/coding.hpp"
#include "afdmscma/scma.hpp"

namespace afdmscma {

// Deterministic path structure (delays/Dopplers) with per-path average
// powers; gains are the random part and are integrated out analytically.
struct PathEnsemble {
  std::vector<ChannelPath> paths;  // gain fields ignored (treated as 1)
  std::vector<double> variances;   // average power per path
};

// Difference-signal matrix: column p = sqrt(var_p) * H_p * delta with H_p the
// unit-gain chirp-domain path matrix. Pairwise error probability depends on
// its Gram spectrum only.
Eigen::MatrixXcd phi_delta(const Eigen::VectorXcd& delta, const PathEnsemble& ensemble,
                           const AfdmParams& p);

struct PepResult {
  double pep = 0.0;        // two-term Q-function bound, gains averaged out
  double asymptote = 0.0;  // high-SNR limit n0^R (4^R/12 + 3^R/4) / prod(lambda)
  int rank = 0;            // eigenvalues above 1e-9 * lambda_max
  Eigen::VectorXd eigenvalues;
};
PepResult pairwise_error(const Eigen::MatrixXcd& omega, double n0);

// Union bound on BER for one transform block. Uplink stacks per-user
// difference columns (each user rides its own channel realization drawn from
// the shared ensemble); downlink sends the superimposed difference through
// one channel.
struct UnionBoundSystem {
  AfdmParams afdm;
  PathEnsemble ensemble;
  ScmaConfig scma;
  Eigen::MatrixXcd z_eff;  // K x J effective signature
  Allocation allocation = Allocation::localized;
  Eigen::VectorXcd alphabet;
  Direction direction = Direction::uplink;
};
std::vector<double> union_bound_curve(const UnionBoundSystem& sys,
                                      const std::vector<double>& n0_list, long cap = 1 << 20);

// Complexity reduction ratio of message passing on the factorized graph
// relative to cubic-cost joint equalization.
double crr(double n, double iterations, double m, double d_f);

// Diversity-order proxy: decades of BER drop per 10 dB between two points.
double slope_decades_per_10db(double ebn0_lo_db, double ber_lo, double ebn0_hi_db, double ber_hi);

// Monte-Carlo table of the decoder denoiser: posterior-mean MSE of a coded
// symbol observed at pseudo-noise variance tau. Log-log interpolated.
struct NleTable {
  std::vector<double> tau;
  std::vector<double> mse;
  double lookup(double tau_query, bool* clamped = nullptr) const;
};
NleTable build_nle_table(const LdpcCode& code, const Eigen::VectorXcd& alphabet,
                         int decoder_iterations, int frames_per_point, int points,
                         double tau_min, double tau_max, uint64_t seed);

// Scalar state evolution of the iterative LMMSE + decoder receiver:
// linear-stage posterior variance via the trace formula (averaged over the
// supplied blocks), Gaussian orthogonalization (x^-1 - y^-1)^-1 between
// stages, decoder stage from the Monte-Carlo table.
struct SeTrace {
  std::vector<double> tau;  // detector extrinsic variance per iteration
  std::vector<double> eta;  // decoder extrinsic variance per iteration
  bool clamped = false;
};
SeTrace state_evolution(const std::vector<Eigen::MatrixXcd>& g_blocks, double n0,
                        const NleTable& table, int iterations, double v_min = 1e-8,
                        double v_max = 1e4);

}  // namespace afdmscma
