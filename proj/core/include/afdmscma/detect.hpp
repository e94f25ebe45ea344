#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "afdmscma/coding.hpp"
#include "afdmscma/scma.hpp"

namespace afdmscma {

// --- Message passing on the observation graph ------------------------------

struct MpaResult {
  Eigen::MatrixXd marginals;  // T x M, rows sum to 1
  std::vector<int> hard;      // argmax per variable
};

// Sum-product detection of y = G s + CN(0, n0 I). The factor graph is the
// nonzero pattern of G (|entry| > prune_tol); complex-Gaussian likelihood
// exp(-|.|^2 / n0). Throws when any factor's enumeration M^degree exceeds
// complexity_cap. No damping.
MpaResult mpa_detect(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& g,
                     const Eigen::VectorXcd& alphabet, double n0, int iterations,
                     const Eigen::MatrixXd* priors = nullptr, long complexity_cap = 1 << 16,
                     double prune_tol = 1e-12);

// Exact posterior marginals by enumeration over M^T hypotheses.
MpaResult exact_marginals(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& g,
                          const Eigen::VectorXcd& alphabet, double n0,
                          const Eigen::MatrixXd* priors = nullptr, long cap = 1 << 20);

// --- Two-stage broadcast receiver -------------------------------------------

struct TwoStageResult {
  Eigen::VectorXcd w_hat;                // equalized superimposed chips
  std::vector<MpaResult> per_group;      // one per group
  std::vector<int> hard;                 // user-major (j * Q + q)
};

// Stage 1: chip-level LMMSE w_hat = H^H (H H^H + n0 I)^{-1} y for unit-power
// superimposed chips. Stage 2: per-group sum-product on the signature graph.
TwoStageResult two_stage_detect(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& h_eff,
                                const Eigen::MatrixXcd& z_eff, const Eigen::VectorXcd& alphabet,
                                const ScmaConfig& cfg, Allocation alloc, double n0,
                                int mpa_iterations);

// --- Gaussian message primitives --------------------------------------------

struct GaussianMessage {
  Eigen::VectorXcd mean;
  Eigen::VectorXd variance;
};

// Posterior mean/variance of s ~ CN(prior) observed through y = G s + noise.
// Production form uses the N x N innovation inverse
//   W = V G^H (n0 I + G V G^H)^{-1};
// the reference form solves the T x T information-domain system. Both return
// the same posterior; the equivalence is part of the acceptance gate.
GaussianMessage lmmse_estimate(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& g,
                               const GaussianMessage& prior, double n0);
GaussianMessage lmmse_estimate_reference(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& g,
                                         const GaussianMessage& prior, double n0);

struct CombineResult {
  GaussianMessage msg;
  int clamp_count = 0;
};

// Block-scalar extrinsic combination. Variances are first averaged over the
// block (arithmetic mean). kappa = 1 performs exact Gaussian information
// subtraction; kappa < 1 applies the damped update
//   1/v = kappa/v_post - (1-kappa)/v_prior (means weighted the same way).
// A nonpositive or oversized result precision flags a clamp and emits the
// posterior mean with variance v_max; undersized variance rails at v_min.
CombineResult extrinsic_combine(const GaussianMessage& posterior, const GaussianMessage& prior,
                                double kappa, double v_min = 1e-8, double v_max = 1e4);

// --- LLR <-> Gaussian conversions (natural-binary labeling) ------------------

// Bit LLRs log(P(0)/P(1)) per symbol entry, entry-major layout, clamped to
// +/- 50. The generic path works for any labeled alphabet; the QPSK fast path
// exploits the per-rail structure (L = sqrt(8) Re_or_Im(m) / v).
Eigen::VectorXd llr_from_gaussian(const GaussianMessage& msg, const Eigen::VectorXcd& alphabet);
Eigen::VectorXd llr_from_gaussian_qpsk(const GaussianMessage& msg);

// Moment-match a product-of-bit-posteriors constellation distribution back to
// a Gaussian message. QPSK fast path: m = (tanh(L1/2) + j tanh(L2/2))/sqrt(2),
// v = 1 - |m|^2.
GaussianMessage gaussian_from_llr(const Eigen::VectorXd& llrs, const Eigen::VectorXcd& alphabet);
GaussianMessage gaussian_from_llr_qpsk(const Eigen::VectorXd& llrs);

// --- Iterative LMMSE + decoder receiver --------------------------------------

struct OampConfig {
  int outer_iterations = 10;
  double kappa = 0.25;           // message damping; 1 = undamped
  int decoder_iterations = 8;    // BP iterations per outer pass
  double v_min = 1e-8;
  double v_max = 1e4;
  bool early_stop = true;        // break once every user's decoder converged
};

struct OampInput {
  std::vector<Eigen::VectorXcd> received;  // one per transform block
  std::vector<Eigen::MatrixXcd> g;         // N x (J*Q), user-major columns
  const LdpcCode* code = nullptr;
  std::vector<Interleaver> interleavers;   // one per user, size code->n
  Eigen::VectorXcd alphabet;               // unit energy
  int num_users = 0;
  int symbols_per_block = 0;               // Q
  double n0 = 0.0;
};

struct OampResult {
  std::vector<std::vector<uint8_t>> info_bits;  // per user
  std::vector<uint8_t> converged;               // per user, last pass
  int clamp_count = 0;
  int outer_iterations_run = 0;
  // Per outer iteration, filled when true symbols are supplied:
  std::vector<double> detector_mse;  // detector extrinsic means vs truth
  std::vector<double> decoder_mse;   // decoder extrinsic means vs truth
};

// true_symbols (optional): (J*Q) x num_blocks, for MSE traces.
OampResult oamp_receive(const OampInput& in, const OampConfig& cfg,
                        const Eigen::MatrixXcd* true_symbols = nullptr);

}  // namespace afdmscma
