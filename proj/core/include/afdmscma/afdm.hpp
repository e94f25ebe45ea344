#pragma once

#include <Eigen/Dense>

namespace afdmscma {

// Chirp-parameterized orthonormal transform pair. c1 = c2 = 0 degenerates to
// the plain DFT, which is how the OFDM baseline is produced: same code path,
// zero chirps.
struct AfdmParams {
  int n = 0;        // block length
  double c1 = 0.0;  // pre-chirp rate (delay-Doppler separation)
  double c2 = 0.0;  // post-chirp rate
  int n_cpp = 0;    // chirp-periodic prefix length

  void validate() const;
  bool is_ofdm() const { return c1 == 0.0 && c2 == 0.0; }
};

// Forward transform matrix A (analysis direction, applied at the receiver).
// A = C2 * F * C1 where C_k = diag(e^{-j 2 pi c_k n^2}) and F is the unitary
// DFT. Row m, column n: e^{-j 2 pi (c2 m^2 + m n / N + c1 n^2)} / sqrt(N).
Eigen::MatrixXcd daft_matrix(const AfdmParams& p);

// Transmit synthesis s = A^H x.
Eigen::VectorXcd modulate(const AfdmParams& p, const Eigen::VectorXcd& x);

// Receive analysis y = A r.
Eigen::VectorXcd demodulate(const AfdmParams& p, const Eigen::VectorXcd& r);

// Prefix extension: sample at negative time n (n = -n_cpp..-1) copies
// s[N + n] rotated by e^{-j 2 pi c1 (N^2 + 2 N n)}, which makes the chirp
// continuous across the block edge. Returns n_cpp + N samples.
Eigen::VectorXcd add_cpp(const AfdmParams& p, const Eigen::VectorXcd& s);

// Drops the first n_cpp samples.
Eigen::VectorXcd remove_cpp(const AfdmParams& p, const Eigen::VectorXcd& s_cpp);

// Smallest pre-chirp rate that keeps per-path response bands disjoint when
// consecutive path delays differ by at least min_delay_gap samples and the
// integer Doppler spread is alpha_max with band halfwidth k_nu:
//   c1 = (2 (alpha_max + k_nu) + 1) / (2 N min_delay_gap).
double select_c1(int alpha_max, int k_nu, int min_delay_gap, int n);

// Fixed small second chirp, 1 / (4 N^2): irrational-like w.r.t. the first
// chirp grid, breaks residual symmetry without affecting band structure.
double select_c2(int n);

}  // namespace afdmscma
