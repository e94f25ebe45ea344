#include "afdmscma/afdm.hpp"

#include <cmath>
#include <stdexcept>

#include "afdmscma/rng.hpp"

namespace afdmscma {

void AfdmParams::validate() const {
  if (n < 1) throw std::invalid_argument("afdm: block length must be positive");
  if (n_cpp < 0 || n_cpp > n) throw std::invalid_argument("afdm: prefix length out of range");
  if (!std::isfinite(c1) || !std::isfinite(c2))
    throw std::invalid_argument("afdm: chirp rates must be finite");
}

Eigen::MatrixXcd daft_matrix(const AfdmParams& p) {
  p.validate();
  const int n = p.n;
  const long double lc1 = p.c1;
  const long double lc2 = p.c2;
  const long double ln = n;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::MatrixXcd a(n, n);
  for (int m = 0; m < n; ++m) {
    const long double row_turns = lc2 * static_cast<long double>(m) * m;
    for (int k = 0; k < n; ++k) {
      const long double turns =
          row_turns + lc1 * static_cast<long double>(k) * k +
          static_cast<long double>(m) * k / ln;
      a(m, k) = cis_turns(-turns) * scale;
    }
  }
  return a;
}

Eigen::VectorXcd modulate(const AfdmParams& p, const Eigen::VectorXcd& x) {
  if (x.size() != p.n) throw std::invalid_argument("afdm: modulate input length mismatch");
  return daft_matrix(p).adjoint() * x;
}

Eigen::VectorXcd demodulate(const AfdmParams& p, const Eigen::VectorXcd& r) {
  if (r.size() != p.n) throw std::invalid_argument("afdm: demodulate input length mismatch");
  return daft_matrix(p) * r;
}

Eigen::VectorXcd add_cpp(const AfdmParams& p, const Eigen::VectorXcd& s) {
  p.validate();
  if (s.size() != p.n) throw std::invalid_argument("afdm: prefix input length mismatch");
  const int n = p.n;
  const int ncpp = p.n_cpp;
  Eigen::VectorXcd out(ncpp + n);
  const long double lc1 = p.c1;
  for (int i = 0; i < ncpp; ++i) {
    const int neg = i - ncpp;  // n in [-n_cpp, -1]
    const long double turns =
        lc1 * (static_cast<long double>(n) * n + 2.0L * n * neg);
    out(i) = s(n + neg) * cis_turns(-turns);
  }
  out.tail(n) = s;
  return out;
}

Eigen::VectorXcd remove_cpp(const AfdmParams& p, const Eigen::VectorXcd& s_cpp) {
  p.validate();
  if (s_cpp.size() != p.n + p.n_cpp)
    throw std::invalid_argument("afdm: prefixed block length mismatch");
  return s_cpp.tail(p.n);
}

double select_c1(int alpha_max, int k_nu, int min_delay_gap, int n) {
  if (n < 1) throw std::invalid_argument("afdm: block length must be positive");
  if (alpha_max < 0 || k_nu < 0) throw std::invalid_argument("afdm: negative Doppler spread");
  if (min_delay_gap <= 0)
    throw std::invalid_argument("afdm: delay gap must be positive for band separation");
  return static_cast<double>(2 * (alpha_max + k_nu) + 1) /
         (2.0 * static_cast<double>(n) * min_delay_gap);
}

double select_c2(int n) {
  if (n < 1) throw std::invalid_argument("afdm: block length must be positive");
  return 1.0 / (4.0 * static_cast<double>(n) * n);
}

}  // namespace afdmscma
