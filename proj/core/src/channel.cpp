#include "afdmscma/channel.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace afdmscma {

int ChannelPath::alpha() const { return static_cast<int>(std::ceil(doppler - 0.5)); }

double ChannelPath::beta() const { return doppler - alpha(); }

EvaProfile EvaProfile::standard() {
  EvaProfile p;
  p.delays_ns = {0, 30, 150, 310, 370, 710, 1090, 1730, 2510};
  p.powers_db = {0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9};
  return p;
}

QuantizedProfile quantize_profile(const EvaProfile& profile, int n) {
  if (profile.delays_ns.size() != profile.powers_db.size() || profile.delays_ns.empty())
    throw std::invalid_argument("channel: malformed tap profile");
  const double fs = static_cast<double>(n) * profile.spacing_hz;
  std::map<int, double> merged;
  for (size_t i = 0; i < profile.delays_ns.size(); ++i) {
    int d = static_cast<int>(std::lround(profile.delays_ns[i] * 1e-9 * fs));
    merged[d] += std::pow(10.0, profile.powers_db[i] / 10.0);
  }
  QuantizedProfile q;
  double total = 0.0;
  for (auto& [d, p] : merged) total += p;
  for (auto& [d, p] : merged) {
    q.delays.push_back(d);
    q.powers.push_back(p / total);
  }
  return q;
}

ChannelRealization sample_realization(const EvaProfile& profile, int n, Rng& rng) {
  QuantizedProfile q = quantize_profile(profile, n);
  ChannelRealization ch;
  ch.paths.resize(q.delays.size());
  for (size_t i = 0; i < q.delays.size(); ++i) {
    ch.paths[i].delay = q.delays[i];
    ch.paths[i].gain = rng.cgaussian(q.powers[i]);
    double psi = (2.0 * rng.uniform() - 1.0) * M_PI;
    ch.paths[i].doppler = profile.doppler_max * std::cos(psi);
  }
  return ch;
}

ChannelRealization sample_realization(const UniformProfile& profile, Rng& rng) {
  if (profile.num_paths < 1) throw std::invalid_argument("channel: need at least one path");
  if (!profile.delays.empty() &&
      static_cast<int>(profile.delays.size()) != profile.num_paths)
    throw std::invalid_argument("channel: delay list length mismatch");
  if (!profile.fixed_dopplers.empty() &&
      static_cast<int>(profile.fixed_dopplers.size()) != profile.num_paths)
    throw std::invalid_argument("channel: Doppler list length mismatch");
  ChannelRealization ch;
  ch.paths.resize(profile.num_paths);
  const double var = 1.0 / profile.num_paths;
  for (int i = 0; i < profile.num_paths; ++i) {
    ch.paths[i].delay = profile.delays.empty() ? i : profile.delays[i];
    ch.paths[i].gain = rng.cgaussian(var);
    if (!profile.fixed_dopplers.empty()) {
      ch.paths[i].doppler = profile.fixed_dopplers[i];
    } else {
      double psi = (2.0 * rng.uniform() - 1.0) * M_PI;
      ch.paths[i].doppler = profile.doppler_max * std::cos(psi);
    }
  }
  return ch;
}

namespace {

// Prefix continuity phase at time n for a path of delay l: the shifted-in
// prefix samples carry e^{-j 2 pi c1 (N^2 - 2N(l - n))} relative to their
// cyclic counterparts.
std::complex<double> prefix_phase(int n, int l, int block, double c1) {
  if (n >= l) return {1.0, 0.0};
  long double turns = static_cast<long double>(c1) *
                      (static_cast<long double>(block) * block -
                       2.0L * block * (l - n));
  return cis_turns(-turns);
}

}  // namespace

Eigen::MatrixXcd time_domain_path_matrix(const ChannelPath& path, const AfdmParams& p) {
  p.validate();
  const int n = p.n;
  if (path.delay < 0 || path.delay >= n)
    throw std::invalid_argument("channel: path delay out of range");
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    int c = r - path.delay;
    if (c < 0) c += n;
    long double dopp_turns = static_cast<long double>(path.doppler) * r / n;
    h(r, c) = path.gain * prefix_phase(r, path.delay, n, p.c1) * cis_turns(-dopp_turns);
  }
  return h;
}

Eigen::VectorXcd apply_channel(const Eigen::VectorXcd& s_cpp, const ChannelRealization& ch,
                               const AfdmParams& p, double n0, Rng& rng) {
  p.validate();
  if (s_cpp.size() != p.n + p.n_cpp)
    throw std::invalid_argument("channel: prefixed block length mismatch");
  for (const auto& path : ch.paths)
    if (path.delay > 0 && path.delay >= std::max(p.n_cpp, 1))
      throw std::invalid_argument("channel: path delay reaches beyond the prefix");
  const int total = static_cast<int>(s_cpp.size());
  Eigen::VectorXcd r = Eigen::VectorXcd::Zero(total);
  for (const auto& path : ch.paths) {
    for (int i = 0; i < total; ++i) {
      int src = i - path.delay;
      if (src < 0) continue;
      // Absolute time index: prefix samples live at negative time.
      long double t = static_cast<long double>(i - p.n_cpp);
      r(i) += path.gain * cis_turns(-static_cast<long double>(path.doppler) * t / p.n) *
              s_cpp(src);
    }
  }
  if (n0 > 0.0)
    for (int i = 0; i < total; ++i) r(i) += rng.cgaussian(n0);
  return r;
}

double band_center(const ChannelPath& path, const AfdmParams& p) {
  double c = std::fmod(path.alpha() + 2.0 * p.n * p.c1 * path.delay, static_cast<double>(p.n));
  if (c < 0) c += p.n;
  return c;
}

Eigen::MatrixXcd effective_path_matrix(const ChannelPath& path, const AfdmParams& p, int k_nu) {
  p.validate();
  const int n = p.n;
  if (path.delay < 0 || path.delay >= n)
    throw std::invalid_argument("channel: path delay out of range");
  if (k_nu < 0) throw std::invalid_argument("channel: negative band halfwidth");

  const long double lc1 = p.c1;
  const long double lc2 = p.c2;
  const long double ln = n;
  const long double l = path.delay;
  const long double nu = path.doppler;
  const double center = band_center(path, p);
  const std::complex<double> scaled_gain = path.gain / static_cast<double>(n);

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      // Cyclic offset of this entry from the band center.
      double off = std::fmod(static_cast<double>(col) - row - center, static_cast<double>(n));
      if (off > n / 2.0) off -= n;
      if (off <= -n / 2.0) off += n;
      if (std::abs(off) > k_nu + 1e-12) continue;

      const long double theta = static_cast<long double>(row) - col + nu + 2.0L * ln * lc1 * l;
      std::complex<double> kernel;
      long double frac = std::fabs(std::remainder(theta, ln));
      if (frac < 1e-9L) {
        kernel = {static_cast<double>(ln), 0.0};
      } else {
        long double th2 = std::fmod(theta, 2.0L);
        long double th2n = std::fmod(theta, 2.0L * ln);
        long double num = std::sin(static_cast<long double>(M_PI) * th2);
        long double den = std::sin(static_cast<long double>(M_PI) * th2n / ln);
        kernel = cis_turns(-theta * (ln - 1.0L) / (2.0L * ln)) *
                 static_cast<double>(num / den);
      }
      const long double eta_turns =
          lc1 * l * l - static_cast<long double>(col) * l / ln +
          lc2 * (static_cast<long double>(col) * col - static_cast<long double>(row) * row);
      h(row, col) = scaled_gain * cis_turns(eta_turns) * kernel;
    }
  }
  return h;
}

Eigen::MatrixXcd effective_matrix(const ChannelRealization& ch, const AfdmParams& p, int k_nu) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(p.n, p.n);
  for (const auto& path : ch.paths) h += effective_path_matrix(path, p, k_nu);
  return h;
}

Eigen::MatrixXcd effective_matrix_direct(const ChannelRealization& ch, const AfdmParams& p) {
  Eigen::MatrixXcd ht = Eigen::MatrixXcd::Zero(p.n, p.n);
  for (const auto& path : ch.paths) ht += time_domain_path_matrix(path, p);
  Eigen::MatrixXcd a = daft_matrix(p);
  return a * ht * a.adjoint();
}

}  // namespace afdmscma
