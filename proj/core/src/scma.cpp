#include "afdmscma/scma.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "afdmscma/rng.hpp"

namespace afdmscma {

namespace {
constexpr double kRoot2Inv = 0.70710678118654752440;
}

Eigen::MatrixXi standard_indicator_4x6() {
  Eigen::MatrixXi f(4, 6);
  f << 0, 1, 1, 0, 1, 0,
       1, 0, 1, 0, 0, 1,
       0, 1, 0, 1, 0, 1,
       1, 0, 0, 1, 1, 0;
  return f;
}

ScmaConfig ScmaConfig::standard_4x6() {
  ScmaConfig cfg;
  cfg.k = 4;
  cfg.j = 6;
  cfg.v = 2;
  cfg.d_f = 3;
  cfg.indicator = standard_indicator_4x6();
  return cfg;
}

void ScmaConfig::validate() const {
  if (indicator.rows() != k || indicator.cols() != j)
    throw std::invalid_argument("scma: indicator shape mismatch");
  for (int c = 0; c < j; ++c)
    if (indicator.col(c).sum() != v)
      throw std::invalid_argument("scma: column weight mismatch");
  for (int r = 0; r < k; ++r)
    if (indicator.row(r).sum() != d_f)
      throw std::invalid_argument("scma: row weight mismatch");
}

std::vector<Eigen::MatrixXi> mapping_matrices(const ScmaConfig& cfg) {
  cfg.validate();
  std::vector<Eigen::MatrixXi> maps;
  maps.reserve(cfg.j);
  for (int u = 0; u < cfg.j; ++u) {
    Eigen::MatrixXi m = Eigen::MatrixXi::Zero(cfg.k, cfg.v);
    int slot = 0;
    for (int r = 0; r < cfg.k; ++r)
      if (cfg.indicator(r, u) != 0) m(r, slot++) = 1;
    maps.push_back(std::move(m));
  }
  return maps;
}

Eigen::VectorXcd bpsk_alphabet() {
  Eigen::VectorXcd a(2);
  a << std::complex<double>(1, 0), std::complex<double>(-1, 0);
  return a;
}

Eigen::VectorXcd qpsk_alphabet() {
  Eigen::VectorXcd a(4);
  a << std::complex<double>(kRoot2Inv, kRoot2Inv), std::complex<double>(kRoot2Inv, -kRoot2Inv),
       std::complex<double>(-kRoot2Inv, kRoot2Inv), std::complex<double>(-kRoot2Inv, -kRoot2Inv);
  return a;
}

bool is_canonical_qpsk(const Eigen::VectorXcd& alphabet) {
  if (alphabet.size() != 4) return false;
  return (alphabet - qpsk_alphabet()).cwiseAbs().maxCoeff() < 1e-12;
}

Eigen::MatrixXcd uplink_signature(const ScmaConfig& cfg) {
  cfg.validate();
  return cfg.indicator.cast<double>().cast<std::complex<double>>();
}

Eigen::MatrixXcd downlink_signature_seed() {
  const std::complex<double> z1(0.0, 1.07), z2(0.53, 0.0), z3(0.27, 0.0), o(0.0, 0.0);
  Eigen::MatrixXcd z(4, 6);
  z << o,  z1, z2, o,  z3, o,
       z1, o,  z2, o,  o,  z3,
       o,  z3, o,  z2, o,  z1,
       z3, o,  o,  z2, z1, o;
  return z;
}

CodebookSet build_codebooks(const Eigen::VectorXcd& alphabet, const ScmaConfig& cfg,
                            const Eigen::MatrixXcd& signature, Normalization norm) {
  cfg.validate();
  if (signature.rows() != cfg.k || signature.cols() != cfg.j)
    throw std::invalid_argument("scma: signature shape mismatch");
  for (int r = 0; r < cfg.k; ++r)
    for (int c = 0; c < cfg.j; ++c)
      if ((cfg.indicator(r, c) == 0) != (std::abs(signature(r, c)) == 0.0))
        throw std::invalid_argument("scma: signature support must match the indicator");

  Eigen::MatrixXcd zn = signature;
  if (norm == Normalization::per_user) {
    for (int c = 0; c < cfg.j; ++c) {
      double nrm = zn.col(c).norm();
      if (nrm == 0.0) throw std::invalid_argument("scma: zero signature column");
      zn.col(c) /= nrm;
    }
  } else if (norm == Normalization::global) {
    double total = zn.squaredNorm();
    if (total == 0.0) throw std::invalid_argument("scma: zero signature");
    zn *= std::sqrt(static_cast<double>(cfg.j) / total);
  }

  CodebookSet set;
  set.raw_signature = signature;
  set.effective_signature = zn;
  set.codebooks.reserve(cfg.j);
  const int m = static_cast<int>(alphabet.size());
  for (int u = 0; u < cfg.j; ++u) {
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(cfg.k, m);
    for (int r = 0; r < cfg.k; ++r)
      if (cfg.indicator(r, u) != 0)
        for (int s = 0; s < m; ++s) x(r, s) = zn(r, u) * alphabet(s);
    set.codebooks.push_back(std::move(x));
  }
  return set;
}

int bits_to_index(const std::vector<uint8_t>& bits, int offset, int bits_per_symbol) {
  int idx = 0;
  for (int i = 0; i < bits_per_symbol; ++i) idx = (idx << 1) | (bits[offset + i] & 1);
  return idx;
}

void index_to_bits(int index, int bits_per_symbol, std::vector<uint8_t>& bits, int offset) {
  for (int i = 0; i < bits_per_symbol; ++i)
    bits[offset + i] = static_cast<uint8_t>((index >> (bits_per_symbol - 1 - i)) & 1);
}

Eigen::VectorXcd superimpose(const CodebookSet& set, const std::vector<int>& symbol_indices) {
  if (symbol_indices.size() != set.codebooks.size())
    throw std::invalid_argument("scma: one symbol index per user required");
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(set.codebooks.front().rows());
  for (size_t u = 0; u < set.codebooks.size(); ++u) w += set.codebooks[u].col(symbol_indices[u]);
  return w;
}

double med(const Eigen::MatrixXcd& signature, const Eigen::VectorXcd& alphabet,
           const ScmaConfig& cfg, long enum_cap) {
  cfg.validate();
  const int m = static_cast<int>(alphabet.size());
  double hypotheses = std::pow(static_cast<double>(m), cfg.j);
  if (hypotheses > static_cast<double>(enum_cap))
    throw std::invalid_argument("scma: enumeration cap exceeded");

  // Distinct pairwise symbol differences (0 included so the odometer covers
  // "user unchanged"); distances depend on s - s' only.
  std::vector<std::complex<double>> diffs;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      std::complex<double> d = alphabet(a) - alphabet(b);
      bool seen = false;
      for (const auto& e : diffs)
        if (std::abs(e - d) < 1e-12) { seen = true; break; }
      if (!seen) diffs.push_back(d);
    }

  const int nd = static_cast<int>(diffs.size());
  std::vector<int> odo(cfg.j, 0);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXcd w(cfg.k);
  while (true) {
    bool all_zero = true;
    for (int u = 0; u < cfg.j; ++u)
      if (std::abs(diffs[odo[u]]) > 0.0) { all_zero = false; break; }
    if (!all_zero) {
      w.setZero();
      for (int u = 0; u < cfg.j; ++u)
        if (std::abs(diffs[odo[u]]) > 0.0) w += signature.col(u) * diffs[odo[u]];
      best = std::min(best, w.norm());
    }
    int pos = 0;
    while (pos < cfg.j && ++odo[pos] == nd) odo[pos++] = 0;
    if (pos == cfg.j) break;
  }
  return best;
}

namespace {

// Rebuild a signature from (energies, phases) on the published support
// pattern. Level l of the pattern takes value sqrt(E_l) e^{j theta_l}.
Eigen::MatrixXcd signature_from_levels(const Eigen::MatrixXi& pattern,
                                       const std::vector<double>& energies,
                                       const std::vector<double>& phases) {
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(pattern.rows(), pattern.cols());
  for (int r = 0; r < pattern.rows(); ++r)
    for (int c = 0; c < pattern.cols(); ++c) {
      int l = pattern(r, c);
      if (l > 0)
        z(r, c) = std::sqrt(energies[l - 1]) *
                  std::complex<double>(std::cos(phases[l - 1]), std::sin(phases[l - 1]));
    }
  return z;
}

Eigen::MatrixXi published_level_pattern() {
  Eigen::MatrixXi p(4, 6);
  p << 0, 1, 2, 0, 3, 0,
       1, 0, 2, 0, 0, 3,
       0, 3, 0, 2, 0, 1,
       3, 0, 0, 2, 1, 0;
  return p;
}

void project_energy_simplex(std::vector<double>& e, double target) {
  double sum = 0.0;
  for (double v : e) sum += v;
  if (sum <= 0.0) throw std::logic_error("scma: degenerate energy vector");
  for (double& v : e) v *= target / sum;
}

}  // namespace

Eigen::MatrixXcd optimize_signature(const ScmaConfig& cfg, const Eigen::VectorXcd& alphabet,
                                    int budget, uint64_t seed) {
  cfg.validate();
  if (cfg.k != 4 || cfg.j != 6)
    throw std::invalid_argument("scma: optimizer supports the standard 4x6 pattern");
  Eigen::MatrixXcd z0 = downlink_signature_seed();
  if (budget <= 0) return z0;

  const Eigen::MatrixXi pattern = published_level_pattern();
  const double target = static_cast<double>(cfg.d_f) / cfg.v;
  std::vector<double> energies = {1.07 * 1.07, 0.53 * 0.53, 0.27 * 0.27};
  std::vector<double> phases = {M_PI / 2.0, 0.0, 0.0};
  project_energy_simplex(energies, target);

  auto score = [&](const std::vector<double>& e, const std::vector<double>& ph) {
    return med(signature_from_levels(pattern, e, ph), alphabet, cfg);
  };

  Rng rng(seed);
  double best = score(energies, phases);
  double step_e = 0.1, step_ph = 0.3;
  for (int sweep = 0; sweep < budget; ++sweep) {
    for (size_t i = 0; i < energies.size(); ++i) {
      for (double dir : {+1.0, -1.0}) {
        std::vector<double> e = energies;
        e[i] = std::max(1e-6, e[i] + dir * step_e * (0.5 + rng.uniform()));
        project_energy_simplex(e, target);
        double s = score(e, phases);
        if (s > best) { best = s; energies = e; }
      }
    }
    for (size_t i = 0; i < phases.size(); ++i) {
      for (double dir : {+1.0, -1.0}) {
        std::vector<double> ph = phases;
        ph[i] += dir * step_ph * (0.5 + rng.uniform());
        double s = score(energies, ph);
        if (s > best) { best = s; phases = ph; }
      }
    }
    step_e *= 0.7;
    step_ph *= 0.7;
  }
  return signature_from_levels(pattern, energies, phases);
}

int subcarrier_of(Allocation alloc, int n, int k_resources, int group, int k) {
  const int q_groups = n / k_resources;
  if (n % k_resources != 0) throw std::invalid_argument("scma: N must be a multiple of K");
  if (group < 0 || group >= q_groups || k < 0 || k >= k_resources)
    throw std::invalid_argument("scma: allocation index out of range");
  return alloc == Allocation::localized ? group * k_resources + k : k * q_groups + group;
}

Eigen::MatrixXcd user_spreading_matrix(const Eigen::MatrixXcd& z_eff, int user,
                                       Allocation alloc, int n) {
  const int k_resources = static_cast<int>(z_eff.rows());
  const int q_groups = n / k_resources;
  if (n % k_resources != 0) throw std::invalid_argument("scma: N must be a multiple of K");
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(n, q_groups);
  for (int q = 0; q < q_groups; ++q)
    for (int k = 0; k < k_resources; ++k)
      if (std::abs(z_eff(k, user)) > 0.0)
        s(subcarrier_of(alloc, n, k_resources, q, k), q) = z_eff(k, user);
  return s;
}

Eigen::MatrixXcd symbol_spreading_matrix(const Eigen::MatrixXcd& z_eff, Allocation alloc, int n) {
  const int users = static_cast<int>(z_eff.cols());
  const int k_resources = static_cast<int>(z_eff.rows());
  const int q_groups = n / k_resources;
  Eigen::MatrixXcd s(n, users * q_groups);
  for (int u = 0; u < users; ++u)
    s.middleCols(u * q_groups, q_groups) = user_spreading_matrix(z_eff, u, alloc, n);
  return s;
}

}  // namespace afdmscma
