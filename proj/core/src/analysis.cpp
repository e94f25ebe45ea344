#include "afdmscma/analysis.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <stdexcept>

#include "afdmscma/detect.hpp"
#include "afdmscma/rng.hpp"

namespace afdmscma {

Eigen::MatrixXcd phi_delta(const Eigen::VectorXcd& delta, const PathEnsemble& ensemble,
                           const AfdmParams& p) {
  if (ensemble.paths.size() != ensemble.variances.size() || ensemble.paths.empty())
    throw std::invalid_argument("analysis: malformed path ensemble");
  if (delta.size() != p.n) throw std::invalid_argument("analysis: delta length mismatch");
  Eigen::MatrixXcd phi(p.n, static_cast<Eigen::Index>(ensemble.paths.size()));
  for (size_t i = 0; i < ensemble.paths.size(); ++i) {
    ChannelPath unit = ensemble.paths[i];
    unit.gain = {1.0, 0.0};
    phi.col(static_cast<Eigen::Index>(i)) =
        std::sqrt(ensemble.variances[i]) * (effective_path_matrix(unit, p, p.n) * delta);
  }
  return phi;
}

PepResult pairwise_error(const Eigen::MatrixXcd& omega, double n0) {
  if (n0 <= 0.0) throw std::invalid_argument("analysis: noise variance must be positive");
  Eigen::MatrixXcd gram = omega.adjoint() * omega;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
  Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  const double lmax = lam.size() ? lam.maxCoeff() : 0.0;

  PepResult res;
  std::vector<double> kept;
  for (int i = 0; i < lam.size(); ++i)
    if (lmax > 0.0 && lam(i) > 1e-9 * lmax) kept.push_back(lam(i));
  res.rank = static_cast<int>(kept.size());
  res.eigenvalues = Eigen::Map<Eigen::VectorXd>(kept.data(), static_cast<Eigen::Index>(kept.size()));

  double p4 = 1.0, p3 = 1.0, prod = 1.0;
  for (double l : kept) {
    p4 *= 1.0 / (1.0 + l / (4.0 * n0));
    p3 *= 1.0 / (1.0 + l / (3.0 * n0));
    prod *= l;
  }
  res.pep = p4 / 12.0 + p3 / 4.0;
  const double r = static_cast<double>(res.rank);
  res.asymptote =
      std::pow(n0, r) * (std::pow(4.0, r) / 12.0 + std::pow(3.0, r) / 4.0) / prod;
  return res;
}

namespace {

struct DiffEntry {
  std::complex<double> value;
  double multiplicity;  // ordered symbol pairs mapping to this difference
  int bit_distance;     // Hamming distance of the labels, constant per value
};

std::vector<DiffEntry> difference_alphabet(const Eigen::VectorXcd& alphabet) {
  const int m = static_cast<int>(alphabet.size());
  int b = 0;
  while ((1 << b) < m) ++b;
  std::vector<DiffEntry> out;
  for (int a = 0; a < m; ++a)
    for (int c = 0; c < m; ++c) {
      std::complex<double> d = alphabet(a) - alphabet(c);
      int dist = __builtin_popcount(static_cast<unsigned>(a ^ c));
      bool found = false;
      for (auto& e : out) {
        if (std::abs(e.value - d) < 1e-9) {
          if (e.bit_distance != dist)
            throw std::invalid_argument(
                "analysis: labeling is not difference-consistent; union bound unsupported");
          e.multiplicity += 1.0;
          found = true;
          break;
        }
      }
      if (!found) out.push_back({d, 1.0, dist});
    }
  return out;
}

}  // namespace

std::vector<double> union_bound_curve(const UnionBoundSystem& sys,
                                      const std::vector<double>& n0_list, long cap) {
  sys.scma.validate();
  const int n = sys.afdm.n;
  const int users = sys.scma.j;
  const int q_groups = n / sys.scma.k;
  const int t = users * q_groups;
  const int m = static_cast<int>(sys.alphabet.size());
  int b = 0;
  while ((1 << b) < m) ++b;

  const auto diffs = difference_alphabet(sys.alphabet);
  const int nd = static_cast<int>(diffs.size());
  if (std::pow(static_cast<double>(nd), t) > static_cast<double>(cap))
    throw std::invalid_argument("analysis: union bound enumeration exceeds cap");

  // Unit-gain path images of each user's per-group chip columns.
  const int num_paths = static_cast<int>(sys.ensemble.paths.size());
  std::vector<Eigen::MatrixXcd> path_h(num_paths);
  for (int p = 0; p < num_paths; ++p) {
    ChannelPath unit = sys.ensemble.paths[p];
    unit.gain = {1.0, 0.0};
    path_h[p] = std::sqrt(sys.ensemble.variances[p]) *
                effective_path_matrix(unit, sys.afdm, sys.afdm.n);
  }
  // spread_cols[j][q] = N-vector of user j's chips for group q;
  // path_cols[p][j*Q+q] = path_h[p] * spread_cols.
  std::vector<Eigen::MatrixXcd> path_cols(num_paths);
  for (int p = 0; p < num_paths; ++p) path_cols[p].resize(n, t);
  {
    Eigen::MatrixXcd spread = symbol_spreading_matrix(sys.z_eff, sys.allocation, n);
    for (int p = 0; p < num_paths; ++p) path_cols[p] = path_h[p] * spread;
  }

  std::vector<double> acc(n0_list.size(), 0.0);
  std::vector<int> odo(t, 0);
  Eigen::MatrixXcd omega;
  std::vector<std::complex<double>> user_active(users);

  while (true) {
    double mult = 1.0;
    int bits = 0;
    for (int i = 0; i < t; ++i) {
      mult *= diffs[odo[i]].multiplicity;
      bits += diffs[odo[i]].bit_distance;
    }
    if (bits > 0) {
      if (sys.direction == Direction::downlink) {
        omega.resize(n, num_paths);
        omega.setZero();
        for (int i = 0; i < t; ++i) {
          const auto& d = diffs[odo[i]];
          if (d.bit_distance == 0) continue;
          for (int p = 0; p < num_paths; ++p) omega.col(p) += path_cols[p].col(i) * d.value;
        }
      } else {
        // One column block per active user.
        int active = 0;
        for (int j = 0; j < users; ++j) {
          bool any = false;
          for (int qq = 0; qq < q_groups; ++qq)
            if (diffs[odo[j * q_groups + qq]].bit_distance > 0) { any = true; break; }
          if (any) ++active;
        }
        omega.resize(n, static_cast<Eigen::Index>(active) * num_paths);
        omega.setZero();
        int blk = 0;
        for (int j = 0; j < users; ++j) {
          bool any = false;
          for (int qq = 0; qq < q_groups; ++qq)
            if (diffs[odo[j * q_groups + qq]].bit_distance > 0) { any = true; break; }
          if (!any) continue;
          for (int qq = 0; qq < q_groups; ++qq) {
            const auto& d = diffs[odo[j * q_groups + qq]];
            if (d.bit_distance == 0) continue;
            for (int p = 0; p < num_paths; ++p)
              omega.col(static_cast<Eigen::Index>(blk) * num_paths + p) +=
                  path_cols[p].col(j * q_groups + qq) * d.value;
          }
          ++blk;
        }
      }
      Eigen::MatrixXcd gram = omega.adjoint() * omega;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
      Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
      double lmax = lam.size() ? lam.maxCoeff() : 0.0;
      for (size_t idx = 0; idx < n0_list.size(); ++idx) {
        double n0 = n0_list[idx];
        double p4 = 1.0, p3 = 1.0;
        for (int i = 0; i < lam.size(); ++i) {
          if (!(lmax > 0.0) || lam(i) <= 1e-9 * lmax) continue;
          p4 *= 1.0 / (1.0 + lam(i) / (4.0 * n0));
          p3 *= 1.0 / (1.0 + lam(i) / (3.0 * n0));
        }
        acc[idx] += mult * bits * (p4 / 12.0 + p3 / 4.0);
      }
    }
    int pos = 0;
    while (pos < t && ++odo[pos] == nd) odo[pos++] = 0;
    if (pos == t) break;
  }

  const double norm = std::pow(static_cast<double>(m), t) * t * b;
  for (double& v : acc) v /= norm;
  return acc;
}

double crr(double n, double iterations, double m, double d_f) {
  if (n <= 0.0 || iterations <= 0.0 || m <= 0.0 || d_f <= 0.0)
    throw std::invalid_argument("analysis: crr arguments must be positive");
  const double cubic = n * n * n;
  const double mp = iterations * n * std::pow(m, d_f) * d_f;
  return 1.0 - cubic / (mp + cubic);
}

double slope_decades_per_10db(double ebn0_lo_db, double ber_lo, double ebn0_hi_db,
                              double ber_hi) {
  if (ber_lo <= 0.0 || ber_hi <= 0.0) throw std::invalid_argument("analysis: BER must be positive");
  if (ebn0_hi_db == ebn0_lo_db) throw std::invalid_argument("analysis: degenerate SNR pair");
  return (std::log10(ber_lo) - std::log10(ber_hi)) / ((ebn0_hi_db - ebn0_lo_db) / 10.0);
}

double NleTable::lookup(double tau_query, bool* clamped) const {
  if (tau.size() < 2 || tau.size() != mse.size())
    throw std::logic_error("analysis: malformed denoiser table");
  if (clamped) *clamped = false;
  if (tau_query <= tau.front()) {
    if (clamped && tau_query < tau.front()) *clamped = true;
    return mse.front();
  }
  if (tau_query >= tau.back()) {
    if (clamped && tau_query > tau.back()) *clamped = true;
    return mse.back();
  }
  size_t i = 1;
  while (tau[i] < tau_query) ++i;
  const double x0 = std::log(tau[i - 1]), x1 = std::log(tau[i]);
  const double y0 = std::log(std::max(mse[i - 1], 1e-12));
  const double y1 = std::log(std::max(mse[i], 1e-12));
  const double w = (std::log(tau_query) - x0) / (x1 - x0);
  return std::exp(y0 + w * (y1 - y0));
}

NleTable build_nle_table(const LdpcCode& code, const Eigen::VectorXcd& alphabet,
                         int decoder_iterations, int frames_per_point, int points,
                         double tau_min, double tau_max, uint64_t seed) {
  if (points < 2 || tau_min <= 0.0 || tau_max <= tau_min)
    throw std::invalid_argument("analysis: malformed table grid");
  const int m = static_cast<int>(alphabet.size());
  int b = 0;
  while ((1 << b) < m) ++b;
  if (code.n % b != 0) throw std::invalid_argument("analysis: code length not a bit multiple");
  const int symbols = code.n / b;

  NleTable table;
  table.tau.resize(points);
  table.mse.resize(points);
  const double lmin = std::log(tau_min), lmax = std::log(tau_max);
  for (int pt = 0; pt < points; ++pt) {
    double tau = std::exp(lmin + (lmax - lmin) * pt / (points - 1));
    table.tau[pt] = tau;
    double err = 0.0;
    long count = 0;
    for (int f = 0; f < frames_per_point; ++f) {
      Rng rng(mix_seed(mix_seed(seed, static_cast<uint64_t>(pt)), static_cast<uint64_t>(f)));
      std::vector<uint8_t> info(code.k());
      for (auto& bit : info) bit = static_cast<uint8_t>(rng.next_u64() & 1);
      std::vector<uint8_t> cw = encode(info, code);

      Eigen::VectorXcd s(symbols);
      for (int c = 0; c < symbols; ++c) {
        int idx = 0;
        for (int i = 0; i < b; ++i) idx = (idx << 1) | cw[static_cast<size_t>(c) * b + i];
        s(c) = alphabet(idx);
      }
      GaussianMessage obs;
      obs.mean = s;
      for (int c = 0; c < symbols; ++c) obs.mean(c) += rng.cgaussian(tau);
      obs.variance = Eigen::VectorXd::Constant(symbols, tau);

      Eigen::VectorXd llr = is_canonical_qpsk(alphabet) ? llr_from_gaussian_qpsk(obs)
                                                        : llr_from_gaussian(obs, alphabet);
      DecodeResult dec = decode(llr, code, decoder_iterations);
      GaussianMessage post = is_canonical_qpsk(alphabet)
                                 ? gaussian_from_llr_qpsk(dec.aposteriori)
                                 : gaussian_from_llr(dec.aposteriori, alphabet);
      err += (post.mean - s).squaredNorm();
      count += symbols;
    }
    table.mse[pt] = err / static_cast<double>(count);
  }
  return table;
}

SeTrace state_evolution(const std::vector<Eigen::MatrixXcd>& g_blocks, double n0,
                        const NleTable& table, int iterations, double v_min, double v_max) {
  if (g_blocks.empty()) throw std::invalid_argument("analysis: no blocks");
  if (n0 <= 0.0) throw std::invalid_argument("analysis: noise variance must be positive");
  const double t_dim = static_cast<double>(g_blocks.front().cols());

  SeTrace trace;
  double eta = 1.0;  // unit-energy prior
  for (int it = 0; it < iterations; ++it) {
    // Linear stage: per-symbol posterior variance via the trace identity,
    // averaged over blocks.
    double gamma_acc = 0.0;
    for (const auto& g : g_blocks) {
      Eigen::MatrixXcd s = eta * (g * g.adjoint());
      s.diagonal().array() += n0;
      Eigen::MatrixXcd sig = s.llt().solve(g);
      double tr = 0.0;
      for (Eigen::Index i = 0; i < g.cols(); ++i) tr += std::real(g.col(i).dot(sig.col(i)));
      gamma_acc += eta - eta * eta * tr / t_dim;
    }
    double gamma = gamma_acc / static_cast<double>(g_blocks.size());
    if (gamma <= 0.0 || gamma >= eta) {
      gamma = std::clamp(gamma, v_min, eta * (1.0 - 1e-12));
      trace.clamped = true;
    }
    double tau = 1.0 / (1.0 / gamma - 1.0 / eta);
    tau = std::clamp(tau, v_min, v_max);

    bool lk_clamped = false;
    double phi = table.lookup(tau, &lk_clamped);
    trace.clamped = trace.clamped || lk_clamped;
    double eta_next;
    if (phi >= tau) {
      eta_next = v_max;
      trace.clamped = true;
    } else {
      eta_next = 1.0 / (1.0 / phi - 1.0 / tau);
      if (eta_next < v_min || eta_next > v_max) {
        eta_next = std::clamp(eta_next, v_min, v_max);
        trace.clamped = true;
      }
    }
    trace.tau.push_back(tau);
    trace.eta.push_back(eta_next);
    eta = eta_next;
  }
  return trace;
}

}  // namespace afdmscma
