#include "afdmscma/detect.hpp"

#include <cmath>
#include <stdexcept>

namespace afdmscma {

namespace {

constexpr double kMsgFloor = 1e-30;
constexpr double kLlrClamp = 50.0;

int bits_per_symbol_of(int m) {
  int b = 0;
  while ((1 << b) < m) ++b;
  if ((1 << b) != m) throw std::invalid_argument("detect: alphabet size must be a power of two");
  return b;
}

// Bit LLRs of one Gaussian-observed symbol, natural-binary labels, bit 0 =
// most significant. Log-sum-exp stabilized.
void entry_bit_llrs(std::complex<double> mean, double var, const Eigen::VectorXcd& alphabet,
                    double* out) {
  const int m = static_cast<int>(alphabet.size());
  const int b = bits_per_symbol_of(m);
  const double v = std::max(var, 1e-12);
  static thread_local std::vector<double> metric;
  metric.resize(m);
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < m; ++a) {
    metric[a] = std::norm(alphabet(a) - mean) / v;
    best = std::min(best, metric[a]);
  }
  for (int bit = 0; bit < b; ++bit) {
    double s0 = 0.0, s1 = 0.0;
    const int mask = 1 << (b - 1 - bit);
    for (int a = 0; a < m; ++a) {
      double w = std::exp(best - metric[a]);
      if (a & mask) s1 += w; else s0 += w;
    }
    double l = std::log(std::max(s0, 1e-300)) - std::log(std::max(s1, 1e-300));
    out[bit] = std::clamp(l, -kLlrClamp, kLlrClamp);
  }
}

// Moment-matched Gaussian of one symbol given its bit LLRs.
void entry_from_bit_llrs(const double* llrs, const Eigen::VectorXcd& alphabet,
                         std::complex<double>* mean, double* var) {
  const int m = static_cast<int>(alphabet.size());
  const int b = bits_per_symbol_of(m);
  std::complex<double> mu(0.0, 0.0);
  double e2 = 0.0, total = 0.0;
  for (int a = 0; a < m; ++a) {
    double p = 1.0;
    for (int bit = 0; bit < b; ++bit) {
      double l = std::clamp(llrs[bit], -kLlrClamp, kLlrClamp);
      double p0 = 1.0 / (1.0 + std::exp(-l));
      p *= (a & (1 << (b - 1 - bit))) ? (1.0 - p0) : p0;
    }
    mu += p * alphabet(a);
    e2 += p * std::norm(alphabet(a));
    total += p;
  }
  mu /= total;
  e2 /= total;
  *mean = mu;
  *var = std::max(e2 - std::norm(mu), 1e-12);
}

}  // namespace

// --- Message passing ---------------------------------------------------------

MpaResult mpa_detect(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& g,
                     const Eigen::VectorXcd& alphabet, double n0, int iterations,
                     const Eigen::MatrixXd* priors, long complexity_cap, double prune_tol) {
  const int nobs = static_cast<int>(g.rows());
  const int nvar = static_cast<int>(g.cols());
  const int m = static_cast<int>(alphabet.size());
  if (y.size() != nobs) throw std::invalid_argument("detect: observation length mismatch");
  if (n0 <= 0.0) throw std::invalid_argument("detect: noise variance must be positive");
  if (priors && (priors->rows() != nvar || priors->cols() != m))
    throw std::invalid_argument("detect: prior shape mismatch");

  // Factor adjacency from the nonzero pattern.
  std::vector<std::vector<int>> fvars(nobs);
  std::vector<std::vector<int>> vfactors(nvar);
  for (int f = 0; f < nobs; ++f)
    for (int v = 0; v < nvar; ++v)
      if (std::abs(g(f, v)) > prune_tol) {
        fvars[f].push_back(v);
        vfactors[v].push_back(f);
      }
  long combos_max = 0;
  for (int f = 0; f < nobs; ++f) {
    double c = std::pow(static_cast<double>(m), static_cast<double>(fvars[f].size()));
    if (c > static_cast<double>(complexity_cap))
      throw std::invalid_argument("detect: factor enumeration exceeds complexity cap");
    combos_max = std::max(combos_max, static_cast<long>(c));
  }

  // Edge-indexed messages, linear domain. edge (f, e) <-> variable fvars[f][e].
  std::vector<std::vector<Eigen::VectorXd>> v2f(nobs), f2v(nobs);
  Eigen::VectorXd uniform = Eigen::VectorXd::Constant(m, 1.0 / m);
  for (int f = 0; f < nobs; ++f) {
    v2f[f].resize(fvars[f].size());
    f2v[f].resize(fvars[f].size());
    for (size_t e = 0; e < fvars[f].size(); ++e) {
      v2f[f][e] = priors ? priors->row(fvars[f][e]).transpose() : uniform;
      f2v[f][e] = uniform;
    }
  }

  std::vector<double> d2(combos_max);
  std::vector<int> odo;

  for (int it = 0; it < iterations; ++it) {
    // Factor update.
    for (int f = 0; f < nobs; ++f) {
      const auto& vars = fvars[f];
      const int deg = static_cast<int>(vars.size());
      if (deg == 0) continue;
      long combos = 1;
      for (int e = 0; e < deg; ++e) combos *= m;
      // Pass 1: distances, tracking the minimum for stable exponentials.
      odo.assign(deg, 0);
      std::complex<double> mean(0.0, 0.0);
      for (int e = 0; e < deg; ++e) mean += g(f, vars[e]) * alphabet(0);
      double dmin = std::numeric_limits<double>::infinity();
      for (long c = 0;; ++c) {
        d2[c] = std::norm(y(f) - mean);
        dmin = std::min(dmin, d2[c]);
        int pos = 0;
        while (pos < deg) {
          mean -= g(f, vars[pos]) * alphabet(odo[pos]);
          if (++odo[pos] == m) {
            odo[pos] = 0;
            mean += g(f, vars[pos]) * alphabet(0);
            ++pos;
          } else {
            mean += g(f, vars[pos]) * alphabet(odo[pos]);
            break;
          }
        }
        if (pos == deg) break;
      }
      // Pass 2: accumulate marginal sums with self-exclusion.
      for (int e = 0; e < deg; ++e) f2v[f][e].setZero();
      odo.assign(deg, 0);
      for (long c = 0;; ++c) {
        double w = std::exp((dmin - d2[c]) / n0);
        double full = w;
        for (int e = 0; e < deg; ++e) full *= v2f[f][e](odo[e]);
        for (int e = 0; e < deg; ++e) {
          double excl = full / std::max(v2f[f][e](odo[e]), kMsgFloor);
          f2v[f][e](odo[e]) += excl;
        }
        int pos = 0;
        while (pos < deg && ++odo[pos] == m) odo[pos++] = 0;
        if (pos == deg) break;
      }
      for (int e = 0; e < deg; ++e) {
        double s = f2v[f][e].sum();
        if (s <= 0.0) f2v[f][e] = uniform;
        else f2v[f][e] = (f2v[f][e] / s).cwiseMax(kMsgFloor);
      }
    }
    // Variable update.
    for (int v = 0; v < nvar; ++v) {
      Eigen::VectorXd prod = priors ? priors->row(v).transpose() : uniform;
      for (int f : vfactors[v]) {
        for (size_t e = 0; e < fvars[f].size(); ++e)
          if (fvars[f][e] == v) { prod = prod.cwiseProduct(f2v[f][e]); break; }
      }
      for (int f : vfactors[v]) {
        for (size_t e = 0; e < fvars[f].size(); ++e)
          if (fvars[f][e] == v) {
            Eigen::VectorXd out = prod.cwiseQuotient(f2v[f][e].cwiseMax(kMsgFloor));
            double s = out.sum();
            v2f[f][e] = s > 0.0 ? (out / s).cwiseMax(kMsgFloor).eval() : uniform;
            break;
          }
      }
    }
  }

  MpaResult res;
  res.marginals.resize(nvar, m);
  res.hard.resize(nvar);
  for (int v = 0; v < nvar; ++v) {
    Eigen::VectorXd prod = priors ? priors->row(v).transpose() : uniform;
    for (int f : vfactors[v])
      for (size_t e = 0; e < fvars[f].size(); ++e)
        if (fvars[f][e] == v) { prod = prod.cwiseProduct(f2v[f][e]); break; }
    double s = prod.sum();
    res.marginals.row(v) = (s > 0.0 ? (prod / s) : uniform).transpose();
    int best = 0;
    prod.maxCoeff(&best);
    res.hard[v] = best;
  }
  return res;
}

MpaResult exact_marginals(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& g,
                          const Eigen::VectorXcd& alphabet, double n0,
                          const Eigen::MatrixXd* priors, long cap) {
  const int nvar = static_cast<int>(g.cols());
  const int m = static_cast<int>(alphabet.size());
  if (n0 <= 0.0) throw std::invalid_argument("detect: noise variance must be positive");
  double total = std::pow(static_cast<double>(m), static_cast<double>(nvar));
  if (total > static_cast<double>(cap))
    throw std::invalid_argument("detect: hypothesis enumeration exceeds cap");
  const long combos = static_cast<long>(total);

  std::vector<int> odo(nvar, 0);
  std::vector<double> d2(combos), lp(combos, 0.0);
  Eigen::VectorXcd mean = g * Eigen::VectorXcd::Constant(nvar, alphabet(0));
  double dmin = std::numeric_limits<double>::infinity();
  for (long c = 0;; ++c) {
    d2[c] = (y - mean).squaredNorm();
    if (priors)
      for (int v = 0; v < nvar; ++v) lp[c] += std::log(std::max((*priors)(v, odo[v]), 1e-300));
    dmin = std::min(dmin, d2[c]);
    int pos = 0;
    while (pos < nvar) {
      mean -= g.col(pos) * alphabet(odo[pos]);
      if (++odo[pos] == m) {
        odo[pos] = 0;
        mean += g.col(pos) * alphabet(0);
        ++pos;
      } else {
        mean += g.col(pos) * alphabet(odo[pos]);
        break;
      }
    }
    if (pos == nvar) break;
  }

  MpaResult res;
  res.marginals = Eigen::MatrixXd::Zero(nvar, m);
  res.hard.resize(nvar);
  odo.assign(nvar, 0);
  for (long c = 0;; ++c) {
    double w = std::exp((dmin - d2[c]) / n0 + lp[c]);
    for (int v = 0; v < nvar; ++v) res.marginals(v, odo[v]) += w;
    int pos = 0;
    while (pos < nvar && ++odo[pos] == m) odo[pos++] = 0;
    if (pos == nvar) break;
  }
  for (int v = 0; v < nvar; ++v) {
    res.marginals.row(v) /= res.marginals.row(v).sum();
    int best = 0;
    res.marginals.row(v).maxCoeff(&best);
    res.hard[v] = best;
  }
  return res;
}

// --- Two-stage broadcast receiver ---------------------------------------------

TwoStageResult two_stage_detect(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& h_eff,
                                const Eigen::MatrixXcd& z_eff, const Eigen::VectorXcd& alphabet,
                                const ScmaConfig& cfg, Allocation alloc, double n0,
                                int mpa_iterations) {
  const int n = static_cast<int>(h_eff.rows());
  if (h_eff.cols() != n || y.size() != n)
    throw std::invalid_argument("detect: chip channel must be square and match y");
  if (n % cfg.k != 0) throw std::invalid_argument("detect: N must be a multiple of K");
  const int q_groups = n / cfg.k;

  TwoStageResult res;
  Eigen::MatrixXcd s = h_eff * h_eff.adjoint();
  s.diagonal().array() += n0;
  res.w_hat = h_eff.adjoint() * s.llt().solve(y);

  res.per_group.reserve(q_groups);
  res.hard.assign(static_cast<size_t>(cfg.j) * q_groups, 0);
  for (int q = 0; q < q_groups; ++q) {
    Eigen::VectorXcd wq(cfg.k);
    for (int k = 0; k < cfg.k; ++k) wq(k) = res.w_hat(subcarrier_of(alloc, n, cfg.k, q, k));
    MpaResult g = mpa_detect(wq, z_eff, alphabet, n0, mpa_iterations);
    for (int j = 0; j < cfg.j; ++j) res.hard[static_cast<size_t>(j) * q_groups + q] = g.hard[j];
    res.per_group.push_back(std::move(g));
  }
  return res;
}

// --- Gaussian message primitives -----------------------------------------------

GaussianMessage lmmse_estimate(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& g,
                               const GaussianMessage& prior, double n0) {
  const int nobs = static_cast<int>(g.rows());
  const int t = static_cast<int>(g.cols());
  if (y.size() != nobs || prior.mean.size() != t || prior.variance.size() != t)
    throw std::invalid_argument("detect: LMMSE shape mismatch");
  if (n0 <= 0.0) throw std::invalid_argument("detect: noise variance must be positive");

  Eigen::MatrixXcd gv = g * prior.variance.asDiagonal();  // G V
  Eigen::MatrixXcd s = gv * g.adjoint();
  s.diagonal().array() += n0;
  Eigen::LLT<Eigen::MatrixXcd> llt(s);

  GaussianMessage post;
  Eigen::VectorXcd innov = llt.solve(y - g * prior.mean);
  post.mean = prior.mean + gv.adjoint() * innov;

  Eigen::MatrixXcd sig = llt.solve(g);  // S^{-1} G
  post.variance.resize(t);
  for (int i = 0; i < t; ++i) {
    double corr = std::real(g.col(i).dot(sig.col(i)));  // (G^H S^-1 G)_ii
    double v = prior.variance(i);
    post.variance(i) = std::max(v - v * v * corr, 1e-15);
  }
  return post;
}

GaussianMessage lmmse_estimate_reference(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& g,
                                         const GaussianMessage& prior, double n0) {
  const int t = static_cast<int>(g.cols());
  if (n0 <= 0.0) throw std::invalid_argument("detect: noise variance must be positive");
  // Information form: posterior covariance (G^H G / n0 + V^{-1})^{-1}.
  Eigen::MatrixXcd info = g.adjoint() * g / n0;
  for (int i = 0; i < t; ++i) info(i, i) += 1.0 / prior.variance(i);
  Eigen::MatrixXcd cov = info.inverse();
  Eigen::VectorXcd rhs = g.adjoint() * y / n0 +
                         prior.variance.cwiseInverse().cast<std::complex<double>>()
                             .cwiseProduct(prior.mean);
  GaussianMessage post;
  post.mean = cov * rhs;
  post.variance = cov.diagonal().real();
  return post;
}

CombineResult extrinsic_combine(const GaussianMessage& posterior, const GaussianMessage& prior,
                                double kappa, double v_min, double v_max) {
  if (posterior.mean.size() != prior.mean.size())
    throw std::invalid_argument("detect: combine block size mismatch");
  if (kappa <= 0.0 || kappa > 1.0) throw std::invalid_argument("detect: kappa must be in (0, 1]");
  const double vp = posterior.variance.mean();
  const double v0 = prior.variance.mean();
  if (vp <= 0.0 || v0 <= 0.0) throw std::invalid_argument("detect: nonpositive block variance");

  CombineResult res;
  const double wp = kappa / vp;
  const double w0 = (kappa == 1.0) ? 1.0 / v0 : (1.0 - kappa) / v0;
  const double prec = wp - w0;
  const int t = static_cast<int>(posterior.mean.size());
  if (prec <= 1.0 / v_max) {
    // No usable extrinsic information: rail the variance, pass the posterior
    // mean through (dividing by a vanishing precision would blow it up).
    res.msg.mean = posterior.mean;
    res.msg.variance = Eigen::VectorXd::Constant(t, v_max);
    res.clamp_count = 1;
    return res;
  }
  double v = 1.0 / prec;
  res.msg.mean = (wp * posterior.mean - w0 * prior.mean) * v;
  if (v < v_min) {
    v = v_min;
    res.clamp_count = 1;
  }
  res.msg.variance = Eigen::VectorXd::Constant(t, v);
  return res;
}

// --- LLR <-> Gaussian conversions ------------------------------------------------

Eigen::VectorXd llr_from_gaussian(const GaussianMessage& msg, const Eigen::VectorXcd& alphabet) {
  const int t = static_cast<int>(msg.mean.size());
  const int b = bits_per_symbol_of(static_cast<int>(alphabet.size()));
  Eigen::VectorXd out(static_cast<Eigen::Index>(t) * b);
  for (int i = 0; i < t; ++i)
    entry_bit_llrs(msg.mean(i), msg.variance(i), alphabet, out.data() + static_cast<size_t>(i) * b);
  return out;
}

Eigen::VectorXd llr_from_gaussian_qpsk(const GaussianMessage& msg) {
  const int t = static_cast<int>(msg.mean.size());
  const double root8 = std::sqrt(8.0);
  Eigen::VectorXd out(2 * t);
  for (int i = 0; i < t; ++i) {
    double v = std::max(msg.variance(i), 1e-12);
    out(2 * i) = std::clamp(root8 * msg.mean(i).real() / v, -kLlrClamp, kLlrClamp);
    out(2 * i + 1) = std::clamp(root8 * msg.mean(i).imag() / v, -kLlrClamp, kLlrClamp);
  }
  return out;
}

GaussianMessage gaussian_from_llr(const Eigen::VectorXd& llrs, const Eigen::VectorXcd& alphabet) {
  const int b = bits_per_symbol_of(static_cast<int>(alphabet.size()));
  if (llrs.size() % b != 0) throw std::invalid_argument("detect: LLR length not a bit multiple");
  const int t = static_cast<int>(llrs.size()) / b;
  GaussianMessage msg;
  msg.mean.resize(t);
  msg.variance.resize(t);
  for (int i = 0; i < t; ++i)
    entry_from_bit_llrs(llrs.data() + static_cast<size_t>(i) * b, alphabet, &msg.mean(i),
                        &msg.variance(i));
  return msg;
}

GaussianMessage gaussian_from_llr_qpsk(const Eigen::VectorXd& llrs) {
  if (llrs.size() % 2 != 0) throw std::invalid_argument("detect: QPSK LLR length must be even");
  const int t = static_cast<int>(llrs.size()) / 2;
  const double root2inv = 1.0 / std::sqrt(2.0);
  GaussianMessage msg;
  msg.mean.resize(t);
  msg.variance.resize(t);
  for (int i = 0; i < t; ++i) {
    double a = std::tanh(std::clamp(llrs(2 * i), -kLlrClamp, kLlrClamp) / 2.0);
    double bb = std::tanh(std::clamp(llrs(2 * i + 1), -kLlrClamp, kLlrClamp) / 2.0);
    msg.mean(i) = std::complex<double>(root2inv * a, root2inv * bb);
    msg.variance(i) = std::max(1.0 - std::norm(msg.mean(i)), 1e-12);
  }
  return msg;
}

// --- Iterative LMMSE + decoder receiver --------------------------------------------

OampResult oamp_receive(const OampInput& in, const OampConfig& cfg,
                        const Eigen::MatrixXcd* true_symbols) {
  const int blocks = static_cast<int>(in.received.size());
  if (blocks == 0 || in.g.size() != in.received.size())
    throw std::invalid_argument("detect: empty or mismatched block list");
  if (!in.code) throw std::invalid_argument("detect: iterative receiver requires a code");
  const int users = in.num_users;
  const int q = in.symbols_per_block;
  const int t = users * q;
  const int m = static_cast<int>(in.alphabet.size());
  const int b = bits_per_symbol_of(m);
  const int frame_symbols = blocks * q;             // per user
  if (in.code->n != frame_symbols * b)
    throw std::invalid_argument("detect: code length must match frame bit count");
  if (static_cast<int>(in.interleavers.size()) != users)
    throw std::invalid_argument("detect: one interleaver per user required");
  for (const auto& il : in.interleavers)
    if (static_cast<int>(il.perm.size()) != in.code->n)
      throw std::invalid_argument("detect: interleaver size mismatch");
  for (int s = 0; s < blocks; ++s)
    if (in.g[s].cols() != t || in.g[s].rows() != in.received[s].size())
      throw std::invalid_argument("detect: block matrix shape mismatch");
  const bool fast = is_canonical_qpsk(in.alphabet);

  Eigen::MatrixXcd prior_mean = Eigen::MatrixXcd::Zero(t, blocks);
  Eigen::MatrixXd prior_var = Eigen::MatrixXd::Ones(users, blocks);
  Eigen::MatrixXcd det_mean(t, blocks);
  Eigen::MatrixXd det_var(users, blocks);

  OampResult res;
  res.info_bits.assign(users, {});
  res.converged.assign(users, 0);

  auto mse_vs_truth = [&](const Eigen::MatrixXcd& means) {
    return (means - *true_symbols).squaredNorm() / static_cast<double>(t) / blocks;
  };

  for (int outer = 0; outer < cfg.outer_iterations; ++outer) {
    // Linear stage per block, then per-user extrinsic messages.
    for (int s = 0; s < blocks; ++s) {
      GaussianMessage prior;
      prior.mean = prior_mean.col(s);
      prior.variance.resize(t);
      for (int j = 0; j < users; ++j)
        prior.variance.segment(static_cast<Eigen::Index>(j) * q, q)
            .setConstant(prior_var(j, s));
      GaussianMessage post = lmmse_estimate(in.received[s], in.g[s], prior, in.n0);
      for (int j = 0; j < users; ++j) {
        GaussianMessage pj{post.mean.segment(static_cast<Eigen::Index>(j) * q, q),
                           post.variance.segment(static_cast<Eigen::Index>(j) * q, q)};
        GaussianMessage rj{prior.mean.segment(static_cast<Eigen::Index>(j) * q, q),
                           prior.variance.segment(static_cast<Eigen::Index>(j) * q, q)};
        CombineResult c = extrinsic_combine(pj, rj, cfg.kappa, cfg.v_min, cfg.v_max);
        res.clamp_count += c.clamp_count;
        det_mean.col(s).segment(static_cast<Eigen::Index>(j) * q, q) = c.msg.mean;
        det_var(j, s) = c.msg.variance(0);
      }
    }
    if (true_symbols) res.detector_mse.push_back(mse_vs_truth(det_mean));

    // Decoder stage per user.
    bool all_converged = true;
    for (int j = 0; j < users; ++j) {
      Eigen::VectorXd l_tx(in.code->n);
      for (int s = 0; s < blocks; ++s) {
        double v = det_var(j, s);
        for (int qq = 0; qq < q; ++qq) {
          std::complex<double> mu = det_mean(static_cast<Eigen::Index>(j) * q + qq, s);
          double* out = l_tx.data() + (static_cast<size_t>(s) * q + qq) * b;
          if (fast) {
            double vv = std::max(v, 1e-12);
            out[0] = std::clamp(std::sqrt(8.0) * mu.real() / vv, -kLlrClamp, kLlrClamp);
            out[1] = std::clamp(std::sqrt(8.0) * mu.imag() / vv, -kLlrClamp, kLlrClamp);
          } else {
            entry_bit_llrs(mu, v, in.alphabet, out);
          }
        }
      }
      Eigen::VectorXd l_code = in.interleavers[j].invert(l_tx);
      DecodeResult dec = decode(l_code, *in.code, cfg.decoder_iterations);
      res.converged[j] = dec.converged ? 1 : 0;
      all_converged = all_converged && dec.converged;
      res.info_bits[j].assign(dec.hard.begin(), dec.hard.begin() + in.code->k());

      Eigen::VectorXd l_ext_tx = in.interleavers[j].apply(dec.extrinsic);
      // Gaussian projection of the decoder's extrinsic stream, then frame-wide
      // variance averaging for this user.
      Eigen::VectorXcd dec_mean(frame_symbols);
      double var_sum = 0.0;
      for (int c = 0; c < frame_symbols; ++c) {
        std::complex<double> mu;
        double v;
        if (fast) {
          double a = std::tanh(std::clamp(l_ext_tx(2 * c), -kLlrClamp, kLlrClamp) / 2.0);
          double bb = std::tanh(std::clamp(l_ext_tx(2 * c + 1), -kLlrClamp, kLlrClamp) / 2.0);
          mu = std::complex<double>(a / std::sqrt(2.0), bb / std::sqrt(2.0));
          v = std::max(1.0 - std::norm(mu), 1e-12);
        } else {
          entry_from_bit_llrs(l_ext_tx.data() + static_cast<size_t>(c) * b, in.alphabet, &mu, &v);
        }
        dec_mean(c) = mu;
        var_sum += v;
      }
      const double v_dec = var_sum / frame_symbols;

      for (int s = 0; s < blocks; ++s) {
        GaussianMessage post{dec_mean.segment(static_cast<Eigen::Index>(s) * q, q),
                             Eigen::VectorXd::Constant(q, v_dec)};
        GaussianMessage pr{det_mean.col(s).segment(static_cast<Eigen::Index>(j) * q, q),
                           Eigen::VectorXd::Constant(q, det_var(j, s))};
        CombineResult c = extrinsic_combine(post, pr, cfg.kappa, cfg.v_min, cfg.v_max);
        res.clamp_count += c.clamp_count;
        prior_mean.col(s).segment(static_cast<Eigen::Index>(j) * q, q) = c.msg.mean;
        prior_var(j, s) = c.msg.variance(0);
      }
    }
    if (true_symbols) res.decoder_mse.push_back(mse_vs_truth(prior_mean));
    res.outer_iterations_run = outer + 1;
    if (cfg.early_stop && all_converged) break;
  }
  return res;
}

}  // namespace afdmscma
