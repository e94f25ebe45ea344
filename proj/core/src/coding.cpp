#include "afdmscma/coding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "afdmscma/rng.hpp"

namespace afdmscma {

std::vector<std::vector<int>> LdpcCode::cols() const {
  std::vector<std::vector<int>> c(n);
  for (int r = 0; r < m; ++r)
    for (int v : rows[r]) c[v].push_back(r);
  return c;
}

bool LdpcCode::encodable() const {
  auto c = cols();
  const int kk = k();
  for (int i = 0; i < m; ++i) {
    const auto& col = c[kk + i];
    if (i + 1 < m) {
      if (col.size() != 2 || col[0] != i || col[1] != i + 1) return false;
    } else {
      if (col.size() != 1 || col[0] != i) return false;
    }
  }
  return true;
}

bool LdpcCode::check(const std::vector<uint8_t>& codeword) const {
  if (static_cast<int>(codeword.size()) != n) return false;
  for (const auto& row : rows) {
    int parity = 0;
    for (int v : row) parity ^= codeword[v] & 1;
    if (parity) return false;
  }
  return true;
}

LdpcCode make_ldpc(int n, int m, uint64_t seed) {
  if (n <= m || m < 2) throw std::invalid_argument("coding: need n > m >= 2");
  const int k = n - m;
  LdpcCode code;
  code.n = n;
  code.m = m;
  code.rows.resize(m);

  // Accumulator chain: check i touches parity columns k+i-1 and k+i.
  for (int i = 0; i < m; ++i) {
    if (i > 0) code.rows[i].push_back(k + i - 1);
    code.rows[i].push_back(k + i);
  }

  // Check-pair occupancy; seeded with the accumulator pairs so information
  // columns cannot close a 4-cycle through the chain either.
  std::set<std::pair<int, int>> used;
  for (int i = 0; i + 1 < m; ++i) used.insert({i, i + 1});

  Rng rng(seed);
  const int weight = 3;
  for (int col = 0; col < k; ++col) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) throw std::runtime_error("coding: column placement failed");
      std::set<int> picks;
      while (static_cast<int>(picks.size()) < weight)
        picks.insert(static_cast<int>(rng.uniform_int(m)));
      std::vector<int> rows_pick(picks.begin(), picks.end());
      bool clash = false;
      for (size_t a = 0; a < rows_pick.size() && !clash; ++a)
        for (size_t b = a + 1; b < rows_pick.size() && !clash; ++b)
          if (used.count({rows_pick[a], rows_pick[b]})) clash = true;
      if (clash) continue;
      for (size_t a = 0; a < rows_pick.size(); ++a)
        for (size_t b = a + 1; b < rows_pick.size(); ++b)
          used.insert({rows_pick[a], rows_pick[b]});
      for (int r : rows_pick) code.rows[r].push_back(col);
      break;
    }
  }
  for (auto& row : code.rows) std::sort(row.begin(), row.end());
  return code;
}

LdpcCode load_alist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("coding: cannot open " + path);
  int n = 0, m = 0, maxc = 0, maxr = 0;
  in >> n >> m >> maxc >> maxr;
  if (!in || n <= 0 || m <= 0) throw std::runtime_error("coding: malformed alist header");
  std::vector<int> col_w(n), row_w(m);
  for (int i = 0; i < n; ++i) in >> col_w[i];
  for (int i = 0; i < m; ++i) in >> row_w[i];
  LdpcCode code;
  code.n = n;
  code.m = m;
  code.rows.resize(m);
  // Column blocks (1-based check indices, zero padding allowed).
  for (int c = 0; c < n; ++c) {
    for (int e = 0; e < maxc; ++e) {
      int idx = 0;
      in >> idx;
      if (e < col_w[c]) {
        if (idx < 1 || idx > m) throw std::runtime_error("coding: alist index out of range");
      }
    }
  }
  for (int r = 0; r < m; ++r) {
    for (int e = 0; e < maxr; ++e) {
      int idx = 0;
      in >> idx;
      if (e < row_w[r]) {
        if (idx < 1 || idx > n) throw std::runtime_error("coding: alist index out of range");
        code.rows[r].push_back(idx - 1);
      }
    }
  }
  if (!in) throw std::runtime_error("coding: truncated alist");
  for (auto& row : code.rows) std::sort(row.begin(), row.end());
  return code;
}

void save_alist(const LdpcCode& code, const std::string& path) {
  auto cols = code.cols();
  int maxc = 0, maxr = 0;
  for (const auto& c : cols) maxc = std::max(maxc, static_cast<int>(c.size()));
  for (const auto& r : code.rows) maxr = std::max(maxr, static_cast<int>(r.size()));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("coding: cannot write " + path);
  out << code.n << " " << code.m << "\n" << maxc << " " << maxr << "\n";
  for (int i = 0; i < code.n; ++i) out << cols[i].size() << (i + 1 < code.n ? " " : "\n");
  for (int i = 0; i < code.m; ++i) out << code.rows[i].size() << (i + 1 < code.m ? " " : "\n");
  for (const auto& c : cols) {
    for (int e = 0; e < maxc; ++e)
      out << (e < static_cast<int>(c.size()) ? c[e] + 1 : 0) << (e + 1 < maxc ? " " : "\n");
    if (maxc == 0) out << "\n";
  }
  for (const auto& r : code.rows) {
    for (int e = 0; e < maxr; ++e)
      out << (e < static_cast<int>(r.size()) ? r[e] + 1 : 0) << (e + 1 < maxr ? " " : "\n");
    if (maxr == 0) out << "\n";
  }
}

std::vector<uint8_t> encode(const std::vector<uint8_t>& info, const LdpcCode& code) {
  if (static_cast<int>(info.size()) != code.k())
    throw std::invalid_argument("coding: information length mismatch");
  if (!code.encodable())
    throw std::invalid_argument("coding: parity part is not an accumulator chain");
  const int k = code.k();
  std::vector<uint8_t> cw(code.n, 0);
  std::copy(info.begin(), info.end(), cw.begin());
  int prev = 0;
  for (int i = 0; i < code.m; ++i) {
    int acc = prev;
    for (int v : code.rows[i])
      if (v < k) acc ^= cw[v] & 1;
    cw[k + i] = static_cast<uint8_t>(acc);
    prev = acc;
  }
  return cw;
}

DecodeResult decode(const Eigen::VectorXd& llrs, const LdpcCode& code, int iterations) {
  if (llrs.size() != code.n) throw std::invalid_argument("coding: LLR length mismatch");
  const int m = code.m;

  // Edge storage, row-major. Flooding schedule: every check message of an
  // iteration is computed from the previous iteration's totals.
  std::vector<int> row_offset(m + 1, 0);
  for (int r = 0; r < m; ++r) row_offset[r + 1] = row_offset[r] + static_cast<int>(code.rows[r].size());
  const int edges = row_offset[m];
  std::vector<double> c2v(edges, 0.0);
  std::vector<double> c2v_next(edges, 0.0);

  Eigen::VectorXd total = llrs;
  DecodeResult res;
  res.hard.resize(code.n);

  auto harden = [&]() {
    for (int v = 0; v < code.n; ++v) res.hard[v] = total(v) < 0.0 ? 1 : 0;
  };

  std::vector<double> t, pre, suf;
  int it = 0;
  for (; it < iterations; ++it) {
    for (int r = 0; r < m; ++r) {
      const auto& row = code.rows[r];
      const int deg = static_cast<int>(row.size());
      const int base = row_offset[r];
      t.resize(deg);
      pre.resize(deg + 1);
      suf.resize(deg + 1);
      for (int e = 0; e < deg; ++e) {
        double l = total(row[e]) - c2v[base + e];  // variable -> check
        l = std::clamp(l, -35.0, 35.0);
        t[e] = std::tanh(0.5 * l);
      }
      // Self-exclusion through prefix/suffix tanh products.
      pre[0] = 1.0;
      for (int e = 0; e < deg; ++e) pre[e + 1] = pre[e] * t[e];
      suf[deg] = 1.0;
      for (int e = deg - 1; e >= 0; --e) suf[e] = suf[e + 1] * t[e];
      for (int e = 0; e < deg; ++e) {
        double prod = std::clamp(pre[e] * suf[e + 1], -0.999999999999, 0.999999999999);
        c2v_next[base + e] = 2.0 * std::atanh(prod);
      }
    }
    std::swap(c2v, c2v_next);
    total = llrs;
    for (int r = 0; r < m; ++r) {
      const auto& row = code.rows[r];
      const int base = row_offset[r];
      for (size_t e = 0; e < row.size(); ++e) total(row[e]) += c2v[base + e];
    }
    harden();
    if (code.check(res.hard)) {
      res.converged = true;
      ++it;
      break;
    }
  }
  res.iterations_used = it;
  if (!res.converged) harden();
  res.aposteriori = total;
  res.extrinsic = total - llrs;
  return res;
}

Interleaver Interleaver::seeded(int size, uint64_t seed) {
  Interleaver il;
  il.perm.resize(size);
  for (int i = 0; i < size; ++i) il.perm[i] = i;
  Rng rng(seed);
  for (int i = size - 1; i > 0; --i) {
    int j = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(i) + 1));
    std::swap(il.perm[i], il.perm[j]);
  }
  return il;
}

}  // namespace afdmscma
