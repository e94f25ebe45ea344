#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace afdmscma {

// Binary LDPC code given by its parity-check matrix in sparse row form.
// Systematic encodability requires the last (n - k) columns to form a
// dual-diagonal accumulator chain; make_ldpc produces that structure and
// the loader detects it.
struct LdpcCode {
  int n = 0;  // codeword length
  int m = 0;  // number of checks
  std::vector<std::vector<int>> rows;  // check -> variable indices, ascending

  int k() const { return n - m; }
  double rate() const { return static_cast<double>(k()) / n; }
  std::vector<std::vector<int>> cols() const;  // variable -> check indices
  bool encodable() const;                      // accumulator chain present
  bool check(const std::vector<uint8_t>& codeword) const;
};

// Deterministic repeat-accumulate style construction: weight-3 information
// columns placed by rejection sampling so no two columns share two checks
// (girth > 4), parity part a dual-diagonal accumulator.
LdpcCode make_ldpc(int n, int m, uint64_t seed);

LdpcCode load_alist(const std::string& path);
void save_alist(const LdpcCode& code, const std::string& path);

// info.size() == k; returns systematic codeword [info | parity].
std::vector<uint8_t> encode(const std::vector<uint8_t>& info, const LdpcCode& code);

struct DecodeResult {
  Eigen::VectorXd aposteriori;  // input + extrinsic
  Eigen::VectorXd extrinsic;    // sum of check-to-variable messages
  std::vector<uint8_t> hard;
  bool converged = false;       // syndrome reached zero
  int iterations_used = 0;
};

// Flooding sum-product; LLR convention log(P(0)/P(1)). Stops early when the
// hard decision satisfies all checks.
DecodeResult decode(const Eigen::VectorXd& llrs, const LdpcCode& code, int iterations);

struct Interleaver {
  std::vector<int> perm;  // transmitted position i carries stream bit perm[i]

  static Interleaver seeded(int size, uint64_t seed);
  template <typename Vec>
  Vec apply(const Vec& v) const {
    Vec out(v.size());
    for (size_t i = 0; i < perm.size(); ++i) out[i] = v[perm[i]];
    return out;
  }
  template <typename Vec>
  Vec invert(const Vec& v) const {
    Vec out(v.size());
    for (size_t i = 0; i < perm.size(); ++i) out[perm[i]] = v[i];
    return out;
  }
};

}  // namespace afdmscma
