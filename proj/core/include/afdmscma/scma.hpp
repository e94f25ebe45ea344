#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace afdmscma {

enum class Direction { uplink, downlink };
enum class Allocation { localized, interleaved };
enum class Normalization { none, per_user, global };

// The standard 150%-overloaded occupancy pattern (4 resources, 6 users).
Eigen::MatrixXi standard_indicator_4x6();

// Sparse multiple-access factor graph: K resources shared by J users, each
// user occupying V resources, d_f users colliding per resource.
struct ScmaConfig {
  int k = 4;                 // resources per group
  int j = 6;                 // users
  int v = 2;                 // resources occupied per user
  int d_f = 3;               // users per resource
  Eigen::MatrixXi indicator = standard_indicator_4x6();  // K x J, 0/1 occupancy

  // The standard 150%-overloaded 4x6 pattern.
  static ScmaConfig standard_4x6();
  void validate() const;
  double overload() const { return static_cast<double>(j) / k; }
};

// Per-user resource mapping matrices: V_j is K x V, inserting the v-th
// codeword entry at the v-th occupied resource of user j (top to bottom).
std::vector<Eigen::MatrixXi> mapping_matrices(const ScmaConfig& cfg);

// Unit-energy constellations with natural-binary labeling; the QPSK bits map
// one per rail (first bit -> real sign, second -> imaginary, 0 -> +).
Eigen::VectorXcd bpsk_alphabet();
Eigen::VectorXcd qpsk_alphabet();
bool is_canonical_qpsk(const Eigen::VectorXcd& alphabet);

// 0/1 occupancy pattern as a complex signature (the uplink operator).
Eigen::MatrixXcd uplink_signature(const ScmaConfig& cfg);

// Published three-level downlink operator: entries (1.07j, 0.53, 0.27) on the
// standard 4x6 support, mirrored between the top and bottom row pairs.
Eigen::MatrixXcd downlink_signature_seed();

// Signature-based codebooks: X_j[k, m] = Z[k, j] * alphabet[m]. All users
// share the base alphabet; the signature carries per-entry energy and phase.
struct CodebookSet {
  std::vector<Eigen::MatrixXcd> codebooks;  // J matrices, K x M
  Eigen::MatrixXcd effective_signature;     // K x J after normalization
  Eigen::MatrixXcd raw_signature;           // as passed in
};
CodebookSet build_codebooks(const Eigen::VectorXcd& alphabet, const ScmaConfig& cfg,
                            const Eigen::MatrixXcd& signature,
                            Normalization norm = Normalization::per_user);

int bits_to_index(const std::vector<uint8_t>& bits, int offset, int bits_per_symbol);
void index_to_bits(int index, int bits_per_symbol, std::vector<uint8_t>& bits, int offset);

// Superimposed chip vector for one group: w = sum_j X_j(:, m_j).
Eigen::VectorXcd superimpose(const CodebookSet& set, const std::vector<int>& symbol_indices);

// Minimum Euclidean distance between superimposed chip vectors of distinct
// symbol tuples (difference-domain enumeration; a collision where two
// distinct tuples superimpose identically yields 0). Throws when the
// hypothesis count M^J exceeds enum_cap.
double med(const Eigen::MatrixXcd& signature, const Eigen::VectorXcd& alphabet,
           const ScmaConfig& cfg, long enum_cap = 1 << 20);

// Projected coordinate descent over the distinct signature levels
// (energy simplex sum |z|^2 = d_f / V kept exact, free phases), seeded at the
// published operator. budget = number of sweeps; budget 0 returns the seed
// unchanged.
Eigen::MatrixXcd optimize_signature(const ScmaConfig& cfg, const Eigen::VectorXcd& alphabet,
                                    int budget, uint64_t seed = 1);

// Subcarrier index carrying resource k of group q. Localized keeps a group's
// K resources contiguous; interleaved strides them across the band.
int subcarrier_of(Allocation alloc, int n, int k_resources, int group, int k);

// N x Q spreading matrix of one user: column q places the user's signature
// chips on the subcarriers of group q.
Eigen::MatrixXcd user_spreading_matrix(const Eigen::MatrixXcd& z_eff, int user,
                                       Allocation alloc, int n);

// N x (J*Q) horizontal concatenation over users (user-major column order).
Eigen::MatrixXcd symbol_spreading_matrix(const Eigen::MatrixXcd& z_eff, Allocation alloc, int n);

}  // namespace afdmscma
