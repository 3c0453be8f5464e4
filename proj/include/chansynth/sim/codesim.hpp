#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chansynth/info.hpp"
#include "chansynth/prob.hpp"

namespace chansynth::sim {

using prob::Alphabet;
using prob::Dist;
using prob::JointDist;
using prob::Kernel;

// ---------------------------------------------------------------------------
// codebooks

// table of bin indices, one per (first, second) index pair
struct BinningCodebook {
  int bins = 1;
  std::size_t n_first = 1, n_second = 1;
  std::vector<std::int32_t> table;

  int at(std::size_t i, std::size_t j) const { return table[i * n_second + j]; }
};

// codeword list: one sequence index per bin value
struct ResolvCodebook {
  int bins = 1;
  std::size_t codeword_space = 1;
  std::vector<std::int32_t> words;
};

// two-layer codebook: coarse words U(m), fine words Uh(m, mh)
struct SuperpositionCodebook {
  int bins = 1, bins_hat = 1;
  std::size_t coarse_space = 1, fine_space = 1;
  std::vector<std::int32_t> u_words;    // bins
  std::vector<std::int32_t> uh_words;   // bins x bins_hat

  int uh_at(int m, int mh) const {
    return uh_words[static_cast<std::size_t>(m) * static_cast<std::size_t>(bins_hat) +
                    static_cast<std::size_t>(mh)];
  }
};

// ---------------------------------------------------------------------------
// scheme specs

struct P2PSchemeSpec {
  int N = 1, K = 2;
  double R = 0.7;       // nats per symbol
  Dist Q_U;             // single-letter codeword law
  Kernel Q_BgXU;        // inputs {X, U}
  Kernel Q_YgBU;        // inputs {B, U}
  Dist P_W;
  Dist pi_X;
  Kernel pi_YgX;        // inputs {X}
  std::optional<Dist> QhatY;  // block-1 output law; defaults to argmin_Q D(Q||pi|pi)
  double eps = 0.25;
  std::uint64_t seed = 0;

  void validate() const;
  int bins() const;  // ceil(e^{NR})
  int nx() const { return pi_X.size(); }
  int ny() const { return pi_YgX.output().size; }
  int nb() const { return Q_BgXU.output().size; }
  int nu() const { return Q_U.size(); }
  int nw() const { return P_W.size(); }
};

struct BroadcastSchemeSpec {
  int N = 1, K = 2;
  double R = 0.7, Rhat = 0.5;
  Dist Q_U;
  Kernel Q_UhgU;        // inputs {U}
  Kernel Q_BgXUUh;      // inputs {X, U, Uh}
  Kernel Q_YgBUUh;      // inputs {B, U, Uh}
  Kernel Q_ZgBU;        // inputs {B, U}
  Dist P_W, P_What;
  Dist pi_X;
  Kernel pi_YZgX;       // inputs {X}, output flattened (y,z)
  int Y_size = 2, Z_size = 2;
  std::optional<Dist> QhatY, QhatZ;
  double eps = 0.25;
  std::uint64_t seed = 0;

  void validate() const;
  int bins() const;
  int bins_hat() const;
};

struct InteractiveSchemeSpec {
  int N = 1, K = 2;
  double R = 0.7;
  Dist Q_U;
  Kernel Q_AgSU;        // inputs {S, U}
  Kernel Q_BgXU;        // inputs {X, U}
  Kernel Q_YgABU;       // inputs {A, B, U}
  Kernel Q_ZgABU;       // inputs {A, B, U}
  Dist P_W;
  JointDist pi_SX;      // components {S, X}
  Kernel pi_YZgSX;      // inputs {S, X}, output flattened (y,z)
  int Y_size = 2, Z_size = 2;
  double eps = 0.25;
  std::uint64_t seed = 0;

  void validate() const;
  int bins() const;
};

// ---------------------------------------------------------------------------
// reports

struct BlockReport {
  int k = 0;
  double mi_term = 0.0;        // I(O_k ; X^{k-1} O^{k-1} | X_k)
  double div_term = 0.0;       // D(P_{O_k|X_k} || pi^N | pi^N)
  double m_uniformity = 0.0;   // D(P_{M_k|X_{k-1} O_{k-1} U_{k-1}} || Unif), k >= 2
  double markov_cmi = 0.0;     // I(O_k ; X^{k-1} O^{k-1} | M_k), k >= 2
};

struct SimReport {
  std::string method = "exact";
  int N = 0, K = 0;
  double R = 0.0;
  std::uint64_t seed = 0;
  double total = kInf;              // exact divergence of the K-block channel
  double decomposition_sum = kInf;  // sum over blocks of (mi + div)
  double first_block_div = 0.0;
  std::vector<BlockReport> blocks;
  bool typical_fallback = false;    // codeword law fell back to closest types
  double reduction_max_abs_diff = 0.0;  // interactive only
};

// ---------------------------------------------------------------------------
// operations

struct RateWindow {
  double shannon_lo = 0.0, shannon_hi = 0.0;
  double relaxed_lo = 0.0, relaxed_hi = 0.0;
  bool shannon_empty() const { return !(shannon_lo < shannon_hi); }
  bool relaxed_empty() const { return !(relaxed_lo < relaxed_hi); }
};

// Shannon window I_Q(U;XY) < R < H(W) + H_Q(B|XYU) and its Renyi relaxation
// (1+eps) D_{1+s}(Q_{XY|U}||Q_{XY}|Q_U) < R < (1-eps) sum_u Q_U(u)
// H_{1+s}(B|XY,U=u) + H_{1+s}(W).
RateWindow rate_window(const Dist& q_u, const Kernel& q_bgxu, const Kernel& q_ygbu,
                       const Dist& pi_x, const Dist& p_w, double s, double eps);
RateWindow rate_window(const P2PSchemeSpec& spec, double s, double eps);

struct P2PCodebooks {
  std::vector<BinningCodebook> binning;  // index j serves block k = j + 2
  std::vector<ResolvCodebook> resolv;
  bool typical_fallback = false;
};

P2PCodebooks sample_codebooks(const P2PSchemeSpec& spec, std::uint64_t seed);

SimReport exact_induced_divergence(const P2PSchemeSpec& spec, const P2PCodebooks& cb);

// per-block D(P_{M_k|X_{k-1}Y_{k-1}U_{k-1}} || Unif[bins]), k = 2..K
std::vector<double> m_uniformity_diagnostic(const P2PSchemeSpec& spec, const P2PCodebooks& cb);

struct McDivergence {
  double mean = 0.0, stderr_mean = 0.0;
  double min_total = 0.0;
  int n = 0;
  std::vector<double> mean_m_uniformity;  // averaged per block k = 2..K
};

McDivergence expected_divergence_over_codebooks(const P2PSchemeSpec& spec, int n_codebooks);

// exact divergence of n uses of the symbol-by-symbol scheme x -> B -> y
double run_symbolwise(const Kernel& p_bgx, const Kernel& p_ygb, const Dist& pi_x,
                      const Kernel& pi_ygx, int n);

struct BroadcastCodebooks {
  std::vector<BinningCodebook> binning;      // (b,w) binning, block k = j + 2
  std::vector<BinningCodebook> hat_binning;  // what-binning used in block k = j + 2
  std::vector<SuperpositionCodebook> superpos;
  bool typical_fallback = false;
};

BroadcastCodebooks build_broadcast_scheme(const BroadcastSchemeSpec& spec, std::uint64_t seed);

SimReport exact_broadcast_divergence(const BroadcastSchemeSpec& spec, const BroadcastCodebooks& cb);

// Composite sender/receiver view of the interactive scheme: a point-to-point
// scheme over the pair alphabets (S,X), (A,B), (Y,Z). The binning codebook in
// the returned spec is shared with the interactive protocol.
struct InteractiveReduction {
  P2PSchemeSpec composite;
  P2PCodebooks codebooks;
  int y_const = 0, z_const = 0;  // block-1 constant outputs
};

InteractiveReduction reduce_interactive_to_p2p(const InteractiveSchemeSpec& spec);

// Exact divergence of the interactive scheme, computed through the composite
// point-to-point view; also re-derives the induced law by direct enumeration
// of the interactive protocol and records the sup-norm gap (must vanish).
SimReport exact_interactive_divergence(const InteractiveSchemeSpec& spec);

}  // namespace chansynth::sim
