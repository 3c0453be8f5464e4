#include "chansynth/sim/codesim.hpp"

#include <algorithm>
#include <cmath>

#include "chansynth/bounds/bounds.hpp"
#include "chansynth/rng.hpp"

namespace chansynth::sim {

namespace {

double xlogy_ratio(double p, double q) {
  // p * log(p/q) with the 0 log 0 = 0 convention; +inf on support violation
  if (p == 0.0) return 0.0;
  if (q == 0.0) return kInf;
  return p * std::log(p / q);
}

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

int bin_count(int n, double rate) {
  const double v = std::exp(static_cast<double>(n) * rate);
  const double r = std::round(v);
  // e^{NR} hitting an integer exactly is the common configuration; absorb
  // the representation error instead of spilling into an extra bin
  if (std::abs(v - r) < 1e-6 * std::max(1.0, v)) return static_cast<int>(std::max(1.0, r));
  return static_cast<int>(std::ceil(v));
}

// product law of a single-letter pmf over length-n sequences, as a plain vector
std::vector<double> seq_law(const Dist& p, int n) {
  return prob::product_extension(p, n).pmf();
}

// ---------------------------------------------------------------------------
// generic exact block-chain evaluation
//
// State across blocks is the extracted index M_k; emissions and transitions
// are dense per-block tensors over (bin, x-seq, out-seq [, next bin]).

struct BlockDynamics {
  int bins_in = 1, bins_out = 1;
  std::size_t nx = 1, no = 1;
  std::vector<double> chan;   // [m][x][o]
  std::vector<double> trans;  // [m][x][o][m']; empty for the final block
  std::vector<int> group;     // bin -> codeword id; empty disables m-uniformity
  double chan_at(int m, std::size_t x, std::size_t o) const {
    return chan[(static_cast<std::size_t>(m) * nx + x) * no + o];
  }
  double trans_at(int m, std::size_t x, std::size_t o, int mn) const {
    return trans[((static_cast<std::size_t>(m) * nx + x) * no + o) * static_cast<std::size_t>(bins_out) +
                 static_cast<std::size_t>(mn)];
  }
};

struct ChainSpec {
  int N = 1, K = 1;
  double R = 0.0;
  std::uint64_t seed = 0;
  std::size_t nx = 1, no = 1;
  std::vector<double> pi_x;       // x-seq law
  std::vector<double> first_out;  // block-1 output law (o-seq)
  std::vector<double> rho2;       // law of M_2 (size blocks[0].bins_in); empty when K == 1
  std::vector<double> target;     // [x][o] single-block product target
  std::vector<BlockDynamics> blocks;  // blocks k = 2..K
  bool typical_fallback = false;
};

void guard_paths(const ChainSpec& c) {
  double paths = 1.0;
  for (int k = 0; k < c.K; ++k) paths *= static_cast<double>(c.nx * c.no);
  if (paths > 2.0e6)
    throw CapacityError("exact chain: (|X|^N |Y|^N)^K = " + std::to_string(paths) +
                        " paths exceed the exact-evaluation guard");
}

SimReport run_exact_chain(const ChainSpec& c) {
  guard_paths(c);
  SimReport rep;
  rep.method = "exact";
  rep.N = c.N;
  rep.K = c.K;
  rep.R = c.R;
  rep.seed = c.seed;
  rep.typical_fallback = c.typical_fallback;
  rep.blocks.resize(static_cast<std::size_t>(c.K));
  for (int k = 0; k < c.K; ++k) rep.blocks[static_cast<std::size_t>(k)].k = k + 1;

  // block 1: no past, output law fixed
  double d1 = 0.0;
  for (std::size_t x = 0; x < c.nx && d1 < kInf; ++x)
    for (std::size_t o = 0; o < c.no; ++o) {
      const double t = xlogy_ratio(c.first_out[o], c.target[x * c.no + o]);
      if (t == kInf) {
        d1 = kInf;
        break;
      }
      d1 += c.pi_x[x] * t;
    }
  rep.blocks[0].div_term = d1;
  rep.first_block_div = d1;

  if (c.K == 1) {
    rep.total = d1;
    rep.decomposition_sum = d1;
    return rep;
  }

  // bin-marginal recursion mu_k = law of M_k
  std::vector<std::vector<double>> mu(c.blocks.size());
  mu[0] = c.rho2;
  for (std::size_t j = 1; j < c.blocks.size(); ++j) {
    const BlockDynamics& b = c.blocks[j - 1];
    mu[j].assign(static_cast<std::size_t>(b.bins_out), 0.0);
    for (int m = 0; m < b.bins_in; ++m) {
      if (mu[j - 1][static_cast<std::size_t>(m)] == 0.0) continue;
      for (std::size_t x = 0; x < b.nx; ++x)
        for (std::size_t o = 0; o < b.no; ++o)
          for (int mn = 0; mn < b.bins_out; ++mn)
            mu[j][static_cast<std::size_t>(mn)] += mu[j - 1][static_cast<std::size_t>(m)] *
                                                   c.pi_x[x] * b.trans_at(m, x, o, mn);
    }
  }

  // per-block marginal channels and divergence terms
  std::vector<std::vector<double>> pk(c.blocks.size());  // [j][x*no+o]
  for (std::size_t j = 0; j < c.blocks.size(); ++j) {
    const BlockDynamics& b = c.blocks[j];
    pk[j].assign(c.nx * c.no, 0.0);
    for (int m = 0; m < b.bins_in; ++m) {
      const double w = mu[j][static_cast<std::size_t>(m)];
      if (w == 0.0) continue;
      for (std::size_t x = 0; x < c.nx; ++x)
        for (std::size_t o = 0; o < c.no; ++o) pk[j][x * c.no + o] += w * b.chan_at(m, x, o);
    }
    double d = 0.0;
    for (std::size_t x = 0; x < c.nx && d < kInf; ++x)
      for (std::size_t o = 0; o < c.no; ++o) {
        const double t = xlogy_ratio(pk[j][x * c.no + o], c.target[x * c.no + o]);
        if (t == kInf) {
          d = kInf;
          break;
        }
        d += c.pi_x[x] * t;
      }
    rep.blocks[j + 1].div_term = d;
  }

  // m-uniformity, k = 2 (M_2 independent of the block-1 variables)
  {
    const int bins = c.blocks[0].bins_in;
    double d = 0.0;
    for (int m = 0; m < bins; ++m)
      d += xlogy_ratio(c.rho2[static_cast<std::size_t>(m)], 1.0 / static_cast<double>(bins));
    rep.blocks[1].m_uniformity = d;
  }
  // m-uniformity, k >= 3: condition on (X_{k-1}, O_{k-1}, codeword of M_{k-1})
  for (std::size_t j = 1; j < c.blocks.size(); ++j) {
    const BlockDynamics& prev = c.blocks[j - 1];
    if (prev.group.empty()) continue;
    const int bins = prev.bins_out;
    int n_groups = 0;
    for (int g : prev.group) n_groups = std::max(n_groups, g + 1);
    // joint over (x, o, group, m_next)
    std::vector<double> joint(c.nx * c.no * static_cast<std::size_t>(n_groups) *
                                  static_cast<std::size_t>(bins),
                              0.0);
    for (int m = 0; m < prev.bins_in; ++m) {
      const double w = mu[j - 1][static_cast<std::size_t>(m)];
      if (w == 0.0) continue;
      const std::size_t g = static_cast<std::size_t>(prev.group[static_cast<std::size_t>(m)]);
      for (std::size_t x = 0; x < c.nx; ++x)
        for (std::size_t o = 0; o < c.no; ++o)
          for (int mn = 0; mn < bins; ++mn)
            joint[((x * c.no + o) * static_cast<std::size_t>(n_groups) + g) *
                      static_cast<std::size_t>(bins) +
                  static_cast<std::size_t>(mn)] += w * c.pi_x[x] * prev.trans_at(m, x, o, mn);
    }
    double d = 0.0;
    for (std::size_t cell = 0; cell < joint.size() / static_cast<std::size_t>(bins); ++cell) {
      double mass = 0.0;
      for (int mn = 0; mn < bins; ++mn)
        mass += joint[cell * static_cast<std::size_t>(bins) + static_cast<std::size_t>(mn)];
      if (mass == 0.0) continue;
      for (int mn = 0; mn < bins; ++mn) {
        const double p = joint[cell * static_cast<std::size_t>(bins) + static_cast<std::size_t>(mn)];
        if (p > 0.0) d += p * std::log((p / mass) * static_cast<double>(bins));
      }
    }
    rep.blocks[j + 1].m_uniformity = d;
  }

  // path recursion: beta(q, m) = P(o-past, M_k = m | x-past)
  std::size_t n_paths = 1;
  std::vector<double> beta, pi_past, t_past;
  // seed with block-1 paths (x1, o1)
  n_paths = c.nx * c.no;
  const std::size_t bins2 = static_cast<std::size_t>(c.blocks[0].bins_in);
  beta.assign(n_paths * bins2, 0.0);
  pi_past.assign(n_paths, 0.0);
  t_past.assign(n_paths, 1.0);
  for (std::size_t x = 0; x < c.nx; ++x)
    for (std::size_t o = 0; o < c.no; ++o) {
      const std::size_t q = x * c.no + o;
      pi_past[q] = c.pi_x[x];
      t_past[q] = c.target[x * c.no + o];
      for (std::size_t m = 0; m < bins2; ++m) beta[q * bins2 + m] = c.first_out[o] * c.rho2[m];
    }

  double total_tail = 0.0;  // sum over blocks 2..K contributions to the total
  bool total_inf = (d1 == kInf);
  for (std::size_t j = 0; j < c.blocks.size(); ++j) {
    const BlockDynamics& b = c.blocks[j];
    const std::size_t bins = static_cast<std::size_t>(b.bins_in);
    // mutual-information term at block k = j + 2
    double mi = 0.0;
    for (std::size_t q = 0; q < n_paths; ++q) {
      if (pi_past[q] == 0.0) continue;
      double mass_q = 0.0;  // P(o-past | x-past)
      for (std::size_t m = 0; m < bins; ++m) mass_q += beta[q * bins + m];
      if (mass_q == 0.0) continue;
      for (std::size_t x = 0; x < c.nx; ++x) {
        for (std::size_t o = 0; o < c.no; ++o) {
          double num = 0.0;
          for (std::size_t m = 0; m < bins; ++m)
            num += beta[q * bins + m] * b.chan_at(static_cast<int>(m), x, o);
          if (num == 0.0) continue;
          const double w = pi_past[q] * c.pi_x[x] * num;
          const double p_cond = num / mass_q;         // P(o | past, x)
          const double p_marg = pk[j][x * c.no + o];  // P(o | x)
          mi += w * std::log(p_cond / p_marg);
        }
      }
    }
    // Markov diagnostic: I(O_k ; past | M_k) from the assembled joint over
    // (past, m, o), evaluated through its own marginals
    double cmi = 0.0;
    {
      std::vector<double> joint(n_paths * bins * c.no, 0.0);
      for (std::size_t q = 0; q < n_paths; ++q) {
        if (pi_past[q] == 0.0) continue;
        for (std::size_t m = 0; m < bins; ++m) {
          const double bqm = pi_past[q] * beta[q * bins + m];
          if (bqm == 0.0) continue;
          for (std::size_t x = 0; x < c.nx; ++x) {
            const double px = c.pi_x[x];
            for (std::size_t o = 0; o < c.no; ++o)
              joint[(q * bins + m) * c.no + o] += bqm * px * b.chan_at(static_cast<int>(m), x, o);
          }
        }
      }
      std::vector<double> t_m(bins, 0.0), t_qm(n_paths * bins, 0.0), t_mo(bins * c.no, 0.0);
      for (std::size_t q = 0; q < n_paths; ++q)
        for (std::size_t m = 0; m < bins; ++m)
          for (std::size_t o = 0; o < c.no; ++o) {
            const double v = joint[(q * bins + m) * c.no + o];
            t_m[m] += v;
            t_qm[q * bins + m] += v;
            t_mo[m * c.no + o] += v;
          }
      for (std::size_t q = 0; q < n_paths; ++q)
        for (std::size_t m = 0; m < bins; ++m)
          for (std::size_t o = 0; o < c.no; ++o) {
            const double v = joint[(q * bins + m) * c.no + o];
            if (v > 0.0) cmi += v * std::log(v * t_m[m] / (t_qm[q * bins + m] * t_mo[m * c.no + o]));
          }
    }
    rep.blocks[j + 2 - 1].mi_term = mi;
    rep.blocks[j + 2 - 1].markov_cmi = cmi;

    if (j + 1 == c.blocks.size()) {
      // final block: close the total
      for (std::size_t q = 0; q < n_paths && !total_inf; ++q) {
        if (pi_past[q] == 0.0) continue;
        for (std::size_t x = 0; x < c.nx; ++x)
          for (std::size_t o = 0; o < c.no; ++o) {
            double p_full = 0.0;
            for (std::size_t m = 0; m < bins; ++m)
              p_full += beta[q * bins + m] * b.chan_at(static_cast<int>(m), x, o);
            if (p_full == 0.0) continue;
            const double tgt = t_past[q] * c.target[x * c.no + o];
            if (tgt == 0.0) {
              total_inf = true;
              break;
            }
            total_tail += pi_past[q] * c.pi_x[x] * p_full * std::log(p_full / tgt);
          }
      }
    } else {
      // expand paths through this block
      const std::size_t bins_next = static_cast<std::size_t>(b.bins_out);
      std::vector<double> nbeta(n_paths * c.nx * c.no * bins_next, 0.0);
      std::vector<double> npi(n_paths * c.nx * c.no, 0.0), nt(n_paths * c.nx * c.no, 1.0);
      for (std::size_t q = 0; q < n_paths; ++q)
        for (std::size_t x = 0; x < c.nx; ++x)
          for (std::size_t o = 0; o < c.no; ++o) {
            const std::size_t nq = (q * c.nx + x) * c.no + o;
            npi[nq] = pi_past[q] * c.pi_x[x];
            nt[nq] = t_past[q] * c.target[x * c.no + o];
            for (std::size_t m = 0; m < bins; ++m) {
              const double bqm = beta[q * bins + m];
              if (bqm == 0.0) continue;
              for (std::size_t mn = 0; mn < bins_next; ++mn)
                nbeta[nq * bins_next + mn] +=
                    bqm * b.trans_at(static_cast<int>(m), x, o, static_cast<int>(mn));
            }
          }
      beta = std::move(nbeta);
      pi_past = std::move(npi);
      t_past = std::move(nt);
      n_paths = n_paths * c.nx * c.no;
    }
  }

  // total = block-1 part + sum over later blocks, computed in closed form at
  // the final block; block-1 part enters through beta's first_out weighting,
  // so add the pure block-1 divergence explicitly
  // (the tail term above already accounts for P(o-past) including block 1 and
  // the target product including block 1, minus nothing: it IS the full
  // divergence of the whole K-block channel)
  rep.total = total_inf ? kInf : total_tail;
  double dec = 0.0;
  for (const auto& b : rep.blocks) {
    if (b.mi_term >= kInf || b.div_term >= kInf) {
      dec = kInf;
      break;
    }
    dec += b.mi_term + b.div_term;
  }
  rep.decomposition_sum = dec;
  return rep;
}

}  // namespace

// ---------------------------------------------------------------------------
// spec validation

void P2PSchemeSpec::validate() const {
  if (N < 1 || K < 1) throw ConfigError("P2PSchemeSpec: N, K must be >= 1");
  if (!(R > 0.0)) throw ConfigError("P2PSchemeSpec: R must be > 0");
  if (!(eps > 0.0)) throw ConfigError("P2PSchemeSpec: eps must be > 0");
  if (Q_BgXU.inputs().size() != 2 || Q_BgXU.inputs()[0].size != pi_X.size() ||
      Q_BgXU.inputs()[1].size != Q_U.size())
    throw ConfigError("P2PSchemeSpec: Q_BgXU must take inputs (X, U)");
  if (Q_YgBU.inputs().size() != 2 || Q_YgBU.inputs()[0].size != Q_BgXU.output().size ||
      Q_YgBU.inputs()[1].size != Q_U.size())
    throw ConfigError("P2PSchemeSpec: Q_YgBU must take inputs (B, U)");
  if (pi_YgX.inputs().size() != 1 || pi_YgX.inputs()[0].size != pi_X.size())
    throw ConfigError("P2PSchemeSpec: pi_YgX must take input X");
  if (pi_YgX.output().size != Q_YgBU.output().size)
    throw ConfigError("P2PSchemeSpec: scheme and target output alphabets differ");
  if (QhatY && QhatY->size() != ny()) throw ConfigError("P2PSchemeSpec: QhatY alphabet mismatch");
}

int P2PSchemeSpec::bins() const { return bin_count(N, R); }

void BroadcastSchemeSpec::validate() const {
  if (N < 1 || K < 1) throw ConfigError("BroadcastSchemeSpec: N, K must be >= 1");
  if (!(R > 0.0) || !(Rhat > 0.0)) throw ConfigError("BroadcastSchemeSpec: rates must be > 0");
  const int nx = pi_X.size(), nu = Q_U.size(), nuh = Q_UhgU.output().size;
  const int nb = Q_BgXUUh.output().size;
  if (Q_UhgU.inputs().size() != 1 || Q_UhgU.inputs()[0].size != nu)
    throw ConfigError("BroadcastSchemeSpec: Q_UhgU must take input U");
  if (Q_BgXUUh.inputs().size() != 3 || Q_BgXUUh.inputs()[0].size != nx ||
      Q_BgXUUh.inputs()[1].size != nu || Q_BgXUUh.inputs()[2].size != nuh)
    throw ConfigError("BroadcastSchemeSpec: Q_BgXUUh must take inputs (X, U, Uh)");
  if (Q_YgBUUh.inputs().size() != 3 || Q_YgBUUh.inputs()[0].size != nb ||
      Q_YgBUUh.inputs()[1].size != nu || Q_YgBUUh.inputs()[2].size != nuh)
    throw ConfigError("BroadcastSchemeSpec: Q_YgBUUh must take inputs (B, U, Uh)");
  if (Q_ZgBU.inputs().size() != 2 || Q_ZgBU.inputs()[0].size != nb ||
      Q_ZgBU.inputs()[1].size != nu)
    throw ConfigError("BroadcastSchemeSpec: Q_ZgBU must take inputs (B, U)");
  if (Q_YgBUUh.output().size != Y_size || Q_ZgBU.output().size != Z_size)
    throw ConfigError("BroadcastSchemeSpec: receiver output alphabets disagree with Y/Z sizes");
  if (pi_YZgX.inputs().size() != 1 || pi_YZgX.inputs()[0].size != nx ||
      pi_YZgX.output().size != Y_size * Z_size)
    throw ConfigError("BroadcastSchemeSpec: pi_YZgX must map X to the (Y,Z) pair alphabet");
}

int BroadcastSchemeSpec::bins() const { return bin_count(N, R); }
int BroadcastSchemeSpec::bins_hat() const { return bin_count(N, Rhat); }

void InteractiveSchemeSpec::validate() const {
  if (N < 1 || K < 1) throw ConfigError("InteractiveSchemeSpec: N, K must be >= 1");
  if (!(R > 0.0)) throw ConfigError("InteractiveSchemeSpec: R must be > 0");
  if (pi_SX.components().size() != 2)
    throw ConfigError("InteractiveSchemeSpec: pi_SX must have components (S, X)");
  const int ns = pi_SX.components()[0].size, nx = pi_SX.components()[1].size;
  const int nu = Q_U.size();
  const int na = Q_AgSU.output().size, nb = Q_BgXU.output().size;
  if (Q_AgSU.inputs().size() != 2 || Q_AgSU.inputs()[0].size != ns || Q_AgSU.inputs()[1].size != nu)
    throw ConfigError("InteractiveSchemeSpec: Q_AgSU must take inputs (S, U)");
  if (Q_BgXU.inputs().size() != 2 || Q_BgXU.inputs()[0].size != nx || Q_BgXU.inputs()[1].size != nu)
    throw ConfigError("InteractiveSchemeSpec: Q_BgXU must take inputs (X, U)");
  if (Q_YgABU.inputs().size() != 3 || Q_YgABU.inputs()[0].size != na ||
      Q_YgABU.inputs()[1].size != nb || Q_YgABU.inputs()[2].size != nu)
    throw ConfigError("InteractiveSchemeSpec: Q_YgABU must take inputs (A, B, U)");
  if (Q_ZgABU.inputs().size() != 3 || Q_ZgABU.inputs()[0].size != na ||
      Q_ZgABU.inputs()[1].size != nb || Q_ZgABU.inputs()[2].size != nu)
    throw ConfigError("InteractiveSchemeSpec: Q_ZgABU must take inputs (A, B, U)");
  if (Q_YgABU.output().size != Y_size || Q_ZgABU.output().size != Z_size)
    throw ConfigError("InteractiveSchemeSpec: output alphabets disagree with Y/Z sizes");
  if (pi_YZgSX.inputs().size() != 2 || pi_YZgSX.inputs()[0].size != ns ||
      pi_YZgSX.inputs()[1].size != nx || pi_YZgSX.output().size != Y_size * Z_size)
    throw ConfigError("InteractiveSchemeSpec: pi_YZgSX must map (S,X) to the (Y,Z) pair alphabet");
}

int InteractiveSchemeSpec::bins() const { return bin_count(N, R); }

// ---------------------------------------------------------------------------
// rate windows

RateWindow rate_window(const Dist& q_u, const Kernel& q_bgxu, const Kernel& q_ygbu,
                       const Dist& pi_x, const Dist& p_w, double s, double eps) {
  if (!(s > 0.0)) throw std::invalid_argument("rate_window: s must be > 0 for the relaxed window");
  const int nu = q_u.size(), nx = pi_x.size();
  const int nb = q_bgxu.output().size, ny = q_ygbu.output().size;

  // joint over (u, x, b, y)
  std::vector<prob::Alphabet> comps{q_u.alphabet(), pi_x.alphabet(), q_bgxu.output(),
                                    q_ygbu.output()};
  std::vector<double> w(static_cast<std::size_t>(nu) * nx * nb * ny, 0.0);
  std::size_t cell = 0;
  for (int u = 0; u < nu; ++u)
    for (int x = 0; x < nx; ++x)
      for (int b = 0; b < nb; ++b)
        for (int y = 0; y < ny; ++y, ++cell)
          w[cell] = q_u(u) * pi_x(x) *
                    q_bgxu.at({x, u}, b) * q_ygbu.at({b, u}, y);
  const JointDist j = JointDist::from_weights(comps, std::move(w));

  RateWindow rw;
  rw.shannon_lo = info::mutual_info(j, {0}, {1, 3});
  rw.shannon_hi = info::entropy(p_w) + info::cond_entropy(j, {1, 3, 0});

  // D_{1+s}(Q_{XY|U} || Q_{XY} | Q_U)
  const JointDist j_xy = prob::marginal(j, {1, 3});
  double acc = 0.0;
  for (int u = 0; u < nu; ++u) {
    if (q_u(u) == 0.0) continue;
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) {
        double pxy_u = 0.0;
        for (int b = 0; b < nb; ++b) pxy_u += pi_x(x) * q_bgxu.at({x, u}, b) * q_ygbu.at({b, u}, y);
        if (pxy_u == 0.0) continue;
        const double qxy = j_xy.at({x, y}) ;
        acc += q_u(u) * std::pow(pxy_u, 1.0 + s) * std::pow(qxy, -s);
      }
  }
  rw.relaxed_lo = (1.0 + eps) * std::log(acc) / s;

  // sum_u Q_U(u) H_{1+s}(B | XY, U=u)
  double hsum = 0.0;
  for (int u = 0; u < nu; ++u) {
    if (q_u(u) == 0.0) continue;
    double inner = 0.0;
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) {
        double pxy_u = 0.0, powsum = 0.0;
        for (int b = 0; b < nb; ++b) {
          const double pb = q_bgxu.at({x, u}, b) * q_ygbu.at({b, u}, y);
          pxy_u += pi_x(x) * pb;
        }
        if (pxy_u == 0.0) continue;
        for (int b = 0; b < nb; ++b) {
          const double pb_g = pi_x(x) * q_bgxu.at({x, u}, b) * q_ygbu.at({b, u}, y) / pxy_u;
          if (pb_g > 0.0) powsum += std::pow(pb_g, 1.0 + s);
        }
        inner += pxy_u * powsum;
      }
    hsum += q_u(u) * (-std::log(inner) / s);
  }
  rw.relaxed_hi = (1.0 - eps) * hsum + info::renyi_entropy(p_w, s);
  return rw;
}

RateWindow rate_window(const P2PSchemeSpec& spec, double s, double eps) {
  return rate_window(spec.Q_U, spec.Q_BgXU, spec.Q_YgBU, spec.pi_X, spec.P_W, s, eps);
}

// ---------------------------------------------------------------------------
// codebook sampling

namespace {

BinningCodebook sample_binning(int bins, std::size_t n_first, std::size_t n_second,
                               std::uint64_t seed) {
  if (n_first * n_second > tol::kCapacityGuard)
    throw CapacityError("sample_codebooks: binning table exceeds capacity guard");
  BinningCodebook cb;
  cb.bins = bins;
  cb.n_first = n_first;
  cb.n_second = n_second;
  cb.table.resize(n_first * n_second);
  Rng rng(seed);
  for (auto& e : cb.table) e = static_cast<std::int32_t>(rng.next_below(static_cast<std::uint64_t>(bins)));
  return cb;
}

ResolvCodebook sample_resolv(const Dist& q_u, int n, double eps, int bins, std::uint64_t seed,
                             bool* fallback) {
  ResolvCodebook cb;
  cb.bins = bins;
  cb.codeword_space = ipow(static_cast<std::size_t>(q_u.size()), n);
  const Dist law = prob::truncated_typical_or_closest(q_u, n, eps, fallback);
  Rng rng(seed);
  cb.words.resize(static_cast<std::size_t>(bins));
  for (auto& w : cb.words) w = static_cast<std::int32_t>(rng.next_categorical(law.pmf()));
  return cb;
}

}  // namespace

P2PCodebooks sample_codebooks(const P2PSchemeSpec& spec, std::uint64_t seed) {
  spec.validate();
  P2PCodebooks cb;
  const int bins = spec.bins();
  const std::size_t nbN = ipow(static_cast<std::size_t>(spec.nb()), spec.N);
  const std::size_t nwN = ipow(static_cast<std::size_t>(spec.nw()), spec.N);
  for (int k = 2; k <= spec.K; ++k) {
    bool fb = false;
    cb.binning.push_back(
        sample_binning(bins, nbN, nwN, Rng::derive(seed, 2 * static_cast<std::uint64_t>(k))));
    cb.resolv.push_back(sample_resolv(spec.Q_U, spec.N, spec.eps, bins,
                                      Rng::derive(seed, 2 * static_cast<std::uint64_t>(k) + 1),
                                      &fb));
    cb.typical_fallback = cb.typical_fallback || fb;
  }
  return cb;
}

// ---------------------------------------------------------------------------
// point-to-point exact evaluation

namespace {

// w-marginalized transition weights: wnext[b-seq][m'] = sum_w P_W^N(w) 1{bin(b,w)=m'}
std::vector<double> binning_w_weights(const BinningCodebook& cb, const std::vector<double>& pw_seq) {
  std::vector<double> wnext(cb.n_first * static_cast<std::size_t>(cb.bins), 0.0);
  for (std::size_t b = 0; b < cb.n_first; ++b)
    for (std::size_t w = 0; w < cb.n_second; ++w)
      wnext[b * static_cast<std::size_t>(cb.bins) + static_cast<std::size_t>(cb.at(b, w))] +=
          pw_seq[w];
  return wnext;
}

ChainSpec build_p2p_chain(const P2PSchemeSpec& spec, const P2PCodebooks& cb) {
  spec.validate();
  if (static_cast<int>(cb.binning.size()) != std::max(0, spec.K - 1) ||
      cb.resolv.size() != cb.binning.size())
    throw ConfigError("exact_induced_divergence: codebooks do not match K");

  const int N = spec.N, bins = spec.bins();
  const std::size_t nxN = ipow(static_cast<std::size_t>(spec.nx()), N);
  const std::size_t nyN = ipow(static_cast<std::size_t>(spec.ny()), N);
  const std::size_t nbN = ipow(static_cast<std::size_t>(spec.nb()), N);

  ChainSpec c;
  c.N = N;
  c.K = spec.K;
  c.R = spec.R;
  c.seed = spec.seed;
  c.nx = nxN;
  c.no = nyN;
  c.typical_fallback = cb.typical_fallback;
  c.pi_x = seq_law(spec.pi_X, N);

  const Dist qhat = spec.QhatY ? *spec.QhatY
                               : bounds::min_output_divergence(spec.pi_X, spec.pi_YgX).q;
  c.first_out = seq_law(qhat, N);

  c.target.assign(nxN * nyN, 0.0);
  for (std::size_t x = 0; x < nxN; ++x) {
    const auto xs = prob::seq_symbols(spec.nx(), N, x);
    for (std::size_t y = 0; y < nyN; ++y) {
      const auto ys = prob::seq_symbols(spec.ny(), N, y);
      double t = 1.0;
      for (int i = 0; i < N; ++i) t *= spec.pi_YgX.at(static_cast<std::size_t>(xs[static_cast<std::size_t>(i)]),
                                                      ys[static_cast<std::size_t>(i)]);
      c.target[x * nyN + y] = t;
    }
  }

  if (spec.K == 1) return c;

  const std::vector<double> pw_seq = seq_law(spec.P_W, N);
  // per-symbol emission p(b, y | x; u)
  const int nx1 = spec.nx(), ny1 = spec.ny(), nb1 = spec.nb(), nu1 = spec.nu();
  auto pby = [&](int b, int y, int x, int u) {
    return spec.Q_BgXU.at({x, u}, b) * spec.Q_YgBU.at({b, u}, y);
  };

  // rho2: block-1 B is uniform and independent of everything
  {
    const BinningCodebook& first = cb.binning[0];
    c.rho2.assign(static_cast<std::size_t>(bins), 0.0);
    const std::vector<double> wnext = binning_w_weights(first, pw_seq);
    for (std::size_t b = 0; b < nbN; ++b)
      for (int m = 0; m < bins; ++m)
        c.rho2[static_cast<std::size_t>(m)] +=
            (1.0 / static_cast<double>(nbN)) * wnext[b * static_cast<std::size_t>(bins) + static_cast<std::size_t>(m)];
  }

  for (int k = 2; k <= spec.K; ++k) {
    const std::size_t j = static_cast<std::size_t>(k - 2);
    const ResolvCodebook& rc = cb.resolv[j];
    BlockDynamics bd;
    bd.bins_in = bins;
    bd.nx = nxN;
    bd.no = nyN;
    bd.group.assign(rc.words.begin(), rc.words.end());
    bd.chan.assign(static_cast<std::size_t>(bins) * nxN * nyN, 0.0);
    const bool last = (k == spec.K);
    std::vector<double> wnext;
    if (!last) {
      bd.bins_out = bins;
      wnext = binning_w_weights(cb.binning[j + 1], pw_seq);
      bd.trans.assign(static_cast<std::size_t>(bins) * nxN * nyN * static_cast<std::size_t>(bins), 0.0);
    }
    for (int m = 0; m < bins; ++m) {
      const auto us = prob::seq_symbols(nu1, N, static_cast<std::size_t>(rc.words[static_cast<std::size_t>(m)]));
      for (std::size_t x = 0; x < nxN; ++x) {
        const auto xs = prob::seq_symbols(nx1, N, x);
        for (std::size_t y = 0; y < nyN; ++y) {
          const auto ys = prob::seq_symbols(ny1, N, y);
          // chan: per-symbol product, b summed per symbol
          double pc = 1.0;
          for (int i = 0; i < N && pc > 0.0; ++i) {
            double s1 = 0.0;
            for (int b = 0; b < nb1; ++b)
              s1 += pby(b, ys[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(i)], us[static_cast<std::size_t>(i)]);
            pc *= s1;
          }
          bd.chan[(static_cast<std::size_t>(m) * nxN + x) * nyN + y] = pc;
          if (last || pc == 0.0) continue;
          // trans: resolve the whole b-sequence to track the next bin
          for (std::size_t bseq = 0; bseq < nbN; ++bseq) {
            const auto bs = prob::seq_symbols(nb1, N, bseq);
            double pb = 1.0;
            for (int i = 0; i < N && pb > 0.0; ++i)
              pb *= pby(bs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(i)],
                        xs[static_cast<std::size_t>(i)], us[static_cast<std::size_t>(i)]);
            if (pb == 0.0) continue;
            for (int mn = 0; mn < bins; ++mn) {
              const double ww = wnext[bseq * static_cast<std::size_t>(bins) + static_cast<std::size_t>(mn)];
              if (ww > 0.0)
                bd.trans[((static_cast<std::size_t>(m) * nxN + x) * nyN + y) * static_cast<std::size_t>(bins) +
                         static_cast<std::size_t>(mn)] += pb * ww;
            }
          }
        }
      }
    }
    c.blocks.push_back(std::move(bd));
  }
  return c;
}

}  // namespace

SimReport exact_induced_divergence(const P2PSchemeSpec& spec, const P2PCodebooks& cb) {
  return run_exact_chain(build_p2p_chain(spec, cb));
}

std::vector<double> m_uniformity_diagnostic(const P2PSchemeSpec& spec, const P2PCodebooks& cb) {
  const SimReport rep = exact_induced_divergence(spec, cb);
  std::vector<double> out;
  for (int k = 2; k <= spec.K; ++k) out.push_back(rep.blocks[static_cast<std::size_t>(k - 1)].m_uniformity);
  return out;
}

McDivergence expected_divergence_over_codebooks(const P2PSchemeSpec& spec, int n_codebooks) {
  if (n_codebooks < 1) throw std::invalid_argument("expected_divergence_over_codebooks: n >= 1");
  McDivergence mc;
  mc.n = n_codebooks;
  mc.mean_m_uniformity.assign(static_cast<std::size_t>(std::max(0, spec.K - 1)), 0.0);
  double sum = 0.0, sumsq = 0.0, best = kInf;
  for (int i = 0; i < n_codebooks; ++i) {
    const P2PCodebooks cb = sample_codebooks(spec, Rng::derive(spec.seed, 0x517EC0DE + static_cast<std::uint64_t>(i)));
    const SimReport rep = exact_induced_divergence(spec, cb);
    sum += rep.total;
    sumsq += rep.total * rep.total;
    best = std::min(best, rep.total);
    for (int k = 2; k <= spec.K; ++k)
      mc.mean_m_uniformity[static_cast<std::size_t>(k - 2)] +=
          rep.blocks[static_cast<std::size_t>(k - 1)].m_uniformity / n_codebooks;
  }
  mc.mean = sum / n_codebooks;
  mc.min_total = best;
  if (n_codebooks > 1) {
    const double var = std::max(0.0, (sumsq - sum * sum / n_codebooks) / (n_codebooks - 1));
    mc.stderr_mean = std::sqrt(var / n_codebooks);
  }
  return mc;
}

double run_symbolwise(const Kernel& p_bgx, const Kernel& p_ygb, const Dist& pi_x,
                      const Kernel& pi_ygx, int n) {
  if (n < 1) throw std::invalid_argument("run_symbolwise: n must be >= 1");
  const int nx = pi_x.size(), nb = p_bgx.output().size, ny = p_ygb.output().size;
  if (pi_ygx.output().size != ny) throw std::invalid_argument("run_symbolwise: output mismatch");
  std::vector<double> rows(static_cast<std::size_t>(nx) * ny, 0.0);
  for (int x = 0; x < nx; ++x)
    for (int b = 0; b < nb; ++b)
      for (int y = 0; y < ny; ++y)
        rows[static_cast<std::size_t>(x) * ny + static_cast<std::size_t>(y)] +=
            p_bgx.at(static_cast<std::size_t>(x), b) * p_ygb.at(static_cast<std::size_t>(b), y);
  const Kernel p_ygx({pi_x.alphabet()}, pi_ygx.output(), std::move(rows));
  return n * info::cond_kl_div(p_ygx, pi_ygx, pi_x);
}

// ---------------------------------------------------------------------------
// broadcast

namespace {

// conditional codeword law: Q_UhgU^N(.|useq) truncated to fine sequences whose
// pair type with useq is eps-close to Q_U x Q_UhgU (closest pair types when
// the jointly typical set is empty)
std::vector<double> cond_truncated_typical(const Dist& q_u, const Kernel& q_uhgu,
                                           const std::vector<int>& useq, int n, double eps,
                                           bool* fallback) {
  const int nu = q_u.size(), nuh = q_uhgu.output().size;
  const std::size_t total = ipow(static_cast<std::size_t>(nuh), n);
  if (total > tol::kCapacityGuard)
    throw CapacityError("cond_truncated_typical: |Uh|^N exceeds capacity guard");

  auto pair_deviation = [&](const std::vector<int>& uhs) {
    std::vector<int> counts(static_cast<std::size_t>(nu * nuh), 0);
    for (int i = 0; i < n; ++i)
      counts[static_cast<std::size_t>(useq[static_cast<std::size_t>(i)] * nuh +
                                      uhs[static_cast<std::size_t>(i)])]++;
    double worst = 0.0;
    for (int u = 0; u < nu; ++u)
      for (int uh = 0; uh < nuh; ++uh) {
        const double q = q_u(u) * q_uhgu.at(static_cast<std::size_t>(u), uh);
        const double type = static_cast<double>(counts[static_cast<std::size_t>(u * nuh + uh)]) / n;
        if (q == 0.0) {
          if (type > 0.0) return kInf;
          continue;
        }
        worst = std::max(worst, std::abs(type - q) / q);
      }
    return worst;
  };

  std::vector<double> weight(total, 0.0), dev(total, kInf);
  double best_dev = kInf;
  for (std::size_t f = 0; f < total; ++f) {
    const auto uhs = prob::seq_symbols(nuh, n, f);
    double w = 1.0;
    for (int i = 0; i < n; ++i)
      w *= q_uhgu.at(static_cast<std::size_t>(useq[static_cast<std::size_t>(i)]),
                     uhs[static_cast<std::size_t>(i)]);
    if (w == 0.0) continue;
    weight[f] = w;
    dev[f] = pair_deviation(uhs);
    best_dev = std::min(best_dev, dev[f]);
  }
  bool fb = false;
  double cutoff = eps;
  if (!(best_dev <= eps)) {
    fb = true;
    cutoff = best_dev + 1e-12;
  }
  if (fallback) *fallback = *fallback || fb;
  std::vector<double> law(total, 0.0);
  double mass = 0.0;
  for (std::size_t f = 0; f < total; ++f)
    if (dev[f] <= cutoff) {
      law[f] = weight[f];
      mass += weight[f];
    }
  if (mass <= 0.0) throw ConfigError("cond_truncated_typical: empty conditional codeword set");
  for (auto& v : law) v /= mass;
  return law;
}

}  // namespace

BroadcastCodebooks build_broadcast_scheme(const BroadcastSchemeSpec& spec, std::uint64_t seed) {
  spec.validate();
  BroadcastCodebooks cb;
  const int bins = spec.bins(), bins_hat = spec.bins_hat();
  const int N = spec.N;
  const std::size_t nbN = ipow(static_cast<std::size_t>(spec.Q_BgXUUh.output().size), N);
  const std::size_t nwN = ipow(static_cast<std::size_t>(spec.P_W.size()), N);
  const std::size_t nwhatN = ipow(static_cast<std::size_t>(spec.P_What.size()), N);
  const std::size_t nuhN = ipow(static_cast<std::size_t>(spec.Q_UhgU.output().size), N);

  for (int k = 2; k <= spec.K; ++k) {
    const std::uint64_t base = 4 * static_cast<std::uint64_t>(k);
    cb.binning.push_back(sample_binning(bins, nbN, nwN, Rng::derive(seed, base)));
    cb.hat_binning.push_back(sample_binning(bins_hat, nwhatN, 1, Rng::derive(seed, base + 1)));

    SuperpositionCodebook sc;
    sc.bins = bins;
    sc.bins_hat = bins_hat;
    sc.coarse_space = ipow(static_cast<std::size_t>(spec.Q_U.size()), N);
    sc.fine_space = nuhN;
    bool fb = false;
    const Dist coarse_law = prob::truncated_typical_or_closest(spec.Q_U, N, spec.eps, &fb);
    cb.typical_fallback = cb.typical_fallback || fb;
    Rng rng(Rng::derive(seed, base + 2));
    sc.u_words.resize(static_cast<std::size_t>(bins));
    sc.uh_words.resize(static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins_hat));
    for (int m = 0; m < bins; ++m) {
      sc.u_words[static_cast<std::size_t>(m)] =
          static_cast<std::int32_t>(rng.next_categorical(coarse_law.pmf()));
      const auto useq = prob::seq_symbols(spec.Q_U.size(), N,
                                          static_cast<std::size_t>(sc.u_words[static_cast<std::size_t>(m)]));
      bool fb2 = false;
      const auto fine_law = cond_truncated_typical(spec.Q_U, spec.Q_UhgU, useq, N, spec.eps, &fb2);
      cb.typical_fallback = cb.typical_fallback || fb2;
      for (int mh = 0; mh < bins_hat; ++mh)
        sc.uh_words[static_cast<std::size_t>(m) * static_cast<std::size_t>(bins_hat) +
                    static_cast<std::size_t>(mh)] =
            static_cast<std::int32_t>(rng.next_categorical(fine_law));
    }
    cb.superpos.push_back(std::move(sc));
  }
  return cb;
}

namespace {

ChainSpec build_broadcast_chain(const BroadcastSchemeSpec& spec, const BroadcastCodebooks& cb) {
  spec.validate();
  if (static_cast<int>(cb.binning.size()) != std::max(0, spec.K - 1) ||
      cb.superpos.size() != cb.binning.size() || cb.hat_binning.size() != cb.binning.size())
    throw ConfigError("exact_broadcast_divergence: codebooks do not match K");

  const int N = spec.N, bins = spec.bins(), bins_hat = spec.bins_hat();
  const int nx1 = spec.pi_X.size(), ny1 = spec.Y_size, nz1 = spec.Z_size;
  const int nb1 = spec.Q_BgXUUh.output().size;
  const int nu1 = spec.Q_U.size(), nuh1 = spec.Q_UhgU.output().size;
  const std::size_t nxN = ipow(static_cast<std::size_t>(nx1), N);
  const std::size_t noN = ipow(static_cast<std::size_t>(ny1 * nz1), N);
  const std::size_t nbN = ipow(static_cast<std::size_t>(nb1), N);

  ChainSpec c;
  c.N = N;
  c.K = spec.K;
  c.R = spec.R;
  c.seed = spec.seed;
  c.nx = nxN;
  c.no = noN;
  c.typical_fallback = cb.typical_fallback;
  c.pi_x = seq_law(spec.pi_X, N);

  Dist qy = spec.QhatY ? *spec.QhatY
                       : bounds::min_product_output_divergence(spec.pi_X, spec.pi_YZgX, ny1, nz1)
                             .q_first;
  Dist qz = spec.QhatZ ? *spec.QhatZ
                       : bounds::min_product_output_divergence(spec.pi_X, spec.pi_YZgX, ny1, nz1)
                             .q_second;
  std::vector<double> firstsym(static_cast<std::size_t>(ny1 * nz1));
  for (int y = 0; y < ny1; ++y)
    for (int z = 0; z < nz1; ++z) firstsym[static_cast<std::size_t>(y * nz1 + z)] = qy(y) * qz(z);
  c.first_out = seq_law(Dist(Alphabet(ny1 * nz1, "YZ"), firstsym), N);

  c.target.assign(nxN * noN, 0.0);
  for (std::size_t x = 0; x < nxN; ++x) {
    const auto xs = prob::seq_symbols(nx1, N, x);
    for (std::size_t o = 0; o < noN; ++o) {
      const auto os = prob::seq_symbols(ny1 * nz1, N, o);
      double t = 1.0;
      for (int i = 0; i < N; ++i)
        t *= spec.pi_YZgX.at(static_cast<std::size_t>(xs[static_cast<std::size_t>(i)]),
                             os[static_cast<std::size_t>(i)]);
      c.target[x * noN + o] = t;
    }
  }
  if (spec.K == 1) return c;

  const std::vector<double> pw_seq = seq_law(spec.P_W, N);
  const std::vector<double> pwhat_seq = seq_law(spec.P_What, N);

  {
    const std::vector<double> wnext = binning_w_weights(cb.binning[0], pw_seq);
    c.rho2.assign(static_cast<std::size_t>(bins), 0.0);
    for (std::size_t b = 0; b < nbN; ++b)
      for (int m = 0; m < bins; ++m)
        c.rho2[static_cast<std::size_t>(m)] += (1.0 / static_cast<double>(nbN)) *
                                               wnext[b * static_cast<std::size_t>(bins) +
                                                     static_cast<std::size_t>(m)];
  }

  auto pbyz = [&](int b, int y, int z, int x, int u, int uh) {
    return spec.Q_BgXUUh.at({x, u, uh}, b) * spec.Q_YgBUUh.at({b, u, uh}, y) *
           spec.Q_ZgBU.at({b, u}, z);
  };

  for (int k = 2; k <= spec.K; ++k) {
    const std::size_t j = static_cast<std::size_t>(k - 2);
    const SuperpositionCodebook& sc = cb.superpos[j];
    // law of Mhat_k (fresh What block through the hat binning)
    std::vector<double> rho_hat(static_cast<std::size_t>(bins_hat), 0.0);
    for (std::size_t wh = 0; wh < pwhat_seq.size(); ++wh)
      rho_hat[static_cast<std::size_t>(cb.hat_binning[j].at(wh, 0))] += pwhat_seq[wh];

    BlockDynamics bd;
    bd.bins_in = bins;
    bd.nx = nxN;
    bd.no = noN;
    bd.group.assign(sc.u_words.begin(), sc.u_words.end());
    bd.chan.assign(static_cast<std::size_t>(bins) * nxN * noN, 0.0);
    const bool last = (k == spec.K);
    std::vector<double> wnext;
    if (!last) {
      bd.bins_out = bins;
      wnext = binning_w_weights(cb.binning[j + 1], pw_seq);
      bd.trans.assign(static_cast<std::size_t>(bins) * nxN * noN * static_cast<std::size_t>(bins), 0.0);
    }
    for (int m = 0; m < bins; ++m) {
      const auto us = prob::seq_symbols(nu1, N, static_cast<std::size_t>(sc.u_words[static_cast<std::size_t>(m)]));
      for (int mh = 0; mh < bins_hat; ++mh) {
        const double wmh = rho_hat[static_cast<std::size_t>(mh)];
        if (wmh == 0.0) continue;
        const auto uhs = prob::seq_symbols(nuh1, N, static_cast<std::size_t>(sc.uh_at(m, mh)));
        for (std::size_t x = 0; x < nxN; ++x) {
          const auto xs = prob::seq_symbols(nx1, N, x);
          for (std::size_t o = 0; o < noN; ++o) {
            const auto os = prob::seq_symbols(ny1 * nz1, N, o);
            double pc = 1.0;
            for (int i = 0; i < N && pc > 0.0; ++i) {
              const int y = os[static_cast<std::size_t>(i)] / nz1, z = os[static_cast<std::size_t>(i)] % nz1;
              double s1 = 0.0;
              for (int b = 0; b < nb1; ++b)
                s1 += pbyz(b, y, z, xs[static_cast<std::size_t>(i)], us[static_cast<std::size_t>(i)],
                           uhs[static_cast<std::size_t>(i)]);
              pc *= s1;
            }
            if (pc > 0.0)
              bd.chan[(static_cast<std::size_t>(m) * nxN + x) * noN + o] += wmh * pc;
            if (last) continue;
            for (std::size_t bseq = 0; bseq < nbN; ++bseq) {
              const auto bs = prob::seq_symbols(nb1, N, bseq);
              double pb = 1.0;
              for (int i = 0; i < N && pb > 0.0; ++i) {
                const int y = os[static_cast<std::size_t>(i)] / nz1, z = os[static_cast<std::size_t>(i)] % nz1;
                pb *= pbyz(bs[static_cast<std::size_t>(i)], y, z, xs[static_cast<std::size_t>(i)],
                           us[static_cast<std::size_t>(i)], uhs[static_cast<std::size_t>(i)]);
              }
              if (pb == 0.0) continue;
              for (int mn = 0; mn < bins; ++mn) {
                const double ww = wnext[bseq * static_cast<std::size_t>(bins) + static_cast<std::size_t>(mn)];
                if (ww > 0.0)
                  bd.trans[((static_cast<std::size_t>(m) * nxN + x) * noN + o) * static_cast<std::size_t>(bins) +
                           static_cast<std::size_t>(mn)] += wmh * pb * ww;
              }
            }
          }
        }
      }
    }
    c.blocks.push_back(std::move(bd));
  }
  return c;
}

}  // namespace

SimReport exact_broadcast_divergence(const BroadcastSchemeSpec& spec, const BroadcastCodebooks& cb) {
  return run_exact_chain(build_broadcast_chain(spec, cb));
}

// ---------------------------------------------------------------------------
// interactive

InteractiveReduction reduce_interactive_to_p2p(const InteractiveSchemeSpec& spec) {
  spec.validate();
  const int ns = spec.pi_SX.components()[0].size, nx = spec.pi_SX.components()[1].size;
  const int na = spec.Q_AgSU.output().size, nb = spec.Q_BgXU.output().size;
  const int ny = spec.Y_size, nz = spec.Z_size, nu = spec.Q_U.size();

  InteractiveReduction red;
  // block-1 constant pair: the admissible output minimizing the constant-law
  // divergence
  {
    const Dist pisx = spec.pi_SX.flatten("SX");
    const auto adm = bounds::admissible_outputs(pisx, spec.pi_YZgSX);
    if (adm.empty())
      throw ConfigError("reduce_interactive_to_p2p: no (y,z) with a positive column");
    double best = kInf;
    int best_p = adm[0];
    for (int p : adm) {
      double d = 0.0;
      for (int sx = 0; sx < pisx.size(); ++sx)
        if (pisx(sx) > 0.0) d -= pisx(sx) * std::log(spec.pi_YZgSX.at(static_cast<std::size_t>(sx), p));
      if (d < best) {
        best = d;
        best_p = p;
      }
    }
    red.y_const = best_p / nz;
    red.z_const = best_p % nz;
  }

  P2PSchemeSpec c;
  c.N = spec.N;
  c.K = spec.K;
  c.R = spec.R;
  c.eps = spec.eps;
  c.seed = spec.seed;
  c.Q_U = spec.Q_U;
  c.P_W = spec.P_W;
  c.pi_X = spec.pi_SX.flatten("SX");

  const Alphabet ab_alph(na * nb, "AB");
  const Alphabet yz_alph(ny * nz, "YZ");
  // composite sender: (a,b) drawn componentwise from the two one-way maps
  {
    std::vector<double> rows(static_cast<std::size_t>(ns * nx) * static_cast<std::size_t>(nu) *
                                 static_cast<std::size_t>(na * nb),
                             0.0);
    std::size_t r = 0;
    for (int s = 0; s < ns; ++s)
      for (int x = 0; x < nx; ++x)
        for (int u = 0; u < nu; ++u, ++r)
          for (int a = 0; a < na; ++a)
            for (int b = 0; b < nb; ++b)
              rows[r * static_cast<std::size_t>(na * nb) + static_cast<std::size_t>(a * nb + b)] =
                  spec.Q_AgSU.at({s, u}, a) * spec.Q_BgXU.at({x, u}, b);
    c.Q_BgXU = Kernel({Alphabet(ns * nx, "SX"), spec.Q_U.alphabet()}, ab_alph, std::move(rows));
  }
  // composite receiver: (y,z) drawn componentwise given (a,b,u)
  {
    std::vector<double> rows(static_cast<std::size_t>(na * nb) * static_cast<std::size_t>(nu) *
                                 static_cast<std::size_t>(ny * nz),
                             0.0);
    std::size_t r = 0;
    for (int a = 0; a < na; ++a)
      for (int b = 0; b < nb; ++b)
        for (int u = 0; u < nu; ++u, ++r)
          for (int y = 0; y < ny; ++y)
            for (int z = 0; z < nz; ++z)
              rows[r * static_cast<std::size_t>(ny * nz) + static_cast<std::size_t>(y * nz + z)] =
                  spec.Q_YgABU.at({a, b, u}, y) * spec.Q_ZgABU.at({a, b, u}, z);
    c.Q_YgBU = Kernel({ab_alph, spec.Q_U.alphabet()}, yz_alph, std::move(rows));
  }
  c.pi_YgX = Kernel({Alphabet(ns * nx, "SX")}, yz_alph, spec.pi_YZgSX.table());
  c.QhatY = Dist::point_mass(yz_alph, red.y_const * nz + red.z_const);
  red.composite = std::move(c);
  red.codebooks = sample_codebooks(red.composite, spec.seed);
  return red;
}

namespace {

// P(o-path | x-path) for every path, path index interleaving (x_1, o_1, x_2,
// o_2, ...); shared by the reduction equality check
std::vector<double> chain_channel_tensor(const ChainSpec& c) {
  guard_paths(c);
  std::size_t n_paths = 1;
  for (int k = 0; k < c.K; ++k) n_paths *= c.nx * c.no;
  std::vector<double> out(n_paths, 0.0);

  // iterate full paths; maintain alpha over bins recursively per path via
  // explicit digit decomposition (micro sizes only)
  std::vector<std::size_t> xs(static_cast<std::size_t>(c.K)), os(static_cast<std::size_t>(c.K));
  for (std::size_t p = 0; p < n_paths; ++p) {
    std::size_t rem = p;
    for (int k = c.K; k-- > 0;) {
      os[static_cast<std::size_t>(k)] = rem % c.no;
      rem /= c.no;
      xs[static_cast<std::size_t>(k)] = rem % c.nx;
      rem /= c.nx;
    }
    double prob1 = c.first_out[os[0]];
    if (c.K == 1) {
      out[p] = prob1;
      continue;
    }
    std::vector<double> alpha(c.rho2);
    for (auto& a : alpha) a *= prob1;
    for (int k = 2; k <= c.K; ++k) {
      const BlockDynamics& b = c.blocks[static_cast<std::size_t>(k - 2)];
      const std::size_t x = xs[static_cast<std::size_t>(k - 1)], o = os[static_cast<std::size_t>(k - 1)];
      if (k == c.K) {
        double pf = 0.0;
        for (int m = 0; m < b.bins_in; ++m) pf += alpha[static_cast<std::size_t>(m)] * b.chan_at(m, x, o);
        out[p] = pf;
      } else {
        std::vector<double> nalpha(static_cast<std::size_t>(b.bins_out), 0.0);
        for (int m = 0; m < b.bins_in; ++m) {
          if (alpha[static_cast<std::size_t>(m)] == 0.0) continue;
          for (int mn = 0; mn < b.bins_out; ++mn)
            nalpha[static_cast<std::size_t>(mn)] +=
                alpha[static_cast<std::size_t>(m)] * b.trans_at(m, x, o, mn);
        }
        alpha = std::move(nalpha);
      }
    }
  }
  return out;
}

// direct enumeration of the interactive protocol (no composite view): walks
// (a,b,w) trajectories block by block
std::vector<double> interactive_native_tensor(const InteractiveSchemeSpec& spec,
                                              const InteractiveReduction& red) {
  const int ns = spec.pi_SX.components()[0].size, nx1 = spec.pi_SX.components()[1].size;
  const int na = spec.Q_AgSU.output().size, nb = spec.Q_BgXU.output().size;
  const int ny = spec.Y_size, nz = spec.Z_size, nu1 = spec.Q_U.size();
  const int N = spec.N, K = spec.K;
  const std::size_t nsxN = ipow(static_cast<std::size_t>(ns * nx1), N);
  const std::size_t noN = ipow(static_cast<std::size_t>(ny * nz), N);
  const std::size_t nabN = ipow(static_cast<std::size_t>(na * nb), N);
  const std::size_t nwN = ipow(static_cast<std::size_t>(spec.P_W.size()), N);

  double cost = 1.0;
  for (int k = 0; k < K; ++k) cost *= static_cast<double>(nsxN * noN);
  for (int k = 0; k + 1 < K; ++k) cost *= static_cast<double>(nabN * nwN);
  if (cost > 5.0e6)
    throw CapacityError("interactive reduction check: trajectory enumeration exceeds guard");

  const std::vector<double> pw_seq = seq_law(spec.P_W, N);
  std::size_t n_paths = 1;
  for (int k = 0; k < K; ++k) n_paths *= nsxN * noN;
  std::vector<double> out(n_paths, 0.0);
  const std::size_t o1_const =
      [&] {
        std::vector<int> sym(static_cast<std::size_t>(N),
                             red.y_const * nz + red.z_const);
        return prob::seq_index(ny * nz, sym);
      }();

  std::vector<std::size_t> xsv(static_cast<std::size_t>(K)), osv(static_cast<std::size_t>(K));
  for (std::size_t p = 0; p < n_paths; ++p) {
    std::size_t rem = p;
    for (int k = K; k-- > 0;) {
      osv[static_cast<std::size_t>(k)] = rem % noN;
      rem /= noN;
      xsv[static_cast<std::size_t>(k)] = rem % nsxN;
      rem /= nsxN;
    }
    if (osv[0] != o1_const) continue;  // block-1 outputs are the constants
    // recursive sum over (ab, w) trajectories
    struct Walker {
      const InteractiveSchemeSpec& spec;
      const InteractiveReduction& red;
      const std::vector<double>& pw_seq;
      const std::vector<std::size_t>& xsv;
      const std::vector<std::size_t>& osv;
      int N, K, ns, nx1, na, nb, ny, nz, nu1;
      std::size_t nabN;

      double block_prob(int k, std::size_t ab, int m) const {
        // P(ab_k, o_k | sx_k, m_k): componentwise maps through u = word(m)
        const auto us = prob::seq_symbols(nu1, N,
            static_cast<std::size_t>(red.codebooks.resolv[static_cast<std::size_t>(k - 2)]
                                         .words[static_cast<std::size_t>(m)]));
        const auto sxs = prob::seq_symbols(ns * nx1, N, xsv[static_cast<std::size_t>(k - 1)]);
        const auto abs_ = prob::seq_symbols(na * nb, N, ab);
        const auto oss = prob::seq_symbols(ny * nz, N, osv[static_cast<std::size_t>(k - 1)]);
        double pr = 1.0;
        for (int i = 0; i < N && pr > 0.0; ++i) {
          const int s = sxs[static_cast<std::size_t>(i)] / nx1, x = sxs[static_cast<std::size_t>(i)] % nx1;
          const int a = abs_[static_cast<std::size_t>(i)] / nb, b = abs_[static_cast<std::size_t>(i)] % nb;
          const int y = oss[static_cast<std::size_t>(i)] / nz, z = oss[static_cast<std::size_t>(i)] % nz;
          const int u = us[static_cast<std::size_t>(i)];
          pr *= spec.Q_AgSU.at({s, u}, a) * spec.Q_BgXU.at({x, u}, b) *
                spec.Q_YgABU.at({a, b, u}, y) * spec.Q_ZgABU.at({a, b, u}, z);
        }
        return pr;
      }

      double walk(int k, std::size_t ab_prev) const {
        // sum over w_{k-1} to get M_k, then over (ab_k) and recurse
        double acc = 0.0;
        for (std::size_t w = 0; w < pw_seq.size(); ++w) {
          if (pw_seq[w] == 0.0) continue;
          const int m = red.codebooks.binning[static_cast<std::size_t>(k - 2)].at(ab_prev, w);
          double inner = 0.0;
          if (k == K) {
            for (std::size_t ab = 0; ab < nabN; ++ab) inner += block_prob(k, ab, m);
          } else {
            for (std::size_t ab = 0; ab < nabN; ++ab) {
              const double pb = block_prob(k, ab, m);
              if (pb > 0.0) inner += pb * walk(k + 1, ab);
            }
          }
          acc += pw_seq[w] * inner;
        }
        return acc;
      }
    } walker{spec, red, pw_seq, xsv, osv, N, K, ns, nx1, na, nb, ny, nz, nu1, nabN};

    if (K == 1) {
      out[p] = 1.0;
      continue;
    }
    // block 1: (a,b) uniform, independent of everything
    double acc = 0.0;
    for (std::size_t ab = 0; ab < nabN; ++ab)
      acc += (1.0 / static_cast<double>(nabN)) * walker.walk(2, ab);
    out[p] = acc;
  }
  return out;
}

}  // namespace

SimReport exact_interactive_divergence(const InteractiveSchemeSpec& spec) {
  const InteractiveReduction red = reduce_interactive_to_p2p(spec);
  const ChainSpec chain = build_p2p_chain(red.composite, red.codebooks);
  SimReport rep = run_exact_chain(chain);

  const std::vector<double> composite = chain_channel_tensor(chain);
  const std::vector<double> native = interactive_native_tensor(spec, red);
  double worst = 0.0;
  for (std::size_t i = 0; i < composite.size(); ++i)
    worst = std::max(worst, std::abs(composite[i] - native[i]));
  rep.reduction_max_abs_diff = worst;
  if (worst > 1e-9)
    throw std::logic_error("exact_interactive_divergence: reduced and native laws disagree (" +
                           std::to_string(worst) + ")");
  return rep;
}
}  // namespace chansynth::sim
