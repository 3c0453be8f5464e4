#pragma once

// Independent reference implementations used only by the test suites. These
// deliberately avoid the production code paths: the scheme oracle enumerates
// raw (w, b) trajectories with no bin-state recursion, the symbol-wise oracle
// scans a grid, and the fixed-output oracle uses the closed form.

#include <cmath>
#include <vector>

#include "chansynth/prob.hpp"
#include "chansynth/sim/codesim.hpp"

namespace oracles {

namespace cs = chansynth;
using cs::prob::Dist;
using cs::prob::Kernel;

inline std::size_t opow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// ---------------------------------------------------------------------------
// flat trajectory enumeration for the point-to-point block scheme

struct FlatP2P {
  const cs::sim::P2PSchemeSpec& spec;
  const cs::sim::P2PCodebooks& cb;
  int N, K;
  std::size_t nxN, nyN, nbN, nwN;
  std::vector<double> pw_seq, pix_seq, qhat_seq;

  FlatP2P(const cs::sim::P2PSchemeSpec& s, const cs::sim::P2PCodebooks& c, const Dist& qhat)
      : spec(s), cb(c), N(s.N), K(s.K) {
    nxN = opow(static_cast<std::size_t>(s.nx()), N);
    nyN = opow(static_cast<std::size_t>(s.ny()), N);
    nbN = opow(static_cast<std::size_t>(s.nb()), N);
    nwN = opow(static_cast<std::size_t>(s.nw()), N);
    pw_seq = cs::prob::product_extension(s.P_W, N).pmf();
    pix_seq = cs::prob::product_extension(s.pi_X, N).pmf();
    qhat_seq = cs::prob::product_extension(qhat, N).pmf();
  }

  double seq_prob_b(std::size_t bseq, std::size_t xseq, std::size_t useq) const {
    const auto bs = cs::prob::seq_symbols(spec.nb(), N, bseq);
    const auto xs = cs::prob::seq_symbols(spec.nx(), N, xseq);
    const auto us = cs::prob::seq_symbols(spec.nu(), N, useq);
    double p = 1.0;
    for (int i = 0; i < N; ++i)
      p *= spec.Q_BgXU.at({xs[static_cast<std::size_t>(i)], us[static_cast<std::size_t>(i)]},
                          bs[static_cast<std::size_t>(i)]);
    return p;
  }

  double seq_prob_y(std::size_t yseq, std::size_t bseq, std::size_t useq) const {
    const auto ys = cs::prob::seq_symbols(spec.ny(), N, yseq);
    const auto bs = cs::prob::seq_symbols(spec.nb(), N, bseq);
    const auto us = cs::prob::seq_symbols(spec.nu(), N, useq);
    double p = 1.0;
    for (int i = 0; i < N; ++i)
      p *= spec.Q_YgBU.at({bs[static_cast<std::size_t>(i)], us[static_cast<std::size_t>(i)]},
                          ys[static_cast<std::size_t>(i)]);
    return p;
  }

  // walks blocks k..K given the extracted index for block k; x/y paths fixed
  double walk(int k, int m, const std::vector<std::size_t>& xs,
              const std::vector<std::size_t>& ys) const {
    const std::size_t useq =
        static_cast<std::size_t>(cb.resolv[static_cast<std::size_t>(k - 2)]
                                     .words[static_cast<std::size_t>(m)]);
    double acc = 0.0;
    for (std::size_t b = 0; b < nbN; ++b) {
      const double pb = seq_prob_b(b, xs[static_cast<std::size_t>(k - 1)], useq) *
                        seq_prob_y(ys[static_cast<std::size_t>(k - 1)], b, useq);
      if (pb == 0.0) continue;
      if (k == K) {
        acc += pb;
        continue;
      }
      double tail = 0.0;
      for (std::size_t w = 0; w < nwN; ++w) {
        if (pw_seq[w] == 0.0) continue;
        const int m_next = cb.binning[static_cast<std::size_t>(k - 1)].at(b, w);
        tail += pw_seq[w] * walk(k + 1, m_next, xs, ys);
      }
      acc += pb * tail;
    }
    return acc;
  }

  // P(y-path | x-path)
  double channel(const std::vector<std::size_t>& xs, const std::vector<std::size_t>& ys) const {
    double p1 = qhat_seq[ys[0]];
    if (K == 1) return p1;
    double acc = 0.0;
    for (std::size_t b = 0; b < nbN; ++b)
      for (std::size_t w = 0; w < nwN; ++w) {
        if (pw_seq[w] == 0.0) continue;
        const int m2 = cb.binning[0].at(b, w);
        acc += (1.0 / static_cast<double>(nbN)) * pw_seq[w] * walk(2, m2, xs, ys);
      }
    return p1 * acc;
  }

  // full divergence by brute force over all paths
  double divergence() const {
    double total = 0.0;
    std::vector<std::size_t> xs(static_cast<std::size_t>(K)), ys(static_cast<std::size_t>(K));
    const std::size_t n_paths = opow(nxN * nyN, K);
    for (std::size_t p = 0; p < n_paths; ++p) {
      std::size_t rem = p;
      for (int k = K; k-- > 0;) {
        ys[static_cast<std::size_t>(k)] = rem % nyN;
        rem /= nyN;
        xs[static_cast<std::size_t>(k)] = rem % nxN;
        rem /= nxN;
      }
      double pix = 1.0, tgt = 1.0;
      for (int k = 0; k < K; ++k) {
        pix *= pix_seq[xs[static_cast<std::size_t>(k)]];
        const auto xsym = cs::prob::seq_symbols(spec.nx(), N, xs[static_cast<std::size_t>(k)]);
        const auto ysym = cs::prob::seq_symbols(spec.ny(), N, ys[static_cast<std::size_t>(k)]);
        for (int i = 0; i < N; ++i)
          tgt *= spec.pi_YgX.at(static_cast<std::size_t>(xsym[static_cast<std::size_t>(i)]),
                                ysym[static_cast<std::size_t>(i)]);
      }
      if (pix == 0.0) continue;
      const double pch = channel(xs, ys);
      if (pch == 0.0) continue;
      total += pix * pch * std::log(pch / tgt);
    }
    return total;
  }

  // joint law of (X^{k-1}, Y^{k-1}, M_k, Y_k) with X_k marginalized, built by
  // raw trajectory enumeration; used for the Markov-chain check
  // tensor layout: [pastpath][m][y_k]
  std::vector<double> past_m_y_joint(int k, int bins) const {
    const std::size_t n_past = opow(nxN * nyN, k - 1);
    std::vector<double> joint(n_past * static_cast<std::size_t>(bins) * nyN, 0.0);
    std::vector<std::size_t> xs(static_cast<std::size_t>(k)), ys(static_cast<std::size_t>(k));
    for (std::size_t q = 0; q < n_past; ++q) {
      std::size_t rem = q;
      for (int kk = k - 1; kk-- > 0;) {
        ys[static_cast<std::size_t>(kk)] = rem % nyN;
        rem /= nyN;
        xs[static_cast<std::size_t>(kk)] = rem % nxN;
        rem /= nxN;
      }
      // enumerate trajectories up to block k, tracking m_k
      // block structure: (b_1, w_1, b_2, w_2, ..., b_{k-1}, w_{k-1})
      struct Rec {
        const FlatP2P& f;
        int k;
        const std::vector<std::size_t>& xs;
        const std::vector<std::size_t>& ys;
        std::vector<double>& joint;
        std::size_t q, n_bins;

        // returns: nothing; accumulates P(y^{k-1}, m_k, y_k | x^{k-1}, x_k) weighted later
        void run(int blk, int m, double w_acc) {
          if (blk == k) {
            // emit y_k under each x_k with pi weight
            const std::size_t useq = static_cast<std::size_t>(
                f.cb.resolv[static_cast<std::size_t>(k - 2)].words[static_cast<std::size_t>(m)]);
            for (std::size_t xk = 0; xk < f.nxN; ++xk) {
              if (f.pix_seq[xk] == 0.0) continue;
              for (std::size_t yk = 0; yk < f.nyN; ++yk) {
                double p = 0.0;
                for (std::size_t b = 0; b < f.nbN; ++b)
                  p += f.seq_prob_b(b, xk, useq) * f.seq_prob_y(yk, b, useq);
                joint[(q * n_bins + static_cast<std::size_t>(m)) * f.nyN + yk] +=
                    w_acc * f.pix_seq[xk] * p;
              }
            }
            return;
          }
          // block blk in [2, k): emit y_blk on the fixed past path, then bin
          const std::size_t useq = static_cast<std::size_t>(
              f.cb.resolv[static_cast<std::size_t>(blk - 2)].words[static_cast<std::size_t>(m)]);
          for (std::size_t b = 0; b < f.nbN; ++b) {
            const double pb = f.seq_prob_b(b, xs[static_cast<std::size_t>(blk - 1)], useq) *
                              f.seq_prob_y(ys[static_cast<std::size_t>(blk - 1)], b, useq);
            if (pb == 0.0) continue;
            for (std::size_t w = 0; w < f.nwN; ++w) {
              if (f.pw_seq[w] == 0.0) continue;
              const int mn = f.cb.binning[static_cast<std::size_t>(blk - 1)].at(b, w);
              run(blk + 1, mn, w_acc * pb * f.pw_seq[w]);
            }
          }
        }
      } rec{*this, k, xs, ys, joint, q, static_cast<std::size_t>(bins)};

      // past-path base probability: block-1 x, y and later past blocks' x
      double base = pix_seq[xs[0]] * qhat_seq[ys[0]];
      for (int kk = 2; kk <= k - 1; ++kk) base *= pix_seq[xs[static_cast<std::size_t>(kk - 1)]];
      if (base == 0.0) continue;
      for (std::size_t b = 0; b < nbN; ++b)
        for (std::size_t w = 0; w < nwN; ++w) {
          if (pw_seq[w] == 0.0) continue;
          const int m2 = cb.binning[0].at(b, w);
          const double w0 = base * (1.0 / static_cast<double>(nbN)) * pw_seq[w];
          if (k == 2) {
            // past is exactly block 1; emit directly from m2
            const std::size_t useq = static_cast<std::size_t>(
                cb.resolv[0].words[static_cast<std::size_t>(m2)]);
            for (std::size_t xk = 0; xk < nxN; ++xk) {
              if (pix_seq[xk] == 0.0) continue;
              for (std::size_t yk = 0; yk < nyN; ++yk) {
                double p = 0.0;
                for (std::size_t b2 = 0; b2 < nbN; ++b2)
                  p += seq_prob_b(b2, xk, useq) * seq_prob_y(yk, b2, useq);
                joint[(q * static_cast<std::size_t>(bins) + static_cast<std::size_t>(m2)) * nyN +
                      yk] += w0 * pix_seq[xk] * p;
              }
            }
          } else {
            rec.run(2, m2, w0);
          }
        }
    }
    return joint;
  }
};

// I(Y_k ; past | M_k) from the flat joint tensor
inline double flat_markov_cmi(const std::vector<double>& joint, std::size_t n_past,
                              std::size_t bins, std::size_t nyN) {
  std::vector<double> t_m(bins, 0.0), t_qm(n_past * bins, 0.0), t_my(bins * nyN, 0.0);
  for (std::size_t q = 0; q < n_past; ++q)
    for (std::size_t m = 0; m < bins; ++m)
      for (std::size_t y = 0; y < nyN; ++y) {
        const double v = joint[(q * bins + m) * nyN + y];
        t_m[m] += v;
        t_qm[q * bins + m] += v;
        t_my[m * nyN + y] += v;
      }
  double cmi = 0.0;
  for (std::size_t q = 0; q < n_past; ++q)
    for (std::size_t m = 0; m < bins; ++m)
      for (std::size_t y = 0; y < nyN; ++y) {
        const double v = joint[(q * bins + m) * nyN + y];
        if (v > 0.0) cmi += v * std::log(v * t_m[m] / (t_qm[q * bins + m] * t_my[m * nyN + y]));
      }
  return cmi;
}

// ---------------------------------------------------------------------------
// flat trajectory enumeration for the broadcast block scheme

struct FlatBroadcast {
  const cs::sim::BroadcastSchemeSpec& spec;
  const cs::sim::BroadcastCodebooks& cb;
  int N, K, nz;
  std::size_t nxN, noN, nbN, nwN, nwhatN;
  std::vector<double> pw_seq, pwhat_seq, pix_seq, first_seq;

  FlatBroadcast(const cs::sim::BroadcastSchemeSpec& s, const cs::sim::BroadcastCodebooks& c,
                const Dist& qy, const Dist& qz)
      : spec(s), cb(c), N(s.N), K(s.K), nz(s.Z_size) {
    nxN = opow(static_cast<std::size_t>(s.pi_X.size()), N);
    noN = opow(static_cast<std::size_t>(s.Y_size * s.Z_size), N);
    nbN = opow(static_cast<std::size_t>(s.Q_BgXUUh.output().size), N);
    nwN = opow(static_cast<std::size_t>(s.P_W.size()), N);
    nwhatN = opow(static_cast<std::size_t>(s.P_What.size()), N);
    pw_seq = cs::prob::product_extension(s.P_W, N).pmf();
    pwhat_seq = cs::prob::product_extension(s.P_What, N).pmf();
    pix_seq = cs::prob::product_extension(s.pi_X, N).pmf();
    std::vector<double> sym(static_cast<std::size_t>(s.Y_size * s.Z_size));
    for (int y = 0; y < s.Y_size; ++y)
      for (int z = 0; z < s.Z_size; ++z) sym[static_cast<std::size_t>(y * s.Z_size + z)] = qy(y) * qz(z);
    first_seq = cs::prob::product_extension(
                    Dist(cs::prob::Alphabet(s.Y_size * s.Z_size), std::move(sym)), N)
                    .pmf();
  }

  // per-block emission of (b-seq, o-seq) given (x-seq, u-seq, uh-seq)
  double block_prob(std::size_t bseq, std::size_t oseq, std::size_t xseq, std::size_t useq,
                    std::size_t uhseq) const {
    const auto bs = cs::prob::seq_symbols(spec.Q_BgXUUh.output().size, N, bseq);
    const auto os = cs::prob::seq_symbols(spec.Y_size * spec.Z_size, N, oseq);
    const auto xs = cs::prob::seq_symbols(spec.pi_X.size(), N, xseq);
    const auto us = cs::prob::seq_symbols(spec.Q_U.size(), N, useq);
    const auto uhs = cs::prob::seq_symbols(spec.Q_UhgU.output().size, N, uhseq);
    double p = 1.0;
    for (int i = 0; i < N; ++i) {
      const int y = os[static_cast<std::size_t>(i)] / nz, z = os[static_cast<std::size_t>(i)] % nz;
      p *= spec.Q_BgXUUh.at({xs[static_cast<std::size_t>(i)], us[static_cast<std::size_t>(i)],
                             uhs[static_cast<std::size_t>(i)]},
                            bs[static_cast<std::size_t>(i)]) *
           spec.Q_YgBUUh.at({bs[static_cast<std::size_t>(i)], us[static_cast<std::size_t>(i)],
                             uhs[static_cast<std::size_t>(i)]},
                            y) *
           spec.Q_ZgBU.at({bs[static_cast<std::size_t>(i)], us[static_cast<std::size_t>(i)]}, z);
    }
    return p;
  }

  double walk(int k, int m, const std::vector<std::size_t>& xs,
              const std::vector<std::size_t>& os) const {
    const auto& sc = cb.superpos[static_cast<std::size_t>(k - 2)];
    double acc = 0.0;
    for (std::size_t what = 0; what < nwhatN; ++what) {
      if (pwhat_seq[what] == 0.0) continue;
      const int mh = cb.hat_binning[static_cast<std::size_t>(k - 2)].at(what, 0);
      const std::size_t useq = static_cast<std::size_t>(sc.u_words[static_cast<std::size_t>(m)]);
      const std::size_t uhseq = static_cast<std::size_t>(sc.uh_at(m, mh));
      double inner = 0.0;
      for (std::size_t b = 0; b < nbN; ++b) {
        const double pb = block_prob(b, os[static_cast<std::size_t>(k - 1)],
                                     xs[static_cast<std::size_t>(k - 1)], useq, uhseq);
        if (pb == 0.0) continue;
        if (k == K) {
          inner += pb;
          continue;
        }
        double tail = 0.0;
        for (std::size_t w = 0; w < nwN; ++w) {
          if (pw_seq[w] == 0.0) continue;
          tail += pw_seq[w] * walk(k + 1, cb.binning[static_cast<std::size_t>(k - 1)].at(b, w), xs, os);
        }
        inner += pb * tail;
      }
      acc += pwhat_seq[what] * inner;
    }
    return acc;
  }

  double channel(const std::vector<std::size_t>& xs, const std::vector<std::size_t>& os) const {
    const double p1 = first_seq[os[0]];
    if (K == 1) return p1;
    double acc = 0.0;
    for (std::size_t b = 0; b < nbN; ++b)
      for (std::size_t w = 0; w < nwN; ++w) {
        if (pw_seq[w] == 0.0) continue;
        acc += (1.0 / static_cast<double>(nbN)) * pw_seq[w] *
               walk(2, cb.binning[0].at(b, w), xs, os);
      }
    return p1 * acc;
  }

  double divergence() const {
    double total = 0.0;
    std::vector<std::size_t> xs(static_cast<std::size_t>(K)), os(static_cast<std::size_t>(K));
    const std::size_t n_paths = opow(nxN * noN, K);
    for (std::size_t p = 0; p < n_paths; ++p) {
      std::size_t rem = p;
      for (int k = K; k-- > 0;) {
        os[static_cast<std::size_t>(k)] = rem % noN;
        rem /= noN;
        xs[static_cast<std::size_t>(k)] = rem % nxN;
        rem /= nxN;
      }
      double pix = 1.0, tgt = 1.0;
      for (int k = 0; k < K; ++k) {
        pix *= pix_seq[xs[static_cast<std::size_t>(k)]];
        const auto xsym = cs::prob::seq_symbols(spec.pi_X.size(), N, xs[static_cast<std::size_t>(k)]);
        const auto osym =
            cs::prob::seq_symbols(spec.Y_size * spec.Z_size, N, os[static_cast<std::size_t>(k)]);
        for (int i = 0; i < N; ++i)
          tgt *= spec.pi_YZgX.at(static_cast<std::size_t>(xsym[static_cast<std::size_t>(i)]),
                                 osym[static_cast<std::size_t>(i)]);
      }
      if (pix == 0.0) continue;
      const double pch = channel(xs, os);
      if (pch == 0.0) continue;
      total += pix * pch * std::log(pch / tgt);
    }
    return total;
  }
};

// ---------------------------------------------------------------------------
// grid oracle for the symbol-by-symbol bound (resolution h on each free
// simplex coordinate; |Y| = 2 and |B| = 2 only, which is what the acceptance
// instances use)

inline double symbolwise_grid_oracle(const Dist& pi_x, const Kernel& pi_ygx, double h) {
  const int nx = pi_x.size(), ny = pi_ygx.output().size;
  if (ny != 2) throw std::invalid_argument("grid oracle: |Y| must be 2");
  const int steps = static_cast<int>(std::lround(1.0 / h));

  // objective decomposes per x once P_{Y|B} is fixed: D = sum_x pi(x) *
  // min_{P(b|x)} D(row_x || pi(.|x)), so scan P_{Y|B} rows and the per-x
  // mixing coefficient
  double best = cs::kInf;
  for (int g0 = 0; g0 <= steps; ++g0)
    for (int g1 = 0; g1 <= steps; ++g1) {
      const double q0 = static_cast<double>(g0) * h;  // P(y=0 | b=0)
      const double q1 = static_cast<double>(g1) * h;  // P(y=0 | b=1)
      double total = 0.0;
      for (int x = 0; x < nx && total < cs::kInf; ++x) {
        double bestx = cs::kInf;
        for (int gb = 0; gb <= steps; ++gb) {
          const double pb0 = static_cast<double>(gb) * h;
          const double py0 = pb0 * q0 + (1.0 - pb0) * q1;
          const double t0 = pi_ygx.at(static_cast<std::size_t>(x), 0);
          const double t1 = pi_ygx.at(static_cast<std::size_t>(x), 1);
          double d = 0.0;
          if (py0 > 0.0) d += (t0 > 0.0) ? py0 * std::log(py0 / t0) : cs::kInf;
          if (d < cs::kInf && py0 < 1.0)
            d += (t1 > 0.0) ? (1.0 - py0) * std::log((1.0 - py0) / t1) : cs::kInf;
          bestx = std::min(bestx, d);
        }
        total += pi_x(x) * bestx;
      }
      best = std::min(best, total);
    }
  return best;
}

// closed form for min_Q D(Q || pi_YgX | pi_X): normalized likelihood geometric
// mean, value -log sum_y prod_x pi(y|x)^{pi(x)}
inline double min_output_divergence_closed_form(const Dist& pi_x, const Kernel& pi_ygx,
                                                std::vector<double>* argmin = nullptr) {
  const int nx = pi_x.size(), ny = pi_ygx.output().size;
  double z = 0.0;
  std::vector<double> g(static_cast<std::size_t>(ny), 0.0);
  for (int y = 0; y < ny; ++y) {
    double logg = 0.0;
    bool zero = false;
    for (int x = 0; x < nx; ++x) {
      if (pi_x(x) == 0.0) continue;
      const double v = pi_ygx.at(static_cast<std::size_t>(x), y);
      if (v == 0.0) {
        zero = true;
        break;
      }
      logg += pi_x(x) * std::log(v);
    }
    g[static_cast<std::size_t>(y)] = zero ? 0.0 : std::exp(logg);
    z += g[static_cast<std::size_t>(y)];
  }
  if (argmin) {
    for (auto& v : g) v /= z;
    *argmin = g;
  }
  return -std::log(z);
}

}  // namespace oracles
