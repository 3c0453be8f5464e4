#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chansynth/bounds/bounds.hpp"
#include "chansynth/randgen.hpp"
#include "chansynth/rng.hpp"
#include "chansynth/sim/codesim.hpp"
#include "oracles.hpp"

using namespace chansynth;
using prob::Alphabet;
using prob::Dist;
using prob::Kernel;
using sim::P2PSchemeSpec;

namespace {

// small strictly positive binary scheme
P2PSchemeSpec micro_spec(Rng& rng, int n, int k, double r) {
  P2PSchemeSpec s;
  s.N = n;
  s.K = k;
  s.R = r;
  s.eps = 0.6;
  s.Q_U = gen::random_dist(rng, 2, 0.3, "U");
  s.pi_X = gen::random_dist(rng, 2, 0.3, "X");
  s.P_W = gen::random_dist(rng, 2, 0.3, "W");
  s.Q_BgXU = gen::random_kernel(rng, {2, 2}, 2, 0.2, "B");
  s.Q_YgBU = gen::random_kernel(rng, {2, 2}, 2, 0.2, "Y");
  s.pi_YgX = gen::random_kernel(rng, {2}, 2, 0.3, "Y");
  return s;
}

double const_law_div(const Dist& q, const Dist& pi_x, const Kernel& pi_ygx) {
  double d = 0.0;
  for (int x = 0; x < pi_x.size(); ++x) {
    if (pi_x(x) == 0.0) continue;
    for (int y = 0; y < q.size(); ++y)
      if (q(y) > 0.0)
        d += pi_x(x) * q(y) * std::log(q(y) / pi_ygx.at(static_cast<std::size_t>(x), y));
  }
  return d;
}

}  // namespace

TEST_CASE("rate window") {
  Rng rng(31);
  // U independent of (X, Y): B and Y ignore U
  P2PSchemeSpec s = micro_spec(rng, 1, 2, 0.5);
  std::vector<double> brows, yrows;
  const Kernel b1 = gen::random_kernel(rng, {2}, 2, 0.2);
  const Kernel y1 = gen::random_kernel(rng, {2}, 2, 0.2);
  for (int x = 0; x < 2; ++x)
    for (int u = 0; u < 2; ++u)
      for (int b = 0; b < 2; ++b) brows.push_back(b1.at(static_cast<std::size_t>(x), b));
  for (int b = 0; b < 2; ++b)
    for (int u = 0; u < 2; ++u)
      for (int y = 0; y < 2; ++y) yrows.push_back(y1.at(static_cast<std::size_t>(b), y));
  s.Q_BgXU = Kernel({Alphabet(2), Alphabet(2)}, Alphabet(2, "B"), brows);
  s.Q_YgBU = Kernel({Alphabet(2), Alphabet(2)}, Alphabet(2, "Y"), yrows);
  const auto rw = sim::rate_window(s, 0.5, 0.1);
  CHECK(rw.shannon_lo == doctest::Approx(0.0).epsilon(1e-10));

  // B deterministic given (X, U) with Y reading B exactly makes the upper
  // endpoint H(W); at H(W) = 0 the window is empty
  P2PSchemeSpec s2 = micro_spec(rng, 1, 2, 0.5);
  s2.P_W = Dist::point_mass(Alphabet(2, "W"), 0);
  s2.Q_BgXU = Kernel({Alphabet(2), Alphabet(2)}, Alphabet(2, "B"),
                     {1, 0, 1, 0, 0, 1, 0, 1});  // b = x
  s2.Q_YgBU = Kernel({Alphabet(2), Alphabet(2)}, Alphabet(2, "Y"), {1, 0, 1, 0, 0, 1, 0, 1});
  const auto rw2 = sim::rate_window(s2, 0.5, 0.1);
  CHECK(rw2.shannon_hi == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(rw2.shannon_empty());

  // the relaxed window sits inside the Shannon window
  for (int rep = 0; rep < 10; ++rep) {
    P2PSchemeSpec sr = micro_spec(rng, 1, 2, 0.5);
    const auto w = sim::rate_window(sr, 1e-3, 1e-3);
    CHECK(w.relaxed_lo >= w.shannon_lo - 1e-9);
    CHECK(w.relaxed_hi <= w.shannon_hi + 1e-9);
  }
}

TEST_CASE("codebook sampling") {
  Rng rng(33);
  P2PSchemeSpec s = micro_spec(rng, 2, 3, std::log(2.0));
  const auto cb1 = sim::sample_codebooks(s, 77);
  const auto cb2 = sim::sample_codebooks(s, 77);
  REQUIRE(cb1.binning.size() == 2);
  for (std::size_t j = 0; j < cb1.binning.size(); ++j) {
    CHECK(cb1.binning[j].table == cb2.binning[j].table);
    CHECK(cb1.resolv[j].words == cb2.resolv[j].words);
  }
  const auto cb3 = sim::sample_codebooks(s, 78);
  CHECK(cb1.binning[0].table != cb3.binning[0].table);

  // tiny rate: a single bin, all entries zero
  P2PSchemeSpec s0 = s;
  s0.R = 1e-9;
  const auto cb0 = sim::sample_codebooks(s0, 5);
  CHECK(cb0.binning[0].bins == 1);
  for (auto e : cb0.binning[0].table) CHECK(e == 0);

  // bin occupancy is near uniform (chi-squared over a fixed seeded draw)
  P2PSchemeSpec s4 = s;
  s4.R = std::log(4.0);
  s4.N = 1;
  s4.Q_U = Dist::uniform(Alphabet(2, "U"));
  s4.eps = 1.0;  // at N = 1 each singleton type deviates by exactly 1
  int counts[4] = {0, 0, 0, 0};
  int total = 0;
  for (int i = 0; i < 300; ++i) {
    const auto cb = sim::sample_codebooks(s4, 1000 + static_cast<std::uint64_t>(i));
    for (auto e : cb.binning[0].table) {
      counts[e]++;
      ++total;
    }
  }
  double chi2 = 0.0;
  for (int m = 0; m < 4; ++m) {
    const double expd = total / 4.0;
    chi2 += (counts[m] - expd) * (counts[m] - expd) / expd;
  }
  CHECK(chi2 < 11.345);  // dof 3, p = 0.01
  // codewords are drawn from the typical set when it is nonempty
  const auto cb4 = sim::sample_codebooks(s4, 3);
  CHECK_FALSE(cb4.typical_fallback);
  for (auto w : cb4.resolv[0].words)
    CHECK(prob::is_typical(s4.Q_U, s4.N, static_cast<std::size_t>(w), s4.eps));
}

TEST_CASE("K = 1 reduces to the fixed output block") {
  Rng rng(35);
  P2PSchemeSpec s = micro_spec(rng, 2, 1, 0.7);
  const auto cb = sim::sample_codebooks(s, 9);
  const auto rep = sim::exact_induced_divergence(s, cb);
  const Dist qhat = bounds::min_output_divergence(s.pi_X, s.pi_YgX).q;
  const double expect = s.N * const_law_div(qhat, s.pi_X, s.pi_YgX);
  CHECK(rep.total == doctest::Approx(expect).epsilon(1e-12));
  CHECK(rep.first_block_div == doctest::Approx(expect).epsilon(1e-12));
  CHECK(rep.decomposition_sum == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("decoder ignoring (B, U) gives uncoupled blocks") {
  Rng rng(37);
  P2PSchemeSpec s = micro_spec(rng, 1, 3, std::log(2.0));
  const Dist q = gen::random_dist(rng, 2, 0.2, "Y");
  std::vector<double> rows;
  for (int b = 0; b < 2; ++b)
    for (int u = 0; u < 2; ++u)
      for (int y = 0; y < 2; ++y) rows.push_back(q(y));
  s.Q_YgBU = Kernel({Alphabet(2, "B"), Alphabet(2, "U")}, Alphabet(2, "Y"), rows);
  s.QhatY = q;
  const auto cb = sim::sample_codebooks(s, 11);
  const auto rep = sim::exact_induced_divergence(s, cb);
  const double per_block = s.N * const_law_div(q, s.pi_X, s.pi_YgX);
  for (const auto& b : rep.blocks) {
    CHECK(b.div_term == doctest::Approx(per_block).epsilon(1e-10));
    CHECK(std::abs(b.mi_term) <= 1e-12);
  }
  CHECK(rep.total == doctest::Approx(3 * per_block).epsilon(1e-10));
}

TEST_CASE("exact engine equals the flat trajectory oracle") {
  Rng rng(39);
  for (auto [n, k, r] : {std::tuple<int, int, double>{1, 2, std::log(2.0)},
                         {1, 3, std::log(2.0)},
                         {2, 2, 0.45}}) {
    P2PSchemeSpec s = micro_spec(rng, n, k, r);
    const auto cb = sim::sample_codebooks(s, 13 + static_cast<std::uint64_t>(k));
    const auto rep = sim::exact_induced_divergence(s, cb);
    const Dist qhat = bounds::min_output_divergence(s.pi_X, s.pi_YgX).q;
    oracles::FlatP2P flat(s, cb, qhat);
    CHECK(rep.total == doctest::Approx(flat.divergence()).epsilon(1e-9));
    // decomposition identity
    CHECK(rep.total == doctest::Approx(rep.decomposition_sum).epsilon(1e-9));
    // first-block identity
    CHECK(rep.first_block_div ==
          doctest::Approx(s.N * const_law_div(qhat, s.pi_X, s.pi_YgX)).epsilon(1e-12));
    CHECK(rep.blocks[0].div_term == rep.first_block_div);
    // Markov chain: conditioning on the extracted index separates past from
    // present, on the oracle-built joint as well as in the engine
    for (int kk = 2; kk <= k; ++kk) {
      const auto joint = flat.past_m_y_joint(kk, s.bins());
      const double cmi = oracles::flat_markov_cmi(
          joint, oracles::opow(flat.nxN * flat.nyN, kk - 1),
          static_cast<std::size_t>(s.bins()), flat.nyN);
      CHECK(std::abs(cmi) <= 1e-9);
      CHECK(std::abs(rep.blocks[static_cast<std::size_t>(kk - 1)].markov_cmi) <= 1e-9);
    }
    // reruns are bit-identical
    const auto rep2 = sim::exact_induced_divergence(s, cb);
    CHECK(rep.total == rep2.total);
    for (std::size_t j = 0; j < rep.blocks.size(); ++j) {
      CHECK(rep.blocks[j].mi_term == rep2.blocks[j].mi_term);
      CHECK(rep.blocks[j].div_term == rep2.blocks[j].div_term);
      CHECK(rep.blocks[j].m_uniformity == rep2.blocks[j].m_uniformity);
    }
  }
}

TEST_CASE("index-uniformity diagnostics") {
  Rng rng(41);
  // single bin: exactly uniform
  P2PSchemeSpec s = micro_spec(rng, 1, 2, 1e-9);
  const auto cb = sim::sample_codebooks(s, 15);
  const auto mu = sim::m_uniformity_diagnostic(s, cb);
  REQUIRE(mu.size() == 1);
  CHECK(mu[0] == doctest::Approx(0.0));

  // adversarial table mapping everything to bin 0: full log(bins) divergence
  P2PSchemeSpec s2 = micro_spec(rng, 1, 2, std::log(3.0));
  auto cb2 = sim::sample_codebooks(s2, 17);
  std::fill(cb2.binning[0].table.begin(), cb2.binning[0].table.end(), 0);
  const auto mu2 = sim::m_uniformity_diagnostic(s2, cb2);
  CHECK(mu2[0] == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  // block-2 diagnostic averaged over every binning table obeys the one-shot
  // binning bound (1/s) e^{-s(H_{1+s}(B W | X Y U) - N R)}; block-1 variables
  // are independent, so the conditional entropy splits into log|B| + H_{1+s}(W)
  P2PSchemeSpec s3 = micro_spec(rng, 1, 2, std::log(2.0));
  const int bins = s3.bins();
  const int n_entries = 4;  // (b, w) pairs
  const int n_tables = 16;  // bins^n_entries
  double avg = 0.0;
  auto cb3 = sim::sample_codebooks(s3, 19);
  for (int t = 0; t < n_tables; ++t) {
    int rem = t;
    for (int e = 0; e < n_entries; ++e) {
      cb3.binning[0].table[static_cast<std::size_t>(e)] = rem % bins;
      rem /= bins;
    }
    avg += sim::m_uniformity_diagnostic(s3, cb3)[0] / n_tables;
  }
  const double s_ord = 0.5;
  const double h = std::log(2.0) + info::renyi_entropy(s3.P_W, s_ord);
  const double bound = (1.0 / s_ord) * std::exp(-s_ord * (h - s3.N * s3.R));
  CHECK(avg <= bound + 1e-12);
}

TEST_CASE("codebook-averaged divergence") {
  Rng rng(43);
  P2PSchemeSpec s = micro_spec(rng, 1, 2, std::log(2.0));
  s.seed = 99;
  const auto mc1 = sim::expected_divergence_over_codebooks(s, 1);
  const auto cb = sim::sample_codebooks(s, Rng::derive(99, 0x517EC0DE));
  CHECK(mc1.mean == sim::exact_induced_divergence(s, cb).total);
  CHECK(mc1.stderr_mean == 0.0);

  const auto mc10 = sim::expected_divergence_over_codebooks(s, 10);
  const auto mc40 = sim::expected_divergence_over_codebooks(s, 40);
  CHECK(mc10.min_total <= mc10.mean + 1e-15);
  // stderr shrinks roughly like 1/sqrt(n)
  CHECK(mc40.stderr_mean < mc10.stderr_mean);
}

TEST_CASE("symbol-by-symbol runs") {
  Rng rng(45);
  // relay: zero divergence
  const Kernel relay_b = Kernel::identity(Alphabet(2));
  const Kernel target = gen::random_kernel(rng, {2}, 2, 0.2, "Y");
  const Dist pix = gen::random_dist(rng, 2, 0.2, "X");
  CHECK(sim::run_symbolwise(relay_b, target, pix, target, 3) == doctest::Approx(0.0));

  // additivity in n and agreement with the compose-then-divergence oracle
  const Kernel pb = gen::random_kernel(rng, {2}, 2, 0.1, "B");
  const Kernel py = gen::random_kernel(rng, {2}, 2, 0.1, "Y");
  const double one = sim::run_symbolwise(pb, py, pix, target, 1);
  const double two = sim::run_symbolwise(pb, py, pix, target, 2);
  CHECK(two == doctest::Approx(2 * one).epsilon(1e-12));
  std::vector<double> rows;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double v = 0.0;
      for (int b = 0; b < 2; ++b)
        v += pb.at(static_cast<std::size_t>(x), b) * py.at(static_cast<std::size_t>(b), y);
      rows.push_back(v);
    }
  const Kernel composed({Alphabet(2, "X")}, Alphabet(2, "Y"), rows);
  CHECK(one == doctest::Approx(info::cond_kl_div(composed, target, pix)).epsilon(1e-12));
}

namespace {

sim::BroadcastSchemeSpec micro_broadcast(Rng& rng, int n, int k) {
  sim::BroadcastSchemeSpec s;
  s.N = n;
  s.K = k;
  s.R = std::log(2.0);
  s.Rhat = std::log(2.0);
  s.eps = 0.6;
  s.Y_size = 2;
  s.Z_size = 2;
  s.Q_U = gen::random_dist(rng, 2, 0.3, "U");
  s.Q_UhgU = gen::random_kernel(rng, {2}, 2, 0.3, "Uh");
  s.Q_BgXUUh = gen::random_kernel(rng, {2, 2, 2}, 2, 0.2, "B");
  s.Q_YgBUUh = gen::random_kernel(rng, {2, 2, 2}, 2, 0.2, "Y");
  s.Q_ZgBU = gen::random_kernel(rng, {2, 2}, 2, 0.2, "Z");
  s.P_W = gen::random_dist(rng, 2, 0.3, "W");
  s.P_What = gen::random_dist(rng, 2, 0.3, "Wh");
  s.pi_X = gen::random_dist(rng, 2, 0.3, "X");
  s.pi_YZgX = gen::random_kernel(rng, {2}, 4, 0.3, "YZ");
  return s;
}

}  // namespace

TEST_CASE("broadcast exact evaluation") {
  Rng rng(47);
  // K = 1: product of the two fixed output laws
  sim::BroadcastSchemeSpec s1 = micro_broadcast(rng, 1, 1);
  const auto cb1 = sim::build_broadcast_scheme(s1, 21);
  const auto rep1 = sim::exact_broadcast_divergence(s1, cb1);
  const auto q = bounds::min_product_output_divergence(s1.pi_X, s1.pi_YZgX, 2, 2);
  std::vector<double> pair_pmf;
  for (int y = 0; y < 2; ++y)
    for (int z = 0; z < 2; ++z) pair_pmf.push_back(q.q_first(y) * q.q_second(z));
  const Dist pair_q(Alphabet(4, "YZ"), pair_pmf);
  const double expect = s1.N * const_law_div(pair_q, s1.pi_X, s1.pi_YZgX);
  CHECK(rep1.total == doctest::Approx(expect).epsilon(1e-12));

  // micro instance equals the flat path-sum oracle
  for (auto [n, k] : {std::pair<int, int>{1, 2}, {1, 3}}) {
    sim::BroadcastSchemeSpec s = micro_broadcast(rng, n, k);
    const auto cb = sim::build_broadcast_scheme(s, 23);
    const auto rep = sim::exact_broadcast_divergence(s, cb);
    const auto qq = bounds::min_product_output_divergence(s.pi_X, s.pi_YZgX, 2, 2);
    oracles::FlatBroadcast flat(s, cb, qq.q_first, qq.q_second);
    CHECK(rep.total == doctest::Approx(flat.divergence()).epsilon(1e-9));
    CHECK(rep.total == doctest::Approx(rep.decomposition_sum).epsilon(1e-9));
    for (const auto& b : rep.blocks) CHECK(std::abs(b.markov_cmi) <= 1e-9);
  }
}

TEST_CASE("broadcast degenerates to the point-to-point scheme") {
  Rng rng(49);
  // matched p2p scheme
  P2PSchemeSpec p = micro_spec(rng, 1, 3, std::log(2.0));
  const auto pcb = sim::sample_codebooks(p, 25);

  // broadcast with a constant fine layer, a single-letter Z, and the
  // what-randomness absent
  sim::BroadcastSchemeSpec b;
  b.N = p.N;
  b.K = p.K;
  b.R = p.R;
  b.Rhat = 1e-9;  // one hat bin
  b.eps = p.eps;
  b.Y_size = 2;
  b.Z_size = 1;
  b.Q_U = p.Q_U;
  b.Q_UhgU = Kernel({Alphabet(2, "U")}, Alphabet(1, "Uh"), {1.0, 1.0});
  {
    std::vector<double> rows;
    for (int x = 0; x < 2; ++x)
      for (int u = 0; u < 2; ++u)
        for (int bb = 0; bb < 2; ++bb) rows.push_back(p.Q_BgXU.at({x, u}, bb));
    b.Q_BgXUUh = Kernel({Alphabet(2, "X"), Alphabet(2, "U"), Alphabet(1, "Uh")}, Alphabet(2, "B"), rows);
    rows.clear();
    for (int bb = 0; bb < 2; ++bb)
      for (int u = 0; u < 2; ++u)
        for (int y = 0; y < 2; ++y) rows.push_back(p.Q_YgBU.at({bb, u}, y));
    b.Q_YgBUUh = Kernel({Alphabet(2, "B"), Alphabet(2, "U"), Alphabet(1, "Uh")}, Alphabet(2, "Y"), rows);
    b.Q_ZgBU = Kernel({Alphabet(2, "B"), Alphabet(2, "U")}, Alphabet(1, "Z"), {1, 1, 1, 1});
    rows.clear();
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) rows.push_back(p.pi_YgX.at(static_cast<std::size_t>(x), y));
    b.pi_YZgX = Kernel({Alphabet(2, "X")}, Alphabet(2, "YZ"), rows);
  }
  b.P_W = p.P_W;
  b.P_What = Dist::point_mass(Alphabet(2, "Wh"), 0);
  b.pi_X = p.pi_X;
  const Dist qhat = bounds::min_output_divergence(p.pi_X, p.pi_YgX).q;
  b.QhatY = qhat;
  b.QhatZ = Dist(Alphabet(1, "Z"), {1.0});

  // share the codebooks: same binning tables, coarse words from the p2p
  // resolvability draw, a single constant fine word
  sim::BroadcastCodebooks bcb;
  for (std::size_t j = 0; j < pcb.binning.size(); ++j) {
    bcb.binning.push_back(pcb.binning[j]);
    sim::BinningCodebook hat;
    hat.bins = 1;
    hat.n_first = 2;  // |What|^N
    hat.n_second = 1;
    hat.table = {0, 0};
    bcb.hat_binning.push_back(hat);
    sim::SuperpositionCodebook sc;
    sc.bins = pcb.resolv[j].bins;
    sc.bins_hat = 1;
    sc.coarse_space = pcb.resolv[j].codeword_space;
    sc.fine_space = 1;
    sc.u_words = pcb.resolv[j].words;
    sc.uh_words.assign(static_cast<std::size_t>(sc.bins), 0);
    bcb.superpos.push_back(std::move(sc));
  }

  P2PSchemeSpec p2 = p;
  p2.QhatY = qhat;
  const auto rp = sim::exact_induced_divergence(p2, pcb);
  const auto rb = sim::exact_broadcast_divergence(b, bcb);
  CHECK(rb.total == doctest::Approx(rp.total).epsilon(1e-12));
  for (std::size_t j = 0; j < rp.blocks.size(); ++j) {
    CHECK(rb.blocks[j].mi_term == doctest::Approx(rp.blocks[j].mi_term).epsilon(1e-12));
    CHECK(rb.blocks[j].div_term == doctest::Approx(rp.blocks[j].div_term).epsilon(1e-12));
  }
}

namespace {

sim::InteractiveSchemeSpec micro_interactive(Rng& rng, int n, int k) {
  sim::InteractiveSchemeSpec s;
  s.N = n;
  s.K = k;
  s.R = std::log(2.0);
  s.eps = 0.6;
  s.Y_size = 2;
  s.Z_size = 2;
  s.Q_U = gen::random_dist(rng, 2, 0.3, "U");
  s.Q_AgSU = gen::random_kernel(rng, {2, 2}, 2, 0.2, "A");
  s.Q_BgXU = gen::random_kernel(rng, {2, 2}, 2, 0.2, "B");
  s.Q_YgABU = gen::random_kernel(rng, {2, 2, 2}, 2, 0.2, "Y");
  s.Q_ZgABU = gen::random_kernel(rng, {2, 2, 2}, 2, 0.2, "Z");
  s.P_W = gen::random_dist(rng, 2, 0.3, "W");
  s.pi_SX = gen::random_joint(rng, {2, 2}, 0.3);
  s.pi_YZgSX = gen::random_kernel(rng, {2, 2}, 4, 0.3, "YZ");
  return s;
}

}  // namespace

TEST_CASE("interactive scheme") {
  Rng rng(51);
  // K = 1: constant outputs
  sim::InteractiveSchemeSpec s1 = micro_interactive(rng, 1, 1);
  const auto red1 = sim::reduce_interactive_to_p2p(s1);
  const auto rep1 = sim::exact_interactive_divergence(s1);
  double expect = 0.0;
  const Dist pisx = s1.pi_SX.flatten();
  for (int sx = 0; sx < 4; ++sx)
    if (pisx(sx) > 0.0)
      expect -= pisx(sx) * std::log(s1.pi_YZgSX.at(static_cast<std::size_t>(sx),
                                                   red1.y_const * s1.Z_size + red1.z_const));
  CHECK(rep1.total == doctest::Approx(s1.N * expect / s1.N).epsilon(1e-12));

  // micro instances: the reduced law and the native law coincide, and the
  // composite chain matches the independent flat oracle
  for (auto [n, k] : {std::pair<int, int>{1, 2}, {1, 3}}) {
    sim::InteractiveSchemeSpec s = micro_interactive(rng, n, k);
    s.seed = 27;
    const auto rep = sim::exact_interactive_divergence(s);
    CHECK(rep.reduction_max_abs_diff <= 1e-12);
    CHECK(rep.total == doctest::Approx(rep.decomposition_sum).epsilon(1e-9));
    const auto red = sim::reduce_interactive_to_p2p(s);
    oracles::FlatP2P flat(red.composite, red.codebooks, *red.composite.QhatY);
    CHECK(rep.total == doctest::Approx(flat.divergence()).epsilon(1e-9));
  }
}

TEST_CASE("interactive with degenerate S and Z equals the matched p2p run") {
  Rng rng(53);
  sim::InteractiveSchemeSpec s = micro_interactive(rng, 1, 2);
  s.Z_size = 1;
  s.Q_ZgABU = prob::Kernel({Alphabet(2, "A"), Alphabet(2, "B"), Alphabet(2, "U")},
                           Alphabet(1, "Z"), std::vector<double>(8, 1.0));
  s.pi_SX = prob::JointDist({Alphabet(1, "S"), Alphabet(2, "X")}, gen::random_dist(rng, 2, 0.3).pmf());
  s.Q_AgSU = gen::random_kernel(rng, {1, 2}, 2, 0.2, "A");
  s.pi_YZgSX = prob::Kernel({Alphabet(1, "S"), Alphabet(2, "X")}, Alphabet(2, "YZ"),
                            gen::random_kernel(rng, {2}, 2, 0.3).table());
  s.seed = 29;
  const auto rep = sim::exact_interactive_divergence(s);
  // the composite spec IS a point-to-point scheme; evaluate it directly
  const auto red = sim::reduce_interactive_to_p2p(s);
  const auto prep = sim::exact_induced_divergence(red.composite, red.codebooks);
  CHECK(rep.total == doctest::Approx(prep.total).epsilon(1e-12));
}
