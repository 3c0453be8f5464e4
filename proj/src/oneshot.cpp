#include "chansynth/oneshot.hpp"

#include <cmath>
#include <functional>

#include "chansynth/info.hpp"

namespace chansynth::oneshot {

namespace {

void check_order(double s, const char* what) {
  if (!(s > 0.0 && s <= 1.0))
    throw std::invalid_argument(std::string(what) + ": s must lie in (0, 1]");
}

std::size_t guarded_pow(std::size_t base, int e, const char* what) {
  double v = 1.0;
  for (int i = 0; i < e; ++i) v *= static_cast<double>(base);
  if (v > static_cast<double>(tol::kCapacityGuard))
    throw CapacityError(std::string(what) + ": codebook enumeration of " + std::to_string(v) +
                        " realizations exceeds the capacity guard");
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// sum_x P(x) sum_y P(y|x)^{1+s} Q(y)^{-s}  (the e^{sD} form of a conditional
// Renyi divergence); +inf on an absolute-continuity failure
double exp_cond_div(const std::vector<double>& px, const std::vector<std::vector<double>>& rows,
                    const std::vector<std::vector<double>>& qrows, double s) {
  double acc = 0.0;
  for (std::size_t x = 0; x < px.size(); ++x) {
    if (px[x] == 0.0) continue;
    double inner = 0.0;
    for (std::size_t y = 0; y < rows[x].size(); ++y) {
      const double p = rows[x][y];
      if (p == 0.0) continue;
      const double q = qrows[x][y];
      if (q == 0.0) return kInf;
      inner += std::pow(p, 1.0 + s) * std::pow(q, -s);
    }
    acc += px[x] * inner;
  }
  return acc;
}

double exp_div(const std::vector<double>& p, const std::vector<double>& q, double s) {
  double acc = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y) {
    if (p[y] == 0.0) continue;
    if (q[y] == 0.0) return kInf;
    acc += std::pow(p[y], 1.0 + s) * std::pow(q[y], -s);
  }
  return acc;
}

// sum_a P(a) sum_w P(w|a)^{1+s} = e^{-s H_{1+s}(W|A)}
double exp_neg_cond_renyi_entropy(const std::vector<double>& pa,
                                  const std::vector<std::vector<double>>& w_given_a, double s) {
  double acc = 0.0;
  for (std::size_t a = 0; a < pa.size(); ++a) {
    if (pa[a] == 0.0) continue;
    double inner = 0.0;
    for (double p : w_given_a[a])
      if (p > 0.0) inner += std::pow(p, 1.0 + s);
    acc += pa[a] * inner;
  }
  return acc;
}

// next assignment in a mixed-radix counter; false once wrapped around
bool next_assignment(std::vector<int>& digits, int radix) {
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (++digits[i] < radix) return true;
    digits[i] = 0;
  }
  return false;
}

}  // namespace

int pa_bins(double r) {
  const double v = std::exp(r);
  const double rounded = std::round(v);
  if (std::abs(v - rounded) < 1e-9 * std::max(1.0, v)) return static_cast<int>(rounded);
  return static_cast<int>(std::ceil(v));
}

VerifierReport pa_verify(const PAInstance& inst) {
  check_order(inst.s, "pa_verify");
  if (inst.P_XY.components().size() != 2)
    throw std::invalid_argument("pa_verify: P_XY must have components (X, Y)");
  const int nx = inst.P_XY.components()[0].size, ny = inst.P_XY.components()[1].size;
  const int bins = pa_bins(inst.R);
  if (bins < 1) throw std::invalid_argument("pa_verify: nonpositive bin count");
  const double s = inst.s;

  // P(y) and P(x|y)
  std::vector<double> py(static_cast<std::size_t>(ny), 0.0);
  std::vector<std::vector<double>> x_g_y(static_cast<std::size_t>(ny),
                                         std::vector<double>(static_cast<std::size_t>(nx), 0.0));
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y) {
      const double v = inst.P_XY.at({x, y});
      py[static_cast<std::size_t>(y)] += v;
      x_g_y[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = v;
    }
  for (int y = 0; y < ny; ++y)
    if (py[static_cast<std::size_t>(y)] > 0.0)
      for (auto& v : x_g_y[static_cast<std::size_t>(y)]) v /= py[static_cast<std::size_t>(y)];

  const std::size_t n_tables = guarded_pow(static_cast<std::size_t>(bins), nx, "pa_verify");
  const double table_w = 1.0 / static_cast<double>(n_tables);
  const double bins_pow_s = std::pow(static_cast<double>(bins), s);

  // tables outer, outcomes inner
  double lhs = 0.0;
  std::vector<int> f(static_cast<std::size_t>(nx), 0);
  std::vector<double> pm(static_cast<std::size_t>(bins));
  do {
    for (int y = 0; y < ny; ++y) {
      if (py[static_cast<std::size_t>(y)] == 0.0) continue;
      std::fill(pm.begin(), pm.end(), 0.0);
      for (int x = 0; x < nx; ++x)
        pm[static_cast<std::size_t>(f[static_cast<std::size_t>(x)])] +=
            x_g_y[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
      double inner = 0.0;
      for (int m = 0; m < bins; ++m)
        if (pm[static_cast<std::size_t>(m)] > 0.0)
          inner += std::pow(pm[static_cast<std::size_t>(m)], 1.0 + s);
      lhs += table_w * py[static_cast<std::size_t>(y)] * inner * bins_pow_s;
    }
  } while (next_assignment(f, bins));

  // outcomes outer, tables inner
  double lhs_alt = 0.0;
  for (int y = 0; y < ny; ++y) {
    if (py[static_cast<std::size_t>(y)] == 0.0) continue;
    double acc_y = 0.0;
    std::fill(f.begin(), f.end(), 0);
    do {
      std::fill(pm.begin(), pm.end(), 0.0);
      for (int x = 0; x < nx; ++x)
        pm[static_cast<std::size_t>(f[static_cast<std::size_t>(x)])] +=
            x_g_y[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
      for (int m = 0; m < bins; ++m)
        if (pm[static_cast<std::size_t>(m)] > 0.0)
          acc_y += table_w * std::pow(pm[static_cast<std::size_t>(m)], 1.0 + s);
    } while (next_assignment(f, bins));
    lhs_alt += py[static_cast<std::size_t>(y)] * acc_y * bins_pow_s;
  }

  const double h = info::cond_renyi_entropy(inst.P_XY, {1}, s);
  VerifierReport rep;
  rep.lhs_exact = lhs;
  rep.lhs_alt = lhs_alt;
  rep.rhs_bound = 1.0 + std::exp(-s * (h - inst.R));
  rep.slack = rep.rhs_bound - rep.lhs_exact;
  rep.enumeration_size = n_tables;
  return rep;
}

VerifierReport resolv_verify(const ResolvInstance& inst) {
  check_order(inst.s, "resolv_verify");
  const int nw = inst.P_W.size(), nx = inst.P_X.size(), ny = inst.P_YgX.output().size;
  const double s = inst.s;
  const std::size_t n_books = guarded_pow(static_cast<std::size_t>(nx), nw, "resolv_verify");

  auto chan = [&](int x, int y) { return inst.P_YgX.at(static_cast<std::size_t>(x), y); };

  double lhs = 0.0;
  bool lhs_inf = false;
  std::vector<int> c(static_cast<std::size_t>(nw), 0);
  do {
    double wt = 1.0;
    for (int w = 0; w < nw; ++w) wt *= inst.P_X(c[static_cast<std::size_t>(w)]);
    if (wt == 0.0) continue;
    for (int y = 0; y < ny; ++y) {
      double pyc = 0.0;
      for (int w = 0; w < nw; ++w) pyc += inst.P_W(w) * chan(c[static_cast<std::size_t>(w)], y);
      if (pyc == 0.0) continue;
      if (inst.Q_Y(y) == 0.0) {
        lhs_inf = true;
        break;
      }
      lhs += wt * std::pow(pyc, 1.0 + s) * std::pow(inst.Q_Y(y), -s);
    }
  } while (!lhs_inf && next_assignment(c, nx));

  // alternate order: y outer, codebooks inner
  double lhs_alt = 0.0;
  if (!lhs_inf) {
    for (int y = 0; y < ny; ++y) {
      double acc = 0.0;
      std::fill(c.begin(), c.end(), 0);
      do {
        double wt = 1.0;
        for (int w = 0; w < nw; ++w) wt *= inst.P_X(c[static_cast<std::size_t>(w)]);
        if (wt == 0.0) continue;
        double pyc = 0.0;
        for (int w = 0; w < nw; ++w) pyc += inst.P_W(w) * chan(c[static_cast<std::size_t>(w)], y);
        if (pyc > 0.0) acc += wt * std::pow(pyc, 1.0 + s);
      } while (next_assignment(c, nx));
      if (acc > 0.0) {
        if (inst.Q_Y(y) == 0.0) {
          lhs_inf = true;
          break;
        }
        lhs_alt += acc * std::pow(inst.Q_Y(y), -s);
      }
    }
  }

  // rhs: e^{sD(P_{Y|X}||Q|P_X)} e^{-sH_{1+s}(W)} + e^{sD(P_Y||Q)}
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(nx),
                                        std::vector<double>(static_cast<std::size_t>(ny)));
  std::vector<std::vector<double>> qrows = rows;
  std::vector<double> p_y(static_cast<std::size_t>(ny), 0.0);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y) {
      rows[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = chan(x, y);
      qrows[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = inst.Q_Y(y);
      p_y[static_cast<std::size_t>(y)] += inst.P_X(x) * chan(x, y);
    }
  double hterm = 0.0;
  for (int w = 0; w < nw; ++w)
    if (inst.P_W(w) > 0.0) hterm += std::pow(inst.P_W(w), 1.0 + s);

  VerifierReport rep;
  rep.lhs_exact = lhs_inf ? kInf : lhs;
  rep.lhs_alt = lhs_inf ? kInf : lhs_alt;
  rep.rhs_bound = exp_cond_div(inst.P_X.pmf(), rows, qrows, s) * hterm +
                  exp_div(p_y, inst.Q_Y.pmf(), s);
  rep.slack = rep.rhs_bound - rep.lhs_exact;
  rep.enumeration_size = n_books;
  return rep;
}

VerifierReport cond_resolv_verify(const CondResolvInstance& inst) {
  check_order(inst.s, "cond_resolv_verify");
  if (inst.P_AW.components().size() != 2)
    throw std::invalid_argument("cond_resolv_verify: P_AW must have components (A, W)");
  const int na = inst.P_AW.components()[0].size, nw = inst.P_AW.components()[1].size;
  const int nb = inst.P_B.size(), nx = inst.P_X.size(), ny = inst.P_YgXB.output().size;
  const double s = inst.s;
  const std::size_t n_books = guarded_pow(static_cast<std::size_t>(nx), nw, "cond_resolv_verify");

  std::vector<double> pa(static_cast<std::size_t>(na), 0.0);
  std::vector<std::vector<double>> w_g_a(static_cast<std::size_t>(na),
                                         std::vector<double>(static_cast<std::size_t>(nw), 0.0));
  for (int a = 0; a < na; ++a) {
    for (int w = 0; w < nw; ++w) {
      const double v = inst.P_AW.at({a, w});
      pa[static_cast<std::size_t>(a)] += v;
      w_g_a[static_cast<std::size_t>(a)][static_cast<std::size_t>(w)] = v;
    }
    if (pa[static_cast<std::size_t>(a)] > 0.0)
      for (auto& v : w_g_a[static_cast<std::size_t>(a)]) v /= pa[static_cast<std::size_t>(a)];
  }
  auto chan = [&](int x, int b, int y) { return inst.P_YgXB.at({x, b}, y); };
  auto qy = [&](int b, int y) { return inst.Q_YgB.at(static_cast<std::size_t>(b), y); };

  // codebooks outer
  double lhs = 0.0;
  bool lhs_inf = false;
  std::vector<int> c(static_cast<std::size_t>(nw), 0);
  do {
    double wt = 1.0;
    for (int w = 0; w < nw; ++w) wt *= inst.P_X(c[static_cast<std::size_t>(w)]);
    if (wt == 0.0) continue;
    for (int a = 0; a < na && !lhs_inf; ++a) {
      if (pa[static_cast<std::size_t>(a)] == 0.0) continue;
      for (int b = 0; b < nb && !lhs_inf; ++b) {
        if (inst.P_B(b) == 0.0) continue;
        for (int y = 0; y < ny; ++y) {
          double p = 0.0;
          for (int w = 0; w < nw; ++w)
            p += w_g_a[static_cast<std::size_t>(a)][static_cast<std::size_t>(w)] *
                 chan(c[static_cast<std::size_t>(w)], b, y);
          if (p == 0.0) continue;
          if (qy(b, y) == 0.0) {
            lhs_inf = true;
            break;
          }
          lhs += wt * pa[static_cast<std::size_t>(a)] * inst.P_B(b) * std::pow(p, 1.0 + s) *
                 std::pow(qy(b, y), -s);
        }
      }
    }
  } while (!lhs_inf && next_assignment(c, nx));

  // (a, b) outer: the expectation form used to lift the unconditional lemma
  double lhs_alt = 0.0;
  for (int a = 0; a < na && !lhs_inf; ++a) {
    if (pa[static_cast<std::size_t>(a)] == 0.0) continue;
    for (int b = 0; b < nb && !lhs_inf; ++b) {
      if (inst.P_B(b) == 0.0) continue;
      double per_ab = 0.0;
      std::fill(c.begin(), c.end(), 0);
      do {
        double wt = 1.0;
        for (int w = 0; w < nw; ++w) wt *= inst.P_X(c[static_cast<std::size_t>(w)]);
        if (wt == 0.0) continue;
        for (int y = 0; y < ny; ++y) {
          double p = 0.0;
          for (int w = 0; w < nw; ++w)
            p += w_g_a[static_cast<std::size_t>(a)][static_cast<std::size_t>(w)] *
                 chan(c[static_cast<std::size_t>(w)], b, y);
          if (p == 0.0) continue;
          if (qy(b, y) == 0.0) {
            lhs_inf = true;
            break;
          }
          per_ab += wt * std::pow(p, 1.0 + s) * std::pow(qy(b, y), -s);
        }
      } while (!lhs_inf && next_assignment(c, nx));
      lhs_alt += pa[static_cast<std::size_t>(a)] * inst.P_B(b) * per_ab;
    }
  }

  // rhs terms
  std::vector<double> pxb;
  std::vector<std::vector<double>> rows, qrows;
  for (int x = 0; x < nx; ++x)
    for (int b = 0; b < nb; ++b) {
      pxb.push_back(inst.P_X(x) * inst.P_B(b));
      std::vector<double> r(static_cast<std::size_t>(ny)), q(static_cast<std::size_t>(ny));
      for (int y = 0; y < ny; ++y) {
        r[static_cast<std::size_t>(y)] = chan(x, b, y);
        q[static_cast<std::size_t>(y)] = qy(b, y);
      }
      rows.push_back(std::move(r));
      qrows.push_back(std::move(q));
    }
  std::vector<double> pb_flat;
  std::vector<std::vector<double>> yrows, yqrows;
  for (int b = 0; b < nb; ++b) {
    pb_flat.push_back(inst.P_B(b));
    std::vector<double> r(static_cast<std::size_t>(ny), 0.0), q(static_cast<std::size_t>(ny));
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) r[static_cast<std::size_t>(y)] += inst.P_X(x) * chan(x, b, y);
      q[static_cast<std::size_t>(y)] = qy(b, y);
    }
    yrows.push_back(std::move(r));
    yqrows.push_back(std::move(q));
  }

  VerifierReport rep;
  rep.lhs_exact = lhs_inf ? kInf : lhs;
  rep.lhs_alt = lhs_inf ? kInf : lhs_alt;
  rep.rhs_bound = exp_cond_div(pxb, rows, qrows, s) * exp_neg_cond_renyi_entropy(pa, w_g_a, s) +
                  exp_cond_div(pb_flat, yrows, yqrows, s);
  rep.slack = rep.rhs_bound - rep.lhs_exact;
  rep.enumeration_size = n_books;
  return rep;
}

namespace {

// shared enumeration core for the superposition verifiers; cond == false uses
// singleton A and B
struct SuperposCore {
  int nw, nwh, nx, nxh, ny, na, nb;
  std::vector<double> pa;                         // P(A)
  std::vector<std::vector<double>> wpair_g_a;     // P(w, wh | a), flattened w*nwh+wh
  std::vector<double> pb;
  std::vector<double> px;                         // coarse marginal
  std::vector<std::vector<double>> xh_g_x;        // fine conditional
  // chan(x, xh, b, y), q(b, y)
  std::function<double(int, int, int, int)> chan;
  std::function<double(int, int)> q;

  // outputs
  double lhs = 0.0, lhs_alt = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  bool inf = false;
  std::size_t n_books = 0;

  void run(double s) {
    const std::size_t n_coarse = guarded_pow(static_cast<std::size_t>(nx), nw, "superpos_verify");
    const std::size_t n_fine =
        guarded_pow(static_cast<std::size_t>(nxh), nw * nwh, "superpos_verify");
    if (static_cast<double>(n_coarse) * static_cast<double>(n_fine) >
        static_cast<double>(tol::kCapacityGuard))
      throw CapacityError("superpos_verify: codebook enumeration exceeds the capacity guard");
    n_books = n_coarse * n_fine;

    std::vector<int> cw(static_cast<std::size_t>(nw), 0);
    std::vector<int> cf(static_cast<std::size_t>(nw * nwh), 0);
    std::vector<double> pvals(static_cast<std::size_t>(nw * nwh));
    do {
      double wt_c = 1.0;
      for (int w = 0; w < nw; ++w) wt_c *= px[static_cast<std::size_t>(cw[static_cast<std::size_t>(w)])];
      if (wt_c == 0.0) continue;
      std::fill(cf.begin(), cf.end(), 0);
      do {
        double wt = wt_c;
        for (int w = 0; w < nw && wt > 0.0; ++w)
          for (int wh = 0; wh < nwh; ++wh)
            wt *= xh_g_x[static_cast<std::size_t>(cw[static_cast<std::size_t>(w)])]
                        [static_cast<std::size_t>(cf[static_cast<std::size_t>(w * nwh + wh)])];
        if (wt == 0.0) continue;
        for (int a = 0; a < na && !inf; ++a) {
          if (pa[static_cast<std::size_t>(a)] == 0.0) continue;
          for (int b = 0; b < nb && !inf; ++b) {
            if (pb[static_cast<std::size_t>(b)] == 0.0) continue;
            const double wab = wt * pa[static_cast<std::size_t>(a)] * pb[static_cast<std::size_t>(b)];
            for (int y = 0; y < ny && !inf; ++y) {
              // per-(w, wh) transmitted-output probabilities
              for (int w = 0; w < nw; ++w)
                for (int wh = 0; wh < nwh; ++wh)
                  pvals[static_cast<std::size_t>(w * nwh + wh)] =
                      chan(cw[static_cast<std::size_t>(w)],
                           cf[static_cast<std::size_t>(w * nwh + wh)], b, y);
              double pyc = 0.0;
              for (int w = 0; w < nw; ++w)
                for (int wh = 0; wh < nwh; ++wh)
                  pyc += wpair_g_a[static_cast<std::size_t>(a)]
                                  [static_cast<std::size_t>(w * nwh + wh)] *
                         pvals[static_cast<std::size_t>(w * nwh + wh)];
              const double qv = q(b, y);
              if (pyc > 0.0 && qv == 0.0) {
                inf = true;
                break;
              }
              if (pyc > 0.0) {
                const double qs = std::pow(qv, -s);
                lhs += wab * std::pow(pyc, 1.0 + s) * qs;
                // L-decomposition path terms
                for (int w = 0; w < nw; ++w)
                  for (int wh = 0; wh < nwh; ++wh) {
                    const double pwwh = wpair_g_a[static_cast<std::size_t>(a)]
                                                 [static_cast<std::size_t>(w * nwh + wh)];
                    if (pwwh == 0.0) continue;
                    const double own = pvals[static_cast<std::size_t>(w * nwh + wh)];
                    if (own == 0.0) continue;
                    double same_w = 0.0, other_w = 0.0;
                    for (int w2 = 0; w2 < nw; ++w2)
                      for (int wh2 = 0; wh2 < nwh; ++wh2) {
                        if (w2 == w && wh2 == wh) continue;
                        const double contrib =
                            wpair_g_a[static_cast<std::size_t>(a)]
                                     [static_cast<std::size_t>(w2 * nwh + wh2)] *
                            pvals[static_cast<std::size_t>(w2 * nwh + wh2)];
                        if (w2 == w)
                          same_w += contrib;
                        else
                          other_w += contrib;
                      }
                    const double base = wab * pwwh * own * qs;
                    l1 += base * std::pow(pwwh * own, s);
                    if (same_w > 0.0) l2 += base * std::pow(same_w, s);
                    if (other_w > 0.0) l3 += base * std::pow(other_w, s);
                  }
              }
            }
          }
        }
      } while (!inf && next_assignment(cf, nxh));
    } while (!inf && next_assignment(cw, nx));

    // alternate order for the identity check: (a, b) outer, codebooks inner
    if (!inf) {
      for (int a = 0; a < na; ++a) {
        if (pa[static_cast<std::size_t>(a)] == 0.0) continue;
        for (int b = 0; b < nb; ++b) {
          if (pb[static_cast<std::size_t>(b)] == 0.0) continue;
          double per_ab = 0.0;
          std::fill(cw.begin(), cw.end(), 0);
          do {
            double wt_c = 1.0;
            for (int w = 0; w < nw; ++w)
              wt_c *= px[static_cast<std::size_t>(cw[static_cast<std::size_t>(w)])];
            if (wt_c == 0.0) continue;
            std::fill(cf.begin(), cf.end(), 0);
            do {
              double wt = wt_c;
              for (int w = 0; w < nw && wt > 0.0; ++w)
                for (int wh = 0; wh < nwh; ++wh)
                  wt *= xh_g_x[static_cast<std::size_t>(cw[static_cast<std::size_t>(w)])]
                              [static_cast<std::size_t>(cf[static_cast<std::size_t>(w * nwh + wh)])];
              if (wt == 0.0) continue;
              for (int y = 0; y < ny; ++y) {
                double pyc = 0.0;
                for (int w = 0; w < nw; ++w)
                  for (int wh = 0; wh < nwh; ++wh)
                    pyc += wpair_g_a[static_cast<std::size_t>(a)]
                                    [static_cast<std::size_t>(w * nwh + wh)] *
                           chan(cw[static_cast<std::size_t>(w)],
                                cf[static_cast<std::size_t>(w * nwh + wh)], b, y);
                if (pyc > 0.0) per_ab += wt * std::pow(pyc, 1.0 + s) * std::pow(q(b, y), -s);
              }
            } while (next_assignment(cf, nxh));
          } while (next_assignment(cw, nx));
          lhs_alt += pa[static_cast<std::size_t>(a)] * pb[static_cast<std::size_t>(b)] * per_ab;
        }
      }
    }
  }
};

}  // namespace

VerifierReport superpos_verify(const SuperposInstance& inst) {
  check_order(inst.s, "superpos_verify");
  if (inst.P_WWhat.components().size() != 2 || inst.P_XXhat.components().size() != 2)
    throw std::invalid_argument("superpos_verify: P_WWhat and P_XXhat must be pair joints");
  const int nw = inst.P_WWhat.components()[0].size, nwh = inst.P_WWhat.components()[1].size;
  const int nx = inst.P_XXhat.components()[0].size, nxh = inst.P_XXhat.components()[1].size;
  const int ny = inst.P_YgXXhat.output().size;
  const double s = inst.s;

  SuperposCore core;
  core.nw = nw;
  core.nwh = nwh;
  core.nx = nx;
  core.nxh = nxh;
  core.ny = ny;
  core.na = 1;
  core.nb = 1;
  core.pa = {1.0};
  core.pb = {1.0};
  core.wpair_g_a = {std::vector<double>(inst.P_WWhat.pmf().begin(), inst.P_WWhat.pmf().end())};
  core.px.assign(static_cast<std::size_t>(nx), 0.0);
  core.xh_g_x.assign(static_cast<std::size_t>(nx),
                     std::vector<double>(static_cast<std::size_t>(nxh), 0.0));
  for (int x = 0; x < nx; ++x) {
    for (int xh = 0; xh < nxh; ++xh) {
      const double v = inst.P_XXhat.at({x, xh});
      core.px[static_cast<std::size_t>(x)] += v;
      core.xh_g_x[static_cast<std::size_t>(x)][static_cast<std::size_t>(xh)] = v;
    }
    if (core.px[static_cast<std::size_t>(x)] > 0.0)
      for (auto& v : core.xh_g_x[static_cast<std::size_t>(x)]) v /= core.px[static_cast<std::size_t>(x)];
  }
  core.chan = [&inst](int x, int xh, int, int y) { return inst.P_YgXXhat.at({x, xh}, y); };
  core.q = [&inst](int, int y) { return inst.Q_Y(y); };
  core.run(s);

  // closed forms
  double ewwh = 0.0, ew = 0.0;
  std::vector<double> pw(static_cast<std::size_t>(nw), 0.0);
  for (int w = 0; w < nw; ++w)
    for (int wh = 0; wh < nwh; ++wh) {
      const double v = inst.P_WWhat.at({w, wh});
      pw[static_cast<std::size_t>(w)] += v;
      if (v > 0.0) ewwh += std::pow(v, 1.0 + s);
    }
  for (double v : pw)
    if (v > 0.0) ew += std::pow(v, 1.0 + s);

  std::vector<std::vector<double>> pair_rows, pair_q, coarse_rows, coarse_q;
  std::vector<double> pxxh, p_y(static_cast<std::size_t>(ny), 0.0);
  for (int x = 0; x < nx; ++x)
    for (int xh = 0; xh < nxh; ++xh) {
      pxxh.push_back(inst.P_XXhat.at({x, xh}));
      std::vector<double> r(static_cast<std::size_t>(ny)), q(static_cast<std::size_t>(ny));
      for (int y = 0; y < ny; ++y) {
        r[static_cast<std::size_t>(y)] = inst.P_YgXXhat.at({x, xh}, y);
        q[static_cast<std::size_t>(y)] = inst.Q_Y(y);
        p_y[static_cast<std::size_t>(y)] += inst.P_XXhat.at({x, xh}) * r[static_cast<std::size_t>(y)];
      }
      pair_rows.push_back(std::move(r));
      pair_q.push_back(std::move(q));
    }
  for (int x = 0; x < nx; ++x) {
    std::vector<double> r(static_cast<std::size_t>(ny), 0.0), q(static_cast<std::size_t>(ny));
    for (int y = 0; y < ny; ++y) {
      for (int xh = 0; xh < nxh; ++xh)
        r[static_cast<std::size_t>(y)] +=
            core.xh_g_x[static_cast<std::size_t>(x)][static_cast<std::size_t>(xh)] *
            inst.P_YgXXhat.at({x, xh}, y);
      q[static_cast<std::size_t>(y)] = inst.Q_Y(y);
    }
    coarse_rows.push_back(std::move(r));
    coarse_q.push_back(std::move(q));
  }

  VerifierReport rep;
  rep.lhs_exact = core.inf ? kInf : core.lhs;
  rep.lhs_alt = core.inf ? kInf : core.lhs_alt;
  rep.l1 = core.l1;
  rep.l2 = core.l2;
  rep.l3 = core.l3;
  rep.l1_closed = exp_cond_div(pxxh, pair_rows, pair_q, s) * ewwh;
  rep.l2_bound = exp_cond_div(core.px, coarse_rows, coarse_q, s) * ew;
  rep.l3_bound = exp_div(p_y, inst.Q_Y.pmf(), s);
  rep.rhs_bound = rep.l1_closed + rep.l2_bound + rep.l3_bound;
  rep.slack = rep.rhs_bound - rep.lhs_exact;
  rep.enumeration_size = core.n_books;
  return rep;
}

VerifierReport cond_superpos_verify(const CondSuperposInstance& inst) {
  check_order(inst.s, "cond_superpos_verify");
  if (inst.P_AWWhat.components().size() != 3 || inst.P_XXhat.components().size() != 2)
    throw std::invalid_argument("cond_superpos_verify: joints have wrong arity");
  const int na = inst.P_AWWhat.components()[0].size;
  const int nw = inst.P_AWWhat.components()[1].size, nwh = inst.P_AWWhat.components()[2].size;
  const int nx = inst.P_XXhat.components()[0].size, nxh = inst.P_XXhat.components()[1].size;
  const int nb = inst.P_B.size(), ny = inst.P_YgXXhatB.output().size;
  const double s = inst.s;

  SuperposCore core;
  core.nw = nw;
  core.nwh = nwh;
  core.nx = nx;
  core.nxh = nxh;
  core.ny = ny;
  core.na = na;
  core.nb = nb;
  core.pb = inst.P_B.pmf();
  core.pa.assign(static_cast<std::size_t>(na), 0.0);
  core.wpair_g_a.assign(static_cast<std::size_t>(na),
                        std::vector<double>(static_cast<std::size_t>(nw * nwh), 0.0));
  for (int a = 0; a < na; ++a) {
    for (int w = 0; w < nw; ++w)
      for (int wh = 0; wh < nwh; ++wh) {
        const double v = inst.P_AWWhat.at({a, w, wh});
        core.pa[static_cast<std::size_t>(a)] += v;
        core.wpair_g_a[static_cast<std::size_t>(a)][static_cast<std::size_t>(w * nwh + wh)] = v;
      }
    if (core.pa[static_cast<std::size_t>(a)] > 0.0)
      for (auto& v : core.wpair_g_a[static_cast<std::size_t>(a)])
        v /= core.pa[static_cast<std::size_t>(a)];
  }
  core.px.assign(static_cast<std::size_t>(nx), 0.0);
  core.xh_g_x.assign(static_cast<std::size_t>(nx),
                     std::vector<double>(static_cast<std::size_t>(nxh), 0.0));
  for (int x = 0; x < nx; ++x) {
    for (int xh = 0; xh < nxh; ++xh) {
      const double v = inst.P_XXhat.at({x, xh});
      core.px[static_cast<std::size_t>(x)] += v;
      core.xh_g_x[static_cast<std::size_t>(x)][static_cast<std::size_t>(xh)] = v;
    }
    if (core.px[static_cast<std::size_t>(x)] > 0.0)
      for (auto& v : core.xh_g_x[static_cast<std::size_t>(x)]) v /= core.px[static_cast<std::size_t>(x)];
  }
  core.chan = [&inst](int x, int xh, int b, int y) { return inst.P_YgXXhatB.at({x, xh, b}, y); };
  core.q = [&inst](int b, int y) { return inst.Q_YgB.at(static_cast<std::size_t>(b), y); };
  core.run(s);

  // rhs terms with conditional Renyi entropies of (W, What) given A
  std::vector<std::vector<double>> w_g_a(static_cast<std::size_t>(na),
                                         std::vector<double>(static_cast<std::size_t>(nw), 0.0));
  for (int a = 0; a < na; ++a)
    for (int w = 0; w < nw; ++w)
      for (int wh = 0; wh < nwh; ++wh)
        w_g_a[static_cast<std::size_t>(a)][static_cast<std::size_t>(w)] +=
            core.wpair_g_a[static_cast<std::size_t>(a)][static_cast<std::size_t>(w * nwh + wh)];

  std::vector<double> pxxhb, pxb, pb_flat;
  std::vector<std::vector<double>> rows_pair, q_pair, rows_coarse, q_coarse, rows_b, q_b;
  for (int x = 0; x < nx; ++x)
    for (int xh = 0; xh < nxh; ++xh)
      for (int b = 0; b < nb; ++b) {
        pxxhb.push_back(inst.P_XXhat.at({x, xh}) * inst.P_B(b));
        std::vector<double> r(static_cast<std::size_t>(ny)), q(static_cast<std::size_t>(ny));
        for (int y = 0; y < ny; ++y) {
          r[static_cast<std::size_t>(y)] = inst.P_YgXXhatB.at({x, xh, b}, y);
          q[static_cast<std::size_t>(y)] = inst.Q_YgB.at(static_cast<std::size_t>(b), y);
        }
        rows_pair.push_back(std::move(r));
        q_pair.push_back(std::move(q));
      }
  for (int x = 0; x < nx; ++x)
    for (int b = 0; b < nb; ++b) {
      pxb.push_back(core.px[static_cast<std::size_t>(x)] * inst.P_B(b));
      std::vector<double> r(static_cast<std::size_t>(ny), 0.0), q(static_cast<std::size_t>(ny));
      for (int y = 0; y < ny; ++y) {
        for (int xh = 0; xh < nxh; ++xh)
          r[static_cast<std::size_t>(y)] +=
              core.xh_g_x[static_cast<std::size_t>(x)][static_cast<std::size_t>(xh)] *
              inst.P_YgXXhatB.at({x, xh, b}, y);
        q[static_cast<std::size_t>(y)] = inst.Q_YgB.at(static_cast<std::size_t>(b), y);
      }
      rows_coarse.push_back(std::move(r));
      q_coarse.push_back(std::move(q));
    }
  for (int b = 0; b < nb; ++b) {
    pb_flat.push_back(inst.P_B(b));
    std::vector<double> r(static_cast<std::size_t>(ny), 0.0), q(static_cast<std::size_t>(ny));
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x)
        for (int xh = 0; xh < nxh; ++xh)
          r[static_cast<std::size_t>(y)] += inst.P_XXhat.at({x, xh}) * inst.P_YgXXhatB.at({x, xh, b}, y);
      q[static_cast<std::size_t>(y)] = inst.Q_YgB.at(static_cast<std::size_t>(b), y);
    }
    rows_b.push_back(std::move(r));
    q_b.push_back(std::move(q));
  }

  VerifierReport rep;
  rep.lhs_exact = core.inf ? kInf : core.lhs;
  rep.lhs_alt = core.inf ? kInf : core.lhs_alt;
  rep.l1 = core.l1;
  rep.l2 = core.l2;
  rep.l3 = core.l3;
  rep.l1_closed = exp_cond_div(pxxhb, rows_pair, q_pair, s) *
                  exp_neg_cond_renyi_entropy(core.pa, core.wpair_g_a, s);
  rep.l2_bound =
      exp_cond_div(pxb, rows_coarse, q_coarse, s) * exp_neg_cond_renyi_entropy(core.pa, w_g_a, s);
  rep.l3_bound = exp_cond_div(pb_flat, rows_b, q_b, s);
  rep.rhs_bound = rep.l1_closed + rep.l2_bound + rep.l3_bound;
  rep.slack = rep.rhs_bound - rep.lhs_exact;
  rep.enumeration_size = core.n_books;
  return rep;
}

}  // namespace chansynth::oneshot
