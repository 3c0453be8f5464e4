#include "chansynth/bounds/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace chansynth::bounds {

namespace {

// axis ids for the point-to-point problem
enum P2PAxis { pX = 0, pU = 1, pV = 2, pB = 3, pY = 4 };
// axis ids for the broadcast problem
enum BcAxis { bX = 0, bU = 1, bUh = 2, bV = 3, bB = 4, bY = 5, bZ = 6 };
// axis ids for the interactive problem
enum InAxis { iS = 0, iX = 1, iU = 2, iV = 3, iA = 4, iB = 5, iY = 6, iZ = 7 };

std::vector<double> uniform_rows(std::size_t rows, std::size_t cols) {
  return std::vector<double>(rows * cols, 1.0 / static_cast<double>(cols));
}

std::vector<double> delta_rows(std::size_t rows, std::size_t cols, std::size_t hot) {
  std::vector<double> t(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) t[r * cols + hot] = 1.0;
  return t;
}

NamedPoint named_point(const FactorProblem& prob, Point point) {
  NamedPoint np;
  for (int b = 0; b < prob.num_blocks(); ++b) {
    np.names.push_back(prob.block_name(b));
    np.shapes.push_back(prob.block_shape(b));
  }
  np.tables = std::move(point);
  return np;
}

BoundResult to_result(const FactorProblem& prob, SolveResult sr, bool assumption_ok) {
  BoundResult r;
  r.value = sr.value;
  r.constraint_slack = sr.constraint_slack;
  r.restarts_used = sr.restarts_used;
  r.certified = sr.certified;
  r.assumption_ok = assumption_ok;
  if (sr.certified) r.argmin = named_point(prob, std::move(sr.argmin));
  return r;
}

// masks output rows of one block to an allowed symbol set, renormalizing
void mask_block_rows(std::vector<double>& table, std::size_t cols,
                     const std::vector<int>& allowed) {
  if (allowed.empty() || allowed.size() == cols) return;
  const std::size_t rows = table.size() / cols;
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const bool ok = std::find(allowed.begin(), allowed.end(), static_cast<int>(c)) != allowed.end();
      if (!ok) table[r * cols + c] = 0.0;
      sum += table[r * cols + c];
    }
    if (sum <= 0.0) {
      for (int c : allowed) table[r * cols + static_cast<std::size_t>(c)] = 1.0 / static_cast<double>(allowed.size());
    } else {
      for (std::size_t c = 0; c < cols; ++c) table[r * cols + c] /= sum;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// targets

void P2PTarget::validate() const {
  if (B_size < 2) throw ConfigError("P2PTarget: |B| must be >= 2");
  if (H_W < 0.0) throw ConfigError("P2PTarget: H_W must be >= 0");
  if (pi_YgX.inputs().size() != 1 || pi_YgX.inputs()[0].size != pi_X.size())
    throw ConfigError("P2PTarget: channel input does not match source alphabet");
}

void BroadcastTarget::validate() const {
  if (B_size < 2) throw ConfigError("BroadcastTarget: |B| must be >= 2");
  if (H_W < 0.0 || H_What < 0.0) throw ConfigError("BroadcastTarget: entropies must be >= 0");
  if (pi_YZgX.inputs().size() != 1 || pi_YZgX.inputs()[0].size != pi_X.size())
    throw ConfigError("BroadcastTarget: channel input does not match source alphabet");
  if (pi_YZgX.output().size != Y_size * Z_size)
    throw ConfigError("BroadcastTarget: output alphabet is not |Y|*|Z|");
}

void InteractiveTarget::validate() const {
  if (A_size < 2 || B_size < 2) throw ConfigError("InteractiveTarget: |A|,|B| must be >= 2");
  if (H_W < 0.0) throw ConfigError("InteractiveTarget: H_W must be >= 0");
  if (pi_SX.components().size() != 2)
    throw ConfigError("InteractiveTarget: source must have components (S, X)");
  if (pi_YZgSX.inputs().size() != 2 || pi_YZgSX.inputs()[0].size != s_size() ||
      pi_YZgSX.inputs()[1].size != x_size())
    throw ConfigError("InteractiveTarget: channel inputs do not match source components");
  if (pi_YZgSX.output().size != Y_size * Z_size)
    throw ConfigError("InteractiveTarget: output alphabet is not |Y|*|Z|");
}

AuxShape resolve_shape_p2p(const P2PTarget& t, AuxShape s) {
  if (s.V_size <= 0) s.V_size = 2;
  if (s.U_size <= 0) s.U_size = 2 * t.x_size() * t.y_size();
  s.Uhat_size = 0;
  return s;
}

AuxShape resolve_shape_broadcast(const BroadcastTarget& t, AuxShape s, bool upper_variant) {
  const int base = t.x_size() * t.Y_size * t.Z_size;
  if (s.V_size <= 0) s.V_size = 3;
  if (s.U_size <= 0) s.U_size = 3 * (base + 1);
  if (s.Uhat_size <= 0)
    s.Uhat_size = upper_variant ? 3 * (base + 1) * (t.B_size * base + 1)
                                : 3 * (base + 1) * t.B_size * base;
  return s;
}

AuxShape resolve_shape_interactive(const InteractiveTarget& t, AuxShape s) {
  if (s.V_size <= 0) s.V_size = 2;
  if (s.U_size <= 0) s.U_size = 2 * t.s_size() * t.x_size() * t.Y_size * t.Z_size;
  s.Uhat_size = 0;
  return s;
}

// ---------------------------------------------------------------------------
// assumptions

std::vector<int> admissible_outputs(const Dist& pi, const Kernel& chan) {
  std::vector<int> out;
  for (int y = 0; y < chan.output().size; ++y) {
    bool ok = true;
    for (int x = 0; x < pi.size() && ok; ++x)
      if (pi(x) > 0.0 && chan.at(static_cast<std::size_t>(x), y) <= 0.0) ok = false;
    if (ok) out.push_back(y);
  }
  return out;
}

bool check_assumption1(const P2PTarget& t) {
  return t.B_size >= 2 && !admissible_outputs(t.pi_X, t.pi_YgX).empty();
}

bool check_assumption_broadcast(const BroadcastTarget& t) {
  return t.B_size >= 2 && !admissible_outputs(t.pi_X, t.pi_YZgX).empty();
}

bool check_assumption_interactive(const InteractiveTarget& t) {
  return t.A_size >= 2 && t.B_size >= 2 &&
         !admissible_outputs(t.pi_SX.flatten(), t.pi_YZgSX).empty();
}

namespace {

double constant_output_divergence(const Dist& pi, const Kernel& chan, int y) {
  double d = 0.0;
  for (int x = 0; x < pi.size(); ++x) {
    if (pi(x) == 0.0) continue;
    d -= pi(x) * std::log(chan.at(static_cast<std::size_t>(x), y));
  }
  return d;
}

double best_constant_output(const Dist& pi, const Kernel& chan, int* best_y = nullptr) {
  const auto adm = admissible_outputs(pi, chan);
  if (adm.empty()) throw ConfigError("lemma1_upper_bound: no admissible output symbol");
  double best = kInf;
  for (int y : adm) {
    const double d = constant_output_divergence(pi, chan, y);
    if (d < best) {
      best = d;
      if (best_y) *best_y = y;
    }
  }
  return best;
}

}  // namespace

double lemma1_upper_bound(const P2PTarget& t) { return best_constant_output(t.pi_X, t.pi_YgX); }

double lemma1_upper_bound_broadcast(const BroadcastTarget& t) {
  return best_constant_output(t.pi_X, t.pi_YZgX);
}

double lemma1_upper_bound_interactive(const InteractiveTarget& t) {
  return best_constant_output(t.pi_SX.flatten(), t.pi_YZgSX);
}

// ---------------------------------------------------------------------------
// convex output-law helpers

OutputDistResult min_output_divergence(const Dist& pi_X, const Kernel& chan) {
  const int nx = pi_X.size(), ny = chan.output().size;
  std::vector<Factor> factors(2);
  factors[0] = {"pi_X", {}, {0}, true, pi_X.pmf()};
  factors[1] = {"Q_Y", {}, {1}, false, {}};
  Objective obj{{0}, {1}, {0, 1}, chan.table()};
  FactorProblem prob({nx, ny}, std::move(factors), std::move(obj), {});

  const auto adm = admissible_outputs(pi_X, chan);
  prob.repair = [ny, adm](Point& p) { mask_block_rows(p[0], static_cast<std::size_t>(ny), adm); };

  OptimizerSettings st;
  st.restarts = 4;
  st.max_iters = 1500;
  st.penalty_schedule = {1.0};
  std::vector<Point> warm;
  for (int y : adm) warm.push_back({delta_rows(1, static_cast<std::size_t>(ny), static_cast<std::size_t>(y))});
  const SolveResult sr = prob.solve(st, warm);
  if (!sr.certified) throw ConfigError("min_output_divergence: no finite output law exists");
  return {Dist(chan.output(), sr.argmin[0]), sr.value};
}

ProductOutputResult min_product_output_divergence(const Dist& pi, const Kernel& chan, int ny,
                                                  int nz) {
  if (chan.output().size != ny * nz)
    throw std::invalid_argument("min_product_output_divergence: output is not |Y|*|Z|");
  const int nx = pi.size();
  std::vector<Factor> factors(3);
  factors[0] = {"pi_X", {}, {0}, true, pi.pmf()};
  factors[1] = {"Q_Y", {}, {1}, false, {}};
  factors[2] = {"Q_Z", {}, {2}, false, {}};
  Objective obj{{0}, {1, 2}, {0, 1, 2}, chan.table()};
  FactorProblem prob({nx, ny, nz}, std::move(factors), std::move(obj), {});

  const auto adm = admissible_outputs(pi, chan);
  std::vector<int> adm_y, adm_z;
  for (int p : adm) {
    const int y = p / nz, z = p % nz;
    if (std::find(adm_y.begin(), adm_y.end(), y) == adm_y.end()) adm_y.push_back(y);
    if (std::find(adm_z.begin(), adm_z.end(), z) == adm_z.end()) adm_z.push_back(z);
  }
  prob.repair = [ny, nz, adm_y, adm_z](Point& p) {
    mask_block_rows(p[0], static_cast<std::size_t>(ny), adm_y);
    mask_block_rows(p[1], static_cast<std::size_t>(nz), adm_z);
  };

  OptimizerSettings st;
  st.restarts = 8;
  st.max_iters = 1200;
  st.penalty_schedule = {1.0};
  std::vector<Point> warm;
  for (int p : adm)
    warm.push_back({delta_rows(1, static_cast<std::size_t>(ny), static_cast<std::size_t>(p / nz)),
                    delta_rows(1, static_cast<std::size_t>(nz), static_cast<std::size_t>(p % nz))});
  const SolveResult sr = prob.solve(st, warm);
  if (!sr.certified)
    throw ConfigError("min_product_output_divergence: no finite product output law exists");
  return {Dist(Alphabet(ny, "Y"), sr.argmin[0]), Dist(Alphabet(nz, "Z"), sr.argmin[1]), sr.value};
}

// ---------------------------------------------------------------------------
// symbol-by-symbol bound

namespace {

FactorProblem build_symbolwise_problem(const P2PTarget& t) {
  const int nx = t.x_size(), nb = t.B_size, ny = t.y_size();
  std::vector<Factor> factors(3);
  factors[0] = {"pi_X", {}, {0}, true, t.pi_X.pmf()};
  factors[1] = {"P_B|X", {0}, {1}, false, {}};
  factors[2] = {"P_Y|B", {1}, {2}, false, {}};
  Objective obj{{0}, {2}, {0, 2}, t.pi_YgX.table()};
  return FactorProblem({nx, nb, ny}, std::move(factors), std::move(obj), {});
}

}  // namespace

SymbolwiseResult delta_symbolwise(const P2PTarget& t, const OptimizerSettings& st) {
  // |B| = 1 is allowed here as a diagnostic (B constant forces Y independent
  // of X); the sequential bounds themselves require |B| >= 2
  if (t.B_size < 1) throw ConfigError("delta_symbolwise: |B| must be >= 1");
  if (t.pi_YgX.inputs().size() != 1 || t.pi_YgX.inputs()[0].size != t.pi_X.size())
    throw ConfigError("delta_symbolwise: channel input does not match source alphabet");
  const int nx = t.x_size(), nb = t.B_size, ny = t.y_size();
  FactorProblem prob = build_symbolwise_problem(t);
  const auto adm = admissible_outputs(t.pi_X, t.pi_YgX);
  prob.repair = [ny, adm](Point& p) { mask_block_rows(p[1], static_cast<std::size_t>(ny), adm); };

  OptimizerSettings est = st;
  est.penalty_schedule = {1.0};
  std::vector<Point> warm;
  // relay through B when it is wide enough
  if (nb >= nx) {
    std::vector<double> pb(static_cast<std::size_t>(nx) * nb, 0.0);
    for (int x = 0; x < nx; ++x) pb[static_cast<std::size_t>(x) * nb + static_cast<std::size_t>(x)] = 1.0;
    std::vector<double> py(static_cast<std::size_t>(nb) * ny);
    for (int b = 0; b < nb; ++b)
      for (int y = 0; y < ny; ++y)
        py[static_cast<std::size_t>(b) * ny + static_cast<std::size_t>(y)] =
            t.pi_YgX.at(static_cast<std::size_t>(std::min(b, nx - 1)), y);
    warm.push_back({std::move(pb), std::move(py)});
  }
  // constant B with the best fixed output law
  {
    const auto q = min_output_divergence(t.pi_X, t.pi_YgX);
    std::vector<double> py(static_cast<std::size_t>(nb) * ny);
    for (int b = 0; b < nb; ++b)
      for (int y = 0; y < ny; ++y) py[static_cast<std::size_t>(b) * ny + static_cast<std::size_t>(y)] = q.q(y);
    warm.push_back({delta_rows(static_cast<std::size_t>(nx), static_cast<std::size_t>(nb), 0), std::move(py)});
  }

  const SolveResult sr = prob.solve(est, warm);
  SymbolwiseResult res{
      sr.value,
      Kernel({t.pi_X.alphabet()}, Alphabet(nb, "B"),
             sr.certified ? sr.argmin[0] : uniform_rows(static_cast<std::size_t>(nx), static_cast<std::size_t>(nb))),
      Kernel({Alphabet(nb, "B")}, t.pi_YgX.output(),
             sr.certified ? sr.argmin[1] : uniform_rows(static_cast<std::size_t>(nb), static_cast<std::size_t>(ny)))};
  return res;
}

// ---------------------------------------------------------------------------
// Psi and the point-to-point bound

namespace {

FactorProblem build_psi_problem(const P2PTarget& t, double tt, const AuxShape& shape) {
  const int nx = t.x_size(), ny = t.y_size(), nb = t.B_size;
  const int nu = shape.U_size, nv = shape.V_size;
  std::vector<Factor> factors(4);
  factors[0] = {"pi_X", {}, {pX}, true, t.pi_X.pmf()};
  factors[1] = {"P_UV", {}, {pU, pV}, false, {}};
  factors[2] = {"P_B|XUV", {pX, pU, pV}, {pB}, false, {}};
  factors[3] = {"P_Y|BUV", {pB, pU, pV}, {pY}, false, {}};
  Objective obj{{pX, pV}, {pY}, {pX, pY}, t.pi_YgX.table()};
  Constraint c;
  c.terms = {{+1.0, {pU}, {pV}}, {-1.0, {pB, pU}, {pX, pY, pV}}};
  c.constant = -tt;
  return FactorProblem({nx, nu, nv, nb, ny}, std::move(factors), std::move(obj), {c});
}

// deterministic feasible starting points for Psi
std::vector<Point> psi_special_candidates(const P2PTarget& t, double tt, const AuxShape& shape,
                                          const OptimizerSettings& st) {
  const std::size_t nx = static_cast<std::size_t>(t.x_size());
  const std::size_t ny = static_cast<std::size_t>(t.y_size());
  const std::size_t nb = static_cast<std::size_t>(t.B_size);
  const std::size_t nu = static_cast<std::size_t>(shape.U_size);
  const std::size_t nv = static_cast<std::size_t>(shape.V_size);
  const std::size_t b_rows = nx * nu * nv, y_rows = nb * nu * nv;

  std::vector<Point> out;
  auto const_aux = [&] { return delta_rows(1, nu * nv, 0); };

  // constant output through a uniform channel symbol (feasible once
  // t > -log|B|); also the mixture-optimal output law with the same slack
  const auto adm = admissible_outputs(t.pi_X, t.pi_YgX);
  for (int y : adm)
    out.push_back({const_aux(), uniform_rows(b_rows, nb), delta_rows(y_rows, ny, static_cast<std::size_t>(y))});
  if (!adm.empty()) {
    const auto q = min_output_divergence(t.pi_X, t.pi_YgX);
    std::vector<double> py(y_rows * ny);
    for (std::size_t r = 0; r < y_rows; ++r)
      for (std::size_t y = 0; y < ny; ++y) py[r * ny + y] = q.q(static_cast<int>(y));
    out.push_back({const_aux(), uniform_rows(b_rows, nb), std::move(py)});
  }

  if (tt >= 0.0) {
    // forward the source through B when it fits
    if (nb >= nx) {
      std::vector<double> pb(b_rows * nb, 0.0);
      std::vector<double> py(y_rows * ny);
      for (std::size_t r = 0; r < b_rows; ++r) {
        const std::size_t x = r / (nu * nv);
        pb[r * nb + x] = 1.0;
      }
      for (std::size_t r = 0; r < y_rows; ++r) {
        const std::size_t b = r / (nu * nv);
        for (std::size_t y = 0; y < ny; ++y)
          py[r * ny + y] = t.pi_YgX.at(std::min(b, nx - 1), static_cast<int>(y));
      }
      out.push_back({const_aux(), std::move(pb), std::move(py)});
    }
    // the symbol-by-symbol optimum lifted with constant auxiliaries
    OptimizerSettings lite = st;
    lite.restarts = std::min(st.restarts, 8);
    lite.max_iters = std::min(st.max_iters, 200);
    const SymbolwiseResult sw = delta_symbolwise(t, lite);
    if (sw.value < kInf) {
      std::vector<double> pb(b_rows * nb), py(y_rows * ny);
      for (std::size_t r = 0; r < b_rows; ++r) {
        const std::size_t x = r / (nu * nv);
        for (std::size_t b = 0; b < nb; ++b) pb[r * nb + b] = sw.P_BgX.at(x, static_cast<int>(b));
      }
      for (std::size_t r = 0; r < y_rows; ++r) {
        const std::size_t b = r / (nu * nv);
        for (std::size_t y = 0; y < ny; ++y) py[r * ny + y] = sw.P_YgB.at(b, static_cast<int>(y));
      }
      out.push_back({const_aux(), std::move(pb), std::move(py)});
    }
  }
  return out;
}

}  // namespace

BoundResult psi(const P2PTarget& t, double t_slack, AuxShape shape, const OptimizerSettings& st,
                const std::vector<Point>& extra_starts) {
  t.validate();
  shape = resolve_shape_p2p(t, shape);
  FactorProblem prob = build_psi_problem(t, t_slack, shape);
  const auto adm = admissible_outputs(t.pi_X, t.pi_YgX);
  const int ny = t.y_size();
  prob.repair = [ny, adm](Point& p) { mask_block_rows(p[2], static_cast<std::size_t>(ny), adm); };

  std::vector<Point> warm = psi_special_candidates(t, t_slack, shape, st);
  warm.insert(warm.end(), extra_starts.begin(), extra_starts.end());
  return to_result(prob, prob.solve(st, warm), check_assumption1(t));
}

Eval evaluate_psi_point(const P2PTarget& t, double t_slack, AuxShape shape, const Point& p) {
  t.validate();
  shape = resolve_shape_p2p(t, shape);
  return build_psi_problem(t, t_slack, shape).evaluate(p);
}

BoundResult delta_p2p(const P2PTarget& t, AuxShape shape, const OptimizerSettings& st) {
  return psi(t, t.H_W, shape, st);
}

std::vector<PsiCurvePoint> psi_curve(const P2PTarget& t, const std::vector<double>& t_grid,
                                     AuxShape shape, const OptimizerSettings& st) {
  if (!std::is_sorted(t_grid.begin(), t_grid.end()))
    throw std::invalid_argument("psi_curve: grid must be sorted");
  shape = resolve_shape_p2p(t, shape);
  std::vector<PsiCurvePoint> out;
  std::vector<Point> inherited;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (i > 0 && t_grid[i] == t_grid[i - 1]) {
      out.push_back({t_grid[i], out.back().value, out.back().slack, out.back().certified});
      continue;
    }
    const BoundResult r = psi(t, t_grid[i], shape, st, inherited);
    // a point feasible at this t stays feasible at every larger t
    if (r.certified) inherited.push_back(r.argmin.tables);
    out.push_back({t_grid[i], r.value, r.constraint_slack, r.certified});
  }
  return out;
}

TminBracket t_min_estimate(const P2PTarget& t, AuxShape shape, const OptimizerSettings& st,
                           std::vector<double> grid, double width_tol) {
  if (grid.empty()) throw std::invalid_argument("t_min_estimate: empty grid");
  std::sort(grid.begin(), grid.end());
  shape = resolve_shape_p2p(t, shape);
  auto feasible = [&](double tt) { return psi(t, tt, shape, st).certified; };

  TminBracket br;
  for (double tt : grid) {
    if (feasible(tt)) {
      br.feasible_at = tt;
      break;
    }
    br.infeasible_at = tt;
  }
  if (!br.feasible_at || !br.infeasible_at) return br;  // one-sided
  double lo = *br.infeasible_at, hi = *br.feasible_at;
  while (hi - lo > width_tol) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  br.infeasible_at = lo;
  br.feasible_at = hi;
  return br;
}

// ---------------------------------------------------------------------------
// broadcast

namespace {

FactorProblem build_broadcast_problem(const BroadcastTarget& t, BroadcastVariant variant,
                                      const AuxShape& shape) {
  const int nx = t.x_size(), ny = t.Y_size, nz = t.Z_size, nb = t.B_size;
  const int nu = shape.U_size, nuh = shape.Uhat_size, nv = shape.V_size;
  std::vector<Factor> factors(5);
  factors[0] = {"pi_X", {}, {bX}, true, t.pi_X.pmf()};
  factors[1] = {"P_UUhV", {}, {bU, bUh, bV}, false, {}};
  factors[2] = {"P_B|XUUhV", {bX, bU, bUh, bV}, {bB}, false, {}};
  factors[3] = {"P_Y|BUUhV", {bB, bU, bUh, bV}, {bY}, false, {}};
  factors[4] = {"P_Z|BUV", {bB, bU, bV}, {bZ}, false, {}};
  Objective obj{{bX, bV}, {bY, bZ}, {bX, bY, bZ}, t.pi_YZgX.table()};

  Constraint c1;
  c1.terms = {{+1.0, {bU}, {bV}}, {-1.0, {bB, bU}, {bX, bY, bZ, bV}}};
  if (variant == BroadcastVariant::Upper) {
    // I(B; Uh | X Y Z U V) joins the left-hand side
    c1.terms.push_back({+1.0, {bB}, {bX, bY, bZ, bU, bV}});
    c1.terms.push_back({-1.0, {bB}, {bX, bY, bZ, bU, bUh, bV}});
  }
  c1.constant = -t.H_W;
  Constraint c2;
  c2.terms = {{+1.0, {bU, bUh}, {bV}}, {-1.0, {bB, bU, bUh}, {bX, bY, bZ, bV}}};
  c2.constant = -t.H_W - t.H_What;
  return FactorProblem({nx, nu, nuh, nv, nb, ny, nz}, std::move(factors), std::move(obj),
                       {c1, c2});
}

std::vector<Point> broadcast_special_candidates(const BroadcastTarget& t, const AuxShape& shape) {
  const std::size_t ny = static_cast<std::size_t>(t.Y_size), nz = static_cast<std::size_t>(t.Z_size);
  const std::size_t nb = static_cast<std::size_t>(t.B_size);
  const std::size_t naux = static_cast<std::size_t>(shape.U_size) *
                           static_cast<std::size_t>(shape.Uhat_size) *
                           static_cast<std::size_t>(shape.V_size);
  const std::size_t nx = static_cast<std::size_t>(t.x_size());
  const std::size_t b_rows = nx * naux, y_rows = nb * naux;
  const std::size_t z_rows = nb * static_cast<std::size_t>(shape.U_size) *
                             static_cast<std::size_t>(shape.V_size);

  std::vector<Point> out;
  const auto adm = admissible_outputs(t.pi_X, t.pi_YZgX);
  for (int p : adm)
    out.push_back({delta_rows(1, naux, 0), uniform_rows(b_rows, nb),
                   delta_rows(y_rows, ny, static_cast<std::size_t>(p) / nz),
                   delta_rows(z_rows, nz, static_cast<std::size_t>(p) % nz)});
  if (!adm.empty()) {
    const auto q = min_product_output_divergence(t.pi_X, t.pi_YZgX, t.Y_size, t.Z_size);
    std::vector<double> py(y_rows * ny), pz(z_rows * nz);
    for (std::size_t r = 0; r < y_rows; ++r)
      for (std::size_t y = 0; y < ny; ++y) py[r * ny + y] = q.q_first(static_cast<int>(y));
    for (std::size_t r = 0; r < z_rows; ++r)
      for (std::size_t z = 0; z < nz; ++z) pz[r * nz + z] = q.q_second(static_cast<int>(z));
    out.push_back({delta_rows(1, naux, 0), uniform_rows(b_rows, nb), std::move(py), std::move(pz)});
  }
  return out;
}

}  // namespace

BoundResult delta_broadcast(const BroadcastTarget& t, BroadcastVariant variant, AuxShape shape,
                            const OptimizerSettings& st, const std::vector<Point>& extra_starts) {
  t.validate();
  shape = resolve_shape_broadcast(t, shape, variant == BroadcastVariant::Upper);
  FactorProblem prob = build_broadcast_problem(t, variant, shape);

  const auto adm = admissible_outputs(t.pi_X, t.pi_YZgX);
  std::vector<int> adm_y, adm_z;
  for (int p : adm) {
    const int y = p / t.Z_size, z = p % t.Z_size;
    if (std::find(adm_y.begin(), adm_y.end(), y) == adm_y.end()) adm_y.push_back(y);
    if (std::find(adm_z.begin(), adm_z.end(), z) == adm_z.end()) adm_z.push_back(z);
  }
  const int ny = t.Y_size, nz = t.Z_size;
  prob.repair = [ny, nz, adm_y, adm_z](Point& p) {
    mask_block_rows(p[2], static_cast<std::size_t>(ny), adm_y);
    mask_block_rows(p[3], static_cast<std::size_t>(nz), adm_z);
  };

  std::vector<Point> warm = broadcast_special_candidates(t, shape);
  warm.insert(warm.end(), extra_starts.begin(), extra_starts.end());
  return to_result(prob, prob.solve(st, warm), check_assumption_broadcast(t));
}

BroadcastPair delta_broadcast_paired(const BroadcastTarget& t, AuxShape shape,
                                     const OptimizerSettings& st) {
  // run with the (larger) upper-variant auxiliary sizes so one argmin can
  // seed the other problem
  AuxShape sh = resolve_shape_broadcast(t, shape, /*upper_variant=*/true);
  BroadcastPair pair;
  pair.upper = delta_broadcast(t, BroadcastVariant::Upper, sh, st);
  std::vector<Point> extra;
  if (pair.upper.certified) extra.push_back(pair.upper.argmin.tables);
  pair.lower = delta_broadcast(t, BroadcastVariant::Lower, sh, st, extra);
  return pair;
}

// ---------------------------------------------------------------------------
// interactive

namespace {

FactorProblem build_interactive_problem(const InteractiveTarget& t, const AuxShape& shape) {
  const int ns = t.s_size(), nx = t.x_size(), ny = t.Y_size, nz = t.Z_size;
  const int na = t.A_size, nb = t.B_size;
  const int nu = shape.U_size, nv = shape.V_size;
  std::vector<Factor> factors(6);
  factors[0] = {"pi_SX", {}, {iS, iX}, true, t.pi_SX.pmf()};
  factors[1] = {"P_UV", {}, {iU, iV}, false, {}};
  factors[2] = {"P_A|SUV", {iS, iU, iV}, {iA}, false, {}};
  factors[3] = {"P_B|XUV", {iX, iU, iV}, {iB}, false, {}};
  factors[4] = {"P_Y|ABUV", {iA, iB, iU, iV}, {iY}, false, {}};
  factors[5] = {"P_Z|ABUV", {iA, iB, iU, iV}, {iZ}, false, {}};
  Objective obj{{iS, iX, iV}, {iY, iZ}, {iS, iX, iY, iZ}, t.pi_YZgSX.table()};
  Constraint c;
  c.terms = {{+1.0, {iU}, {iV}}, {-1.0, {iA, iB, iU}, {iS, iX, iY, iZ, iV}}};
  c.constant = -t.H_W;
  return FactorProblem({ns, nx, nu, nv, na, nb, ny, nz}, std::move(factors), std::move(obj), {c});
}

std::vector<Point> interactive_special_candidates(const InteractiveTarget& t,
                                                  const AuxShape& shape) {
  const std::size_t ny = static_cast<std::size_t>(t.Y_size), nz = static_cast<std::size_t>(t.Z_size);
  const std::size_t na = static_cast<std::size_t>(t.A_size), nb = static_cast<std::size_t>(t.B_size);
  const std::size_t nu = static_cast<std::size_t>(shape.U_size), nv = static_cast<std::size_t>(shape.V_size);
  const std::size_t ns = static_cast<std::size_t>(t.s_size()), nx = static_cast<std::size_t>(t.x_size());
  const std::size_t a_rows = ns * nu * nv, b_rows = nx * nu * nv, yz_rows = na * nb * nu * nv;

  std::vector<Point> out;
  const auto adm = admissible_outputs(t.pi_SX.flatten(), t.pi_YZgSX);
  for (int p : adm)
    out.push_back({delta_rows(1, nu * nv, 0), uniform_rows(a_rows, na), uniform_rows(b_rows, nb),
                   delta_rows(yz_rows, ny, static_cast<std::size_t>(p) / nz),
                   delta_rows(yz_rows, nz, static_cast<std::size_t>(p) % nz)});
  if (!adm.empty()) {
    const auto q =
        min_product_output_divergence(t.pi_SX.flatten(), t.pi_YZgSX, t.Y_size, t.Z_size);
    std::vector<double> py(yz_rows * ny), pz(yz_rows * nz);
    for (std::size_t r = 0; r < yz_rows; ++r) {
      for (std::size_t y = 0; y < ny; ++y) py[r * ny + y] = q.q_first(static_cast<int>(y));
      for (std::size_t z = 0; z < nz; ++z) pz[r * nz + z] = q.q_second(static_cast<int>(z));
    }
    out.push_back({delta_rows(1, nu * nv, 0), uniform_rows(a_rows, na), uniform_rows(b_rows, nb),
                   std::move(py), std::move(pz)});
  }
  return out;
}

}  // namespace

BoundResult delta_interactive(const InteractiveTarget& t, AuxShape shape,
                              const OptimizerSettings& st, const std::vector<Point>& extra_starts) {
  t.validate();
  shape = resolve_shape_interactive(t, shape);
  FactorProblem prob = build_interactive_problem(t, shape);

  const auto adm = admissible_outputs(t.pi_SX.flatten(), t.pi_YZgSX);
  std::vector<int> adm_y, adm_z;
  for (int p : adm) {
    const int y = p / t.Z_size, z = p % t.Z_size;
    if (std::find(adm_y.begin(), adm_y.end(), y) == adm_y.end()) adm_y.push_back(y);
    if (std::find(adm_z.begin(), adm_z.end(), z) == adm_z.end()) adm_z.push_back(z);
  }
  const int ny = t.Y_size, nz = t.Z_size;
  prob.repair = [ny, nz, adm_y, adm_z](Point& p) {
    mask_block_rows(p[3], static_cast<std::size_t>(ny), adm_y);
    mask_block_rows(p[4], static_cast<std::size_t>(nz), adm_z);
  };

  std::vector<Point> warm = interactive_special_candidates(t, shape);
  warm.insert(warm.end(), extra_starts.begin(), extra_starts.end());
  return to_result(prob, prob.solve(st, warm), check_assumption_interactive(t));
}

namespace {

// interactive argmin (degenerate S, Z) -> Psi point with U' = (U, A)
Point map_interactive_to_p2p(const Point& ip, int nu, int nv, int na, int nb, int nx, int ny) {
  const std::size_t nup = static_cast<std::size_t>(nu) * na;  // |U'|
  Point p(3);
  p[0].assign(nup * static_cast<std::size_t>(nv), 0.0);
  for (int u = 0; u < nu; ++u)
    for (int a = 0; a < na; ++a)
      for (int v = 0; v < nv; ++v) {
        const std::size_t up = static_cast<std::size_t>(u) * na + static_cast<std::size_t>(a);
        const double puv = ip[0][static_cast<std::size_t>(u) * nv + static_cast<std::size_t>(v)];
        const double pa = ip[1][(static_cast<std::size_t>(u) * nv + static_cast<std::size_t>(v)) *
                                    static_cast<std::size_t>(na) +
                                static_cast<std::size_t>(a)];  // s = 0
        p[0][up * static_cast<std::size_t>(nv) + static_cast<std::size_t>(v)] = puv * pa;
      }
  p[1].assign(static_cast<std::size_t>(nx) * nup * static_cast<std::size_t>(nv) *
                  static_cast<std::size_t>(nb),
              0.0);
  for (int x = 0; x < nx; ++x)
    for (int u = 0; u < nu; ++u)
      for (int a = 0; a < na; ++a)
        for (int v = 0; v < nv; ++v)
          for (int b = 0; b < nb; ++b) {
            const std::size_t up = static_cast<std::size_t>(u) * na + static_cast<std::size_t>(a);
            const std::size_t row =
                (static_cast<std::size_t>(x) * nup + up) * static_cast<std::size_t>(nv) +
                static_cast<std::size_t>(v);
            const std::size_t irow = (static_cast<std::size_t>(x) * nu + static_cast<std::size_t>(u)) *
                                         static_cast<std::size_t>(nv) +
                                     static_cast<std::size_t>(v);
            p[1][row * static_cast<std::size_t>(nb) + static_cast<std::size_t>(b)] =
                ip[2][irow * static_cast<std::size_t>(nb) + static_cast<std::size_t>(b)];
          }
  p[2].assign(static_cast<std::size_t>(nb) * nup * static_cast<std::size_t>(nv) *
                  static_cast<std::size_t>(ny),
              0.0);
  for (int b = 0; b < nb; ++b)
    for (int u = 0; u < nu; ++u)
      for (int a = 0; a < na; ++a)
        for (int v = 0; v < nv; ++v)
          for (int y = 0; y < ny; ++y) {
            const std::size_t up = static_cast<std::size_t>(u) * na + static_cast<std::size_t>(a);
            const std::size_t row =
                (static_cast<std::size_t>(b) * nup + up) * static_cast<std::size_t>(nv) +
                static_cast<std::size_t>(v);
            const std::size_t irow =
                ((static_cast<std::size_t>(a) * nb + static_cast<std::size_t>(b)) *
                     static_cast<std::size_t>(nu) +
                 static_cast<std::size_t>(u)) *
                    static_cast<std::size_t>(nv) +
                static_cast<std::size_t>(v);
            p[2][row * static_cast<std::size_t>(ny) + static_cast<std::size_t>(y)] =
                ip[4][irow * static_cast<std::size_t>(ny) + static_cast<std::size_t>(y)];
          }
  return p;
}

// Psi argmin -> interactive point with |U_int| = |U_p2p|, uniform A, Z const
Point map_p2p_to_interactive(const Point& pp, int nup, int nv, int na, int nb, int ny) {
  Point p(5);
  p[0] = pp[0];  // P_UV over U' x V
  p[1] = uniform_rows(static_cast<std::size_t>(nup) * nv, static_cast<std::size_t>(na));  // s=0 rows
  p[2] = pp[1];  // P_B|XUV matches row layout (x, u', v)
  const std::size_t yz_rows = static_cast<std::size_t>(na) * nb * static_cast<std::size_t>(nup) * nv;
  p[3].assign(yz_rows * static_cast<std::size_t>(ny), 0.0);
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b)
      for (int u = 0; u < nup; ++u)
        for (int v = 0; v < nv; ++v) {
          const std::size_t irow =
              ((static_cast<std::size_t>(a) * nb + static_cast<std::size_t>(b)) *
                   static_cast<std::size_t>(nup) +
               static_cast<std::size_t>(u)) *
                  static_cast<std::size_t>(nv) +
              static_cast<std::size_t>(v);
          const std::size_t prow = (static_cast<std::size_t>(b) * nup + static_cast<std::size_t>(u)) *
                                       static_cast<std::size_t>(nv) +
                                   static_cast<std::size_t>(v);
          for (int y = 0; y < ny; ++y)
            p[3][irow * static_cast<std::size_t>(ny) + static_cast<std::size_t>(y)] =
                pp[2][prow * static_cast<std::size_t>(ny) + static_cast<std::size_t>(y)];
        }
  p[4].assign(yz_rows, 1.0);  // |Z| = 1
  return p;
}

}  // namespace

InteractiveP2PPair delta_interactive_p2p_paired(const InteractiveTarget& t, AuxShape shape,
                                                const OptimizerSettings& st) {
  t.validate();
  if (t.s_size() != 1 || t.Z_size != 1)
    throw ConfigError("delta_interactive_p2p_paired: requires degenerate S and Z");
  const AuxShape ish = resolve_shape_interactive(t, shape);

  // matched point-to-point target: same source/channel, common randomness
  // budget H(W) + log|A|
  P2PTarget pt{Dist(Alphabet(t.x_size(), "X"), prob::marginal_dist(t.pi_SX, 1).pmf()),
               Kernel({Alphabet(t.x_size(), "X")}, Alphabet(t.Y_size, "Y"), t.pi_YZgSX.table()),
               t.B_size, t.H_W + std::log(static_cast<double>(t.A_size))};
  AuxShape psh;
  psh.U_size = ish.U_size * t.A_size;
  psh.V_size = ish.V_size;

  InteractiveP2PPair pair;
  pair.interactive = delta_interactive(t, ish, st);

  std::vector<Point> p2p_extra;
  if (pair.interactive.certified)
    p2p_extra.push_back(map_interactive_to_p2p(pair.interactive.argmin.tables, ish.U_size,
                                               ish.V_size, t.A_size, t.B_size, t.x_size(),
                                               t.Y_size));
  pair.p2p = psi(pt, pt.H_W, psh, st, p2p_extra);

  if (pair.p2p.certified && pair.p2p.value < pair.interactive.value) {
    // carry the better point back; evaluated exactly in the enlarged
    // interactive problem (|U_int| = |U'|), no further descent
    AuxShape big = ish;
    big.U_size = psh.U_size;
    FactorProblem iprob = build_interactive_problem(t, big);
    Point mapped = map_p2p_to_interactive(pair.p2p.argmin.tables, psh.U_size, psh.V_size,
                                          t.A_size, t.B_size, t.Y_size);
    const Eval e = iprob.evaluate(mapped);
    double worst = kInf;
    for (double g : e.g) worst = std::min(worst, -g);
    if (e.objective < kInf && worst >= -st.tol) {
      pair.interactive.value = e.objective;
      pair.interactive.constraint_slack = worst;
      pair.interactive.certified = true;
      pair.interactive.argmin = named_point(iprob, std::move(mapped));
    }
  }
  return pair;
}

}  // namespace chansynth::bounds
