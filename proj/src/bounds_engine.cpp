#include "chansynth/bounds/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "chansynth/rng.hpp"

namespace chansynth::bounds {

namespace {

constexpr double kLogFloor = 1e-300;

double safe_log(double x) { return std::log(std::max(x, kLogFloor)); }

}  // namespace

void project_simplex(std::vector<double>& v, std::size_t begin, std::size_t len) {
  // sort-based projection onto {p >= 0, sum p = 1}
  static thread_local std::vector<double> u;
  u.assign(v.begin() + static_cast<std::ptrdiff_t>(begin),
           v.begin() + static_cast<std::ptrdiff_t>(begin + len));
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  std::size_t rho = 0;
  for (std::size_t i = 0; i < len; ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      theta = t;
    }
  }
  for (std::size_t i = 0; i < len; ++i) {
    double& x = v[begin + i];
    x = std::max(0.0, x - theta);
  }
  // guard against accumulated drift
  double sum = 0.0;
  for (std::size_t i = 0; i < len; ++i) sum += v[begin + i];
  if (sum <= 0.0) {
    for (std::size_t i = 0; i < len; ++i) v[begin + i] = 1.0 / static_cast<double>(len);
  } else {
    for (std::size_t i = 0; i < len; ++i) v[begin + i] /= sum;
  }
  (void)rho;
}

FactorProblem::FactorProblem(std::vector<int> axis_sizes, std::vector<Factor> factors,
                             Objective objective, std::vector<Constraint> constraints)
    : axis_sizes_(std::move(axis_sizes)),
      factors_(std::move(factors)),
      objective_(std::move(objective)),
      constraints_(std::move(constraints)) {
  cells_ = 1;
  for (int s : axis_sizes_) {
    if (s < 1) throw std::invalid_argument("FactorProblem: bad axis size");
    cells_ *= static_cast<std::size_t>(s);
  }
  if (cells_ > tol::kCapacityGuard) throw CapacityError("FactorProblem: joint tensor exceeds guard");

  // per-factor index maps
  const int n_axes = static_cast<int>(axis_sizes_.size());
  fmaps_.resize(factors_.size());
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    FactorMap& m = fmaps_[f];
    m.row_weight.assign(static_cast<std::size_t>(n_axes), 0);
    m.col_weight.assign(static_cast<std::size_t>(n_axes), 0);
    for (int a : factors_[f].cond_axes) {
      for (std::size_t i = 0; i < m.row_weight.size(); ++i)
        if (m.row_weight[i] != 0) m.row_weight[i] *= static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(a)]);
      m.row_weight[static_cast<std::size_t>(a)] = 1;
      m.rows *= static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(a)]);
    }
    for (int a : factors_[f].out_axes) {
      for (std::size_t i = 0; i < m.col_weight.size(); ++i)
        if (m.col_weight[i] != 0) m.col_weight[i] *= static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(a)]);
      m.col_weight[static_cast<std::size_t>(a)] = 1;
      m.cols *= static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(a)]);
    }
    if (factors_[f].fixed) {
      if (factors_[f].table.size() != m.rows * m.cols)
        throw std::invalid_argument("FactorProblem: fixed factor '" + factors_[f].name +
                                    "' table size mismatch");
    } else {
      blocks_.push_back(static_cast<int>(f));
    }
  }
  f2block_.assign(factors_.size(), -1);
  for (std::size_t b = 0; b < blocks_.size(); ++b)
    f2block_[static_cast<std::size_t>(blocks_[b])] = static_cast<int>(b);

  // marginal sets
  auto obj_full = objective_.cond_axes;
  obj_full.insert(obj_full.end(), objective_.out_axes.begin(), objective_.out_axes.end());
  m_obj_full_ = ensure_marg(obj_full);
  m_obj_cond_ = ensure_marg(objective_.cond_axes);
  constraint_margs_.resize(constraints_.size());
  for (std::size_t c = 0; c < constraints_.size(); ++c) {
    for (const auto& term : constraints_[c].terms) {
      auto joint = term.group;
      joint.insert(joint.end(), term.given.begin(), term.given.end());
      const int mj = ensure_marg(joint);
      const int mg = term.given.empty() ? -1 : ensure_marg(term.given);
      constraint_margs_[c].push_back({mj, mg});
    }
  }

  // target lookup weights over full-cell digits
  obj_target_weight_.assign(static_cast<std::size_t>(n_axes), 0);
  std::size_t t_cells = 1;
  for (int a : objective_.target_axes) {
    for (std::size_t i = 0; i < obj_target_weight_.size(); ++i)
      if (obj_target_weight_[i] != 0)
        obj_target_weight_[i] *= static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(a)]);
    obj_target_weight_[static_cast<std::size_t>(a)] = 1;
    t_cells *= static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(a)]);
  }
  if (objective_.target.size() != t_cells)
    throw std::invalid_argument("FactorProblem: objective target size mismatch");
}

std::size_t FactorProblem::marg_index(const MargSet& m, const std::vector<int>& digits) const {
  std::size_t idx = 0;
  for (std::size_t a = 0; a < digits.size(); ++a)
    idx += m.cell_weight[a] * static_cast<std::size_t>(digits[a]);
  return idx;
}

int FactorProblem::ensure_marg(const std::vector<int>& axes_in) {
  std::vector<int> axes = axes_in;
  std::sort(axes.begin(), axes.end());
  axes.erase(std::unique(axes.begin(), axes.end()), axes.end());
  for (std::size_t i = 0; i < margs_.size(); ++i)
    if (margs_[i].axes == axes) return static_cast<int>(i);
  MargSet m;
  m.axes = axes;
  m.cell_weight.assign(axis_sizes_.size(), 0);
  for (int a : axes) {
    for (std::size_t i = 0; i < m.cell_weight.size(); ++i)
      if (m.cell_weight[i] != 0)
        m.cell_weight[i] *= static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(a)]);
    m.cell_weight[static_cast<std::size_t>(a)] = 1;
    m.shape.push_back(axis_sizes_[static_cast<std::size_t>(a)]);
    m.cells *= static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(a)]);
  }
  margs_.push_back(std::move(m));
  return static_cast<int>(margs_.size()) - 1;
}

const std::string& FactorProblem::block_name(int b) const {
  return factors_[static_cast<std::size_t>(blocks_[static_cast<std::size_t>(b)])].name;
}

std::pair<std::size_t, std::size_t> FactorProblem::block_shape(int b) const {
  const FactorMap& m = fmaps_[static_cast<std::size_t>(blocks_[static_cast<std::size_t>(b)])];
  return {m.rows, m.cols};
}

void FactorProblem::compute_joint(const Point& p, std::vector<double>& j) const {
  j.assign(cells_, 1.0);
  std::vector<const std::vector<double>*> tables(factors_.size());
  for (std::size_t f = 0; f < factors_.size(); ++f)
    tables[f] = factors_[f].fixed ? &factors_[f].table : &p[static_cast<std::size_t>(f2block_[f])];
  std::vector<int> digits(axis_sizes_.size(), 0);
  for (std::size_t cell = 0; cell < cells_; ++cell) {
    double v = 1.0;
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      const FactorMap& fm = fmaps_[f];
      std::size_t row = 0, col = 0;
      for (std::size_t a = 0; a < digits.size(); ++a) {
        row += fm.row_weight[a] * static_cast<std::size_t>(digits[a]);
        col += fm.col_weight[a] * static_cast<std::size_t>(digits[a]);
      }
      v *= (*tables[f])[row * fm.cols + col];
      if (v == 0.0) break;
    }
    j[cell] = v;
    // odometer
    for (std::size_t a = digits.size(); a-- > 0;) {
      if (++digits[a] < axis_sizes_[a]) break;
      digits[a] = 0;
    }
  }
}

void FactorProblem::compute_marginals(const std::vector<double>& j,
                                      std::vector<std::vector<double>>& margs) const {
  margs.resize(margs_.size());
  for (std::size_t m = 0; m < margs_.size(); ++m) margs[m].assign(margs_[m].cells, 0.0);
  std::vector<int> digits(axis_sizes_.size(), 0);
  for (std::size_t cell = 0; cell < cells_; ++cell) {
    const double v = j[cell];
    if (v != 0.0)
      for (std::size_t m = 0; m < margs_.size(); ++m)
        margs[m][marg_index(margs_[m], digits)] += v;
    for (std::size_t a = digits.size(); a-- > 0;) {
      if (++digits[a] < axis_sizes_[a]) break;
      digits[a] = 0;
    }
  }
}

double FactorProblem::eval_objective(const std::vector<std::vector<double>>& margs) const {
  const MargSet& full = margs_[static_cast<std::size_t>(m_obj_full_)];
  const std::vector<double>& mfull = margs[static_cast<std::size_t>(m_obj_full_)];
  const MargSet& cond = margs_[static_cast<std::size_t>(m_obj_cond_)];
  const std::vector<double>& mcond = margs[static_cast<std::size_t>(m_obj_cond_)];

  double acc = 0.0;
  std::vector<int> digits(axis_sizes_.size(), 0);  // digits over full set axes only
  // iterate the marginal tensor through its own odometer over full.axes
  std::vector<int> mdig(full.axes.size(), 0);
  for (std::size_t i = 0; i < mfull.size(); ++i) {
    const double v = mfull[i];
    if (v > 0.0) {
      for (std::size_t a = 0; a < full.axes.size(); ++a)
        digits[static_cast<std::size_t>(full.axes[a])] = mdig[a];
      std::size_t ci = 0, ti = 0;
      for (std::size_t a = 0; a < digits.size(); ++a) {
        ci += cond.cell_weight[a] * static_cast<std::size_t>(digits[a]);
        ti += obj_target_weight_[a] * static_cast<std::size_t>(digits[a]);
      }
      const double t = objective_.target[ti];
      if (t == 0.0) return kInf;
      acc += v * (std::log(v / mcond[ci]) - std::log(t));
    }
    for (std::size_t a = mdig.size(); a-- > 0;) {
      if (++mdig[a] < full.shape[a]) break;
      mdig[a] = 0;
    }
  }
  return acc;
}

double FactorProblem::eval_constraint(std::size_t c_idx,
                                      const std::vector<std::vector<double>>& margs) const {
  const Constraint& c = constraints_[c_idx];
  double g = c.constant;
  for (std::size_t t = 0; t < c.terms.size(); ++t) {
    const auto& term = c.terms[t];
    // H(group|given) = -sum m_joint log(m_joint / m_given)
    double h = 0.0;
    const auto [mj, mg] = constraint_margs_[c_idx][t];
    const MargSet& joint = margs_[static_cast<std::size_t>(mj)];
    const std::vector<double>& mjoint = margs[static_cast<std::size_t>(mj)];
    std::vector<int> digits(axis_sizes_.size(), 0);
    std::vector<int> mdig(joint.axes.size(), 0);
    for (std::size_t i = 0; i < mjoint.size(); ++i) {
      const double v = mjoint[i];
      if (v > 0.0) {
        double denom = 1.0;
        if (mg >= 0) {
          for (std::size_t a = 0; a < joint.axes.size(); ++a)
            digits[static_cast<std::size_t>(joint.axes[a])] = mdig[a];
          denom = margs[static_cast<std::size_t>(mg)]
                       [marg_index(margs_[static_cast<std::size_t>(mg)], digits)];
        }
        h -= v * std::log(v / denom);
      }
      for (std::size_t a = mdig.size(); a-- > 0;) {
        if (++mdig[a] < joint.shape[a]) break;
        mdig[a] = 0;
      }
    }
    g += term.coeff * h;
  }
  return g;
}

Eval FactorProblem::evaluate(const Point& p) const {
  std::vector<double> j;
  compute_joint(p, j);
  std::vector<std::vector<double>> margs;
  compute_marginals(j, margs);
  Eval e;
  e.objective = eval_objective(margs);
  e.g.reserve(constraints_.size());
  for (std::size_t c = 0; c < constraints_.size(); ++c) e.g.push_back(eval_constraint(c, margs));
  return e;
}

void FactorProblem::cell_grad(const std::vector<double>& j,
                              const std::vector<std::vector<double>>& margs,
                              const std::vector<double>& pen, std::vector<double>& dfdj) const {
  dfdj.assign(cells_, 0.0);
  const MargSet& full = margs_[static_cast<std::size_t>(m_obj_full_)];
  const std::vector<double>& mfull = margs[static_cast<std::size_t>(m_obj_full_)];
  const MargSet& cond = margs_[static_cast<std::size_t>(m_obj_cond_)];
  const std::vector<double>& mcond = margs[static_cast<std::size_t>(m_obj_cond_)];

  std::vector<int> digits(axis_sizes_.size(), 0);
  for (std::size_t cell = 0; cell < cells_; ++cell) {
    double d = 0.0;
    // objective: log(P(out|cond)/target)
    {
      const std::size_t fi = marg_index(full, digits);
      const std::size_t ci = marg_index(cond, digits);
      std::size_t ti = 0;
      for (std::size_t a = 0; a < digits.size(); ++a)
        ti += obj_target_weight_[a] * static_cast<std::size_t>(digits[a]);
      d += safe_log(mfull[fi]) - safe_log(mcond[ci]) - safe_log(objective_.target[ti]);
    }
    // constraints: pen_i * sum_terms coeff * (-log(m_joint/m_given))
    for (std::size_t c = 0; c < constraints_.size(); ++c) {
      if (pen[c] == 0.0) continue;
      double dg = 0.0;
      for (std::size_t t = 0; t < constraints_[c].terms.size(); ++t) {
        const auto [mj, mg] = constraint_margs_[c][t];
        const double num = margs[static_cast<std::size_t>(mj)]
                                [marg_index(margs_[static_cast<std::size_t>(mj)], digits)];
        double den = 1.0;
        if (mg >= 0)
          den = margs[static_cast<std::size_t>(mg)]
                     [marg_index(margs_[static_cast<std::size_t>(mg)], digits)];
        dg -= constraints_[c].terms[t].coeff * (safe_log(num) - safe_log(den));
      }
      d += pen[c] * dg;
    }
    dfdj[cell] = d;
    for (std::size_t a = digits.size(); a-- > 0;) {
      if (++digits[a] < axis_sizes_[a]) break;
      digits[a] = 0;
    }
  }
  (void)j;
}

void FactorProblem::block_grad(const Point& p, int b, const std::vector<double>& dfdj,
                               std::vector<double>& grad) const {
  const int f_target = blocks_[static_cast<std::size_t>(b)];
  const FactorMap& fm = fmaps_[static_cast<std::size_t>(f_target)];
  grad.assign(fm.rows * fm.cols, 0.0);
  std::vector<const std::vector<double>*> tables(factors_.size());
  for (std::size_t f = 0; f < factors_.size(); ++f)
    tables[f] = factors_[f].fixed ? &factors_[f].table : &p[static_cast<std::size_t>(f2block_[f])];
  std::vector<int> digits(axis_sizes_.size(), 0);
  for (std::size_t cell = 0; cell < cells_; ++cell) {
    // product of the other factors at this cell
    double rest = 1.0;
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      if (static_cast<int>(f) == f_target) continue;
      const FactorMap& om = fmaps_[f];
      std::size_t row = 0, col = 0;
      for (std::size_t a = 0; a < digits.size(); ++a) {
        row += om.row_weight[a] * static_cast<std::size_t>(digits[a]);
        col += om.col_weight[a] * static_cast<std::size_t>(digits[a]);
      }
      rest *= (*tables[f])[row * om.cols + col];
      if (rest == 0.0) break;
    }
    if (rest != 0.0) {
      std::size_t row = 0, col = 0;
      for (std::size_t a = 0; a < digits.size(); ++a) {
        row += fm.row_weight[a] * static_cast<std::size_t>(digits[a]);
        col += fm.col_weight[a] * static_cast<std::size_t>(digits[a]);
      }
      grad[row * fm.cols + col] += dfdj[cell] * rest;
    }
    for (std::size_t a = digits.size(); a-- > 0;) {
      if (++digits[a] < axis_sizes_[a]) break;
      digits[a] = 0;
    }
  }
}

double FactorProblem::penalized(const Eval& e, const std::vector<double>& weights,
                                double margin) const {
  if (!(e.objective < kInf)) return kInf;
  double f = e.objective;
  for (std::size_t i = 0; i < e.g.size(); ++i) {
    const double viol = std::max(0.0, e.g[i] + margin);
    f += weights[i] * viol * viol;
  }
  return f;
}

Point FactorProblem::random_point(std::uint64_t seed) const {
  Rng rng(seed);
  Point p;
  p.reserve(blocks_.size());
  for (int b = 0; b < num_blocks(); ++b) {
    const auto [rows, cols] = block_shape(b);
    std::vector<double> table(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = rng.next_simplex(cols);
      std::copy(row.begin(), row.end(), table.begin() + static_cast<std::ptrdiff_t>(r * cols));
    }
    p.push_back(std::move(table));
  }
  return p;
}

std::pair<double, Point> FactorProblem::descend(Point start, const OptimizerSettings& settings) const {
  const std::size_t nc = constraints_.size();
  std::vector<double> weights(nc, 0.0), pen(nc, 0.0);
  std::vector<double> j, dfdj, grad;
  std::vector<std::vector<double>> margs;
  std::vector<double> step(static_cast<std::size_t>(num_blocks()), 0.25);

  Point cur = std::move(start);
  Eval ce = evaluate(cur);
  // a fully infeasible-in-objective start cannot produce line-search progress
  if (!(ce.objective < kInf) && repair) {
    repair(cur);
    ce = evaluate(cur);
  }

  const std::size_t n_phases = std::max<std::size_t>(1, settings.penalty_schedule.size());
  for (std::size_t phase = 0; phase < n_phases; ++phase) {
    const double w = settings.penalty_schedule.empty()
                         ? 1e4
                         : settings.penalty_schedule[std::min(phase, settings.penalty_schedule.size() - 1)];
    weights.assign(nc, w);
    // aim slightly inside the feasible set in late phases
    const double margin = (phase + 1 == n_phases) ? 1e-8 : 0.0;

    double fcur = penalized(ce, weights, margin);
    int stall = 0;
    for (int it = 0; it < settings.max_iters && stall < 8; ++it) {
      bool improved = false;
      for (int b = 0; b < num_blocks(); ++b) {
        if (!(fcur < kInf)) break;
        compute_joint(cur, j);
        compute_marginals(j, margs);
        for (std::size_t c = 0; c < nc; ++c)
          pen[c] = 2.0 * weights[c] * std::max(0.0, ce.g[c] + margin);
        cell_grad(j, margs, pen, dfdj);
        block_grad(cur, b, dfdj, grad);

        const auto [rows, cols] = block_shape(b);
        auto& table = cur[static_cast<std::size_t>(b)];
        const std::vector<double> saved = table;
        double gnorm2 = 0.0;
        for (double gv : grad) gnorm2 += gv * gv;
        if (gnorm2 == 0.0) continue;
        const double scale = 1.0 / std::sqrt(gnorm2 / static_cast<double>(grad.size()) + 1e-30);

        double eta = step[static_cast<std::size_t>(b)];
        bool ok = false;
        for (int bt = 0; bt < 16; ++bt) {
          for (std::size_t i = 0; i < table.size(); ++i)
            table[i] = saved[i] - eta * scale * grad[i];
          for (std::size_t r = 0; r < rows; ++r) project_simplex(table, r * cols, cols);
          const Eval ne = evaluate(cur);
          const double fn = penalized(ne, weights, margin);
          if (fn < fcur - 1e-14) {
            fcur = fn;
            ce = ne;
            ok = true;
            break;
          }
          eta *= 0.5;
        }
        if (ok) {
          step[static_cast<std::size_t>(b)] = std::min(1.0, eta * 1.6);
          improved = true;
        } else {
          table = saved;
          step[static_cast<std::size_t>(b)] = std::max(1e-6, eta);
        }
      }
      if (!improved)
        ++stall;
      else
        stall = 0;
    }
  }
  return {penalized(ce, weights, 0.0), std::move(cur)};
}

SolveResult FactorProblem::solve(const OptimizerSettings& settings,
                                 const std::vector<Point>& warm_starts) const {
  struct Candidate {
    double value = kInf;
    double slack = 0.0;
    Point point;
    int start_index = -1;
    bool certified = false;
  };

  const int n_warm = static_cast<int>(warm_starts.size());
  const int n_total = n_warm + std::max(1, settings.restarts);

  auto run_one = [&](int idx) -> Candidate {
    Candidate cand;
    cand.start_index = idx;
    Point start;
    if (idx < n_warm) {
      start = warm_starts[static_cast<std::size_t>(idx)];
      // a warm start is itself a candidate point: certify it as-is first
      Eval e = evaluate(start);
      double worst = kInf;
      for (double g : e.g) worst = std::min(worst, -g);
      if (e.objective < kInf && worst >= -settings.tol) {
        cand.value = e.objective;
        cand.slack = worst;
        cand.point = start;
        cand.certified = true;
      }
    } else {
      start = random_point(Rng::derive(settings.seed, static_cast<std::uint64_t>(idx - n_warm)));
      if (repair) repair(start);
    }
    auto [fval, point] = descend(std::move(start), settings);
    (void)fval;
    Eval e = evaluate(point);
    double worst = kInf;
    for (double g : e.g) worst = std::min(worst, -g);
    if (e.objective < kInf && worst >= -settings.tol &&
        (!cand.certified || e.objective < cand.value)) {
      cand.value = e.objective;
      cand.slack = worst;
      cand.point = std::move(point);
      cand.certified = true;
    }
    return cand;
  };

  std::vector<Candidate> cands(static_cast<std::size_t>(n_total));
  const int jobs = std::max(1, settings.jobs);
  if (jobs == 1) {
    for (int i = 0; i < n_total; ++i) cands[static_cast<std::size_t>(i)] = run_one(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic_int next{0};
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n_total; i = next.fetch_add(1))
          cands[static_cast<std::size_t>(i)] = run_one(i);
      });
    for (auto& th : pool) th.join();
  }

  SolveResult res;
  res.restarts_used = std::max(1, settings.restarts);
  for (const auto& c : cands) {
    if (!c.certified) continue;
    if (!res.certified || c.value < res.value ||
        (c.value == res.value && c.start_index < res.winning_start)) {
      res.certified = true;
      res.value = c.value;
      res.argmin = c.point;
      res.constraint_slack = c.slack;
      res.winning_start = c.start_index;
    }
  }
  if (!res.certified) res.value = kInf;
  return res;
}

}  // namespace chansynth::bounds
