#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chansynth/common.hpp"

namespace chansynth::bounds {

// Minimization of a conditional KL objective over a product of stochastic
// factors, subject to conditional-entropy inequality constraints. The joint
// is a dense tensor over named axes,
//   J(cell) = prod_f  factor_f[row(cell), out(cell)],
// every non-fixed factor being a block of simplex rows (the optimization
// variables). Objectives and constraints are evaluated exactly; gradients of
// the penalized surrogate use log-clamping at zero cells.

struct Factor {
  std::string name;
  std::vector<int> cond_axes;
  std::vector<int> out_axes;
  bool fixed = false;
  std::vector<double> table;  // rows x cols, only for fixed factors
};

// coeff * H(group | given), evaluated on the joint
struct EntropyTerm {
  double coeff;
  std::vector<int> group;
  std::vector<int> given;
};

// sum of terms + constant <= 0
struct Constraint {
  std::vector<EntropyTerm> terms;
  double constant = 0.0;
};

// D(P_{out|cond} || target | P_cond); target is a conditional pmf tensor over
// target_axes (which must be a subset of cond_axes + out_axes).
struct Objective {
  std::vector<int> cond_axes;
  std::vector<int> out_axes;
  std::vector<int> target_axes;
  std::vector<double> target;
};

struct OptimizerSettings {
  int restarts = 32;
  int max_iters = 250;                 // inner iterations per penalty phase
  std::vector<double> penalty_schedule = {1e2, 1e4, 1e6, 1e8};
  double tol = 1e-9;                   // accepted constraint violation
  std::uint64_t seed = 0;
  int jobs = 1;
};

// One candidate point: one table per non-fixed factor, row-major simplex rows.
using Point = std::vector<std::vector<double>>;

struct Eval {
  double objective = kInf;
  std::vector<double> g;  // constraint values, feasible iff g[i] <= 0
};

struct SolveResult {
  double value = kInf;             // +inf when no restart certified
  Point argmin;                    // empty when value == +inf
  double constraint_slack = 0.0;   // min_i(-g_i) at argmin
  int restarts_used = 0;
  int winning_start = -1;          // index into [warm starts..., random restarts...]
  bool certified = false;
};

class FactorProblem {
public:
  FactorProblem(std::vector<int> axis_sizes, std::vector<Factor> factors, Objective objective,
                std::vector<Constraint> constraints);

  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::string& block_name(int b) const;
  // rows x cols of optimization block b
  std::pair<std::size_t, std::size_t> block_shape(int b) const;

  // exact objective and constraint values at a point
  Eval evaluate(const Point& p) const;

  // Dirichlet(1) rows for every block
  Point random_point(std::uint64_t seed) const;

  // Optional hook applied to fresh random points; may zero out coordinates
  // that make the objective infinite (rows are renormalized afterwards).
  std::function<void(Point&)> repair;

  SolveResult solve(const OptimizerSettings& settings, const std::vector<Point>& warm_starts = {}) const;

  // descend from a specific start; used by solve() and by warm-start polishing
  std::pair<double, Point> descend(Point start, const OptimizerSettings& settings) const;

  const std::vector<int>& axis_sizes() const { return axis_sizes_; }

private:
  struct MargSet {                 // marginal of J onto an axis subset
    std::vector<int> axes;         // ascending
    std::vector<int> shape;
    std::vector<std::size_t> cell_weight;  // per full-axis stride (0 when axis excluded)
    std::size_t cells = 1;
  };

  std::size_t marg_index(const MargSet& m, const std::vector<int>& digits) const;
  int ensure_marg(const std::vector<int>& axes);
  void compute_joint(const Point& p, std::vector<double>& j) const;
  void compute_marginals(const std::vector<double>& j, std::vector<std::vector<double>>& margs) const;
  double eval_objective(const std::vector<std::vector<double>>& margs) const;
  double eval_constraint(std::size_t c_idx, const std::vector<std::vector<double>>& margs) const;
  // d(penalized F)/dJ per cell; pen[i] = 2 * w_i * max(0, g_i + margin)
  void cell_grad(const std::vector<double>& j, const std::vector<std::vector<double>>& margs,
                 const std::vector<double>& pen, std::vector<double>& dfdj) const;
  void block_grad(const Point& p, int b, const std::vector<double>& dfdj,
                  std::vector<double>& grad) const;
  double penalized(const Eval& e, const std::vector<double>& weights, double margin) const;

  std::vector<int> axis_sizes_;
  std::vector<Factor> factors_;
  std::vector<int> blocks_;   // indices of non-fixed factors
  std::vector<int> f2block_;  // factor index -> block position, -1 for fixed
  Objective objective_;
  std::vector<Constraint> constraints_;

  std::vector<MargSet> margs_;
  int m_obj_full_ = -1, m_obj_cond_ = -1;
  std::vector<std::size_t> obj_target_weight_;   // full-cell digits -> target index
  std::vector<std::vector<std::pair<int, int>>> constraint_margs_;  // per term: (m_joint, m_given)

  // per-factor: full-cell digits -> (row, col)
  struct FactorMap {
    std::vector<std::size_t> row_weight, col_weight;
    std::size_t rows = 1, cols = 1;
  };
  std::vector<FactorMap> fmaps_;
  std::size_t cells_ = 1;
};

// Euclidean projection onto the probability simplex.
void project_simplex(std::vector<double>& v, std::size_t begin, std::size_t len);

}  // namespace chansynth::bounds
