#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chansynth/bounds/engine.hpp"
#include "chansynth/prob.hpp"

namespace chansynth::bounds {

using prob::Alphabet;
using prob::Dist;
using prob::JointDist;
using prob::Kernel;

// ---------------------------------------------------------------------------
// targets

struct P2PTarget {
  Dist pi_X;
  Kernel pi_YgX;   // inputs {X}, output Y
  int B_size = 2;  // channel alphabet between the terminals, >= 2
  double H_W = 0.0;

  void validate() const;
  int x_size() const { return pi_X.size(); }
  int y_size() const { return pi_YgX.output().size; }
};

struct BroadcastTarget {
  Dist pi_X;
  Kernel pi_YZgX;  // inputs {X}, output flattened (y,z) with index y*Z+z
  int Y_size = 2, Z_size = 2;
  int B_size = 2;
  double H_W = 0.0, H_What = 0.0;

  void validate() const;
  int x_size() const { return pi_X.size(); }
};

struct InteractiveTarget {
  JointDist pi_SX;    // components {S, X}
  Kernel pi_YZgSX;    // inputs {S, X}, output flattened (y,z)
  int Y_size = 2, Z_size = 2;
  int A_size = 2, B_size = 2;
  double H_W = 0.0;

  void validate() const;
  int s_size() const { return pi_SX.components()[0].size; }
  int x_size() const { return pi_SX.components()[1].size; }
};

// Auxiliary-variable cardinalities. Zero fields resolve to the sufficient
// sizes stated with each bound (|V|<=2, |U|<=2|X||Y| point-to-point;
// |V|<=3, |U|<=3(|X||Y||Z|+1) and the matching U-hat size broadcast;
// |V|<=2, |U|<=2|S||X||Y||Z| interactive).
struct AuxShape {
  int U_size = 0;
  int V_size = 0;
  int Uhat_size = 0;
};

AuxShape resolve_shape_p2p(const P2PTarget& t, AuxShape s);
AuxShape resolve_shape_broadcast(const BroadcastTarget& t, AuxShape s, bool upper_variant);
AuxShape resolve_shape_interactive(const InteractiveTarget& t, AuxShape s);

// ---------------------------------------------------------------------------
// assumption checks (the positive-column hypotheses of the single-letter
// characterizations)

bool check_assumption1(const P2PTarget& t);
bool check_assumption_broadcast(const BroadcastTarget& t);
bool check_assumption_interactive(const InteractiveTarget& t);

// output symbols with a strictly positive column over supp(pi)
std::vector<int> admissible_outputs(const Dist& pi, const Kernel& chan);

// min over admissible y of D(delta_y || pi_YgX | pi_X); throws ConfigError
// when no column qualifies
double lemma1_upper_bound(const P2PTarget& t);
double lemma1_upper_bound_broadcast(const BroadcastTarget& t);
double lemma1_upper_bound_interactive(const InteractiveTarget& t);

// ---------------------------------------------------------------------------
// convex helpers

struct OutputDistResult {
  Dist q;
  double value;
};

// argmin_{Q_Y} D(Q_Y || pi_YgX | pi_X) (convex; solved by projected gradient)
OutputDistResult min_output_divergence(const Dist& pi_X, const Kernel& chan);

struct ProductOutputResult {
  Dist q_first, q_second;
  double value;
};

// argmin_{Q_Y, Q_Z} D(Q_Y Q_Z || chan | pi) over product output laws;
// chan outputs the flattened pair (y,z)
ProductOutputResult min_product_output_divergence(const Dist& pi, const Kernel& chan, int ny, int nz);

// ---------------------------------------------------------------------------
// results

struct NamedPoint {
  std::vector<std::string> names;
  std::vector<std::pair<std::size_t, std::size_t>> shapes;  // rows x cols
  Point tables;
  bool empty() const { return tables.empty(); }
};

struct BoundResult {
  double value = kInf;
  NamedPoint argmin;
  double constraint_slack = 0.0;
  int restarts_used = 0;
  bool certified = false;
  bool assumption_ok = true;
};

// ---------------------------------------------------------------------------
// operations

// Psi(t): minimum of D(P_{Y|XV} || pi_YgX | pi_X P_V) over (P_UV, P_{B|XUV},
// P_{Y|BUV}) subject to H(U|V) <= H(BU|XYV) + t. Returns +inf (uncertified)
// when no feasible point was found.
BoundResult psi(const P2PTarget& t, double t_slack, AuxShape shape, const OptimizerSettings& st,
                const std::vector<Point>& extra_starts = {});

// exact objective and constraint value of an explicit candidate point
// (blocks ordered P_UV, P_{B|XUV}, P_{Y|BUV})
Eval evaluate_psi_point(const P2PTarget& t, double t_slack, AuxShape shape, const Point& p);

BoundResult delta_p2p(const P2PTarget& t, AuxShape shape, const OptimizerSettings& st);

struct PsiCurvePoint {
  double t;
  double value;
  double slack;
  bool certified;
};

// Psi on a sorted grid; each grid point inherits the feasible argmin found at
// every smaller t (such points stay feasible as t grows), so the reported
// curve is a nonincreasing sequence of certified upper bounds.
std::vector<PsiCurvePoint> psi_curve(const P2PTarget& t, const std::vector<double>& t_grid,
                                     AuxShape shape, const OptimizerSettings& st);

struct TminBracket {
  std::optional<double> infeasible_at;  // largest probed t with Psi = +inf
  std::optional<double> feasible_at;    // smallest probed t with Psi < +inf
};

TminBracket t_min_estimate(const P2PTarget& t, AuxShape shape, const OptimizerSettings& st,
                           std::vector<double> grid, double width_tol = 1e-2);

struct SymbolwiseResult {
  double value = kInf;
  Kernel P_BgX;
  Kernel P_YgB;
};

// Symbol-by-symbol optimum: inf over (P_{B|X}, P_{Y|B}) of
// D(P_{Y|X} || pi_YgX | pi_X) with Y fed through B.
SymbolwiseResult delta_symbolwise(const P2PTarget& t, const OptimizerSettings& st);

enum class BroadcastVariant { Lower, Upper };

BoundResult delta_broadcast(const BroadcastTarget& t, BroadcastVariant variant, AuxShape shape,
                            const OptimizerSettings& st, const std::vector<Point>& extra_starts = {});

struct BroadcastPair {
  BoundResult lower, upper;
};

// Runs both variants with shared seeds and feeds the upper argmin to the
// lower problem (every upper-feasible point is lower-feasible), so
// lower.value <= upper.value holds by construction.
BroadcastPair delta_broadcast_paired(const BroadcastTarget& t, AuxShape shape,
                                     const OptimizerSettings& st);

BoundResult delta_interactive(const InteractiveTarget& t, AuxShape shape,
                              const OptimizerSettings& st,
                              const std::vector<Point>& extra_starts = {});

// For targets with degenerate S and Z the interactive bound coincides with
// the point-to-point Psi at common-randomness budget H(W) + log|A| (an extra
// noiseless signal from the output side is worth exactly its rate as common
// randomness; both reductions are constructive and value-preserving).
// Returns the pair of results computed with exchanged candidate points.
struct InteractiveP2PPair {
  BoundResult interactive;
  BoundResult p2p;  // psi at t = H_W + log(A_size), U enlarged by factor |A|
};

InteractiveP2PPair delta_interactive_p2p_paired(const InteractiveTarget& t, AuxShape shape,
                                                const OptimizerSettings& st);

}  // namespace chansynth::bounds
