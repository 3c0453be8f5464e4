#pragma once

#include <cstddef>

#include "chansynth/prob.hpp"

namespace chansynth::oneshot {

using prob::Dist;
using prob::JointDist;
using prob::Kernel;

// One-shot verifiers: each computes the left side of a bound exactly, by
// enumerating every realization of the random codebook with its probability,
// and compares against the closed-form right side. All quantities are on the
// e^{s D} exponential scale, so every bound reads lhs <= rhs.

struct PAInstance {
  JointDist P_XY;  // components {X, Y}; X is binned, Y is the side information
  double R;        // nats; bins = ceil(e^R)
  double s;        // order 1+s, s in (0, 1]
};

struct ResolvInstance {
  Dist P_W;        // codeword index law
  Dist P_X;        // codeword sampling law
  Kernel P_YgX;    // channel, inputs {X}
  Dist Q_Y;        // target output law
  double s;
};

struct CondResolvInstance {
  JointDist P_AW;  // components {A, W}
  Dist P_B;
  Dist P_X;
  Kernel P_YgXB;   // inputs {X, B}
  Kernel Q_YgB;    // inputs {B}
  double s;
};

struct SuperposInstance {
  JointDist P_WWhat;   // components {W, What}
  JointDist P_XXhat;   // components {X, Xhat}; coarse marginal + fine conditional
  Kernel P_YgXXhat;    // inputs {X, Xhat}
  Dist Q_Y;
  double s;
};

struct CondSuperposInstance {
  JointDist P_AWWhat;  // components {A, W, What}
  Dist P_B;
  JointDist P_XXhat;
  Kernel P_YgXXhatB;   // inputs {X, Xhat, B}
  Kernel Q_YgB;        // inputs {B}
  double s;
};

struct VerifierReport {
  double lhs_exact = 0.0;
  double rhs_bound = 0.0;
  double slack = 0.0;  // rhs - lhs; >= 0 when the bound holds
  std::size_t enumeration_size = 0;
  double lhs_alt = 0.0;  // same quantity with the enumeration order exchanged

  // superposition decomposition (exact path terms and their closed forms)
  double l1 = 0.0, l2 = 0.0, l3 = 0.0;
  double l1_closed = 0.0, l2_bound = 0.0, l3_bound = 0.0;
};

VerifierReport pa_verify(const PAInstance& inst);
VerifierReport resolv_verify(const ResolvInstance& inst);
VerifierReport cond_resolv_verify(const CondResolvInstance& inst);
VerifierReport superpos_verify(const SuperposInstance& inst);
VerifierReport cond_superpos_verify(const CondSuperposInstance& inst);

// bins used for a rate R on the exponential scale
int pa_bins(double r);

}  // namespace chansynth::oneshot
