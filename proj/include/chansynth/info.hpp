#pragma once

#include <vector>

#include "chansynth/prob.hpp"

namespace chansynth::info {

using prob::Dist;
using prob::JointDist;
using prob::Kernel;

// Order 1+s. s = 0 requests the Shannon/KL limit exactly (no numerical
// limiting); s > 0 the Renyi quantities. Orders below 1 (s < 0) are not
// supported.
struct RenyiOrder {
  double s;
  RenyiOrder(double s_) : s(s_) {
    if (!(s >= 0.0)) throw std::invalid_argument("RenyiOrder: s must be >= 0");
  }
};

// D(P||Q), nats; sums over supp(P) only; +inf when P is not absolutely
// continuous w.r.t. Q.
double kl_div(const Dist& p, const Dist& q);

// D_{1+s}(P||Q) = (1/s) log sum P^{1+s} Q^{-s}, nats.
double renyi_div(const Dist& p, const Dist& q, RenyiOrder order);

// Conditional versions via the composed joints:
// D_{1+s}(P_{Y|X}||Q_{Y|X}|P_X) = D_{1+s}(P_X P_{Y|X} || P_X Q_{Y|X}).
// Undefined rows with zero conditioning mass contribute nothing.
double cond_kl_div(const Kernel& p, const Kernel& q, const Dist& px);
double cond_renyi_div(const Kernel& p, const Kernel& q, const Dist& px, RenyiOrder order);

double entropy(const Dist& p);
double renyi_entropy(const Dist& p, RenyiOrder order);

// H_{1+s}(rest | given) on a joint, with `given` listing the conditioning
// components: -(1/s) log sum_x P(x) sum_y P(y|x)^{1+s}.
double cond_entropy(const JointDist& j, const std::vector<int>& given);
double cond_renyi_entropy(const JointDist& j, const std::vector<int>& given, RenyiOrder order);

// H_{1+s}(Y | X = x): Renyi entropy of one kernel row.
double per_symbol_renyi(const Kernel& k, std::size_t row, RenyiOrder order);

// Shannon mutual information between component groups of a joint.
double mutual_info(const JointDist& j, const std::vector<int>& a, const std::vector<int>& b);
double cond_mutual_info(const JointDist& j, const std::vector<int>& a, const std::vector<int>& b,
                        const std::vector<int>& c);

}  // namespace chansynth::info
