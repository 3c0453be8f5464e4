#pragma once

#include <cmath>

#include "chansynth/oneshot.hpp"
#include "chansynth/prob.hpp"
#include "chansynth/rng.hpp"

// Seeded generators for random micro instances; used by the verify command
// and by the test suites.

namespace chansynth::gen {

using prob::Alphabet;
using prob::Dist;
using prob::JointDist;
using prob::Kernel;

inline Dist random_dist(Rng& rng, int size, double smooth = 0.0, const std::string& label = "") {
  auto w = rng.next_simplex(static_cast<std::size_t>(size));
  for (auto& v : w) v = (1.0 - smooth) * v + smooth / static_cast<double>(size);
  return Dist(Alphabet(size, label), std::move(w));
}

inline Kernel random_kernel(Rng& rng, std::vector<int> in_sizes, int out_size, double smooth = 0.0,
                            const std::string& label = "") {
  std::vector<Alphabet> ins;
  std::size_t rows = 1;
  for (int s : in_sizes) {
    ins.emplace_back(s);
    rows *= static_cast<std::size_t>(s);
  }
  std::vector<double> flat;
  flat.reserve(rows * static_cast<std::size_t>(out_size));
  for (std::size_t r = 0; r < rows; ++r) {
    auto w = rng.next_simplex(static_cast<std::size_t>(out_size));
    for (auto& v : w) v = (1.0 - smooth) * v + smooth / static_cast<double>(out_size);
    flat.insert(flat.end(), w.begin(), w.end());
  }
  return Kernel(std::move(ins), Alphabet(out_size, label), std::move(flat));
}

inline JointDist random_joint(Rng& rng, std::vector<int> sizes, double smooth = 0.0) {
  std::vector<Alphabet> comps;
  std::size_t cells = 1;
  for (int s : sizes) {
    comps.emplace_back(s);
    cells *= static_cast<std::size_t>(s);
  }
  auto w = rng.next_simplex(cells);
  for (auto& v : w) v = (1.0 - smooth) * v + smooth / static_cast<double>(cells);
  return JointDist(std::move(comps), std::move(w));
}

inline double random_order(Rng& rng) { return 0.1 + 0.9 * rng.next_double(); }

// Bin counts are drawn as exact exponentials (R = log m), the regime the
// binning lemma is stated for.
inline oneshot::PAInstance random_pa_instance(Rng& rng) {
  const int nx = 2 + static_cast<int>(rng.next_below(2));
  const int ny = 2 + static_cast<int>(rng.next_below(2));
  const int bins = 1 + static_cast<int>(rng.next_below(3));
  return {random_joint(rng, {nx, ny}, 0.05), std::log(static_cast<double>(bins)),
          random_order(rng)};
}

inline oneshot::ResolvInstance random_resolv_instance(Rng& rng) {
  const int nw = 2 + static_cast<int>(rng.next_below(2));
  return {random_dist(rng, nw, 0.05, "W"), random_dist(rng, 2, 0.05, "X"),
          random_kernel(rng, {2}, 2, 0.05, "Y"), random_dist(rng, 2, 0.1, "Y"),
          random_order(rng)};
}

inline oneshot::CondResolvInstance random_cond_resolv_instance(Rng& rng) {
  return {random_joint(rng, {2, 2}, 0.05),          // (A, W)
          random_dist(rng, 2, 0.05, "B"),
          random_dist(rng, 2, 0.05, "X"),
          random_kernel(rng, {2, 2}, 2, 0.05, "Y"),  // (X, B) -> Y
          random_kernel(rng, {2}, 2, 0.1, "Y"),      // B -> Y reference
          random_order(rng)};
}

inline oneshot::SuperposInstance random_superpos_instance(Rng& rng) {
  return {random_joint(rng, {2, 2}, 0.05),           // (W, What)
          random_joint(rng, {2, 2}, 0.05),           // (X, Xhat)
          random_kernel(rng, {2, 2}, 2, 0.05, "Y"),  // (X, Xhat) -> Y
          random_dist(rng, 2, 0.1, "Y"), random_order(rng)};
}

inline oneshot::CondSuperposInstance random_cond_superpos_instance(Rng& rng) {
  return {random_joint(rng, {2, 2, 2}, 0.05),           // (A, W, What)
          random_dist(rng, 2, 0.05, "B"),
          random_joint(rng, {2, 2}, 0.05),              // (X, Xhat)
          random_kernel(rng, {2, 2, 2}, 2, 0.05, "Y"),  // (X, Xhat, B) -> Y
          random_kernel(rng, {2}, 2, 0.1, "Y"), random_order(rng)};
}

}  // namespace chansynth::gen
