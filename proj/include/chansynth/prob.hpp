#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chansynth/common.hpp"

namespace chansynth::prob {

struct Alphabet {
  int size = 0;
  std::string label;

  Alphabet() = default;
  Alphabet(int size_, std::string label_ = "");

  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.size == b.size; }
};

// flat row-major index helpers for multi-component spaces
std::size_t shape_cells(const std::vector<int>& shape);
std::size_t flat_index(const std::vector<int>& shape, const std::vector<int>& idx);
void unflat_index(const std::vector<int>& shape, std::size_t flat, std::vector<int>& idx_out);

// Probability mass function over a finite alphabet. Immutable after
// construction; entries are nonnegative and sum to 1 (renormalized exactly on
// construction, input must already be within tolerance).
class Dist {
public:
  Dist() : alphabet_(1), pmf_{1.0} {}  // placeholder single-point law
  Dist(Alphabet alphabet, std::vector<double> pmf);

  // Normalizes arbitrary nonnegative weights (must have positive total).
  static Dist from_weights(Alphabet alphabet, std::vector<double> weights);
  static Dist uniform(Alphabet alphabet);
  static Dist point_mass(Alphabet alphabet, int symbol);

  const Alphabet& alphabet() const { return alphabet_; }
  int size() const { return alphabet_.size; }
  double operator()(int x) const { return pmf_[static_cast<std::size_t>(x)]; }
  const std::vector<double>& pmf() const { return pmf_; }
  std::vector<int> support() const;

private:
  Alphabet alphabet_;
  std::vector<double> pmf_;
};

// Conditional pmf: one Dist-like row per input tuple. Rows of zero
// conditioning mass may be marked undefined (condition() produces these);
// they are skipped by divergence code and rejected by row().
class Kernel {
public:
  Kernel() : inputs_{Alphabet(1)}, output_(1), num_rows_(1), rows_{1.0}, defined_{1} {}
  Kernel(std::vector<Alphabet> inputs, Alphabet output, std::vector<double> rows,
         std::vector<std::uint8_t> defined = {});

  static Kernel identity(Alphabet a);

  const std::vector<Alphabet>& inputs() const { return inputs_; }
  const Alphabet& output() const { return output_; }
  std::size_t num_rows() const { return num_rows_; }
  std::vector<int> input_shape() const;

  bool row_defined(std::size_t row) const { return defined_[row] != 0; }
  double at(std::size_t row, int y) const {
    return rows_[row * static_cast<std::size_t>(output_.size) + static_cast<std::size_t>(y)];
  }
  double at(const std::vector<int>& in, int y) const { return at(row_index(in), y); }
  std::size_t row_index(const std::vector<int>& in) const;
  Dist row(std::size_t row) const;
  // flat copy of all rows (undefined rows as stored, i.e. zeros)
  const std::vector<double>& table() const { return rows_; }

private:
  std::vector<Alphabet> inputs_;
  Alphabet output_;
  std::size_t num_rows_;
  std::vector<double> rows_;            // num_rows x |output|
  std::vector<std::uint8_t> defined_;   // per row
};

// Dense joint pmf over a list of component alphabets.
class JointDist {
public:
  JointDist() : components_{Alphabet(1)}, pmf_{1.0} {}
  JointDist(std::vector<Alphabet> components, std::vector<double> pmf);

  static JointDist from_weights(std::vector<Alphabet> components, std::vector<double> weights);

  const std::vector<Alphabet>& components() const { return components_; }
  std::vector<int> shape() const;
  std::size_t cells() const { return pmf_.size(); }
  const std::vector<double>& pmf() const { return pmf_; }
  double at(const std::vector<int>& idx) const { return pmf_[flat_index(shape(), idx)]; }

  // Collapse to a single-alphabet Dist (product alphabet).
  Dist flatten(const std::string& label = "") const;

private:
  std::vector<Alphabet> components_;
  std::vector<double> pmf_;
};

// --- constructions ---------------------------------------------------------

// N-fold i.i.d. extension: pmf(x^N) = prod_i P(x_i), over the sequence
// alphabet of size |X|^N (sequence index is the base-|X| number with x_1 as
// the most significant digit). Guarded at tol::kCapacityGuard cells.
Dist product_extension(const Dist& p, int n);

// J(x,y) = P(x) K(y|x); K must take the single input alphabet of P.
JointDist compose(const Dist& p, const Kernel& k);

// General product joint from a marginal on some components and a kernel on
// the rest: J(x_1..x_m, y) with rows of k indexed by all components of j.
JointDist compose(const JointDist& j, const Kernel& k);

// Sum out all components not in `keep`; result components follow the order
// given in `keep`.
JointDist marginal(const JointDist& j, const std::vector<int>& keep);
Dist marginal_dist(const JointDist& j, int component);

// K(rest|given): rows indexed by the `given` components in the given order,
// outputs over the flattened remaining components (in their original order).
// Rows with zero conditioning mass are marked undefined.
Kernel condition(const JointDist& j, const std::vector<int>& given);

// --- sequences and typicality ----------------------------------------------

// digits of a sequence index (x_1 first) in the base-|X| encoding used by
// product_extension
std::vector<int> seq_symbols(int alphabet_size, int n, std::size_t seq_index);
std::size_t seq_index(int alphabet_size, const std::vector<int>& symbols);

// Robust typicality: u^N is eps-typical for Q iff for every symbol a,
// |T_u(a) - Q(a)| <= eps * Q(a), where T_u is the empirical type.
bool is_typical(const Dist& q, int n, std::size_t seq, double eps);

// Materializes the typical set (sequence indices, ascending). Guarded.
std::vector<std::size_t> typical_set(const Dist& q, int n, double eps);

// Product law truncated to the typical set and renormalized. Throws
// ConfigError when the typical set is empty.
Dist truncated_typical_dist(const Dist& q, int n, double eps);

// Like truncated_typical_dist but falls back to the set of sequences with
// minimal worst-case relative deviation when the eps-typical set is empty.
// `fallback_used` reports which case applied.
Dist truncated_typical_or_closest(const Dist& q, int n, double eps, bool* fallback_used);

// Total product mass of the eps-typical set, Q^N(T_eps).
double typical_mass(const Dist& q, int n, double eps);

}  // namespace chansynth::prob
