#include "chansynth/prob.hpp"

#include <algorithm>
#include <cmath>

namespace chansynth::prob {

namespace {

void check_nonnegative(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!(x >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative or NaN mass");
  }
}

std::vector<double> normalize_checked(std::vector<double> v, const char* what, bool strict) {
  check_nonnegative(v, what);
  double sum = 0.0;
  for (double x : v) sum += x;
  if (sum <= 0.0) throw std::invalid_argument(std::string(what) + ": zero total mass");
  if (strict && std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(what) + ": mass sums to " + std::to_string(sum));
  for (auto& x : v) x /= sum;
  return v;
}

}  // namespace

Alphabet::Alphabet(int size_, std::string label_) : size(size_), label(std::move(label_)) {
  if (size < 1) throw std::invalid_argument("Alphabet: size must be >= 1");
}

std::size_t shape_cells(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int s : shape) {
    if (s < 1) throw std::invalid_argument("shape_cells: nonpositive dimension");
    n *= static_cast<std::size_t>(s);
  }
  return n;
}

std::size_t flat_index(const std::vector<int>& shape, const std::vector<int>& idx) {
  std::size_t f = 0;
  for (std::size_t i = 0; i < shape.size(); ++i)
    f = f * static_cast<std::size_t>(shape[i]) + static_cast<std::size_t>(idx[i]);
  return f;
}

void unflat_index(const std::vector<int>& shape, std::size_t flat, std::vector<int>& idx_out) {
  idx_out.resize(shape.size());
  for (std::size_t i = shape.size(); i-- > 0;) {
    idx_out[i] = static_cast<int>(flat % static_cast<std::size_t>(shape[i]));
    flat /= static_cast<std::size_t>(shape[i]);
  }
}

Dist::Dist(Alphabet alphabet, std::vector<double> pmf) : alphabet_(alphabet) {
  if (pmf.size() != static_cast<std::size_t>(alphabet_.size))
    throw std::invalid_argument("Dist: pmf length does not match alphabet size");
  pmf_ = normalize_checked(std::move(pmf), "Dist", /*strict=*/true);
}

Dist Dist::from_weights(Alphabet alphabet, std::vector<double> weights) {
  if (weights.size() != static_cast<std::size_t>(alphabet.size))
    throw std::invalid_argument("Dist: weight length does not match alphabet size");
  Dist d(alphabet, std::vector<double>(weights.size(), 1.0 / static_cast<double>(weights.size())));
  d.pmf_ = normalize_checked(std::move(weights), "Dist", /*strict=*/false);
  return d;
}

Dist Dist::uniform(Alphabet a) {
  return Dist(a, std::vector<double>(static_cast<std::size_t>(a.size),
                                     1.0 / static_cast<double>(a.size)));
}

Dist Dist::point_mass(Alphabet a, int symbol) {
  if (symbol < 0 || symbol >= a.size) throw std::invalid_argument("point_mass: symbol out of range");
  std::vector<double> p(static_cast<std::size_t>(a.size), 0.0);
  p[static_cast<std::size_t>(symbol)] = 1.0;
  return Dist(a, std::move(p));
}

std::vector<int> Dist::support() const {
  std::vector<int> s;
  for (int x = 0; x < alphabet_.size; ++x)
    if (pmf_[static_cast<std::size_t>(x)] > 0.0) s.push_back(x);
  return s;
}

Kernel::Kernel(std::vector<Alphabet> inputs, Alphabet output, std::vector<double> rows,
               std::vector<std::uint8_t> defined)
    : inputs_(std::move(inputs)), output_(output) {
  if (inputs_.empty()) throw std::invalid_argument("Kernel: needs at least one input alphabet");
  num_rows_ = shape_cells(input_shape());
  const std::size_t want = num_rows_ * static_cast<std::size_t>(output_.size);
  if (rows.size() != want) throw std::invalid_argument("Kernel: row data has wrong size");
  if (defined.empty()) defined.assign(num_rows_, 1);
  if (defined.size() != num_rows_) throw std::invalid_argument("Kernel: defined flags wrong size");
  defined_ = std::move(defined);
  rows_ = std::move(rows);
  for (std::size_t r = 0; r < num_rows_; ++r) {
    if (!defined_[r]) continue;
    double sum = 0.0;
    for (int y = 0; y < output_.size; ++y) {
      double v = rows_[r * static_cast<std::size_t>(output_.size) + static_cast<std::size_t>(y)];
      if (!(v >= 0.0)) throw std::invalid_argument("Kernel: negative or NaN row entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("Kernel: row " + std::to_string(r) + " sums to " +
                                  std::to_string(sum));
    for (int y = 0; y < output_.size; ++y)
      rows_[r * static_cast<std::size_t>(output_.size) + static_cast<std::size_t>(y)] /= sum;
  }
}

Kernel Kernel::identity(Alphabet a) {
  std::vector<double> rows(static_cast<std::size_t>(a.size) * static_cast<std::size_t>(a.size), 0.0);
  for (int i = 0; i < a.size; ++i)
    rows[static_cast<std::size_t>(i) * a.size + static_cast<std::size_t>(i)] = 1.0;
  return Kernel({a}, a, std::move(rows));
}

std::vector<int> Kernel::input_shape() const {
  std::vector<int> s;
  s.reserve(inputs_.size());
  for (const auto& a : inputs_) s.push_back(a.size);
  return s;
}

std::size_t Kernel::row_index(const std::vector<int>& in) const {
  if (in.size() != inputs_.size()) throw std::invalid_argument("Kernel: wrong input arity");
  return flat_index(input_shape(), in);
}

Dist Kernel::row(std::size_t r) const {
  if (r >= num_rows_) throw std::invalid_argument("Kernel: row out of range");
  if (!defined_[r]) throw std::invalid_argument("Kernel: row " + std::to_string(r) + " is undefined");
  std::vector<double> p(rows_.begin() + static_cast<std::ptrdiff_t>(r * output_.size),
                        rows_.begin() + static_cast<std::ptrdiff_t>((r + 1) * output_.size));
  return Dist(output_, std::move(p));
}

JointDist::JointDist(std::vector<Alphabet> components, std::vector<double> pmf)
    : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("JointDist: needs components");
  if (pmf.size() != shape_cells(shape()))
    throw std::invalid_argument("JointDist: pmf size does not match shape");
  pmf_ = normalize_checked(std::move(pmf), "JointDist", /*strict=*/true);
}

JointDist JointDist::from_weights(std::vector<Alphabet> components, std::vector<double> weights) {
  auto shape = std::vector<int>{};
  for (const auto& a : components) shape.push_back(a.size);
  std::vector<double> u(shape_cells(shape), 1.0 / static_cast<double>(shape_cells(shape)));
  JointDist j(std::move(components), std::move(u));
  j.pmf_ = normalize_checked(std::move(weights), "JointDist", /*strict=*/false);
  return j;
}

std::vector<int> JointDist::shape() const {
  std::vector<int> s;
  s.reserve(components_.size());
  for (const auto& a : components_) s.push_back(a.size);
  return s;
}

Dist JointDist::flatten(const std::string& label) const {
  return Dist(Alphabet(static_cast<int>(cells()), label), pmf_);
}

Dist product_extension(const Dist& p, int n) {
  if (n < 1) throw std::invalid_argument("product_extension: n must be >= 1");
  const double cells = std::pow(static_cast<double>(p.size()), n);
  if (cells > static_cast<double>(tol::kCapacityGuard))
    throw CapacityError("product_extension: |X|^n = " + std::to_string(cells) +
                        " exceeds capacity guard");
  const std::size_t total = static_cast<std::size_t>(cells + 0.5);
  std::vector<double> out;
  out.reserve(total);
  out.push_back(1.0);
  for (int i = 0; i < n; ++i) {
    std::vector<double> next(out.size() * static_cast<std::size_t>(p.size()));
    std::size_t k = 0;
    for (double v : out)
      for (int x = 0; x < p.size(); ++x) next[k++] = v * p(x);
    out = std::move(next);
  }
  return Dist::from_weights(Alphabet(static_cast<int>(total), p.alphabet().label + "^" + std::to_string(n)),
                            std::move(out));
}

JointDist compose(const Dist& p, const Kernel& k) {
  if (k.inputs().size() != 1 || !(k.inputs()[0] == p.alphabet()))
    throw std::invalid_argument("compose: kernel input does not match distribution alphabet");
  const int nx = p.size(), ny = k.output().size;
  std::vector<double> j(static_cast<std::size_t>(nx) * ny, 0.0);
  for (int x = 0; x < nx; ++x) {
    if (p(x) == 0.0) continue;
    if (!k.row_defined(static_cast<std::size_t>(x)))
      throw std::invalid_argument("compose: undefined kernel row has positive input mass");
    for (int y = 0; y < ny; ++y)
      j[static_cast<std::size_t>(x) * ny + static_cast<std::size_t>(y)] =
          p(x) * k.at(static_cast<std::size_t>(x), y);
  }
  return JointDist({p.alphabet(), k.output()}, std::move(j));
}

JointDist compose(const JointDist& j, const Kernel& k) {
  const auto in_shape = k.input_shape();
  if (in_shape != j.shape())
    throw std::invalid_argument("compose: kernel inputs do not match joint components");
  const int ny = k.output().size;
  std::vector<double> out(j.cells() * static_cast<std::size_t>(ny), 0.0);
  for (std::size_t r = 0; r < j.cells(); ++r) {
    const double px = j.pmf()[r];
    if (px == 0.0) continue;
    if (!k.row_defined(r))
      throw std::invalid_argument("compose: undefined kernel row has positive input mass");
    for (int y = 0; y < ny; ++y)
      out[r * static_cast<std::size_t>(ny) + static_cast<std::size_t>(y)] = px * k.at(r, y);
  }
  auto comps = j.components();
  comps.push_back(k.output());
  return JointDist(std::move(comps), std::move(out));
}

JointDist marginal(const JointDist& j, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("marginal: empty keep set");
  const auto shape = j.shape();
  for (int c : keep)
    if (c < 0 || c >= static_cast<int>(shape.size()))
      throw std::invalid_argument("marginal: component index out of range");
  std::vector<Alphabet> comps;
  std::vector<int> out_shape;
  for (int c : keep) {
    comps.push_back(j.components()[static_cast<std::size_t>(c)]);
    out_shape.push_back(shape[static_cast<std::size_t>(c)]);
  }
  std::vector<double> out(shape_cells(out_shape), 0.0);
  std::vector<int> idx, kidx(keep.size());
  for (std::size_t f = 0; f < j.cells(); ++f) {
    unflat_index(shape, f, idx);
    for (std::size_t i = 0; i < keep.size(); ++i) kidx[i] = idx[static_cast<std::size_t>(keep[i])];
    out[flat_index(out_shape, kidx)] += j.pmf()[f];
  }
  return JointDist::from_weights(std::move(comps), std::move(out));
}

Dist marginal_dist(const JointDist& j, int component) {
  const JointDist m = marginal(j, {component});
  return Dist(m.components()[0], m.pmf());
}

Kernel condition(const JointDist& j, const std::vector<int>& given) {
  const auto shape = j.shape();
  std::vector<int> rest;
  for (int c = 0; c < static_cast<int>(shape.size()); ++c)
    if (std::find(given.begin(), given.end(), c) == given.end()) rest.push_back(c);
  if (rest.empty()) throw std::invalid_argument("condition: nothing left to condition");

  std::vector<Alphabet> in_alph;
  std::vector<int> in_shape;
  for (int c : given) {
    in_alph.push_back(j.components()[static_cast<std::size_t>(c)]);
    in_shape.push_back(shape[static_cast<std::size_t>(c)]);
  }
  std::vector<int> out_shape;
  std::string out_label;
  for (int c : rest) {
    out_shape.push_back(shape[static_cast<std::size_t>(c)]);
    out_label += j.components()[static_cast<std::size_t>(c)].label;
  }
  const std::size_t n_rows = shape_cells(in_shape);
  const std::size_t n_out = shape_cells(out_shape);
  Alphabet out_alph(static_cast<int>(n_out), out_label);

  std::vector<double> rows(n_rows * n_out, 0.0);
  std::vector<double> mass(n_rows, 0.0);
  std::vector<int> idx, gidx(given.size()), ridx(rest.size());
  for (std::size_t f = 0; f < j.cells(); ++f) {
    const double v = j.pmf()[f];
    if (v == 0.0) continue;
    unflat_index(shape, f, idx);
    for (std::size_t i = 0; i < given.size(); ++i) gidx[i] = idx[static_cast<std::size_t>(given[i])];
    for (std::size_t i = 0; i < rest.size(); ++i) ridx[i] = idx[static_cast<std::size_t>(rest[i])];
    const std::size_t r = flat_index(in_shape, gidx);
    rows[r * n_out + flat_index(out_shape, ridx)] += v;
    mass[r] += v;
  }
  std::vector<std::uint8_t> defined(n_rows, 1);
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (mass[r] <= 0.0) {
      defined[r] = 0;
      continue;
    }
    for (std::size_t y = 0; y < n_out; ++y) rows[r * n_out + y] /= mass[r];
  }
  return Kernel(std::move(in_alph), out_alph, std::move(rows), std::move(defined));
}

std::vector<int> seq_symbols(int alphabet_size, int n, std::size_t seq_index) {
  std::vector<int> sym(static_cast<std::size_t>(n));
  for (int i = n; i-- > 0;) {
    sym[static_cast<std::size_t>(i)] = static_cast<int>(seq_index % static_cast<std::size_t>(alphabet_size));
    seq_index /= static_cast<std::size_t>(alphabet_size);
  }
  return sym;
}

std::size_t seq_index(int alphabet_size, const std::vector<int>& symbols) {
  std::size_t f = 0;
  for (int s : symbols) f = f * static_cast<std::size_t>(alphabet_size) + static_cast<std::size_t>(s);
  return f;
}

namespace {

// worst relative deviation of the type of `seq` from q; +inf when the
// sequence uses a symbol outside supp(q)
double max_relative_deviation(const Dist& q, int n, std::size_t seq) {
  std::vector<int> counts(static_cast<std::size_t>(q.size()), 0);
  for (int s : seq_symbols(q.size(), n, seq)) counts[static_cast<std::size_t>(s)]++;
  double worst = 0.0;
  for (int a = 0; a < q.size(); ++a) {
    const double type = static_cast<double>(counts[static_cast<std::size_t>(a)]) / n;
    if (q(a) == 0.0) {
      if (type > 0.0) return kInf;
      continue;
    }
    worst = std::max(worst, std::abs(type - q(a)) / q(a));
  }
  return worst;
}

std::size_t guarded_seq_count(const Dist& q, int n, const char* what) {
  const double cells = std::pow(static_cast<double>(q.size()), n);
  if (cells > static_cast<double>(tol::kCapacityGuard))
    throw CapacityError(std::string(what) + ": |X|^N exceeds capacity guard");
  return static_cast<std::size_t>(cells + 0.5);
}

}  // namespace

bool is_typical(const Dist& q, int n, std::size_t seq, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("is_typical: eps must be > 0");
  return max_relative_deviation(q, n, seq) <= eps;
}

std::vector<std::size_t> typical_set(const Dist& q, int n, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("typical_set: eps must be > 0");
  const std::size_t total = guarded_seq_count(q, n, "typical_set");
  std::vector<std::size_t> out;
  for (std::size_t seq = 0; seq < total; ++seq)
    if (max_relative_deviation(q, n, seq) <= eps) out.push_back(seq);
  return out;
}

double typical_mass(const Dist& q, int n, double eps) {
  const Dist qn = product_extension(q, n);
  double mass = 0.0;
  for (std::size_t seq : typical_set(q, n, eps)) mass += qn(static_cast<int>(seq));
  return mass;
}

namespace {

Dist truncate_to(const Dist& q, int n, const std::vector<std::size_t>& set, const char* what) {
  if (set.empty()) throw ConfigError(std::string(what) + ": empty sequence set");
  const Dist qn = product_extension(q, n);
  std::vector<double> w(static_cast<std::size_t>(qn.size()), 0.0);
  for (std::size_t seq : set) w[seq] = qn(static_cast<int>(seq));
  return Dist::from_weights(qn.alphabet(), std::move(w));
}

}  // namespace

Dist truncated_typical_dist(const Dist& q, int n, double eps) {
  const auto set = typical_set(q, n, eps);
  if (set.empty()) throw ConfigError("truncated_typical_dist: typical set is empty");
  return truncate_to(q, n, set, "truncated_typical_dist");
}

Dist truncated_typical_or_closest(const Dist& q, int n, double eps, bool* fallback_used) {
  auto set = typical_set(q, n, eps);
  bool fallback = set.empty();
  if (fallback) {
    const std::size_t total = guarded_seq_count(q, n, "truncated_typical_or_closest");
    double best = kInf;
    for (std::size_t seq = 0; seq < total; ++seq)
      best = std::min(best, max_relative_deviation(q, n, seq));
    for (std::size_t seq = 0; seq < total; ++seq)
      if (max_relative_deviation(q, n, seq) <= best + 1e-12) set.push_back(seq);
  }
  if (fallback_used) *fallback_used = fallback;
  return truncate_to(q, n, set, "truncated_typical_or_closest");
}

}  // namespace chansynth::prob
