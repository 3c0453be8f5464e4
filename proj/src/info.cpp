#include "chansynth/info.hpp"

#include <algorithm>
#include <cmath>

#include "chansynth/common.hpp"

namespace chansynth::info {

namespace {

void require_same_alphabet(const Dist& p, const Dist& q, const char* what) {
  if (!(p.alphabet() == q.alphabet()))
    throw std::invalid_argument(std::string(what) + ": alphabet mismatch");
}

double kl_terms(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInf;
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

double renyi_terms(const std::vector<double>& p, const std::vector<double>& q, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInf;
    acc += std::pow(p[i], 1.0 + s) * std::pow(q[i], -s);
  }
  return std::log(acc) / s;
}

}  // namespace

double kl_div(const Dist& p, const Dist& q) {
  require_same_alphabet(p, q, "kl_div");
  return kl_terms(p.pmf(), q.pmf());
}

double renyi_div(const Dist& p, const Dist& q, RenyiOrder order) {
  require_same_alphabet(p, q, "renyi_div");
  if (order.s == 0.0) return kl_terms(p.pmf(), q.pmf());
  return renyi_terms(p.pmf(), q.pmf(), order.s);
}

namespace {

// shared core for the conditional divergences: joint rows weighted by px
double cond_div_impl(const Kernel& p, const Kernel& q, const Dist& px, double s) {
  if (p.input_shape() != q.input_shape() || !(p.output() == q.output()))
    throw std::invalid_argument("cond_div: kernel shapes do not match");
  if (p.num_rows() != static_cast<std::size_t>(px.size()))
    throw std::invalid_argument("cond_div: conditioning distribution does not match kernel rows");
  const int ny = p.output().size;
  double acc = 0.0;
  for (int x = 0; x < px.size(); ++x) {
    const double w = px(x);
    if (w == 0.0) continue;
    const auto r = static_cast<std::size_t>(x);
    if (!p.row_defined(r) || !q.row_defined(r))
      throw std::invalid_argument("cond_div: undefined row has positive conditioning mass");
    for (int y = 0; y < ny; ++y) {
      const double a = p.at(r, y);
      if (a == 0.0) continue;
      const double b = q.at(r, y);
      if (b == 0.0) return kInf;
      acc += (s == 0.0) ? w * a * std::log(a / b)
                        : w * std::pow(a, 1.0 + s) * std::pow(b, -s);
    }
  }
  return (s == 0.0) ? acc : std::log(acc) / s;
}

}  // namespace

double cond_kl_div(const Kernel& p, const Kernel& q, const Dist& px) {
  return cond_div_impl(p, q, px, 0.0);
}

double cond_renyi_div(const Kernel& p, const Kernel& q, const Dist& px, RenyiOrder order) {
  return cond_div_impl(p, q, px, order.s);
}

double entropy(const Dist& p) {
  double h = 0.0;
  for (int x = 0; x < p.size(); ++x)
    if (p(x) > 0.0) h -= p(x) * std::log(p(x));
  return h;
}

double renyi_entropy(const Dist& p, RenyiOrder order) {
  if (order.s == 0.0) return entropy(p);
  double acc = 0.0;
  for (int x = 0; x < p.size(); ++x)
    if (p(x) > 0.0) acc += std::pow(p(x), 1.0 + order.s);
  return -std::log(acc) / order.s;
}

double cond_entropy(const JointDist& j, const std::vector<int>& given) {
  return cond_renyi_entropy(j, given, 0.0);
}

double cond_renyi_entropy(const JointDist& j, const std::vector<int>& given, RenyiOrder order) {
  const Kernel k = prob::condition(j, given);
  const prob::JointDist mg = prob::marginal(j, given);
  const int ny = k.output().size;
  const double s = order.s;
  double acc = 0.0;
  for (std::size_t r = 0; r < k.num_rows(); ++r) {
    const double w = mg.pmf()[r];
    if (w == 0.0) continue;
    double inner = 0.0;
    for (int y = 0; y < ny; ++y) {
      const double v = k.at(r, y);
      if (v == 0.0) continue;
      inner += (s == 0.0) ? -v * std::log(v) : std::pow(v, 1.0 + s);
    }
    acc += w * inner;
  }
  return (s == 0.0) ? acc : -std::log(acc) / s;
}

double per_symbol_renyi(const Kernel& k, std::size_t row, RenyiOrder order) {
  return renyi_entropy(k.row(row), order);
}

namespace {

double group_entropy(const JointDist& j, const std::vector<int>& g) {
  const prob::JointDist m = prob::marginal(j, g);
  double h = 0.0;
  for (double v : m.pmf())
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

std::vector<int> concat(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

}  // namespace

double mutual_info(const JointDist& j, const std::vector<int>& a, const std::vector<int>& b) {
  return group_entropy(j, a) + group_entropy(j, b) - group_entropy(j, concat(a, b));
}

double cond_mutual_info(const JointDist& j, const std::vector<int>& a, const std::vector<int>& b,
                        const std::vector<int>& c) {
  // I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C)
  return group_entropy(j, concat(a, c)) + group_entropy(j, concat(b, c)) -
         group_entropy(j, concat(concat(a, b), c)) - group_entropy(j, c);
}

}  // namespace chansynth::info
