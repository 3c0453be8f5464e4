#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace chansynth {

// Deterministic, platform-independent random stream. One master seed per run;
// sub-streams are derived by stable indices so independent tasks (restarts,
// codebook replicates) draw from non-overlapping streams regardless of
// scheduling order.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // decorrelate trivially related seeds
    next_u64();
    next_u64();
  }

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9E3779B97f4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    // n is tiny in this codebase; modulo bias is < 2^-50 and irrelevant here,
    // but use rejection anyway to keep draws exact.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  double next_exponential() {
    double u = next_double();
    while (u <= 0.0) u = next_double();
    return -std::log(u);
  }

  // Dirichlet(1,...,1): uniform on the simplex.
  std::vector<double> next_simplex(std::size_t n) {
    std::vector<double> v(n);
    double sum = 0.0;
    for (auto& x : v) {
      x = next_exponential();
      sum += x;
    }
    for (auto& x : v) x /= sum;
    return v;
  }

  // Sample an index from a pmf given as a plain vector (assumed normalized).
  std::size_t next_categorical(const std::vector<double>& pmf) {
    double u = next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pmf.size(); ++i) {
      acc += pmf[i];
      if (u < acc) return i;
    }
    return pmf.empty() ? 0 : pmf.size() - 1;
  }

  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    // one splitmix step over a mixed word; stable across platforms
    std::uint64_t z = seed ^ (0x9E3779B97f4A7C15ULL * (stream + 0x632BE59BD9B4E019ULL));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t state_;
};

}  // namespace chansynth
