#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chansynth/prob.hpp"
#include "chansynth/randgen.hpp"
#include "chansynth/rng.hpp"

using namespace chansynth;
using prob::Alphabet;
using prob::Dist;
using prob::JointDist;
using prob::Kernel;

namespace {
Dist d2(double p0) { return Dist(Alphabet(2, "X"), {p0, 1.0 - p0}); }
}  // namespace

TEST_CASE("dist construction validates") {
  CHECK_THROWS_AS(Dist(Alphabet(2), {0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(Dist(Alphabet(2), {-0.1, 1.1}), std::invalid_argument);
  CHECK_THROWS_AS(Dist(Alphabet(3), {0.5, 0.5}), std::invalid_argument);
  const Dist d = Dist::from_weights(Alphabet(3), {1.0, 1.0, 2.0});
  CHECK(d(2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.support().size() == 3);
}

TEST_CASE("product extension") {
  const Dist u = product_extension(d2(0.5), 2);
  for (int i = 0; i < 4; ++i) CHECK(u(i) == doctest::Approx(0.25));

  const Dist pm = product_extension(d2(1.0), 3);
  CHECK(pm(0) == doctest::Approx(1.0));
  for (int i = 1; i < 8; ++i) CHECK(pm(i) == 0.0);

  const Dist p = product_extension(d2(0.3), 2);
  CHECK(p(0) == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(0.21).epsilon(1e-12));
  CHECK(p(2) == doctest::Approx(0.21).epsilon(1e-12));
  CHECK(p(3) == doctest::Approx(0.49).epsilon(1e-12));

  CHECK_THROWS_AS(product_extension(Dist::uniform(Alphabet(10)), 9), CapacityError);
}

TEST_CASE("compose / marginal / condition round trips") {
  const Dist p = d2(0.4);
  const Kernel k({Alphabet(2, "X")}, Alphabet(2, "Y"), {0.9, 0.1, 0.2, 0.8});
  const JointDist j = compose(p, k);
  CHECK(j.at({0, 0}) == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(j.at({0, 1}) == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(j.at({1, 0}) == doctest::Approx(0.12).epsilon(1e-12));
  CHECK(j.at({1, 1}) == doctest::Approx(0.48).epsilon(1e-12));

  const Dist back = marginal_dist(j, 0);
  CHECK(back(0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(back(1) == doctest::Approx(0.6).epsilon(1e-12));

  const Kernel kc = condition(j, {0});
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      CHECK(kc.at(static_cast<std::size_t>(x), y) ==
            doctest::Approx(k.at(static_cast<std::size_t>(x), y)).epsilon(1e-12));

  // point-mass input: joint supported on row 0 only, and the other
  // conditioning row comes back undefined
  const JointDist j0 = compose(d2(1.0), k);
  CHECK(marginal_dist(j0, 1)(0) == doctest::Approx(0.9));
  const Kernel kc0 = condition(j0, {0});
  CHECK(kc0.row_defined(0));
  CHECK_FALSE(kc0.row_defined(1));
  CHECK_THROWS_AS(kc0.row(1), std::invalid_argument);

  // identity kernel under a uniform input
  const JointDist ji = compose(Dist::uniform(Alphabet(2)), Kernel::identity(Alphabet(2)));
  CHECK(ji.at({0, 0}) == doctest::Approx(0.5));
  CHECK(ji.at({0, 1}) == 0.0);
  CHECK(ji.at({1, 0}) == 0.0);
  CHECK(ji.at({1, 1}) == doctest::Approx(0.5));

  CHECK_THROWS_AS(marginal(j, {}), std::invalid_argument);
}

TEST_CASE("round trips hold on random instances") {
  Rng rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    const int nx = 2 + static_cast<int>(rng.next_below(3));
    const int ny = 2 + static_cast<int>(rng.next_below(3));
    const Dist p = gen::random_dist(rng, nx);
    const Kernel k = gen::random_kernel(rng, {nx}, ny);
    const JointDist j = compose(p, k);
    const Dist pm = marginal_dist(j, 0);
    for (int x = 0; x < nx; ++x) CHECK(std::abs(pm(x) - p(x)) <= 1e-12);
    const Kernel kc = condition(j, {0});
    for (int x = 0; x < nx; ++x) {
      if (p(x) == 0.0) continue;
      for (int y = 0; y < ny; ++y)
        CHECK(std::abs(kc.at(static_cast<std::size_t>(x), y) -
                       k.at(static_cast<std::size_t>(x), y)) <= 1e-12);
    }
    // product joint marginals recover the factors
    const Dist q = gen::random_dist(rng, ny);
    std::vector<double> w;
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) w.push_back(p(x) * q(y));
    const JointDist prod = JointDist::from_weights({Alphabet(nx), Alphabet(ny)}, std::move(w));
    const Dist qm = marginal_dist(prod, 1);
    for (int y = 0; y < ny; ++y) CHECK(std::abs(qm(y) - q(y)) <= 1e-12);
  }
}

TEST_CASE("robust typicality membership and enumeration") {
  // point mass: only the constant sequence qualifies
  const auto t0 = typical_set(d2(1.0), 3, 0.5);
  REQUIRE(t0.size() == 1);
  CHECK(t0[0] == 0);

  const auto t1 = typical_set(d2(0.5), 2, 0.1);
  REQUIRE(t1.size() == 2);
  CHECK(t1[0] == 1);  // 01
  CHECK(t1[1] == 2);  // 10

  const auto t2 = typical_set(d2(0.5), 2, 1.0);
  CHECK(t2.size() == 4);

  CHECK_THROWS_AS(typical_set(d2(0.5), 2, 0.0), std::invalid_argument);
}

TEST_CASE("truncated typical distribution") {
  const Dist pm = truncated_typical_dist(d2(1.0), 3, 0.5);
  CHECK(pm(0) == doctest::Approx(1.0));

  const Dist u = truncated_typical_dist(d2(0.5), 2, 0.1);
  CHECK(u(1) == doctest::Approx(0.5));
  CHECK(u(2) == doctest::Approx(0.5));
  CHECK(u(0) == 0.0);

  // vacuous truncation equals the product law
  const Dist full = truncated_typical_dist(d2(0.3), 2, 10.0);
  const Dist prod = product_extension(d2(0.3), 2);
  for (int i = 0; i < 4; ++i) CHECK(full(i) == doctest::Approx(prod(i)).epsilon(1e-12));

  // skewed law at tiny N: typical set empty, fallback takes closest types
  bool fb = false;
  CHECK_THROWS_AS(truncated_typical_dist(d2(0.15), 2, 0.2), ConfigError);
  const Dist fbd = truncated_typical_or_closest(d2(0.15), 2, 0.2, &fb);
  CHECK(fb);
  // the all-ones sequence has the smallest worst-case relative deviation
  // from (0.15, 0.85): its type (0, 1) deviates by 1.0 against 2.33 for the
  // balanced types
  CHECK(fbd(3) == doctest::Approx(1.0));
}

TEST_CASE("typical mass grows with N at fixed eps (weak-LLN trend)") {
  Rng rng(21);
  for (int rep = 0; rep < 5; ++rep) {
    const Dist q = gen::random_dist(rng, 2, 0.4);  // smoothed binary laws
    double prev = -1.0;
    for (int n : {2, 4, 8}) {
      const double mass = typical_mass(q, n, 0.5);
      CHECK(mass >= prev);
      prev = mass;
    }
  }
}
