#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chansynth/info.hpp"
#include "chansynth/randgen.hpp"
#include "chansynth/rng.hpp"

using namespace chansynth;
using prob::Alphabet;
using prob::Dist;
using prob::JointDist;
using prob::Kernel;

namespace {
Dist d2(double p0) { return Dist(Alphabet(2), {p0, 1.0 - p0}); }
}  // namespace

TEST_CASE("KL divergence") {
  CHECK(info::kl_div(d2(0.3), d2(0.3)) == doctest::Approx(0.0));
  CHECK(info::kl_div(d2(1.0), d2(0.5)) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // termwise evaluation of the defining sum
  const double expect = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75);
  CHECK(info::kl_div(d2(0.5), Dist(Alphabet(2), {0.25, 0.75})) ==
        doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::isinf(info::kl_div(d2(0.5), d2(1.0))));
  CHECK_THROWS_AS(info::kl_div(d2(0.5), Dist::uniform(Alphabet(3))), std::invalid_argument);
}

TEST_CASE("Renyi divergence") {
  CHECK(info::renyi_div(d2(0.3), d2(0.3), 0.7) == doctest::Approx(0.0));
  CHECK(info::renyi_div(d2(0.5), Dist(Alphabet(2), {0.25, 0.75}), 1.0) ==
        doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
  for (double s : {0.25, 0.5, 1.0})
    CHECK(info::renyi_div(d2(1.0), d2(0.5), s) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(std::isinf(info::renyi_div(d2(0.5), d2(1.0), 0.5)));
  CHECK_THROWS_AS(info::RenyiOrder(-0.1), std::invalid_argument);
}

TEST_CASE("entropies") {
  for (double s : {0.0, 0.3, 1.0}) {
    CHECK(info::renyi_entropy(Dist::uniform(Alphabet(5)), s) ==
          doctest::Approx(std::log(5.0)).epsilon(1e-12));
    CHECK(info::renyi_entropy(d2(1.0), s) == doctest::Approx(0.0));
  }
  CHECK(info::renyi_entropy(d2(0.3), 1.0) == doctest::Approx(-std::log(0.58)).epsilon(1e-12));
  CHECK(info::entropy(d2(0.3)) ==
        doctest::Approx(-0.3 * std::log(0.3) - 0.7 * std::log(0.7)).epsilon(1e-12));
}

TEST_CASE("conditional divergence equals divergence of the composed joints") {
  CHECK(info::cond_kl_div(Kernel::identity(Alphabet(2)), Kernel::identity(Alphabet(2)), d2(0.7)) ==
        doctest::Approx(0.0));
  // point-mass conditioning picks out one row
  const Kernel k1({Alphabet(2)}, Alphabet(2), {0.9, 0.1, 0.3, 0.7});
  const Kernel k2({Alphabet(2)}, Alphabet(2), {0.5, 0.5, 0.6, 0.4});
  CHECK(info::cond_kl_div(k1, k2, d2(1.0)) ==
        doctest::Approx(info::kl_div(k1.row(0), k2.row(0))).epsilon(1e-12));

  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Dist p = gen::random_dist(rng, 2);
    const Kernel a = gen::random_kernel(rng, {2}, 2);
    const Kernel b = gen::random_kernel(rng, {2}, 2);
    for (double s : {0.0, 0.25, 1.0}) {
      // oracle: build both joints explicitly and take the plain divergence
      const Dist ja = prob::compose(p, a).flatten();
      const Dist jb = prob::compose(p, b).flatten();
      const double direct = info::cond_renyi_div(a, b, p, s);
      const double via_joints = info::renyi_div(ja, jb, s);
      CHECK(direct == doctest::Approx(via_joints).epsilon(1e-10));
    }
  }
}

TEST_CASE("conditional Renyi entropy") {
  // independence: H_{1+s}(Y|X) = H_{1+s}(Y)
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const Dist px = gen::random_dist(rng, 3);
    const Dist py = gen::random_dist(rng, 2);
    std::vector<double> w;
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 2; ++y) w.push_back(px(x) * py(y));
    const JointDist j = JointDist::from_weights({Alphabet(3), Alphabet(2)}, std::move(w));
    for (double s : {0.0, 0.4, 1.0})
      CHECK(info::cond_renyi_entropy(j, {0}, s) ==
            doctest::Approx(info::renyi_entropy(py, s)).epsilon(1e-10));
  }
  // deterministic Y = f(X)
  const JointDist jf = JointDist::from_weights({Alphabet(2), Alphabet(2)}, {0.3, 0.0, 0.0, 0.7});
  for (double s : {0.0, 0.5, 1.0}) CHECK(info::cond_renyi_entropy(jf, {0}, s) == doctest::Approx(0.0));

  // 2x2 joint against the defining double sum at s = 0.5
  const JointDist j = JointDist::from_weights({Alphabet(2), Alphabet(2)}, {0.4, 0.1, 0.2, 0.3});
  const double s = 0.5;
  double acc = 0.0;
  acc += 0.5 * (std::pow(0.8, 1.5) + std::pow(0.2, 1.5));
  acc += 0.5 * (std::pow(0.4, 1.5) + std::pow(0.6, 1.5));
  CHECK(info::cond_renyi_entropy(j, {0}, s) == doctest::Approx(-std::log(acc) / s).epsilon(1e-12));
}

TEST_CASE("per-symbol Renyi entropy") {
  const Kernel k({Alphabet(3)}, Alphabet(4), {0.25, 0.25, 0.25, 0.25,  //
                                              1.0, 0.0, 0.0, 0.0,      //
                                              0.5, 0.3, 0.1, 0.1});
  CHECK(info::per_symbol_renyi(k, 0, 0.8) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(info::per_symbol_renyi(k, 1, 0.8) == doctest::Approx(0.0));
  CHECK(info::per_symbol_renyi(k, 2, 1.0) ==
        doctest::Approx(-std::log(0.25 + 0.09 + 0.01 + 0.01)).epsilon(1e-12));
}

TEST_CASE("mutual information") {
  Rng rng(11);
  // independent
  const Dist px = gen::random_dist(rng, 2);
  const Dist py = gen::random_dist(rng, 3);
  std::vector<double> w;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 3; ++y) w.push_back(px(x) * py(y));
  CHECK(info::mutual_info(JointDist::from_weights({Alphabet(2), Alphabet(3)}, std::move(w)), {0},
                          {1}) == doctest::Approx(0.0).epsilon(1e-12));
  // Y = X uniform binary
  const JointDist jd = JointDist::from_weights({Alphabet(2), Alphabet(2)}, {0.5, 0.0, 0.0, 0.5});
  CHECK(info::mutual_info(jd, {0}, {1}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // random joint: matches D(J || product of marginals)
  for (int rep = 0; rep < 10; ++rep) {
    const JointDist j = gen::random_joint(rng, {2, 3});
    const Dist mx = prob::marginal_dist(j, 0), my = prob::marginal_dist(j, 1);
    std::vector<double> prod;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 3; ++y) prod.push_back(mx(x) * my(y));
    const double oracle = info::kl_div(j.flatten(), Dist(Alphabet(6), std::move(prod)));
    CHECK(info::mutual_info(j, {0}, {1}) == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("limit property: Renyi at s = 1e-4 is close to KL") {
  Rng rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(rng.next_below(3));
    const Dist p = gen::random_dist(rng, n, 0.02);
    const Dist q = gen::random_dist(rng, n, 0.02);
    CHECK(std::abs(info::renyi_div(p, q, 1e-4) - info::kl_div(p, q)) <= 1e-3);
  }
}

TEST_CASE("data processing: dropping a coordinate cannot raise the divergence") {
  Rng rng(17);
  for (int rep = 0; rep < 40; ++rep) {
    const JointDist pj = gen::random_joint(rng, {2, 3});
    const JointDist qj = gen::random_joint(rng, {2, 3});
    const Dist px = prob::marginal_dist(pj, 0), qx = prob::marginal_dist(qj, 0);
    for (double s : {0.25, 0.5, 1.0}) {
      const double full = info::renyi_div(pj.flatten(), qj.flatten(), s);
      const double marg = info::renyi_div(px, qx, s);
      CHECK(full >= marg - 1e-12);
    }
  }
}

TEST_CASE("independence additivity of Renyi entropy") {
  Rng rng(19);
  for (int rep = 0; rep < 20; ++rep) {
    const Dist px = gen::random_dist(rng, 2);
    const Dist py = gen::random_dist(rng, 3);
    std::vector<double> w;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 3; ++y) w.push_back(px(x) * py(y));
    const Dist joint = Dist(Alphabet(6), std::move(w));
    for (double s : {0.2, 0.5, 1.0})
      CHECK(std::abs(info::renyi_entropy(joint, s) -
                     (info::renyi_entropy(px, s) + info::renyi_entropy(py, s))) <= 1e-12);
  }
}

TEST_CASE("independent-Z conditional additivity") {
  Rng rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    const JointDist jxy = gen::random_joint(rng, {2, 2});
    const Dist pz = gen::random_dist(rng, 2);
    std::vector<double> w;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        for (int z = 0; z < 2; ++z) w.push_back(jxy.at({x, y}) * pz(z));
    const JointDist j = JointDist::from_weights({Alphabet(2), Alphabet(2), Alphabet(2)}, std::move(w));
    for (double s : {0.3, 1.0}) {
      const double lhs = info::cond_renyi_entropy(j, {0}, s);  // H(YZ|X)
      const double rhs = info::cond_renyi_entropy(jxy, {0}, s) + info::renyi_entropy(pz, s);
      CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
  }
}

TEST_CASE("conditional Renyi entropy is not the row-wise average (stored counterexample)") {
  // rows (0.9, 0.1) and (0.5, 0.5) under a fair coin on X, s = 1
  const JointDist j = JointDist::from_weights({Alphabet(2), Alphabet(2)}, {0.45, 0.05, 0.25, 0.25});
  const Kernel rows = prob::condition(j, {0});
  const double s = 1.0;
  const double joint_version = info::cond_renyi_entropy(j, {0}, s);
  const double averaged = 0.5 * info::per_symbol_renyi(rows, 0, s) +
                          0.5 * info::per_symbol_renyi(rows, 1, s);
  CHECK(std::abs(joint_version - averaged) > 1e-6);
}

TEST_CASE("Renyi divergence is nondecreasing in the order") {
  Rng rng(29);
  for (int rep = 0; rep < 20; ++rep) {
    const Dist p = gen::random_dist(rng, 3, 0.05);
    const Dist q = gen::random_dist(rng, 3, 0.05);
    double prev = info::kl_div(p, q);
    for (double s : {0.1, 0.3, 0.6, 1.0}) {
      const double d = info::renyi_div(p, q, s);
      CHECK(d >= prev - 1e-12);
      prev = d;
    }
  }
}
