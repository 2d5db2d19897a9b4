#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>

#include "ietlab/iet.hpp"

using namespace ietlab;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

Iet<double> golden_rotation() {
  return Iet<double>(Perm::from_bottom({2, 1}), {1.0 - kGolden, kGolden});
}

Perm random_irreducible(std::mt19937_64& rng, int d) {
  std::vector<int> bot(d);
  for (int i = 0; i < d; i++) bot[i] = i + 1;
  while (true) {
    std::shuffle(bot.begin(), bot.end(), rng);
    Perm p = Perm::from_bottom(bot);
    if (p.irreducible()) return p;
  }
}

std::vector<double> random_lengths(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> lam(d);
  for (auto& l : lam) l = u(rng);
  return lam;
}

}  // namespace

TEST_CASE("omega of the d=2 swap") {
  IMat om = omega(Perm::from_bottom({2, 1}));
  CHECK(om(0, 1) == 1);
  CHECK(om(1, 0) == -1);
  CHECK(om(0, 0) == 0);
  CHECK(om(1, 1) == 0);
}

TEST_CASE("omega is antisymmetric for random irreducible permutations") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; trial++) {
    int d = 3 + int(rng() % 4);
    Perm p = random_irreducible(rng, d);
    IMat om = omega(p);
    for (int i = 0; i < d; i++)
      for (int j = 0; j < d; j++) CHECK(om(i, j) + om(j, i) == 0);
  }
}

TEST_CASE("omega of the symmetric d=4 permutation, enumerated case by case") {
  // expected matrix from enumerating all (a,b) pairs against the sign rule
  Perm p = Perm::symmetric(4);
  IMat om = omega(p);
  int expected[4][4] = {{0, 1, 1, 1}, {-1, 0, 1, 1}, {-1, -1, 0, 1}, {-1, -1, -1, 0}};
  for (int i = 0; i < 4; i++)
    for (int j = 0; j < 4; j++) CHECK(om(i, j) == expected[i][j]);
}

TEST_CASE("omega rejects a reducible permutation") {
  // {1,2} block is invariant
  Perm p = Perm::from_bottom({2, 1, 4, 3});
  CHECK_FALSE(p.irreducible());
  CHECK_THROWS_AS(omega(p), precondition_error);
}

TEST_CASE("apply matches rotation mod 1 on the golden IET") {
  Iet<double> t = golden_rotation();
  double x = 0.0;
  double y = 0.0;
  for (int i = 0; i < 2000; i++) {
    x = t.apply_point(x);
    y += kGolden;
    if (y >= 1.0) y -= 1.0;
    REQUIRE(std::abs(x - y) < 1e-9);
  }
}

TEST_CASE("apply translates left endpoints") {
  std::mt19937_64 rng(3);
  Perm p = random_irreducible(rng, 4);
  Iet<double> t(p, random_lengths(rng, 4));
  for (int a = 0; a < 4; a++) CHECK(t.apply_point(t.left[a]) == t.left[a] + t.w[a]);
}

TEST_CASE("apply rejects points outside the domain") {
  Iet<double> t = golden_rotation();
  CHECK_THROWS_AS(t.apply_point(-0.25), precondition_error);
  CHECK_THROWS_AS(t.apply_point(1.0), precondition_error);
}

TEST_CASE("golden orbit has the three-distance property") {
  Iet<double> t = golden_rotation();
  std::vector<double> orbit;
  double x = t.apply_point(0.0);
  for (int i = 0; i < 200; i++) {
    orbit.push_back(x);
    x = t.apply_point(x);
  }
  std::sort(orbit.begin(), orbit.end());
  std::set<long> gaps;  // quantized to kill roundoff
  for (std::size_t i = 0; i + 1 < orbit.size(); i++)
    gaps.insert(std::lround((orbit[i + 1] - orbit[i]) * 1e12));
  CHECK(gaps.size() <= 3);
}

TEST_CASE("images of the exchanged intervals partition the domain") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; trial++) {
    int d = 3 + int(rng() % 3);
    Iet<double> t(random_irreducible(rng, d), random_lengths(rng, d));
    std::vector<std::pair<double, double>> images;
    for (int a = 0; a < d; a++) images.push_back({t.left[a] + t.w[a], t.right[a] + t.w[a]});
    std::sort(images.begin(), images.end());
    REQUIRE(std::abs(images.front().first) < 1e-12 * t.total);
    for (std::size_t i = 0; i + 1 < images.size(); i++)
      REQUIRE(std::abs(images[i].second - images[i + 1].first) < 1e-12 * t.total);
    REQUIRE(std::abs(images.back().second - t.total) < 1e-12 * t.total);
  }
}

TEST_CASE("Lebesgue measure is preserved on subintervals") {
  std::mt19937_64 rng(13);
  Iet<double> t(random_irreducible(rng, 4), random_lengths(rng, 4));
  // preimage of [u,v) avoiding image discontinuities has the same length
  for (int a = 0; a < 4; a++) {
    double u = t.left[a] + t.w[a] + 0.25 * t.lambda[a];
    double v = u + 0.5 * t.lambda[a];
    // preimage inside I_a is [u - w_a, v - w_a)
    CHECK(std::abs((v - u) - ((v - t.w[a]) - (u - t.w[a]))) < 1e-15);
    CHECK(t.apply_point(u - t.w[a]) == Catch::Approx(u));
  }
}

TEST_CASE("keane_check fails on the rational rotation with a witness") {
  Iet<double> t(Perm::from_bottom({2, 1}), {0.5, 0.5});
  auto rep = keane_check(t, 10);
  REQUIRE_FALSE(rep.ok);
  CHECK(rep.m >= 1);
}

TEST_CASE("keane_check passes deep on the golden rotation") {
  auto rep = keane_check(golden_rotation(), 10000);
  CHECK(rep.ok);
}

TEST_CASE("keane_check passes on random IETs at depth 1000") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; trial++) {
    int d = 4 + int(rng() % 2);
    Iet<double> t(random_irreducible(rng, d), random_lengths(rng, d));
    CHECK(keane_check(t, 1000).ok);
  }
}

TEST_CASE("exact rational mode reproduces the rational witness") {
  using Q = boost::multiprecision::cpp_rational;
  Iet<Q> t(Perm::from_bottom({2, 1}), {Q(1, 2), Q(1, 2)});
  auto rep = keane_check<Q>(t, 10, Q(0));
  REQUIRE_FALSE(rep.ok);
  CHECK(rep.m == 1);  // T(0) = 1/2 = l_B immediately
}
