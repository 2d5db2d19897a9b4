#include <catch2/catch_amalgamated.hpp>

#include "ietlab/pfun.hpp"

using namespace ietlab;
using R = real50;

namespace {

Layout<R> unit_layout(std::vector<double> lens) {
  Layout<R> lay;
  for (double l : lens) lay.lengths.push_back(R(l));
  lay.order.resize(lens.size());
  for (std::size_t i = 0; i < lens.size(); i++) lay.order[i] = int(i);
  lay.total = R(0);
  for (auto& l : lay.lengths) lay.total += l;
  return lay;
}

}  // namespace

TEST_CASE("polynomial pieces evaluate exactly") {
  auto lay = unit_layout({0.3, 0.7});
  // p0(x) = 1 + 2x, p1(x) = x^2 (local coordinates)
  auto f = PiecewiseFun<R>::from_poly(lay, {{R(1), R(2)}, {R(0), R(0), R(1)}});
  CHECK(to_double(f.eval_local(0, R(0.1))) == Catch::Approx(1.2).epsilon(1e-12));
  CHECK(to_double(f.eval_local(1, R(0.5))) == Catch::Approx(0.25).epsilon(1e-12));
  CHECK(to_double(f.eval_global(R(0.4))) == Catch::Approx(0.01).epsilon(1e-10));
}

TEST_CASE("chebyshev calculus: derivative and partial integral") {
  auto lay = unit_layout({1.0});
  auto f = PiecewiseFun<R>::from_poly(lay, {{R(1), R(-1), R(0), R(2)}}, 8);  // 1 - x + 2x^3
  auto df = f.derivative();
  for (double x : {0.1, 0.33, 0.9}) {
    double expect = -1 + 6 * x * x;
    CHECK(to_double(df.eval_local(0, R(x))) == Catch::Approx(expect).epsilon(1e-12));
  }
  CHECK(to_double(f.integral()) == Catch::Approx(1 - 0.5 + 0.5).epsilon(1e-12));
}

TEST_CASE("atom calculus: derivatives match finite differences") {
  auto lay = unit_layout({1.0});
  auto f = PiecewiseFun<R>::zero(lay, 8);
  f.add_atom(0, Atom<R>{true, R(-0.4), 0, R(1.5)});   // 1.5 x^{-0.4}
  f.add_atom(0, Atom<R>{true, R(0.6), 1, R(2.0)});    // 2 x^{0.6} log x
  f.add_atom(0, Atom<R>{false, R(0.5), 0, R(-1.0)});  // -(1-x)^{0.5}
  auto df = f.derivative();
  for (double x : {0.05, 0.4, 0.85}) {
    R h = R(1e-20);
    R fd = (f.eval_local(0, R(x) + h) - f.eval_local(0, R(x) - h)) / (2 * h);
    CHECK(to_double(df.eval_local(0, R(x))) == Catch::Approx(to_double(fd)).epsilon(1e-10));
  }
}

TEST_CASE("differentiating the primitive returns the original") {
  auto lay = unit_layout({0.4, 0.6});
  auto f = PiecewiseFun<R>::from_poly(lay, {{R(1), R(1)}, {R(-2), R(0), R(3)}}, 10);
  f.add_atom(0, Atom<R>{true, R(-0.3), 0, R(0.7)});
  f.add_atom(1, Atom<R>{false, R(0.25), 1, R(1.1)});
  auto g = f.primitive();
  CHECK(to_double(g.eval_local(0, R(0))) == Catch::Approx(0.0).margin(1e-30));
  auto dg = g.derivative();
  for (int al : {0, 1})
    for (double x : {0.1, 0.23, 0.31}) {
      double orig = to_double(f.eval_local(al, R(x)));
      CHECK(to_double(dg.eval_local(al, R(x))) == Catch::Approx(orig).epsilon(1e-9));
    }
}

TEST_CASE("the primitive is continuous across interval ends") {
  auto lay = unit_layout({0.5, 0.5});
  auto f = PiecewiseFun<R>::from_poly(lay, {{R(2)}, {R(-1), R(1)}}, 6);
  f.add_atom(1, Atom<R>{true, R(-0.5), 0, R(3)});
  auto g = f.primitive();
  R left_end = g.eval_local(0, R(0.5));
  R right_start = g.eval_local(1, R(0));
  CHECK(to_double(left_end - right_start) == Catch::Approx(0.0).margin(1e-12));
  // value at the global origin is pinned to zero
  CHECK(to_double(g.eval_local(0, R(0))) == Catch::Approx(0.0).margin(1e-30));
}

TEST_CASE("atom integrals have the closed form") {
  auto lay = unit_layout({0.8});
  auto f = PiecewiseFun<R>::zero(lay, 6);
  f.add_atom(0, Atom<R>{true, R(-0.5), 0, R(1)});
  // integral of x^{-1/2} over [0, 0.8] = 2 sqrt(0.8)
  CHECK(to_double(f.integral()) == Catch::Approx(2 * std::sqrt(0.8)).epsilon(1e-12));
  auto g = PiecewiseFun<R>::zero(lay, 6);
  g.add_atom(0, Atom<R>{true, R(0), 1, R(1)});  // log x
  double expect = 0.8 * std::log(0.8) - 0.8;
  CHECK(to_double(g.integral()) == Catch::Approx(expect).epsilon(1e-12));
  auto h = PiecewiseFun<R>::zero(lay, 6);
  h.add_atom(0, Atom<R>{false, R(0.5), 0, R(1)});  // (0.8 - x)^{1/2}
  CHECK(to_double(h.integral()) == Catch::Approx(std::pow(0.8, 1.5) * 2 / 3).epsilon(1e-12));
}

TEST_CASE("means of simple functions") {
  auto lay = unit_layout({1.0});
  auto c = PiecewiseFun<R>::from_gamma(lay, {R(3.25)});
  CHECK(to_double(c.means()[0]) == Catch::Approx(3.25));
  auto x = PiecewiseFun<R>::from_poly(lay, {{R(0), R(1)}});
  CHECK(to_double(x.means()[0]) == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("mean rejection of non-integrable atoms") {
  auto lay = unit_layout({1.0});
  auto f = PiecewiseFun<R>::zero(lay, 6);
  f.add_atom(0, Atom<R>{true, R(-1.5), 0, R(1)});
  CHECK_THROWS_AS(f.integral(), precondition_error);
}

TEST_CASE("sup and l1 norms") {
  auto lay = unit_layout({1.0});
  auto f = PiecewiseFun<R>::from_poly(lay, {{R(0), R(1), R(-1)}}, 8);  // x - x^2
  bool unb = false;
  CHECK(sup_norm(f, &unb) == Catch::Approx(0.25).epsilon(1e-6));
  CHECK_FALSE(unb);
  CHECK(l1_norm(f) == Catch::Approx(1.0 / 6).epsilon(1e-8));
  auto g = PiecewiseFun<R>::zero(lay, 6);
  g.add_atom(0, Atom<R>{true, R(-0.5), 0, R(1)});
  sup_norm(g, &unb);
  CHECK(unb);
  CHECK(l1_norm(g) == Catch::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("variation of piecewise C1 data and the unbounded flag") {
  auto lay = unit_layout({0.5, 0.5});
  auto f = PiecewiseFun<R>::from_poly(lay, {{R(0), R(1)}, {R(1), R(-2)}}, 6);
  bool unb = true;
  // variation = sum over pieces of integral |f'| = 0.5 + 1.0
  CHECK(variation(f, &unb) == Catch::Approx(1.5).epsilon(1e-8));
  CHECK_FALSE(unb);
  auto g = PiecewiseFun<R>::zero(lay, 6);
  g.add_atom(0, Atom<R>{true, R(0), 1, R(1)});
  variation(g, &unb);
  CHECK(unb);
}

TEST_CASE("p_a seminorm: polynomials are tame, saturating atoms are not zero") {
  auto lay = unit_layout({1.0});
  auto poly = PiecewiseFun<R>::from_poly(lay, {{R(0), R(0), R(1)}}, 8);  // x^2 as D^n phi
  double pa = p_a_seminorm(poly, R(0.5));
  CHECK(pa > 0);
  CHECK(pa < 10);
  auto bc = boundary_constants(poly, 0, R(0.5));
  CHECK(to_double(bc.plus[0]) == Catch::Approx(0.0).margin(1e-12));
  CHECK(to_double(bc.minus[0]) == Catch::Approx(0.0).margin(1e-12));
  CHECK_FALSE(bc.overflow);
}

TEST_CASE("boundary constants read off the saturating atom") {
  auto lay = unit_layout({1.0});
  double a = 0.5, c = 2.0;
  auto f = PiecewiseFun<R>::zero(lay, 6);
  f.add_atom(0, Atom<R>{true, R(-a), 0, R(c)});  // D^0 phi = 2 x^{-1/2}
  auto bc = boundary_constants(f, 0, R(a));
  // limit of -D phi (x) x^{1+a} as x -> 0+ equals a c
  CHECK(to_double(bc.plus[0]) == Catch::Approx(a * c).epsilon(1e-12));
  // numerical oracle for the same limit
  auto df = f.derivative();
  double probe = to_double(-df.eval_local(0, R(1e-12)) * pow(R(1e-12), R(1.5)));
  CHECK(probe == Catch::Approx(a * c).epsilon(1e-9));
  // right-side constant from a right-anchored atom
  auto g = PiecewiseFun<R>::zero(lay, 6);
  g.add_atom(0, Atom<R>{false, R(-a), 0, R(c)});
  auto bcg = boundary_constants(g, 0, R(a));
  CHECK(to_double(bcg.minus[0]) == Catch::Approx(a * c).epsilon(1e-12));
}

TEST_CASE("geometric type predicate") {
  Perm p = Perm::symmetric(4);  // top last = D, bottom last = A; heads A and D
  auto lay = unit_layout({0.25, 0.25, 0.25, 0.25});
  auto f = PiecewiseFun<R>::zero(lay, 6);
  // left singularity on A only: the pair (pi0 head, pi1 head) = (A, D)
  f.add_atom(0, Atom<R>{true, R(-0.5), 0, R(1)});
  CHECK(geometric_type(f, p, 0, R(0.5)));
  // add the partner singularity on D: now both heads are active
  f.add_atom(3, Atom<R>{true, R(-0.5), 0, R(1)});
  CHECK_FALSE(geometric_type(f, p, 0, R(0.5)));
}

TEST_CASE("adding functions merges atoms") {
  auto lay = unit_layout({1.0});
  auto f = PiecewiseFun<R>::zero(lay, 6);
  f.add_atom(0, Atom<R>{true, R(-0.5), 0, R(1)});
  auto g = PiecewiseFun<R>::zero(lay, 6);
  g.add_atom(0, Atom<R>{true, R(-0.5), 0, R(-1)});
  g.add_atom(0, Atom<R>{false, R(0.5), 0, R(2)});
  f += g;
  int live = 0;
  for (auto& at : f.pieces[0].atoms)
    if (at.coef != R(0)) live++;
  CHECK(live == 1);
}
