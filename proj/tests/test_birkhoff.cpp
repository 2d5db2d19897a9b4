#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ietlab/birkhoff.hpp"
#include "ietlab/exact.hpp"

using namespace ietlab;
using R = real160;

namespace {

const CocycleRun<bigint>& sym4_run() {
  static CocycleRun<bigint> run = [] {
    std::mt19937_64 rng(101);
    return accelerate(random_exact_iet(Perm::symmetric(4), rng, 4096), ZorichPolicy{}, 80);
  }();
  return run;
}

PiecewiseFun<R> quadratic_fixture() {
  auto lay = layout_of<R>(sym4_run(), 0);
  std::vector<std::vector<R>> coef(4);
  coef[0] = {R(1), R(2)};
  coef[1] = {R(-1), R(0), R(4)};
  coef[2] = {R(0.5), R(-3)};
  coef[3] = {R(2), R(1), R(-2)};
  return PiecewiseFun<R>::from_poly(lay, coef, 8);
}

PiecewiseFun<R> singular_fixture() {
  auto f = quadratic_fixture();
  f.add_atom(0, Atom<R>{true, R(-0.5), 0, R(0.3)});
  f.add_atom(2, Atom<R>{false, R(0.5), 1, R(1.2)});
  return f;
}

}  // namespace

TEST_CASE("special sums of piecewise constants follow the cocycle matrix") {
  const auto& run = sym4_run();
  std::vector<R> h = {R(1), R(-2), R(0.5), R(3)};
  auto phi = PiecewiseFun<R>::from_gamma(layout_of<R>(run, 0), h);
  BirkhoffPipeline<R> pipe(run, phi);
  for (std::size_t k : {5uz, 20uz, 40uz}) {
    pipe.extend_to(k);
    auto qh = mat_vec(run.Q(k), h);
    auto m = pipe.level[k].means();
    for (int b = 0; b < 4; b++) {
      double rel = to_double((m[b] - qh[b]) / (1 + abs(qh[b])));
      CHECK(std::abs(rel) < 1e-40);
    }
    // the representation is genuinely constant per interval
    double spread = 0;
    for (int b = 0; b < 4; b++) {
      const auto& vals = pipe.level[k].pieces[b].vals;
      for (auto& v : vals) spread = std::max(spread, std::abs(to_double(v - qh[b])));
    }
    CHECK(spread < 1e-30 * to_double(norm_inf(qh)));
  }
}

TEST_CASE("special sums preserve the integral") {
  const auto& run = sym4_run();
  for (auto* fix : {+[] { return quadratic_fixture(); }, +[] { return singular_fixture(); }}) {
    auto phi = fix();
    R before = phi.integral();
    BirkhoffPipeline<R> pipe(run, phi);
    pipe.extend_to(25);
    R after = pipe.level[25].integral();
    CHECK(std::abs(to_double(after - before)) < 1e-15 * std::abs(to_double(before)) + 1e-30);
  }
}

TEST_CASE("pipeline agrees with direct floor-by-floor summation") {
  const auto& run = sym4_run();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.02, 0.98);

  SECTION("piecewise polynomial input") {
    auto phi = quadratic_fixture();
    BirkhoffPipeline<R> pipe(run, phi);
    pipe.extend_to(5);
    const auto& lev = pipe.level[5];
    for (int b = 0; b < 4; b++)
      for (int trial = 0; trial < 6; trial++) {
        R x = lev.layout.lengths[b] * R(u(rng));
        R direct = birkhoff_sum_direct(run, phi, 5, b, x);
        R rep = lev.eval_local(b, x);
        CHECK(std::abs(to_double(rep - direct)) < 1e-30 * (1 + std::abs(to_double(direct))));
      }
  }

  SECTION("singular input") {
    auto phi = singular_fixture();
    BirkhoffPipeline<R> pipe(run, phi);
    pipe.extend_to(5);
    const auto& lev = pipe.level[5];
    for (int b = 0; b < 4; b++)
      for (int trial = 0; trial < 6; trial++) {
        R x = lev.layout.lengths[b] * R(u(rng));
        R direct = birkhoff_sum_direct(run, phi, 5, b, x);
        R rep = lev.eval_local(b, x);
        CHECK(std::abs(to_double(rep - direct)) < 1e-18 * (1 + std::abs(to_double(direct))));
      }
  }
}

TEST_CASE("variation does not increase under special sums") {
  const auto& run = sym4_run();
  auto phi = quadratic_fixture();
  double var0 = variation(phi);
  BirkhoffPipeline<R> pipe(run, phi);
  pipe.extend_to(5);
  double var5 = variation(pipe.level[5]);
  CHECK(var5 <= var0 * (1 + 1e-8));
}

TEST_CASE("L1 norm does not increase under special sums") {
  const auto& run = sym4_run();
  auto phi = singular_fixture();
  double l0 = l1_norm(phi);
  BirkhoffPipeline<R> pipe(run, phi);
  for (std::size_t k : {5uz, 15uz, 25uz}) {
    pipe.extend_to(k);
    CHECK(l1_norm(pipe.level[k]) <= l0 * (1 + 1e-6));
  }
}

TEST_CASE("sup norm bound by the cocycle norm for bounded variation input") {
  const auto& run = sym4_run();
  auto phi = quadratic_fixture();
  double s0 = sup_norm(phi);
  BirkhoffPipeline<R> pipe(run, phi);
  pipe.extend_to(12);
  for (std::size_t k : {4uz, 8uz, 12uz}) {
    double sk = sup_norm(pipe.level[k]);
    double qn = std::exp(run.levels[k].log_norm_q);
    CHECK(sk <= qn * s0 * (1 + 1e-9));
  }
}

TEST_CASE("composing pipelines across a middle level matches the direct run") {
  const auto& run = sym4_run();
  auto phi = singular_fixture();
  BirkhoffPipeline<R> direct(run, phi);
  direct.extend_to(14);
  BirkhoffPipeline<R> front(run, phi);
  front.extend_to(6);
  BirkhoffPipeline<R> back(run, front.level[6], {}, 6);
  back.extend_to(8);  // levels 6 -> 14
  const auto& a = direct.level[14];
  const auto& b = back.level[8];
  double scale = sup_norm(a) + 1;
  for (int al = 0; al < 4; al++)
    for (double t : {0.15, 0.5, 0.92}) {
      R x = a.layout.lengths[al] * R(t);
      CHECK(std::abs(to_double(a.eval_local(al, x) - b.eval_local(al, x))) < 1e-9 * scale);
    }
}

TEST_CASE("p_a seminorm stays bounded along the pipeline") {
  const auto& run = sym4_run();
  auto phi = PiecewiseFun<R>::zero(layout_of<R>(run, 0), 8);
  phi.add_atom(1, Atom<R>{true, R(-0.5), 0, R(1)});
  double p0 = p_a_seminorm(phi, R(0.5));
  BirkhoffPipeline<R> pipe(run, phi);
  pipe.extend_to(20);
  std::vector<double> ratios;
  for (std::size_t k = 2; k <= 20; k += 3)
    ratios.push_back(p_a_seminorm(pipe.level[k], R(0.5)) / p0);
  double worst = *std::max_element(ratios.begin(), ratios.end());
  INFO("fitted p_a amplification constant " << worst);
  CHECK(worst < 50);
}

TEST_CASE("capture error diagnostics stay small") {
  const auto& run = sym4_run();
  auto phi = singular_fixture();
  BirkhoffPipeline<R> pipe(run, phi, PipelineOptions{.capture_digits = 30});
  pipe.extend_to(20);
  for (std::size_t k = 1; k <= 20; k++) {
    INFO("level " << k << " nodes " << pipe.level[k].nodes());
    CHECK(pipe.stats[k].capture_error < 1e-16 * (1 + pipe.stats[k].sup));
  }
}
