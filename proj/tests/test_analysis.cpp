#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ddf/analysis.hpp"
#include "ddf/core.hpp"
#include "ddf/solver.hpp"

using namespace ddf;

namespace {

DirichletProblem interval_problem(double eta_a, double eta_b) {
  DirichletProblem pr;
  pr.domain = make_domain(Domain::interval(0.0, 1.0), Domain::interval(-1.0, 2.0));
  pr.coeffs = CoefficientSet::laplace(1);
  pr.eta = BoundaryMeasure::zero(pr.domain, 2);
  pr.eta.set_density({eta_a, eta_b});
  return pr;
}

}  // namespace

TEST_CASE("stability family reports ratios, scaling and uniqueness") {
  MeasureSolveOptions opt;
  opt.mesh_h = 0.01;

  const DirichletProblem unit = interval_problem(1.0, 1.0);
  const MeasureSolution s_unit = solve_measure(unit, opt);
  const DirichletProblem zero = interval_problem(0.0, 0.0);
  const MeasureSolution s_zero = solve_measure(zero, opt);
  const DirichletProblem triple = interval_problem(3.0, 3.0);
  const MeasureSolution s_triple = solve_measure(triple, opt);

  const AprioriReport rep = apriori_check({{"unit", &unit, &s_unit.rho},
                                          {"zero", &zero, &s_zero.rho},
                                          {"triple", &triple, &s_triple.rho}});
  CHECK(rep.p == 2.5);
  CHECK(rep.p_prime == Catch::Approx(5.0 / 3.0));
  REQUIRE(rep.entries.size() == 3);

  // eta = sigma has TV 2 and the solution is the constant 1 with unit norm.
  CHECK(rep.entries[0].tv_eta == Catch::Approx(2.0));
  CHECK(rep.entries[0].h_l1 == Catch::Approx(0.0).margin(1e-12));
  CHECK(rep.entries[0].g_lpp == Catch::Approx(0.0).margin(1e-12));
  CHECK(rep.entries[0].ratio_defined);
  CHECK(rep.entries[0].ratio == Catch::Approx(0.5).margin(1e-6));

  CHECK_FALSE(rep.entries[1].ratio_defined);
  CHECK(rep.entries[1].uniqueness_ok);

  // The ratio is scale invariant, so the envelope is set by either member.
  CHECK(rep.entries[2].ratio == Catch::Approx(rep.entries[0].ratio).epsilon(1e-9));
  CHECK(rep.envelope == Catch::Approx(0.5).margin(1e-6));
}

TEST_CASE("stability family input validation") {
  CHECK_THROWS_AS(apriori_check({}), validation_error);

  MeasureSolveOptions opt;
  opt.mesh_h = 0.05;
  const DirichletProblem a = interval_problem(1.0, 1.0);
  const MeasureSolution sa = solve_measure(a, opt);
  CHECK_THROWS_AS(apriori_check({{"broken", &a, nullptr}}), validation_error);

  DirichletProblem other = a;
  other.domain = make_domain(Domain::interval(0.0, 2.0), Domain::interval(-1.0, 3.0));
  other.eta = BoundaryMeasure::zero(other.domain, 2);
  other.eta.set_density({1.0, 1.0});
  const MeasureSolution so = solve_measure(other, opt);
  CHECK_THROWS_WITH(apriori_check({{"a", &a, &sa.rho}, {"o", &other, &so.rho}}),
                    Catch::Matchers::ContainsSubstring("share the domain"));

  DirichletProblem p2 = a;
  p2.p = 3.0;
  CHECK_THROWS_WITH(apriori_check({{"a", &a, &sa.rho}, {"p", &p2, &sa.rho}}),
                    Catch::Matchers::ContainsSubstring("share the exponent"));
}

TEST_CASE("interior ratios are exactly one for uniform boundary mass") {
  DirichletProblem pr;
  pr.domain = make_domain(Domain::disk(Vec2{0.0, 0.0}, 1.0),
                          Domain::disk(Vec2{0.0, 0.0}, 2.0));
  pr.coeffs = CoefficientSet::laplace(2);
  pr.eta = BoundaryMeasure::zero(pr.domain, 64);
  pr.eta.set_density_constant(1.0);

  MeasureSolveOptions coarse;
  coarse.mesh_h = 0.2;
  MeasureSolveOptions fine = coarse;
  fine.mesh_h = 0.1;
  const HarnackReport rep =
      harnack_check(pr, Vec2{0.1, 0.0}, 0.15, {coarse, fine});
  REQUIRE(rep.observations.size() == 2);
  CHECK(rep.positive);
  for (const HarnackObservation& o : rep.observations) {
    CHECK(o.ball_nodes > 0);
    CHECK(o.ratio_defined);
    CHECK(o.sup == Catch::Approx(1.0).margin(1e-8));
    CHECK(o.inf == Catch::Approx(1.0).margin(1e-8));
    CHECK(o.ratio == Catch::Approx(1.0).margin(1e-8));
  }
  CHECK(rep.ratio_spread < 1e-8);
}

TEST_CASE("interior ratio preconditions") {
  DirichletProblem pr;
  pr.domain = make_domain(Domain::disk(Vec2{0.0, 0.0}, 1.0),
                          Domain::disk(Vec2{0.0, 0.0}, 2.0));
  pr.coeffs = CoefficientSet::laplace(2);
  pr.eta = BoundaryMeasure::zero(pr.domain, 64);
  pr.eta.set_density_constant(1.0);
  MeasureSolveOptions opt;
  opt.mesh_h = 0.2;

  CHECK_THROWS_AS(harnack_check(pr, Vec2{0.1, 0.0}, 0.15, {}), validation_error);
  CHECK_THROWS_AS(harnack_check(pr, Vec2{0.1, 0.0}, 0.0, {opt}), validation_error);
  // 4R reach beyond the domain.
  CHECK_THROWS_WITH(harnack_check(pr, Vec2{0.5, 0.0}, 0.2, {opt}),
                    Catch::Matchers::ContainsSubstring("4R"));
  // Ball so small no mesh node can fall inside.
  CHECK_THROWS_WITH(harnack_check(pr, Vec2{0.05, 0.03}, 1e-4, {opt}),
                    Catch::Matchers::ContainsSubstring("refine"));

  DirichletProblem withg = pr;
  withg.coeffs.G = MatrixField::isotropic(ScalarField::constant(0.5));
  CHECK_THROWS_WITH(harnack_check(withg, Vec2{0.1, 0.0}, 0.15, {opt}),
                    Catch::Matchers::ContainsSubstring("source-free"));

  DirichletProblem negative = pr;
  negative.eta = BoundaryMeasure::zero(pr.domain, 64);
  negative.eta.add_atom(0.0, -1.0);
  CHECK_THROWS_WITH(harnack_check(negative, Vec2{0.1, 0.0}, 0.15, {opt}),
                    Catch::Matchers::ContainsSubstring("nonnegative"));

  DirichletProblem empty = pr;
  empty.eta = BoundaryMeasure::zero(pr.domain, 64);
  CHECK_THROWS_WITH(harnack_check(empty, Vec2{0.1, 0.0}, 0.15, {opt}),
                    Catch::Matchers::ContainsSubstring("must not vanish"));
}

TEST_CASE("oscillation curves are monotone and collapse across levels") {
  DirichletProblem pr;
  pr.domain = make_domain(Domain::interval(0.0, 1.0), Domain::interval(-1.0, 2.0));
  pr.coeffs = CoefficientSet::laplace(1);
  pr.eta = BoundaryMeasure::zero(pr.domain, 2);
  pr.eta.set_density({0.0, 1.0});  // rho(x) = x

  MeasureSolveOptions coarse;
  coarse.mesh_h = 0.02;
  MeasureSolveOptions fine;
  fine.mesh_h = 0.01;
  const MeasureSolution sc = solve_measure(pr, coarse);
  const MeasureSolution sf = solve_measure(pr, fine);

  const Vec2 x0{0.5, 0.0};
  const double R = 0.2;
  const ModulusReport rep = modulus_check({&sc.rho, &sf.rho}, x0, R);
  REQUIRE(rep.curves.size() == 2);
  REQUIRE(rep.r_edges.size() == 24);
  CHECK(rep.r_edges.back() == Catch::Approx(2.0 * R));
  for (const auto& curve : rep.curves) {
    for (std::size_t b = 1; b < curve.size(); ++b) CHECK(curve[b] >= curve[b - 1]);
    // The solution has unit slope, so oscillations never exceed the bin edge.
    for (std::size_t b = 0; b < curve.size(); ++b)
      CHECK(curve[b] <= rep.r_edges[b] + 1e-9);
  }
  for (std::size_t b = 0; b < rep.envelope.size(); ++b) {
    CHECK(rep.envelope[b] >= rep.curves[0][b]);
    CHECK(rep.envelope[b] >= rep.curves[1][b]);
  }
  // Both levels resolve the affine solution exactly, so the curves coincide.
  CHECK(rep.collapse_spread < 1e-8);
  CHECK(rep.sup_bounded);
  REQUIRE(rep.sup_norms.size() == 2);
  CHECK(rep.sup_norms[0] == Catch::Approx(0.7).margin(1e-8));
  CHECK(rep.sup_norms[1] == Catch::Approx(0.7).margin(1e-8));
}

TEST_CASE("oscillation sampling preconditions") {
  DirichletProblem pr;
  pr.domain = make_domain(Domain::interval(0.0, 1.0), Domain::interval(-1.0, 2.0));
  pr.coeffs = CoefficientSet::laplace(1);
  pr.eta = BoundaryMeasure::zero(pr.domain, 2);
  pr.eta.set_density({1.0, 1.0});
  MeasureSolveOptions opt;
  opt.mesh_h = 0.05;
  const MeasureSolution s = solve_measure(pr, opt);

  CHECK_THROWS_AS(modulus_check({}, Vec2{0.5, 0.0}, 0.2), validation_error);
  CHECK_THROWS_AS(modulus_check({&s.rho}, Vec2{0.5, 0.0}, 0.2, 3), validation_error);
  CHECK_THROWS_AS(modulus_check({&s.rho}, Vec2{0.5, 0.0}, 0.2, 24, 50), validation_error);
  CHECK_THROWS_WITH(modulus_check({&s.rho}, Vec2{0.05, 0.0}, 0.2),
                    Catch::Matchers::ContainsSubstring("inside the domain"));

  DirichletProblem pr2 = pr;
  pr2.domain = make_domain(Domain::interval(0.0, 2.0), Domain::interval(-1.0, 3.0));
  pr2.eta = BoundaryMeasure::zero(pr2.domain, 2);
  pr2.eta.set_density({1.0, 1.0});
  const MeasureSolution s2 = solve_measure(pr2, opt);
  CHECK_THROWS_WITH(modulus_check({&s.rho, &s2.rho}, Vec2{0.5, 0.0}, 0.2),
                    Catch::Matchers::ContainsSubstring("share the domain"));
}
