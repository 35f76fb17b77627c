#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ddf/core.hpp"
#include "ddf/fields.hpp"
#include "ddf/geometry.hpp"
#include "ddf/measures.hpp"
#include "ddf/quadrature.hpp"
#include "ddf/weakform.hpp"

using namespace ddf;

TEST_CASE("gauss-legendre and polar rules integrate polynomials exactly") {
  // 4-point Gauss is exact through degree 7.
  const double i6 = integrate_interval(0.0, 1.0, 1, 4, [](double x) {
    return x * x * x * x * x * x;
  });
  CHECK(i6 == Catch::Approx(1.0 / 7.0).epsilon(1e-13));

  // Polar rule: int over the unit disk of x^2 = pi/4.
  const double ix2 = integrate_disk_polar(Vec2{0.0, 0.0}, 1.0, 6, 16,
                                          [](const Vec2& x) { return x.x * x.x; });
  CHECK(ix2 == Catch::Approx(pi / 4.0).epsilon(1e-13));
  const double area = integrate_disk_polar(Vec2{1.0, 2.0}, 0.5, 3, 8,
                                           [](const Vec2&) { return 1.0; });
  CHECK(area == Catch::Approx(pi * 0.25).epsilon(1e-13));

  CHECK_THROWS_AS(gauss_legendre(0), validation_error);
  CHECK_THROWS_AS(gauss_legendre(65), validation_error);
  CHECK_THROWS_AS(polar_disk_rule(Vec2{}, 0.0, 4, 8), validation_error);
  CHECK_THROWS_AS(polar_disk_rule(Vec2{}, 1.0, 4, 3), validation_error);
}

TEST_CASE("disk test bank vanishes on the boundary") {
  const Domain d = Domain::disk(Vec2{0.0, 0.0}, 1.0);
  const BoundaryGrid g = boundary_grid(d, 64);

  const auto bank0 = test_bank(d, 0);
  REQUIRE(bank0.size() == 2);  // bubble and the flagged paraboloid
  CHECK_FALSE(bank0[0].normal_derivative_one());
  CHECK(bank0[1].normal_derivative_one());

  const auto bank2 = test_bank(d, 2);
  CHECK(bank2.size() == 7);  // 6 monomials through degree 2, plus phi
  for (const auto& u : bank2)
    for (std::size_t k = 0; k < g.size(); ++k)
      CHECK(std::abs(u.value(g.nodes[k])) < 1e-10);

  // Vanishing on the boundary forces the gradient to be normal there.
  for (const auto& u : bank2)
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Vec2 gr = u.grad(g.nodes[k]);
      const Vec2 tangential = gr - g.normals[k] * gr.dot(g.normals[k]);
      CHECK(tangential.norm() < 1e-10);
    }

  CHECK_THROWS_AS(test_bank(d, -1), validation_error);
  CHECK_THROWS_AS(test_bank(d, 7), validation_error);
}

TEST_CASE("the flagged bank member has unit normal derivative") {
  const Domain d = Domain::disk(Vec2{0.5, -0.25}, 2.0);
  const BoundaryGrid g = boundary_grid(d, 64);
  const auto bank = test_bank(d, 3);
  const TestFunction& phi = bank.back();
  REQUIRE(phi.normal_derivative_one());
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(std::abs(phi.value(g.nodes[k])) < 1e-12);
    CHECK(phi.grad(g.nodes[k]).dot(g.normals[k]) == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("interval bank endpoints and one-sided normal derivatives") {
  const Domain d = Domain::interval(-1.0, 2.0);
  const auto bank = test_bank(d, 1);
  REQUIRE(bank.size() == 4);  // two bubble monomials and two one-sided cubics
  const Vec2 pa{-1.0, 0.0}, pb{2.0, 0.0};
  for (const auto& u : bank) {
    CHECK(std::abs(u.value(pa)) < 1e-10);
    CHECK(std::abs(u.value(pb)) < 1e-10);
  }
  // phi_alpha: <grad, nu> = 1 at alpha (nu = -1) and 0 at beta; phi_beta mirrors.
  const TestFunction& phia = bank[bank.size() - 2];
  const TestFunction& phib = bank[bank.size() - 1];
  CHECK(phia.grad(pa).x * -1.0 == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(phia.grad(pb).x) < 1e-12);
  CHECK(phib.grad(pb).x == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(phib.grad(pa).x) < 1e-12);
}

TEST_CASE("test function derivatives match finite differences") {
  const Domain d = Domain::disk(Vec2{0.0, 0.0}, 1.5);
  const auto bank = test_bank(d, 3);
  const double fd = 1e-6;
  SplitMix rng(3);
  for (const auto& u : bank) {
    for (int t = 0; t < 5; ++t) {
      const Vec2 x = sample_point(d, rng);
      const Vec2 g = u.grad(x);
      const double gx = (u.value(Vec2{x.x + fd, x.y}) - u.value(Vec2{x.x - fd, x.y})) / (2.0 * fd);
      const double gy = (u.value(Vec2{x.x, x.y + fd}) - u.value(Vec2{x.x, x.y - fd})) / (2.0 * fd);
      CHECK(g.x == Catch::Approx(gx).margin(1e-4));
      CHECK(g.y == Catch::Approx(gy).margin(1e-4));
      const SymMat2 H = u.hess(x);
      const double hxx =
          (u.value(Vec2{x.x + fd, x.y}) - 2.0 * u.value(x) + u.value(Vec2{x.x - fd, x.y})) /
          (fd * fd);
      CHECK(H.a11 == Catch::Approx(hxx).margin(1e-3));
    }
  }
}

TEST_CASE("the differential operator evaluates trace and drift terms") {
  const Domain d = Domain::disk(Vec2{0.0, 0.0}, 1.0);
  const auto bank = test_bank(d, 0);
  const TestFunction& bubble = bank[0];  // 1 - x^2 - y^2, Laplacian -4
  const SymMat2 id = SymMat2::identity(2);
  SplitMix rng(9);
  for (int t = 0; t < 10; ++t) {
    const Vec2 x = sample_point(d, rng);
    CHECK(operator_L(id, Vec2{0.0, 0.0}, bubble, x) == Catch::Approx(-4.0));
    const Vec2 drift{1.0, 2.0};
    const double expected = -4.0 + (-2.0 * x.x) * 1.0 + (-2.0 * x.y) * 2.0;
    CHECK(operator_L(id, drift, bubble, x) == Catch::Approx(expected));
    // Off-diagonal entries pair twice against the mixed derivative.
    const SymMat2 S{1.0, 0.5, 2.0};
    const SymMat2 H = bubble.hess(x);
    CHECK(operator_L(S, Vec2{0.0, 0.0}, bubble, x) ==
          Catch::Approx(H.a11 + 0.5 * 2.0 * H.a12 + 2.0 * H.a22));
  }
}

TEST_CASE("interior bank members are compactly supported and C2") {
  const Domain d = Domain::disk(Vec2{0.0, 0.0}, 1.0);
  const auto bank = interior_bank(d, 2);
  CHECK(bank.size() == 6);
  for (const auto& u : bank) {
    REQUIRE(u.support().has_value());
    CHECK(u.support()->radius == Catch::Approx(0.9));
    CHECK(u.value(Vec2{0.95, 0.0}) == 0.0);
    CHECK(u.grad(Vec2{0.0, 0.95}).norm() == 0.0);
    CHECK(u.hess(Vec2{0.95, 0.0}).a11 == 0.0);
    // The cubed bubble brings value, gradient and Hessian to zero at the
    // support sphere, so the clipped extension stays twice differentiable.
    const Vec2 just_in{0.9 - 1e-7, 0.0};
    CHECK(std::abs(u.value(just_in)) < 1e-12);
    CHECK(u.grad(just_in).norm() < 1e-10);
    CHECK(spectral_norm(u.hess(just_in), 2) < 1e-4);
  }
  CHECK_THROWS_AS(interior_bank(d, 7), validation_error);

  const auto bank1 = interior_bank(Domain::interval(0.0, 1.0), 1);
  CHECK(bank1.size() == 2);
  CHECK(bank1[0].support()->radius == Catch::Approx(0.45));
  CHECK(bank1[0].value(Vec2{0.99, 0.0}) == 0.0);
}

TEST_CASE("manufactured problems have vanishing interior residual") {
  const Domain d = Domain::disk(Vec2{0.0, 0.0}, 1.0);
  CoefficientSet cs;
  cs.dim = 2;
  cs.A = MatrixField::identity();
  cs.b = VectorField::closed_form("1", "1");
  const ScalarField rho = ScalarField::closed_form("exp(0 - x1*x1 - x2*x2)");
  auto gh = manufacture(rho, cs.A, cs.b);
  cs.G = gh.first;
  cs.h = gh.second;

  const ResidualReport rep = interior_residual(
      [&rho](const Vec2& x) { return rho(x); }, cs, d, interior_bank(d, 2), 0.01);
  REQUIRE(rep.entries.size() == 6);
  CHECK(rep.max_relative <= 1e-6);
  for (const auto& e : rep.entries) {
    CHECK(ddf::finite(e.residual));
    CHECK(ddf::finite(e.scale));
  }
}

TEST_CASE("compactly supported functions integrate the laplacian to zero") {
  // rho = 1 with Laplace data: the identity reduces to int of Delta u, which
  // vanishes for supported u by the divergence theorem. The polar rule is
  // exact on these polynomial integrands.
  const Domain d = Domain::disk(Vec2{0.0, 0.0}, 1.0);
  const CoefficientSet cs = CoefficientSet::laplace(2);
  const ResidualReport rep = interior_residual(
      [](const Vec2&) { return 1.0; }, cs, d, interior_bank(d, 2), 0.05);
  for (const auto& e : rep.entries) CHECK(std::abs(e.residual) <= 1e-8);
}

TEST_CASE("interior residual insists on supported test functions") {
  const Domain d = Domain::disk(Vec2{0.0, 0.0}, 1.0);
  const CoefficientSet cs = CoefficientSet::laplace(2);
  auto one = [](const Vec2&) { return 1.0; };
  CHECK_THROWS_AS(interior_residual(one, cs, d, test_bank(d, 1), 0.05),
                  validation_error);
  CHECK_THROWS_AS(interior_residual(one, CoefficientSet::laplace(1), d,
                                    interior_bank(d, 1), 0.05),
                  validation_error);
  CHECK_THROWS_AS(interior_residual(one, cs, d, interior_bank(d, 1), 0.0),
                  validation_error);
}

TEST_CASE("constant density with matching boundary data closes the identity") {
  const Domain d = Domain::disk(Vec2{0.0, 0.0}, 1.0);
  const CoefficientSet cs = CoefficientSet::laplace(2);
  BoundaryMeasure eta = BoundaryMeasure::zero(d, 128);
  eta.set_density_constant(2.0);
  const ResidualReport rep = dirichlet_residual(
      [](const Vec2&) { return 2.0; }, cs, eta, test_bank(d, 2), 0.02);
  CHECK(rep.max_relative <= 1e-3);
  CHECK(rep.median_relative <= rep.max_relative);
  // The paraboloid member sees lhs = 2 int Delta phi and boundary = 2 sigma(dD).
  const ResidualEntry& phi = rep.entries.back();
  CHECK(phi.boundary == Catch::Approx(2.0 * 2.0 * pi).epsilon(1e-10));
  CHECK(phi.lhs == Catch::Approx(4.0 * pi).epsilon(1e-2));
}

TEST_CASE("residuals are linear in the density and the boundary measure") {
  const Domain d = Domain::interval(0.0, 1.0);
  CoefficientSet cs = CoefficientSet::laplace(1);
  cs.A = MatrixField::scalar_1d(ScalarField::closed_form("1 + 0.5*x1"));
  cs.b = VectorField(ScalarField::closed_form("x1"), ScalarField::constant(0.0));

  BoundaryMeasure eta1 = BoundaryMeasure::zero(d, 2);
  eta1.set_density({1.0, 0.5});
  BoundaryMeasure eta2 = BoundaryMeasure::zero(d, 2);
  eta2.set_density({-0.25, 2.0});
  BoundaryMeasure etasum = BoundaryMeasure::zero(d, 2);
  etasum.set_density({1.0 + 2.0 * -0.25, 0.5 + 2.0 * 2.0});

  auto rho1 = [](const Vec2& x) { return 1.0 + x.x; };
  auto rho2 = [](const Vec2& x) { return std::sin(x.x); };
  auto rhosum = [&](const Vec2& x) { return rho1(x) + 2.0 * rho2(x); };

  const auto bank = test_bank(d, 2);
  const ResidualReport r1 = dirichlet_residual(rho1, cs, eta1, bank, 0.01);
  const ResidualReport r2 = dirichlet_residual(rho2, cs, eta2, bank, 0.01);
  const ResidualReport rs = dirichlet_residual(rhosum, cs, etasum, bank, 0.01);
  REQUIRE(rs.entries.size() == r1.entries.size());
  for (std::size_t k = 0; k < rs.entries.size(); ++k) {
    const double expected = r1.entries[k].residual + 2.0 * r2.entries[k].residual;
    CHECK(rs.entries[k].residual ==
          Catch::Approx(expected).margin(1e-12 * std::max(1.0, rs.entries[k].scale)));
  }
}

TEST_CASE("reported residuals are quadrature-converged") {
  // A density that genuinely fails the identity: the defect is O(1), so
  // refining the quadrature must barely move the reported values.
  const Domain d = Domain::disk(Vec2{0.0, 0.0}, 1.0);
  const CoefficientSet cs = CoefficientSet::laplace(2);
  BoundaryMeasure eta = BoundaryMeasure::zero(d, 64);
  eta.set_density_constant(1.0);
  auto rho = [](const Vec2& x) { return 1.0 + x.x * x.x; };
  const auto bank = test_bank(d, 2);
  const ResidualReport coarse = dirichlet_residual(rho, cs, eta, bank, 0.05);
  const ResidualReport fine = dirichlet_residual(rho, cs, eta, bank, 0.025);
  for (std::size_t k = 0; k < bank.size(); ++k) {
    const double rc = coarse.entries[k].relative;
    const double rf = fine.entries[k].relative;
    if (rf > 1e-4) CHECK(std::abs(rc - rf) < 0.1 * rf);
  }
}
