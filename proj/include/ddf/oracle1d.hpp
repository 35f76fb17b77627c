// Independent reference solver for the one dimensional problem
//   (rho A)'' - (rho b)' = G'' - h'  on (alpha, beta),
//   rho(alpha) = eta_alpha + kappa(alpha),  rho(beta) = eta_beta + kappa(beta),
// with kappa = G/A. One integration gives the first order equation
//   w' = (b/A)(w + G) - h + c1  for  w = rho A - G,  w(alpha) = A(alpha) eta_alpha;
// the free constant c1 enters affinely, so two RK4 passes (c1 = 0 and c1 = 1)
// pin it from the right endpoint condition. This shares no code with the
// finite element path and serves as its accuracy reference.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "ddf/core.hpp"
#include "ddf/fields.hpp"
#include "ddf/geometry.hpp"

namespace ddf {

struct Oracle1DSolution {
  double alpha = 0.0;
  double beta = 1.0;
  std::vector<double> rho;  // values on the uniform integration grid
  double c1 = 0.0;          // integration constant fixed by the shooting
  double eta_alpha = 0.0;
  double eta_beta = 0.0;
  double kappa_alpha = 0.0;
  double kappa_beta = 0.0;

  double eval(double x) const {
    const int n = static_cast<int>(rho.size()) - 1;
    const double h = (beta - alpha) / n;
    const double t = (x - alpha) / h;
    if (t <= 0.0) return rho.front();
    if (t >= n) return rho.back();
    const int i = static_cast<int>(t);
    const double f = t - i;
    return (1.0 - f) * rho[static_cast<std::size_t>(i)] +
           f * rho[static_cast<std::size_t>(i + 1)];
  }
};

inline Oracle1DSolution exact_solve_1d(const CoefficientSet& cs, const Domain& d,
                                       double eta_alpha, double eta_beta,
                                       int steps = 10000) {
  if (cs.dim != 1 || d.kind() != DomainKind::interval)
    throw validation_error("exact_solve_1d: one dimensional problems only");
  if (steps < 10000)
    throw validation_error("exact_solve_1d: need at least 10000 steps");
  const double a = d.alpha(), b = d.beta();
  auto Af = [&cs](double x) {
    const double v = cs.A(Vec2{x, 0.0}).a11;
    if (!(v > 0.0)) throw numeric_error("exact_solve_1d: A must stay positive");
    return v;
  };
  auto Gf = [&cs](double x) { return cs.G(Vec2{x, 0.0}).a11; };
  auto slope = [&cs, &Af, &Gf](double x, double w, double c1) {
    return cs.b(Vec2{x, 0.0}).x * (w + Gf(x)) / Af(x) - cs.h(Vec2{x, 0.0}).x + c1;
  };

  const double h = (b - a) / steps;
  std::vector<double> w0(static_cast<std::size_t>(steps) + 1);
  std::vector<double> w1(static_cast<std::size_t>(steps) + 1);
  w0[0] = w1[0] = Af(a) * eta_alpha;
  for (int i = 0; i < steps; ++i) {
    const double x = a + i * h;
    for (int pass = 0; pass < 2; ++pass) {
      const double c1 = pass;
      auto& w = pass == 0 ? w0 : w1;
      const double wi = w[static_cast<std::size_t>(i)];
      const double k1 = slope(x, wi, c1);
      const double k2 = slope(x + 0.5 * h, wi + 0.5 * h * k1, c1);
      const double k3 = slope(x + 0.5 * h, wi + 0.5 * h * k2, c1);
      const double k4 = slope(x + h, wi + h * k3, c1);
      w[static_cast<std::size_t>(i + 1)] = wi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  // The map c1 -> w(beta) is affine with positive slope for elliptic A.
  const double den = w1[static_cast<std::size_t>(steps)] - w0[static_cast<std::size_t>(steps)];
  if (!(std::abs(den) > 1e-14 * (b - a)))
    throw numeric_error("exact_solve_1d: shooting map degenerate");
  Oracle1DSolution out;
  out.alpha = a;
  out.beta = b;
  out.eta_alpha = eta_alpha;
  out.eta_beta = eta_beta;
  out.kappa_alpha = Gf(a) / Af(a);
  out.kappa_beta = Gf(b) / Af(b);
  out.c1 = (Af(b) * eta_beta - w0[static_cast<std::size_t>(steps)]) / den;
  out.rho.resize(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    const double x = a + i * h;
    const double w = w0[static_cast<std::size_t>(i)] +
                     out.c1 * (w1[static_cast<std::size_t>(i)] - w0[static_cast<std::size_t>(i)]);
    out.rho[static_cast<std::size_t>(i)] = (w + Gf(x)) / Af(x);
  }
  return out;
}

// Any bounded rho with bounded reciprocal solves the equation with A = 1/rho
// and b = G = h = 0, since rho A is constant. Returns that coefficient set;
// bounds are checked by dense sampling.
inline CoefficientSet reciprocal_example(const std::function<double(double)>& rho_target,
                                         const Domain& d) {
  if (d.kind() != DomainKind::interval)
    throw validation_error("reciprocal_example: interval domains only");
  if (!rho_target) throw validation_error("reciprocal_example: null target");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const int samples = 4096;
  for (int i = 0; i <= samples; ++i) {
    const double x = d.alpha() + (d.beta() - d.alpha()) * i / samples;
    const double v = rho_target(x);
    if (!std::isfinite(v)) throw validation_error("reciprocal_example: target not finite");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo > 0.0))
    throw validation_error("reciprocal_example: target must be bounded below by a positive constant");
  CoefficientSet cs = CoefficientSet::laplace(1);
  cs.A = MatrixField::scalar_1d(ScalarField::callable(
      [rho_target](const Vec2& x) { return 1.0 / rho_target(x.x); }));
  return cs;
}

}  // namespace ddf
