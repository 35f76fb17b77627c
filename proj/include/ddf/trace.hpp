// Boundary trace extraction. For a solution rho defined in a neighborhood of
// the closed domain, the mollified densities rho_eps restricted to the
// boundary have uniformly bounded sigma-masses (the bound is the explicit
// constant from the a priori estimate), and as eps decreases along a dyadic
// schedule the measures rho_eps sigma stabilize in the bounded Lipschitz
// metric. The limit splits as eta + kappa sigma with kappa determined by the
// data, which recovers the boundary condition.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "ddf/core.hpp"
#include "ddf/fields.hpp"
#include "ddf/geometry.hpp"
#include "ddf/measures.hpp"
#include "ddf/mollify.hpp"
#include "ddf/quadrature.hpp"
#include "ddf/weakform.hpp"

namespace ddf {

namespace trace_detail {

// Point value of f * psi_eps by the mirrored midpoint kernel rule; the same
// weights the grid convolution uses, so boundary values match grid values.
template <class F>
double mollify_point(F&& f, const mollify_detail::KernelWeights& kw, int dim,
                     const Vec2& x) {
  double v = 0.0;
  if (dim == 1) {
    for (int m = 0; m < 8; ++m)
      v += kw.w1[m] *
           (f(Vec2{x.x + kw.u[m], 0.0}) + f(Vec2{x.x - kw.u[m], 0.0}));
    return v;
  }
  for (int m1 = 0; m1 < 8; ++m1)
    for (int m2 = 0; m2 < 8; ++m2) {
      const double u1 = kw.u[m1], u2 = kw.u[m2];
      v += kw.w[m1][m2] *
           (f(Vec2{x.x + u1, x.y + u2}) + f(Vec2{x.x + u1, x.y - u2}) +
            f(Vec2{x.x - u1, x.y + u2}) + f(Vec2{x.x - u1, x.y - u2}));
    }
  return v;
}

inline Domain enlarged(const Domain& d, double t) {
  if (d.kind() == DomainKind::interval)
    return Domain::interval(d.alpha() - t, d.beta() + t);
  return Domain::disk(d.center(), d.radius() + t);
}

// Sampled range of rho over the closed neighborhood (quadrature nodes of the
// mesh rule plus a deterministic random sample).
template <class Rho>
std::pair<double, double> rho_range(Rho&& rho, const Domain& region) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  fields_detail::integrate(region, region.diameter() / 48.0, [&](const Vec2& x) {
    const double v = rho(x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    return 0.0;
  });
  SplitMix rng(0x7ace5eedull);
  for (int s = 0; s < 4096; ++s) {
    const double v = rho(sample_point(region, rng));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw numeric_error("trace: rho unbounded on the neighborhood of D");
  return {lo, hi};
}

}  // namespace trace_detail

// C^2 norm of the distinguished boundary-flat test function phi with unit
// outward normal derivative: the paraboloid on disks, the scaled parabola on
// intervals. Exact closed forms.
inline double phi_c2_norm(const Domain& d) {
  if (d.kind() == DomainKind::interval) {
    const double L = d.beta() - d.alpha();
    return std::max({L / 4.0, 1.0, 2.0 / L});
  }
  const double R = d.radius();
  return std::max({R / 2.0, 1.0, 1.0 / R});
}

// Density samples rho_eps at the boundary nodes of D. Requires eps below the
// gap to the container so every kernel ball stays inside the region where
// rho is defined.
template <class Rho>
std::vector<double> boundary_convolution(Rho&& rho, const Domain& d, double eps,
                                         MollifierKind kind, int nodes) {
  if (!(eps > 0.0)) throw validation_error("boundary_convolution: need eps > 0");
  if (d.has_container() && eps >= d.gap())
    throw validation_error("boundary_convolution: eps must stay below the gap");
  const int dim = d.dim();
  const BoundaryGrid grid = boundary_grid(d, dim == 1 ? 2 : nodes);
  const Mollifier psi = make_mollifier(kind, eps, dim);
  const auto kw = mollify_detail::kernel_weights(psi);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    out[i] = trace_detail::mollify_point(rho, kw, dim, grid.nodes[i]);
  return out;
}

// Explicit mass bound for int rho_eps d(sigma): all three summands of the a
// priori constant, computed by quadrature over the 3 delta neighborhood.
// Rejects solutions taking negative values; those must go through the
// bounded signed path of trace_limit.
struct ProofConstant {
  double total = 0.0;
  double term_solution = 0.0;  // phi / theta weighted (d ||A|| + |b|) rho integral
  double term_data = 0.0;      // phi / theta weighted (d ||G|| + |h|) integral
  double term_sup = 0.0;       // sigma(boundary) sup ||G|| / theta
  double phi_c2 = 0.0;
  double theta = 1.0;
  double delta = 0.0;
  double rho_max = 0.0;  // sampled sup of rho over the neighborhood
};

template <class Rho>
ProofConstant proof_constant(Rho&& rho, const CoefficientSet& cs, const Domain& d,
                             double delta, double theta_hint = 0.0) {
  if (!(delta > 0.0)) throw validation_error("proof_constant: need delta > 0");
  const int dim = d.dim();
  const Domain d3 = trace_detail::enlarged(d, 3.0 * delta);
  const double hq = d3.diameter() / 64.0;

  double theta_obs = std::numeric_limits<double>::infinity();
  double rho_min = std::numeric_limits<double>::infinity();
  double rho_max = -rho_min;
  double sup_g = 0.0;
  const double i_sol = fields_detail::integrate(d3, hq, [&](const Vec2& x) {
    const double r = rho(x);
    rho_min = std::min(rho_min, r);
    rho_max = std::max(rho_max, r);
    const SymMat2 a = cs.A(x);
    theta_obs = std::min(theta_obs, eigen_range(a, dim).lo);
    return (dim * spectral_norm(a, dim) + cs.b(x).norm()) * r;
  });
  const double i_dat = fields_detail::integrate(d3, hq, [&](const Vec2& x) {
    const double g = spectral_norm(cs.G(x), dim);
    sup_g = std::max(sup_g, g);
    return dim * g + cs.h(x).norm();
  });
  const BoundaryGrid bg = boundary_grid(d, dim == 1 ? 2 : 256);
  for (const Vec2& x : bg.nodes) sup_g = std::max(sup_g, spectral_norm(cs.G(x), dim));
  if (!std::isfinite(rho_max) || !std::isfinite(rho_min))
    throw numeric_error("proof_constant: rho unbounded on the neighborhood");
  if (rho_min < -1e-12 * std::max(1.0, std::abs(rho_max)))
    throw validation_error(
        "proof_constant: rho takes negative values; use the bounded signed "
        "trace path");

  ProofConstant c;
  c.delta = delta;
  c.phi_c2 = phi_c2_norm(d);
  c.theta = theta_hint > 0.0 ? theta_hint : theta_obs;
  if (!(c.theta > 0.0))
    throw numeric_error("proof_constant: ellipticity floor not positive");
  c.rho_max = rho_max;
  c.term_solution = c.phi_c2 * i_sol / c.theta;
  c.term_data = c.phi_c2 * i_dat / c.theta;
  c.term_sup = d.boundary_measure() * sup_g / c.theta;
  c.total = c.term_solution + c.term_data + c.term_sup;
  return c;
}

struct TraceOptions {
  int levels = 6;      // eps_k = delta / 2^k, k = 1..levels
  int nodes = 128;     // boundary grid size in 2d (1d always uses 2)
  double tol = 1e-3;   // bl stagnation threshold declaring convergence
  double delta = 0.0;  // 0 picks gap/4
  MollifierKind kind = MollifierKind::standard_bump;
  double theta = 0.0;  // 0 estimates the ellipticity floor by sampling
  bool allow_signed = false;
  bool with_commutation = true;
  bool with_residual = false;
  int bank_degree = 2;
  double quad_h = 0.0;  // residual quadrature pitch; 0 picks diameter/50
};

struct TraceLevelRecord {
  double eps = 0.0;
  double mass = 0.0;     // int rho_eps d(sigma) (absolute values when signed)
  double bl_prev = 0.0;  // distance to the previous level (0 at first)
  bool mass_ok = true;
  double max_commutation = 0.0;  // sup_k ||(A rho)_eps - A rho_eps|| at nodes
};

struct TraceDiagnostics {
  double delta = 0.0;
  bool signed_mode = false;
  double bound = 0.0;  // operative mass bound (proof constant, or the sup bound)
  ProofConstant constant;  // meaningful only when not in signed mode
  std::vector<TraceLevelRecord> levels;
  std::vector<double> final_density;  // rho_eps at the boundary nodes, last level
  BoundaryMeasure eta_tilde;          // final-level measure rho_eps sigma
  BoundaryMeasure eta;                // eta_tilde - kappa sigma
  KappaDensity kappa_values;
  bool converged = false;
  bool no_convergence_warning = false;  // bl distances never decreased
  int mass_violations = 0;
  ResidualReport end_to_end;  // filled when with_residual is set
};

// Runs the dyadic mollification schedule at the boundary. rho must be
// evaluable on the closed 3 delta neighborhood of D (solutions on a larger
// container qualify; finite element fields can be extended by clamping).
template <class Rho>
TraceDiagnostics trace_limit(Rho&& rho, const CoefficientSet& cs, const Domain& d,
                             const TraceOptions& opt = {}) {
  const int dim = d.dim();
  if (cs.dim != dim) throw validation_error("trace_limit: dimension mismatch");
  if (opt.levels < 1 || opt.levels > 12)
    throw validation_error("trace_limit: need 1 <= levels <= 12");
  const double gap = d.gap();
  const double delta = opt.delta > 0.0 ? opt.delta : gap / 4.0;
  if (delta > gap / 4.0 * (1.0 + 1e-12))
    throw validation_error("trace_limit: delta must not exceed gap/4");
  const int m = dim == 1 ? 2 : opt.nodes;
  if (dim == 2 && m < 16) throw validation_error("trace_limit: need at least 16 nodes");

  TraceDiagnostics out;
  out.delta = delta;
  const auto [rho_lo, rho_hi] =
      trace_detail::rho_range(rho, trace_detail::enlarged(d, 3.0 * delta));
  out.signed_mode = rho_lo < -1e-12 * std::max(1.0, std::abs(rho_hi));
  if (out.signed_mode) {
    if (!opt.allow_signed)
      throw validation_error(
          "trace_limit: rho takes negative values; set allow_signed to use "
          "the bounded signed diagnostic");
    // Mollification cannot exceed the sup norm, so the sup bound replaces
    // the proof constant on the signed path.
    out.bound = d.boundary_measure() * std::max(std::abs(rho_lo), std::abs(rho_hi));
  } else {
    out.constant = proof_constant(rho, cs, d, delta, opt.theta);
    out.bound = out.constant.total;
  }

  const BoundaryGrid grid = boundary_grid(d, m);
  BoundaryMeasure prev = BoundaryMeasure::zero(d, m);
  std::vector<double> dens(grid.size());
  bool any_decrease = false;
  for (int k = 1; k <= opt.levels; ++k) {
    const double eps = delta / std::pow(2.0, k);
    dens = boundary_convolution(rho, d, eps, opt.kind, m);
    TraceLevelRecord rec;
    rec.eps = eps;
    for (std::size_t i = 0; i < grid.size(); ++i)
      rec.mass += grid.weights[i] * (out.signed_mode ? std::abs(dens[i]) : dens[i]);
    if (opt.with_commutation) {
      const Mollifier psi = make_mollifier(opt.kind, eps, dim);
      const auto kw = mollify_detail::kernel_weights(psi);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec2& x = grid.nodes[i];
        SymMat2 conv{0.0, 0.0, 0.0};
        conv.a11 = trace_detail::mollify_point(
            [&](const Vec2& y) { return cs.A(y).a11 * rho(y); }, kw, dim, x);
        if (dim == 2) {
          conv.a12 = trace_detail::mollify_point(
              [&](const Vec2& y) { return cs.A(y).a12 * rho(y); }, kw, dim, x);
          conv.a22 = trace_detail::mollify_point(
              [&](const Vec2& y) { return cs.A(y).a22 * rho(y); }, kw, dim, x);
        }
        const SymMat2 direct = cs.A(x) * dens[i];
        rec.max_commutation =
            std::max(rec.max_commutation, spectral_norm(conv - direct, dim));
      }
    }
    rec.mass_ok = rec.mass <= out.bound + 1e-6;
    if (!rec.mass_ok) ++out.mass_violations;

    BoundaryMeasure mu = BoundaryMeasure::zero(d, m);
    mu.set_density(dens);
    if (k > 1) {
      rec.bl_prev = bl_distance(mu, prev);
      if (out.levels.size() >= 2 && rec.bl_prev < out.levels.back().bl_prev)
        any_decrease = true;
    }
    prev = mu;
    out.levels.push_back(rec);
  }
  out.converged = out.levels.size() >= 2 && out.levels.back().bl_prev < opt.tol;
  out.no_convergence_warning = out.levels.size() >= 3 && !any_decrease && !out.converged;
  out.final_density = dens;
  out.eta_tilde = prev;

  out.kappa_values = kappa(cs.A, cs.G, grid);
  out.eta = BoundaryMeasure::zero(d, m);
  std::vector<double> eta_dens(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    eta_dens[i] = dens[i] - out.kappa_values.values[i];
  out.eta.set_density(eta_dens);

  if (opt.with_residual) {
    const double qh = opt.quad_h > 0.0 ? opt.quad_h : d.diameter() / 50.0;
    out.end_to_end =
        dirichlet_residual(rho, cs, out.eta, test_bank(d, opt.bank_degree), qh);
  }
  return out;
}

// Trace stability across concentric spheres: for a solution on a container,
// the trace measures on inner spheres should agree with rho restricted to
// the sphere (the slicing identity). Reports the bounded Lipschitz
// discrepancy per radius plus a polar-versus-cartesian consistency check of
// the sliced volume integral.
struct RadiusSweepEntry {
  double r = 0.0;
  double discrepancy = 0.0;  // bl(trace measure, rho sigma) on the sphere
  double mass = 0.0;
  bool converged = false;
};

struct RadiusSweepReport {
  std::vector<RadiusSweepEntry> entries;
  double median_discrepancy = 0.0;
  double fubini_shell = 0.0;   // nested shell integral (polar rule)
  double fubini_volume = 0.0;  // same integral by the cartesian mesh rule
  double fubini_gap = 0.0;
  int mass_violations = 0;
};

struct RadiusSweepOptions {
  int radii = 16;
  double r_lo = 0.0;  // 0 picks 0.25 * r_hi
  double r_hi = 0.0;  // 0 picks the largest radius leaving a 0.1 margin
  TraceOptions trace;
  std::function<double(const Vec2&)> fubini_f;  // default exp(x1/2 + x2/5)
  double fubini_quad_h = 0.01;
};

template <class Rho>
RadiusSweepReport radius_sweep(Rho&& rho, const CoefficientSet& cs,
                               const Vec2& x0, const Domain& omega,
                               const RadiusSweepOptions& opt = {}) {
  if (omega.kind() != DomainKind::disk)
    throw validation_error("radius_sweep: container must be a disk");
  const double dist_to_bd = omega.radius() - (x0 - omega.center()).norm();
  const double r_hi = opt.r_hi > 0.0 ? opt.r_hi : dist_to_bd - 0.1;
  if (!(r_hi > 0.0))
    throw validation_error("radius_sweep: no room for spheres around x0");
  const double r_lo = opt.r_lo > 0.0 ? opt.r_lo : 0.25 * r_hi;
  if (!(r_lo < r_hi)) throw validation_error("radius_sweep: need r_lo < r_hi");
  if (opt.radii < 2) throw validation_error("radius_sweep: need at least 2 radii");

  RadiusSweepReport rep;
  std::vector<double> discs;
  for (int j = 0; j < opt.radii; ++j) {
    const double r = r_lo + (r_hi - r_lo) * j / (opt.radii - 1);
    const Domain ball = make_domain(Domain::disk(x0, r), omega);
    TraceOptions topt = opt.trace;
    topt.with_residual = false;
    const TraceDiagnostics tr = trace_limit(rho, cs, ball, topt);
    BoundaryMeasure exact =
        BoundaryMeasure::zero(ball, static_cast<int>(tr.eta_tilde.grid().size()));
    exact.set_density_from([&](double s) { return rho(boundary_point(ball, s)); });
    RadiusSweepEntry e;
    e.r = r;
    e.discrepancy = bl_distance(tr.eta_tilde, exact);
    e.mass = tr.levels.back().mass;
    e.converged = tr.converged;
    rep.mass_violations += tr.mass_violations;
    discs.push_back(e.discrepancy);
    rep.entries.push_back(e);
  }
  std::sort(discs.begin(), discs.end());
  const std::size_t n = discs.size();
  rep.median_discrepancy =
      (n % 2 == 1) ? discs[n / 2] : 0.5 * (discs[n / 2 - 1] + discs[n / 2]);

  std::function<double(const Vec2&)> f = opt.fubini_f;
  if (!f) f = [](const Vec2& x) { return std::exp(0.5 * x.x + 0.2 * x.y); };
  auto integrand = [&](const Vec2& x) { return f(x) * rho(x); };
  rep.fubini_shell = integrate_disk_polar(x0, r_hi, 40, 256, integrand);
  rep.fubini_volume = fields_detail::integrate(Domain::disk(x0, r_hi),
                                               opt.fubini_quad_h, integrand);
  rep.fubini_gap = std::abs(rep.fubini_shell - rep.fubini_volume);
  return rep;
}

}  // namespace ddf
