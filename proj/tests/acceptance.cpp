// Acceptance gate: ten checks with tolerances pinned in code, one printed
// line per criterion. The exit status is the number of failed criteria, so
// the binary doubles as a CI gate and as a quick health report.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ddf/analysis.hpp"
#include "ddf/oracle1d.hpp"
#include "ddf/solver.hpp"
#include "ddf/trace.hpp"
#include "ddf/weakform.hpp"

using namespace ddf;
namespace fs = std::filesystem;
using clk = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      detail = msg;
    }
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Least squares slope of log(err) against log(h).
double order_fit(const std::vector<double>& hs, const std::vector<double>& es) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double lx = std::log(hs[i]), ly = std::log(es[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// 1. Five one dimensional problems with atomic boundary data: the measure
//    solver must match the analytic two-pass integrator to 1e-3 in L^{p'}
//    at h = 1e-3 and show L^2 order >= 1.9 over h in {4e-3, 2e-3, 1e-3},
//    all within 30 seconds.
Outcome criterion_1d_oracle() {
  struct Problem {
    Domain d = Domain::interval(0.0, 1.0);
    CoefficientSet cs;
    double ea = 0.0, eb = 0.0;
  };
  std::vector<Problem> family;
  {
    Problem q;
    q.d = make_domain(Domain::interval(0.0, 1.0), Domain::interval(-1.0, 2.0));
    q.cs = CoefficientSet::laplace(1);
    q.cs.b = VectorField::closed_form("1", "0");
    q.ea = 1.0;
    q.eb = std::exp(1.0);
    family.push_back(q);
  }
  {
    Problem q;
    q.d = make_domain(Domain::interval(0.0, 1.0), Domain::interval(-1.0, 2.0));
    q.cs = CoefficientSet::laplace(1);
    q.cs.b = VectorField::closed_form("0 - 1", "0");
    q.ea = std::exp(1.0);
    q.eb = 1.0;
    family.push_back(q);
  }
  // The remaining three keep A and b constant or affine: such coefficients
  // pass through the smoothing kernel unchanged, so the level schedule has no
  // coefficient plateau and the mesh order is observable down to 1e-8.
  {
    Problem q;
    q.d = make_domain(Domain::interval(0.0, 1.0), Domain::interval(-1.0, 2.0));
    q.cs = CoefficientSet::laplace(1);
    q.cs.A = MatrixField::scalar_1d(ScalarField::closed_form("2 + x1"));
    q.cs.b = VectorField::closed_form("0.5", "0");
    q.cs.G = MatrixField::scalar_1d(ScalarField::closed_form("0.1*x1"));
    q.ea = 1.0;
    q.eb = 2.0;
    family.push_back(q);
  }
  {
    Problem q;
    q.d = make_domain(Domain::interval(-1.0, 1.0), Domain::interval(-2.0, 2.0));
    q.cs = CoefficientSet::laplace(1);
    q.cs.A = MatrixField::scalar_1d(ScalarField::constant(0.8));
    q.cs.b = VectorField::closed_form("0 - 0.6*x1", "0");
    q.cs.G = MatrixField::scalar_1d(ScalarField::constant(0.2));
    q.cs.h = VectorField::closed_form("0.1*x1", "0");
    q.ea = 0.8;
    q.eb = 1.1;
    family.push_back(q);
  }
  {
    Problem q;
    q.d = make_domain(Domain::interval(-0.5, 1.5), Domain::interval(-1.5, 2.5));
    q.cs = CoefficientSet::laplace(1);
    q.cs.A = MatrixField::scalar_1d(ScalarField::closed_form("1.5 + 0.25*x1"));
    q.cs.b = VectorField::closed_form("0.4 - 0.2*x1", "0");
    q.cs.G = MatrixField::scalar_1d(ScalarField::closed_form("0.3 + 0.1*x1"));
    q.cs.h = VectorField::closed_form("0.05", "0");
    q.ea = 2.0;
    q.eb = 1.0;
    family.push_back(q);
  }

  Outcome out;
  const auto t0 = clk::now();
  const std::vector<double> hs{4e-3, 2e-3, 1e-3};
  for (std::size_t qi = 0; qi < family.size(); ++qi) {
    const Problem& q = family[qi];
    const Oracle1DSolution ref = exact_solve_1d(q.cs, q.d, q.ea, q.eb, 200000);

    DirichletProblem pb;
    pb.domain = q.d;
    pb.coeffs = q.cs;
    pb.eta = BoundaryMeasure::zero(q.d, 2);
    pb.eta.add_atom(q.d.alpha(), q.ea);
    pb.eta.add_atom(q.d.beta(), q.eb);

    std::vector<double> errs;
    double err_pp = 0.0;
    for (double h : hs) {
      MeasureSolveOptions opt;
      opt.mesh_h = h;
      opt.tol = 1e-6;
      const MeasureSolution sol = solve_measure(pb, opt);
      const Mesh& mesh = sol.rho.mesh();
      auto diff = [&](std::size_t k) {
        const double x = mesh.vertices[k].x;
        if (x < q.d.alpha() || x > q.d.beta()) return 0.0;
        return sol.rho.nodal()[k] - ref.eval(x);
      };
      errs.push_back(sol.rho.norm_of(diff, 2.0));
      if (h == hs.back()) err_pp = sol.rho.norm_of(diff, sol.report.p_prime);
    }
    out.require(err_pp <= 1e-3,
                "problem " + std::to_string(qi) + ": L^p' error " + num(err_pp));
    const double order = order_fit(hs, errs);
    out.require(order >= 1.9,
                "problem " + std::to_string(qi) + ": order " + num(order));
  }
  const double elapsed = std::chrono::duration<double>(clk::now() - t0).count();
  out.require(elapsed <= 30.0, "runtime " + num(elapsed) + "s over budget");
  return out;
}

// ---------------------------------------------------------------------------
// 2. Three manufactured 2d solutions (G = rho* A, h = rho* b, zero boundary
//    measure): L^2 order >= 1.5 over h in {0.1, 0.05, 0.025} and the finest
//    solution passes the weak form residual at 1e-4 relative, within 120 s.
Outcome criterion_2d_manufactured() {
  const Domain d = make_domain(Domain::disk(Vec2{0.0, 0.0}, 1.0),
                               Domain::disk(Vec2{0.0, 0.0}, 2.0));
  struct Triple {
    CoefficientSet cs;
    std::function<double(const Vec2&)> exact;
  };
  std::vector<Triple> triples;
  {
    Triple t;
    const std::string rs = "(2 + 0.25*(x1*x1 - x2*x2))";
    t.cs = CoefficientSet::laplace(2);
    t.cs.G = MatrixField::closed_form(rs, "0", rs);
    t.exact = [](const Vec2& x) { return 2.0 + 0.25 * (x.x * x.x - x.y * x.y); };
    triples.push_back(t);
  }
  {
    Triple t;
    const std::string rs = "(1.5 + 0.5*exp(0.4*x1)*cos(0.4*x2))";
    t.cs = CoefficientSet::laplace(2);
    t.cs.b = VectorField::closed_form("0.3", "0.2");
    t.cs.G = MatrixField::closed_form(rs, "0", rs);
    t.cs.h = VectorField::closed_form("0.3*" + rs, "0.2*" + rs);
    t.exact = [](const Vec2& x) {
      return 1.5 + 0.5 * std::exp(0.4 * x.x) * std::cos(0.4 * x.y);
    };
    triples.push_back(t);
  }
  {
    // Anisotropic constant diffusion with an affine drift; both commute with
    // the smoothing kernel, so the manufactured field is exact at every level.
    Triple t;
    const std::string rs = "(2 + 0.3*sin(x1)*cos(x2))";
    t.cs = CoefficientSet::laplace(2);
    t.cs.A = MatrixField::closed_form("1.5", "0.2", "0.8");
    t.cs.b = VectorField::closed_form("0.1*x2", "0.1*x1");
    t.cs.G = MatrixField::closed_form("1.5*" + rs, "0.2*" + rs, "0.8*" + rs);
    t.cs.h = VectorField::closed_form("0.1*x2*" + rs, "0.1*x1*" + rs);
    t.exact = [](const Vec2& x) {
      return 2.0 + 0.3 * std::sin(x.x) * std::cos(x.y);
    };
    triples.push_back(t);
  }

  Outcome out;
  const auto t0 = clk::now();
  const std::vector<double> hs{0.1, 0.05, 0.025};
  for (std::size_t ti = 0; ti < triples.size(); ++ti) {
    const Triple& t = triples[ti];
    DirichletProblem pb;
    pb.domain = d;
    pb.coeffs = t.cs;
    pb.eta = BoundaryMeasure::zero(d, 256);

    std::vector<double> errs;
    double final_residual = 0.0;
    for (double h : hs) {
      MeasureSolveOptions opt;
      opt.mesh_h = h;
      opt.tol = 1e-6;
      const MeasureSolution sol = solve_measure(pb, opt);
      const Mesh& mesh = sol.rho.mesh();
      errs.push_back(sol.rho.norm_of(
          [&](std::size_t k) {
            if (mesh.vertices[k].norm() > 1.0 + 1e-12) return 0.0;
            return sol.rho.nodal()[k] - t.exact(mesh.vertices[k]);
          },
          2.0));
      if (h == hs.back()) {
        const ResidualReport rr = dirichlet_residual(
            [&](const Vec2& x) { return sol.rho(x); }, t.cs, pb.eta,
            test_bank(d, 2), 0.04);
        final_residual = rr.max_relative;
      }
    }
    const double order = order_fit(hs, errs);
    out.require(order >= 1.5,
                "triple " + std::to_string(ti) + ": order " + num(order));
    out.require(final_residual <= 1e-4, "triple " + std::to_string(ti) +
                                            ": residual " + num(final_residual));
  }
  const double elapsed = std::chrono::duration<double>(clk::now() - t0).count();
  out.require(elapsed <= 120.0, "runtime " + num(elapsed) + "s over budget");
  return out;
}

// ---------------------------------------------------------------------------
// 3. The flux ratio at the boundary reproduces three hand-computable cases to
//    1e-12, and the dyadic boundary schedule applied to a known global field
//    returns the surface measure (field minus ratio) to 1e-3 at every node.
Outcome criterion_flux_ratio() {
  Outcome out;
  const BoundaryGrid grid = boundary_grid(Domain::disk(Vec2{0.0, 0.0}, 1.0), 64);
  const MatrixField I = MatrixField::identity();
  const MatrixField Z = MatrixField::closed_form("0", "0", "0");

  for (double v : kappa(I, Z, grid).values)
    out.require(std::abs(v) <= 1e-12, "zero numerator: kappa " + num(v));
  for (double v : kappa(I, I, grid).values)
    out.require(std::abs(v - 1.0) <= 1e-12, "matched pair: kappa " + num(v));
  const MatrixField A2 = MatrixField::closed_form("2", "0", "1");
  const MatrixField G2 = MatrixField::closed_form("1", "0", "3");
  const double k0 = kappa(A2, G2, grid).values[0];  // node 0 has normal (1, 0)
  out.require(std::abs(k0 - 0.5) <= 1e-12, "diagonal pair: kappa " + num(k0));

  const Domain d = make_domain(Domain::disk(Vec2{0.0, 0.0}, 1.5),
                               Domain::disk(Vec2{0.0, 0.0}, 3.0));
  CoefficientSet cs = CoefficientSet::laplace(2);
  cs.G = MatrixField::closed_form("(0.1 + 0.05*x1)", "0", "(0.1 + 0.05*x1)");
  auto rho = [](const Vec2& x) {
    return 2.0 + std::exp(0.5 * x.x) * std::cos(0.5 * x.y);
  };
  const TraceDiagnostics tr = trace_limit(rho, cs, d);
  out.require(tr.converged, "boundary schedule did not converge");
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.eta.grid().size(); ++k) {
    const Vec2& node = tr.eta.grid().nodes[k];
    const double want = rho(node) - (0.1 + 0.05 * node.x);
    worst = std::max(worst, std::abs(tr.eta.density()[k] - want));
  }
  out.require(worst <= 1e-3, "recovered density off by " + num(worst));
  return out;
}

// ---------------------------------------------------------------------------
// 4. The surface mass of every mollified level stays below the assembled
//    bound for each nonnegative field in the suite: zero violations.
Outcome criterion_mass_bound() {
  Outcome out;
  int violations = 0;
  int levels_checked = 0;
  auto run = [&](auto&& rho, const CoefficientSet& cs, const Domain& d) {
    const TraceDiagnostics tr = trace_limit(rho, cs, d);
    violations += tr.mass_violations;
    for (const TraceLevelRecord& lv : tr.levels) {
      ++levels_checked;
      if (!lv.mass_ok) ++violations;
    }
  };

  const Domain d1 = make_domain(Domain::disk(Vec2{0.0, 0.0}, 1.0),
                                Domain::disk(Vec2{0.0, 0.0}, 2.0));
  CoefficientSet c1 = CoefficientSet::laplace(2);
  c1.G = MatrixField::closed_form("0.3", "0", "0.3");
  run([](const Vec2& x) { return 1.5 + 0.5 * x.x * x.y; }, c1, d1);

  CoefficientSet c2 = CoefficientSet::laplace(2);
  c2.A = MatrixField::isotropic(ScalarField::closed_form("1 + 0.3*sin(x1)"));
  run([](const Vec2& x) { return 2.0 + 0.5 * std::cos(x.y); }, c2, d1);

  run([](const Vec2&) { return 1.0; }, CoefficientSet::laplace(2), d1);

  const Domain d2 = make_domain(Domain::disk(Vec2{0.0, 0.0}, 1.5),
                                Domain::disk(Vec2{0.0, 0.0}, 3.0));
  CoefficientSet c3 = CoefficientSet::laplace(2);
  c3.G = MatrixField::closed_form("(0.1 + 0.05*x1)", "0", "(0.1 + 0.05*x1)");
  run([](const Vec2& x) {
    return 2.0 + std::exp(0.5 * x.x) * std::cos(0.5 * x.y);
  }, c3, d2);

  out.require(violations == 0, std::to_string(violations) + " violations over " +
                                   std::to_string(levels_checked) + " levels");
  out.require(levels_checked >= 20, "schedule unexpectedly short");
  return out;
}

// ---------------------------------------------------------------------------
// 5. Zero data gives the zero solution (1e-8); scaling all data by lambda in
//    {2, -1, 0.5} scales the solution to 1e-6 relative; the a priori
//    stability envelope moves by less than 2x under mesh refinement.
Outcome criterion_linearity() {
  Outcome out;
  const Domain d = make_domain(Domain::disk(Vec2{0.0, 0.0}, 1.0),
                               Domain::disk(Vec2{0.0, 0.0}, 2.0));
  {
    DirichletProblem zero;
    zero.domain = d;
    zero.coeffs = CoefficientSet::laplace(2);
    zero.eta = BoundaryMeasure::zero(d, 256);
    MeasureSolveOptions opt;
    opt.mesh_h = 0.1;
    const MeasureSolution sol = solve_measure(zero, opt);
    const double n = sol.rho.norm_Lq(sol.report.p_prime);
    out.require(n <= 1e-8, "zero data norm " + num(n));
  }

  auto scaled_problem = [&](double lam) {
    DirichletProblem pb;
    pb.domain = d;
    pb.coeffs = CoefficientSet::laplace(2);
    pb.coeffs.A = MatrixField::isotropic(ScalarField::closed_form("1 + 0.2*sin(x1)"));
    pb.coeffs.b = VectorField::closed_form("0.3*x2", "0 - 0.3*x1");
    pb.coeffs.G = MatrixField::from_entries(ScalarField::constant(0.1 * lam),
                                            ScalarField::constant(0.05 * lam),
                                            ScalarField::constant(0.15 * lam));
    pb.coeffs.h = VectorField(ScalarField::constant(0.1 * lam),
                              ScalarField::constant(-0.05 * lam));
    pb.eta = BoundaryMeasure::zero(d, 256);
    pb.eta.set_density_from(
        [lam](double t) { return lam * (1.0 + 0.25 * std::cos(t)); });
    return pb;
  };
  auto solve_at = [&](double lam, double h) {
    MeasureSolveOptions opt;
    opt.mesh_h = h;
    opt.n_start = 4;
    opt.n_max = 16;
    opt.tol = 0.0;  // a fixed schedule keeps the runs directly comparable
    return solve_measure(scaled_problem(lam), opt);
  };

  const MeasureSolution base = solve_at(1.0, 0.1);
  const double pp = base.report.p_prime;
  for (double lam : {2.0, -1.0, 0.5}) {
    const MeasureSolution sc = solve_at(lam, 0.1);
    const double rel =
        sc.rho.norm_of(
            [&](std::size_t k) {
              return sc.rho.nodal()[k] - lam * base.rho.nodal()[k];
            },
            pp) /
        (std::abs(lam) * base.rho.norm_Lq(pp));
    out.require(rel <= 1e-6, "lambda " + num(lam) + ": deviation " + num(rel));
  }

  const MeasureSolution fine = solve_at(1.0, 0.05);
  const DirichletProblem pb_c = scaled_problem(1.0);
  const double env_coarse =
      apriori_check({{"coarse", &pb_c, &base.rho}}).envelope;
  const double env_fine = apriori_check({{"fine", &pb_c, &fine.rho}}).envelope;
  const double ratio = std::max(env_coarse, env_fine) /
                       std::max(1e-300, std::min(env_coarse, env_fine));
  out.require(ratio <= 2.0, "envelope moved by " + num(ratio) + "x");
  return out;
}

// ---------------------------------------------------------------------------
// 6. Twenty randomized source-free problems with nonnegative boundary data:
//    the computed density never dips below -1e-8 * max(1, max rho).
Outcome criterion_nonnegativity() {
  Outcome out;
  const Domain d = make_domain(Domain::disk(Vec2{0.0, 0.0}, 1.0),
                               Domain::disk(Vec2{0.0, 0.0}, 2.0));
  std::mt19937_64 rng(0x5eed2026ull);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a1 = unit(rng), b1 = unit(rng), a2 = unit(rng);
    const double floor = 1.2 * (std::abs(a1) + std::abs(b1) + std::abs(a2)) + 0.1;
    const double amp = 0.15 * (unit(rng) + 1.0);  // in [0, 0.3)
    const double phase = pi * (unit(rng) + 1.0);
    const int mode = 1 + (trial % 2);

    DirichletProblem pb;
    pb.domain = d;
    pb.coeffs = CoefficientSet::laplace(2);
    pb.coeffs.A = MatrixField::isotropic(
        ScalarField::callable([amp, phase, mode](const Vec2& x) {
          return 1.0 + amp * std::sin(mode * x.x + phase);
        }));
    pb.coeffs.b = VectorField::closed_form("0.2*x2", "0 - 0.2*x1");
    pb.eta = BoundaryMeasure::zero(d, 256);
    pb.eta.set_density_from([=](double t) {
      return floor + a1 * std::cos(t) + b1 * std::sin(t) + a2 * std::cos(2.0 * t);
    });

    MeasureSolveOptions opt;
    opt.mesh_h = 0.1;
    opt.n_max = 12;
    const MeasureSolution sol = solve_measure(pb, opt);
    const double lo = sol.rho.min_nodal();
    const double hi = sol.rho.max_nodal();
    out.require(lo >= -1e-8 * std::max(1.0, hi),
                "trial " + std::to_string(trial) + ": min " + num(lo));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 7. The two mollifier kinds land within 3*tol of each other on a fixed
//    problem, and the Cauchy increments of the full schedule decrease over
//    the last three levels.
Outcome criterion_kernel_independence() {
  Outcome out;
  const Domain d = make_domain(Domain::disk(Vec2{0.0, 0.0}, 1.0),
                               Domain::disk(Vec2{0.0, 0.0}, 2.0));
  DirichletProblem pb;
  pb.domain = d;
  pb.coeffs = CoefficientSet::laplace(2);
  pb.coeffs.A = MatrixField::isotropic(ScalarField::closed_form("1 + 0.2*sin(x1)"));
  pb.coeffs.b = VectorField::closed_form("0.2*x2", "0 - 0.1*x1");
  pb.eta = BoundaryMeasure::zero(d, 256);
  pb.eta.set_density_from([](double t) { return 1.0 + 0.3 * std::cos(t); });

  const double tol = 1e-4;
  MeasureSolveOptions a;
  a.mesh_h = 0.1;
  a.tol = tol;
  a.kind = MollifierKind::standard_bump;
  MeasureSolveOptions b = a;
  b.kind = MollifierKind::polynomial_bump;
  const MeasureSolution sa = solve_measure(pb, a);
  const MeasureSolution sb = solve_measure(pb, b);
  out.require(sa.report.converged && sb.report.converged,
              "a schedule failed to converge");
  const double gap = diff_norm_Lq(sa.rho, sb.rho, sa.report.p_prime);
  out.require(gap <= 3.0 * tol, "kernel gap " + num(gap));

  MeasureSolveOptions full = a;
  full.tol = 0.0;
  full.n_start = 3;
  full.n_max = 48;
  const MeasureSolution sf = solve_measure(pb, full);
  const auto& lv = sf.report.levels;
  out.require(lv.size() >= 4, "schedule too short");
  const std::size_t n = lv.size();
  out.require(lv[n - 3].increment_lpp > lv[n - 2].increment_lpp &&
                  lv[n - 2].increment_lpp > lv[n - 1].increment_lpp,
              "increments not decreasing: " + num(lv[n - 3].increment_lpp) +
                  ", " + num(lv[n - 2].increment_lpp) + ", " +
                  num(lv[n - 1].increment_lpp));
  return out;
}

// ---------------------------------------------------------------------------
// 8. For atomic boundary data the interior sup/inf ratio over a fixed ball
//    moves less than 10% under one mesh refinement and one smoothing level.
Outcome criterion_interior_ratio() {
  Outcome out;
  const Domain d = make_domain(Domain::disk(Vec2{0.0, 0.0}, 1.0),
                               Domain::disk(Vec2{0.0, 0.0}, 2.0));
  DirichletProblem pb;
  pb.domain = d;
  pb.coeffs = CoefficientSet::laplace(2);
  pb.eta = BoundaryMeasure::zero(d, 128);
  pb.eta.add_atom(0.0, 1.0);

  auto mk = [](double h, int n) {
    MeasureSolveOptions o;
    o.mesh_h = h;
    o.n_start = n;
    o.n_max = n;
    o.tol = 0.0;
    return o;
  };
  const HarnackReport hr = harnack_check(pb, Vec2{0.1, 0.0}, 0.2,
                                         {mk(0.1, 8), mk(0.05, 8), mk(0.1, 16)});
  out.require(hr.positive, "solution not positive on the ball");
  for (const HarnackObservation& ob : hr.observations)
    out.require(ob.ratio_defined && ob.ball_nodes > 0, "ratio undefined");
  out.require(hr.ratio_spread <= 0.10, "ratio spread " + num(hr.ratio_spread));
  return out;
}

// ---------------------------------------------------------------------------
// 9. Sweeping 16 sphere radii around an interior point: the recovered sphere
//    measures match the restriction of the field (median discrepancy 1e-3 at
//    the finest kernel width) and the nested-shell integral agrees with the
//    mesh integral within quadrature error.
Outcome criterion_radius_sweep() {
  Outcome out;
  const Domain omega = Domain::disk(Vec2{0.0, 0.0}, 2.0);
  auto rho = [](const Vec2& x) { return 3.0 + x.x + x.x * x.y; };
  RadiusSweepOptions opt;
  opt.radii = 16;
  opt.r_lo = 0.2;
  opt.r_hi = 0.5;
  opt.trace.levels = 5;
  opt.trace.nodes = 96;
  const RadiusSweepReport rep = radius_sweep(rho, CoefficientSet::laplace(2),
                                             Vec2{0.1, 0.0}, omega, opt);
  out.require(rep.entries.size() == 16, "expected 16 radii");
  out.require(rep.mass_violations == 0,
              std::to_string(rep.mass_violations) + " mass violations");
  out.require(rep.median_discrepancy <= 1e-3,
              "median discrepancy " + num(rep.median_discrepancy));
  const double fub = std::abs(rep.fubini_gap);
  out.require(fub <= 1e-3 * std::max(1.0, std::abs(rep.fubini_volume)),
              "shell vs mesh integral gap " + num(fub));
  return out;
}

// ---------------------------------------------------------------------------
// 10. Two deterministic command line runs of the same config produce byte
//     identical artifacts.
Outcome criterion_determinism() {
  Outcome out;
  const fs::path dir = fs::temp_directory_path() / "ddf_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "problem {\n"
           "  domain {\n"
           "    kind = interval\n"
           "    alpha = 0\n"
           "    beta = 1\n"
           "    container {\n"
           "      alpha = -1\n"
           "      beta = 2\n"
           "    }\n"
           "  }\n"
           "  measure {\n"
           "    density = 1.5\n"
           "  }\n"
           "}\n"
           "solve {\n"
           "  h = 0.01\n"
           "}\n";
  }
  auto run = [&](const std::string& sub) {
    const std::string cmd = std::string(DDFW_PATH) + " solve --config " +
                            (dir / "run.cfg").string() + " --deterministic --out " +
                            (dir / sub).string() + " >" + (dir / (sub + ".log")).string() +
                            " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  out.require(run("a") == 0 && run("b") == 0, "solve run failed");
  const std::string csv_a = slurp(dir / "a" / "solution.csv");
  out.require(!csv_a.empty() && csv_a == slurp(dir / "b" / "solution.csv"),
              "solution tables differ");
  const std::string conv_a = slurp(dir / "a" / "convergence.json");
  out.require(!conv_a.empty() && conv_a == slurp(dir / "b" / "convergence.json"),
              "convergence reports differ");
  fs::remove_all(dir);
  return out;
}

}  // namespace

int main() {
  struct Entry {
    const char* label;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"1d solutions match the analytic reference", criterion_1d_oracle},
      {"2d manufactured solutions converge", criterion_2d_manufactured},
      {"flux ratio identity and boundary recovery", criterion_flux_ratio},
      {"surface mass bound never violated", criterion_mass_bound},
      {"linearity, uniqueness and stable envelope", criterion_linearity},
      {"nonnegative data keeps the density nonnegative", criterion_nonnegativity},
      {"kernel independence and shrinking increments", criterion_kernel_independence},
      {"interior ratios stable across levels", criterion_interior_ratio},
      {"almost every sphere carries the trace", criterion_radius_sweep},
      {"deterministic runs are byte identical", criterion_determinism},
  };

  int failures = 0;
  int idx = 0;
  for (const Entry& e : entries) {
    ++idx;
    Outcome out;
    const auto t0 = clk::now();
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out.ok = false;
      out.detail = std::string("exception: ") + ex.what();
    }
    const double secs = std::chrono::duration<double>(clk::now() - t0).count();
    std::printf("criterion %2d  %-48s %s (%.1fs)%s%s\n", idx, e.label,
                out.ok ? "pass" : "FAIL", secs, out.ok ? "" : ": ",
                out.ok ? "" : out.detail.c_str());
    std::fflush(stdout);
    if (!out.ok) ++failures;
  }
  return failures;
}
