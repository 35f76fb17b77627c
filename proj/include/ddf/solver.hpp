// Driver for boundary measure data. The measure problem is approached
// through a doubling schedule of smoothed levels: at level n the coefficients
// are mollified at scale 1/n, the boundary measure is mollified to a density,
// and the smooth Dirichlet problem is solved with datum g = eta_n + kappa_n.
// With variation-convergent data the iterates are Cauchy in L^{p'} and the
// loop stops on a small increment; with atomic data only weak-* convergence
// is available and stagnation of the bounded Lipschitz distance between
// eta_n and eta is used as the stop diagnostic instead.
#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ddf/core.hpp"
#include "ddf/fem.hpp"
#include "ddf/fields.hpp"
#include "ddf/geometry.hpp"
#include "ddf/measures.hpp"
#include "ddf/mollify.hpp"

namespace ddf {

struct DirichletProblem {
  Domain domain = Domain::interval(0.0, 1.0);  // must carry a container
  CoefficientSet coeffs;
  BoundaryMeasure eta = BoundaryMeasure::zero(Domain::interval(0.0, 1.0), 2);
  double p = 0.0;  // integrability exponent; 0 picks 4 in 2d, 2.5 in 1d
};

struct MeasureSolveOptions {
  double mesh_h = 0.05;
  int n_start = 0;  // 0 picks ceil(3 / gap) so kernels clear the cutoff layer
  int n_max = 48;
  double tol = 1e-4;  // 0 runs the full schedule with no stop test
  MollifierKind kind = MollifierKind::standard_bump;
  int jobs = 1;
  std::string cache_dir;  // forwarded to the smoothing level cache (opt-in)
  std::uint64_t cache_key = 0;
};

struct LevelRecord {
  int n = 0;
  double eps = 0.0;
  double norm_lpp = 0.0;       // ||rho_n||_{L^{p'}}
  double increment_lpp = 0.0;  // distance to the previous iterate (0 at first level)
  double bl_eta = 0.0;         // bounded Lipschitz distance from eta_n to eta
  double dist_A_sup = 0.0;
  double dist_b_Lp = 0.0;
  double dist_G_Lpp = 0.0;
  double dist_h_L1 = 0.0;
  bool supg_used = false;
};

struct ConvergenceReport {
  std::vector<LevelRecord> levels;
  bool converged = false;
  bool weak_only = false;
  bool monotone_warning = false;  // increments failed to decrease at some step
  int final_n = 0;
  double final_increment = 0.0;
  double p = 0.0;
  double p_prime = 0.0;
  double tol = 0.0;
};

struct MeasureSolution {
  SolutionField rho;
  ConvergenceReport report;
};

namespace solver_detail {

inline bool same_domain(const Domain& a, const Domain& b) {
  if (a.kind() != b.kind()) return false;
  if (a.kind() == DomainKind::interval)
    return a.alpha() == b.alpha() && a.beta() == b.beta();
  return a.center().x == b.center().x && a.center().y == b.center().y &&
         a.radius() == b.radius();
}

}  // namespace solver_detail

inline MeasureSolution solve_measure(const DirichletProblem& problem,
                                     const MeasureSolveOptions& opt = {}) {
  const Domain& d = problem.domain;
  const int dim = d.dim();
  if (!solver_detail::same_domain(d, problem.eta.domain()))
    throw validation_error("solve_measure: eta lives on a different boundary");
  if (problem.coeffs.dim != dim)
    throw validation_error("solve_measure: coefficient dimension mismatch");
  const double p = problem.p > 0.0 ? problem.p : (dim == 2 ? 4.0 : 2.5);
  if (!(p > dim))
    throw validation_error("solve_measure: need integrability exponent p > dimension");
  const double pp = p / (p - 1.0);
  const double gap = d.gap();  // throws when no container is attached

  auto mesh = std::make_shared<const Mesh>(
      dim == 2 ? triangulate_disk(d, opt.mesh_h) : segment_mesh(d, opt.mesh_h));
  const std::vector<int> bverts = boundary_vertices(*mesh);
  const int m_bd = static_cast<int>(bverts.size());
  const BoundaryGrid bgrid = boundary_grid(d, m_bd);

  const int n_start =
      opt.n_start > 0 ? opt.n_start : static_cast<int>(std::ceil(3.0 / gap));
  if (opt.n_max < n_start)
    throw validation_error("solve_measure: schedule is empty (n_max < n_start)");

  ConvergenceReport rep;
  rep.p = p;
  rep.p_prime = pp;
  rep.tol = opt.tol;
  rep.weak_only = dim == 2 && !problem.eta.atoms().empty();
  const double tv = total_variation(problem.eta);

  std::optional<SolutionField> rho_prev;
  std::optional<SolutionField> rho_final;
  double bl_prev = 0.0;
  for (int n = n_start; n <= opt.n_max; n *= 2) {
    AdmissibleOptions aopt;
    aopt.kind = opt.kind;
    aopt.p = p;
    aopt.jobs = opt.jobs;
    aopt.cache_dir = opt.cache_dir;
    aopt.cache_key = opt.cache_key;
    const AdmissibleLevel level = admissible_sequence(problem.coeffs, d, n, aopt);

    // Mollification scale for the measure: arc length 1/n on the boundary.
    const double eps_bd = dim == 2 ? (1.0 / n) / d.radius() : 1.0 / n;
    const BoundaryMeasure eta_n = mollify_measure(problem.eta, eps_bd, opt.kind);
    const KappaDensity kap = kappa(level.smoothed.A, level.smoothed.G, bgrid);

    std::vector<double> g(static_cast<std::size_t>(m_bd));
    for (int k = 0; k < m_bd; ++k)
      g[static_cast<std::size_t>(k)] =
          eta_n.density_at(bgrid.params[static_cast<std::size_t>(k)]) +
          kap.values[static_cast<std::size_t>(k)];

    SolveStats stats;
    SolutionField rho_n =
        solve_smooth(d, mesh, divergence_form(level.smoothed), g, &stats);

    LevelRecord rec;
    rec.n = n;
    rec.eps = level.eps;
    rec.norm_lpp = rho_n.norm_Lq(pp);
    rec.bl_eta = bl_distance(eta_n, problem.eta);
    rec.dist_A_sup = level.dist_A_sup;
    rec.dist_b_Lp = level.dist_b_Lp;
    rec.dist_G_Lpp = level.dist_G_Lpp;
    rec.dist_h_L1 = level.dist_h_L1;
    rec.supg_used = stats.supg_used;

    bool stop = false;
    if (rho_prev) {
      rec.increment_lpp = diff_norm_Lq(rho_n, *rho_prev, pp);
      const std::size_t L = rep.levels.size();
      if (L >= 2 && rep.levels[L - 1].increment_lpp > 0.0 &&
          rec.increment_lpp >= rep.levels[L - 1].increment_lpp)
        rep.monotone_warning = true;
      if (opt.tol > 0.0) {
        if (!rep.weak_only) {
          stop = rec.increment_lpp < opt.tol;
        } else {
          stop = std::abs(rec.bl_eta - bl_prev) < opt.tol * std::max(1.0, tv);
        }
      }
    }
    bl_prev = rec.bl_eta;
    rep.levels.push_back(rec);
    rep.final_n = n;
    rep.final_increment = rec.increment_lpp;
    rho_prev = rho_n;
    rho_final = std::move(rho_n);
    if (stop) {
      rep.converged = true;
      break;
    }
  }
  if (opt.tol == 0.0) rep.converged = true;  // fixed schedule, no stop test requested
  return MeasureSolution{std::move(*rho_final), std::move(rep)};
}

}  // namespace ddf
