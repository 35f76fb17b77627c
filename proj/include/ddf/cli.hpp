// Batch commands behind the command line tool. Each command loads its inputs
// from a RunConfig, writes its artifacts atomically under the output
// directory, and returns a process exit code: 0 for success, 2 for a
// completed run that carries a no-convergence warning, 1 for errors (the
// caller maps exceptions to 1).
#pragma once

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ddf/analysis.hpp"
#include "ddf/config.hpp"
#include "ddf/core.hpp"
#include "ddf/fem.hpp"
#include "ddf/report_io.hpp"
#include "ddf/solver.hpp"
#include "ddf/trace.hpp"
#include "ddf/weakform.hpp"

namespace ddf {

namespace cli_detail {

inline std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

inline MeasureSolveOptions solve_options(const RunConfig& cfg) {
  MeasureSolveOptions opt = cfg.solve;
  if (cfg.deterministic) opt.jobs = 1;
  return opt;
}

inline std::shared_ptr<const Mesh> config_mesh(const RunConfig& cfg) {
  const Domain& d = cfg.problem.domain;
  return std::make_shared<const Mesh>(d.dim() == 2
                                          ? triangulate_disk(d, cfg.solve.mesh_h)
                                          : segment_mesh(d, cfg.solve.mesh_h));
}

// Least squares slope of log(err) against log(scale); the observed order.
inline std::optional<double> fit_order(const std::vector<double>& scales,
                                       const std::vector<double>& errs) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(errs[i] > 0.0) || !(scales[i] > 0.0)) continue;
    const double lx = std::log(scales[i]), ly = std::log(errs[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-14) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

}  // namespace cli_detail

inline int cmd_solve(const RunConfig& cfg) {
  const MeasureSolution sol = solve_measure(cfg.problem, cli_detail::solve_options(cfg));
  write_text_atomic(cli_detail::join_path(cfg.out_dir, "solution.csv"),
                    solution_csv(sol.rho));
  write_json_atomic(cli_detail::join_path(cfg.out_dir, "convergence.json"),
                    to_json(sol.report));
  std::cout << "solve: final_n=" << sol.report.final_n
            << " increment=" << g17(sol.report.final_increment)
            << " converged=" << (sol.report.converged ? "yes" : "no") << "\n";
  if (!sol.report.converged) {
    std::cerr << "warning: schedule exhausted before the stop test passed\n";
    return 2;
  }
  return 0;
}

inline int cmd_verify(const RunConfig& cfg, const std::string& solution_path) {
  const auto mesh = cli_detail::config_mesh(cfg);
  std::vector<double> nodal = read_solution_csv(solution_path, *mesh);
  const SolutionField rho(cfg.problem.domain, mesh, std::move(nodal));

  const double qh =
      cfg.quad_h > 0.0 ? cfg.quad_h : cfg.problem.domain.diameter() / 50.0;
  const ResidualReport rr =
      dirichlet_residual(rho, cfg.problem.coeffs, cfg.problem.eta,
                         test_bank(cfg.problem.domain, cfg.bank_degree), qh);
  const AprioriReport ar = apriori_check({{"solution", &cfg.problem, &rho}});
  write_json_atomic(cli_detail::join_path(cfg.out_dir, "residual.json"),
                    to_json(rr));
  write_json_atomic(cli_detail::join_path(cfg.out_dir, "apriori.json"),
                    to_json(ar));

  const ResidualEntry* worst = nullptr;
  for (const ResidualEntry& e : rr.entries)
    if (!worst || e.relative > worst->relative) worst = &e;
  std::cout << "verify: max_relative=" << g17(rr.max_relative)
            << " median_relative=" << g17(rr.median_relative) << "\n";
  if (rr.max_relative > cfg.verify_tol) {
    std::cerr << "verify: residual " << g17(worst ? worst->residual : 0.0)
              << " (relative " << g17(rr.max_relative) << ") on test '"
              << (worst ? worst->name : "?") << "' exceeds tolerance "
              << g17(cfg.verify_tol) << "\n";
    return 1;
  }
  return 0;
}

inline int cmd_trace(const RunConfig& cfg) {
  if (cfg.trace_rho.empty())
    throw validation_error("trace: the trace section must set rho to an expression");
  const ScalarField rho_field = ScalarField::closed_form(cfg.trace_rho);
  auto rho = [&rho_field](const Vec2& x) { return rho_field(x); };

  TraceDiagnostics tr;
  try {
    tr = trace_limit(rho, cfg.problem.coeffs, cfg.problem.domain, cfg.trace);
  } catch (const validation_error& e) {
    // A signed input without an explicit boundedness assertion cannot use the
    // sup-norm bound, so the signed diagnostic is unavailable.
    if (std::string(e.what()).find("negative values") != std::string::npos) {
      std::cerr << "signed unbounded trace unsupported\n";
      return 1;
    }
    throw;
  }

  ojson doc = to_json(tr);
  if (cfg.trace_sweep_x0) {
    RadiusSweepOptions sopt;
    sopt.radii = cfg.trace_sweep_radii;
    sopt.trace = cfg.trace;
    const Domain& d = cfg.problem.domain;
    const Domain& omega = d.has_container() ? d.container() : d;
    doc["radius_sweep"] = to_json(
        radius_sweep(rho, cfg.problem.coeffs, *cfg.trace_sweep_x0, omega, sopt));
  }
  write_json_atomic(cli_detail::join_path(cfg.out_dir, "trace.json"), doc);

  std::cout << "trace: mass_violations=" << tr.mass_violations
            << " converged=" << (tr.converged ? "yes" : "no") << "\n";
  if (!tr.converged) {
    std::cerr << "warning: boundary measures did not stabilize within the schedule\n";
    return 2;
  }
  return 0;
}

inline int cmd_study(const RunConfig& cfg) {
  if (!cfg.study)
    throw validation_error("study: the config has no study section");
  const StudySpec& spec = *cfg.study;
  if (spec.values.size() < 3)
    throw validation_error("study: need at least 3 sweep points to estimate an order");

  std::optional<ScalarField> reference;
  if (!cfg.reference.empty())
    reference = ScalarField::closed_form(cfg.reference);

  const double pp = [&] {
    const int dim = cfg.problem.domain.dim();
    const double p = cfg.problem.p > 0.0 ? cfg.problem.p : (dim == 2 ? 4.0 : 2.5);
    return p / (p - 1.0);
  }();

  std::vector<MeasureSolution> runs;
  std::vector<double> scales, errors;
  for (double v : spec.values) {
    MeasureSolveOptions opt = cli_detail::solve_options(cfg);
    if (spec.sweep == "h") {
      if (!(v > 0.0)) throw validation_error("study: h values must be positive");
      opt.mesh_h = v;
      scales.push_back(v);
    } else {
      const int n = static_cast<int>(v);
      if (static_cast<double>(n) != v || n < 1)
        throw validation_error("study: n values must be positive integers");
      opt.n_start = n;
      opt.n_max = n;
      opt.tol = 0.0;  // one fixed level per sweep point
      scales.push_back(1.0 / n);
    }
    runs.push_back(solve_measure(cfg.problem, opt));
    const SolutionField& rho = runs.back().rho;
    double err = 0.0;
    if (reference) {
      const auto& mesh = rho.mesh();
      err = rho.norm_of(
          [&](std::size_t k) {
            return rho.nodal()[k] - (*reference)(mesh.vertices[k]);
          },
          2.0);
    }
    errors.push_back(err);
  }

  const std::optional<double> order = cli_detail::fit_order(scales, errors);

  std::optional<ModulusReport> modulus;
  if (spec.ball_center) {
    std::vector<const SolutionField*> fields;
    for (const auto& r : runs) fields.push_back(&r.rho);
    modulus = modulus_check(fields, *spec.ball_center, spec.ball_radius);
  }

  std::ostringstream csv;
  csv << "sweep,value,error,increment,final_n,converged,harnack_ratio,sup_norm,"
         "envelope,order_fit\n";
  bool all_converged = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const MeasureSolution& run = runs[i];
    all_converged = all_converged && run.report.converged;
    csv << spec.sweep << ',' << g17(spec.values[i]) << ',';
    if (reference) csv << g17(errors[i]);
    csv << ',';
    if (spec.sweep == "n" && i > 0)
      csv << g17(diff_norm_Lq(run.rho, runs[i - 1].rho, pp));
    csv << ',' << run.report.final_n << ','
        << (run.report.converged ? "true" : "false") << ',';
    if (spec.ball_center) {
      double sup = -std::numeric_limits<double>::infinity();
      double inf = std::numeric_limits<double>::infinity();
      const Mesh& mesh = run.rho.mesh();
      for (std::size_t k = 0; k < mesh.vertices.size(); ++k)
        if ((mesh.vertices[k] - *spec.ball_center).norm() <= spec.ball_radius) {
          sup = std::max(sup, run.rho.nodal()[k]);
          inf = std::min(inf, run.rho.nodal()[k]);
        }
      if (inf > 0.0) csv << g17(sup / inf);
    }
    csv << ',' << g17(run.rho.norm_Lq(std::numeric_limits<double>::infinity()))
        << ',';
    if (modulus) csv << g17(modulus->curves[i].back());
    csv << ',';
    if (order) csv << g17(*order);
    csv << '\n';
  }
  write_text_atomic(cli_detail::join_path(cfg.out_dir, "study.csv"), csv.str());
  std::cout << "study: points=" << runs.size()
            << " order=" << (order ? g17(*order) : std::string("n/a")) << "\n";
  return all_converged ? 0 : 2;
}

}  // namespace ddf
