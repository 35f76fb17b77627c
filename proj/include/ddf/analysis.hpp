// Post-processing diagnostics over computed solutions: the empirical a
// priori envelope, interior Harnack ratios, and sampled oscillation moduli
// across smoothing levels. All constants here are observed, never asserted
// against theoretical values.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ddf/core.hpp"
#include "ddf/fem.hpp"
#include "ddf/fields.hpp"
#include "ddf/geometry.hpp"
#include "ddf/measures.hpp"
#include "ddf/solver.hpp"

namespace ddf {

struct AprioriEntry {
  std::string label;
  double rho_norm = 0.0;  // ||rho||_{L^{p'}}
  double tv_eta = 0.0;
  double h_l1 = 0.0;
  double g_lpp = 0.0;
  double data_norm = 0.0;  // sum of the three data norms
  double ratio = 0.0;      // rho_norm / data_norm when defined
  bool ratio_defined = false;
  bool uniqueness_ok = true;  // zero data came with (numerically) zero solution
};

struct AprioriReport {
  std::vector<AprioriEntry> entries;
  double envelope = 0.0;  // max defined ratio across the family
  double p = 0.0;
  double p_prime = 0.0;
};

struct AprioriInput {
  std::string label;
  const DirichletProblem* problem = nullptr;
  const SolutionField* rho = nullptr;
};

// Empirical stability envelope: the solution norm against the total data
// norm TV(eta) + ||h||_{L^1} + ||G||_{L^{p'}} per family member. Problems
// must share the domain and exponent; zero-data members are the uniqueness
// check and must come with solutions below zero_tol.
inline AprioriReport apriori_check(const std::vector<AprioriInput>& family,
                                   double zero_tol = 1e-8) {
  if (family.empty()) throw validation_error("apriori_check: empty family");
  AprioriReport rep;
  const Domain& d0 = family.front().problem->domain;
  const int dim = d0.dim();
  rep.p = family.front().problem->p > 0.0 ? family.front().problem->p
                                          : (dim == 2 ? 4.0 : 2.5);
  rep.p_prime = rep.p / (rep.p - 1.0);
  for (const AprioriInput& in : family) {
    if (!in.problem || !in.rho) throw validation_error("apriori_check: null input");
    if (!solver_detail::same_domain(in.problem->domain, d0))
      throw validation_error("apriori_check: family members must share the domain");
    const double p_in = in.problem->p > 0.0 ? in.problem->p : (dim == 2 ? 4.0 : 2.5);
    if (p_in != rep.p)
      throw validation_error("apriori_check: family members must share the exponent");
    const CoefficientSet& cs = in.problem->coeffs;
    const double hq = d0.diameter() / 64.0;
    AprioriEntry e;
    e.label = in.label;
    e.rho_norm = in.rho->norm_Lq(rep.p_prime);
    e.tv_eta = total_variation(in.problem->eta);
    e.h_l1 = fields_detail::integrate(d0, hq,
                                      [&](const Vec2& x) { return cs.h(x).norm(); });
    e.g_lpp = std::pow(
        fields_detail::integrate(d0, hq,
                                 [&](const Vec2& x) {
                                   return std::pow(max_entry_norm(cs.G(x), dim),
                                                   rep.p_prime);
                                 }),
        1.0 / rep.p_prime);
    e.data_norm = e.tv_eta + e.h_l1 + e.g_lpp;
    e.ratio_defined = e.data_norm > 1e-14;
    if (e.ratio_defined) {
      e.ratio = e.rho_norm / e.data_norm;
      rep.envelope = std::max(rep.envelope, e.ratio);
    } else {
      e.uniqueness_ok = e.rho_norm <= zero_tol;
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

struct HarnackObservation {
  double mesh_h = 0.0;
  int final_n = 0;
  double sup = 0.0;
  double inf = 0.0;
  double ratio = 0.0;
  bool ratio_defined = false;
  Vec2 argmax;      // position of the node attaining the sup
  int ball_nodes = 0;
};

struct HarnackReport {
  Vec2 x0;
  double R = 0.0;
  std::vector<HarnackObservation> observations;
  bool positive = true;        // every observation had inf > 0
  double ratio_spread = 0.0;   // max relative deviation from the first ratio
};

// Interior sup/inf ratio of the solution over mesh nodes in B(x0, R) for
// source-free problems (G = h = 0) with nonnegative boundary mass, observed
// across the supplied solver settings (refinement and smoothing levels).
inline HarnackReport harnack_check(const DirichletProblem& problem, const Vec2& x0,
                                   double R,
                                   const std::vector<MeasureSolveOptions>& settings) {
  const Domain& d = problem.domain;
  const int dim = d.dim();
  if (settings.empty()) throw validation_error("harnack_check: no solver settings");
  if (!(R > 0.0)) throw validation_error("harnack_check: need R > 0");
  const double dist_c = dim == 2 ? (x0 - d.center()).norm() + 4.0 * R
                                 : std::max(d.alpha() - (x0.x - 4.0 * R),
                                            (x0.x + 4.0 * R) - d.beta());
  if (dim == 2 ? dist_c > d.radius() : dist_c > 0.0)
    throw validation_error("harnack_check: need the 4R ball inside the domain");
  {
    SplitMix rng(0x5eedull);
    for (int s = 0; s < 200; ++s) {
      const Vec2 x = sample_point(d, rng);
      if (max_entry_norm(problem.coeffs.G(x), dim) > 1e-12 ||
          problem.coeffs.h(x).norm() > 1e-12)
        throw validation_error("harnack_check: needs a source-free problem (G = h = 0)");
    }
    for (const Atom& a : problem.eta.atoms())
      if (a.weight < 0.0)
        throw validation_error("harnack_check: boundary mass must be nonnegative");
    for (double v : problem.eta.density())
      if (v < 0.0)
        throw validation_error("harnack_check: boundary mass must be nonnegative");
    if (total_variation(problem.eta) <= 0.0)
      throw validation_error("harnack_check: boundary mass must not vanish");
  }

  HarnackReport rep;
  rep.x0 = x0;
  rep.R = R;
  for (const MeasureSolveOptions& opt : settings) {
    const MeasureSolution ms = solve_measure(problem, opt);
    HarnackObservation obs;
    obs.mesh_h = opt.mesh_h;
    obs.final_n = ms.report.final_n;
    obs.sup = -std::numeric_limits<double>::infinity();
    obs.inf = std::numeric_limits<double>::infinity();
    const Mesh& mesh = ms.rho.mesh();
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      const Vec2& x = mesh.vertices[v];
      if ((x - x0).norm() > R) continue;
      ++obs.ball_nodes;
      const double val = ms.rho.nodal()[v];
      if (val > obs.sup) {
        obs.sup = val;
        obs.argmax = x;
      }
      obs.inf = std::min(obs.inf, val);
    }
    if (obs.ball_nodes == 0)
      throw validation_error("harnack_check: no mesh nodes inside the ball; refine");
    obs.ratio_defined = obs.inf > 0.0;
    if (obs.ratio_defined)
      obs.ratio = obs.sup / obs.inf;
    else
      rep.positive = false;
    rep.observations.push_back(obs);
  }
  const double base = rep.observations.front().ratio;
  for (const HarnackObservation& obs : rep.observations)
    if (obs.ratio_defined && base > 0.0)
      rep.ratio_spread =
          std::max(rep.ratio_spread, std::abs(obs.ratio - base) / base);
  return rep;
}

struct ModulusReport {
  std::vector<double> r_edges;               // right edges of the distance bins
  std::vector<std::vector<double>> curves;   // per level: running-max oscillation
  std::vector<double> envelope;              // max over levels (nondecreasing)
  std::vector<double> sup_norms;             // per level sup |rho| on the ball
  double collapse_spread = 0.0;  // max relative gap between level curves
  bool sup_bounded = true;
};

// Sampled oscillation of the level solutions over random point pairs in
// B(x0, R), binned by pair distance. The same pair sample is reused for every
// level so the curves are directly comparable.
inline ModulusReport modulus_check(const std::vector<const SolutionField*>& levels,
                                   const Vec2& x0, double R, int bins = 24,
                                   int pairs = 4000,
                                   std::uint64_t seed = 0x0ddfeedull) {
  if (levels.empty()) throw validation_error("modulus_check: no levels");
  if (bins < 4 || pairs < 100)
    throw validation_error("modulus_check: need bins >= 4 and pairs >= 100");
  const Domain& d = levels.front()->domain();
  const int dim = d.dim();
  for (const SolutionField* f : levels)
    if (!f || !solver_detail::same_domain(f->domain(), d))
      throw validation_error("modulus_check: levels must share the domain");
  if (dim == 2) {
    if ((x0 - d.center()).norm() + R >= d.radius())
      throw validation_error("modulus_check: ball must sit inside the domain");
  } else {
    if (x0.x - R <= d.alpha() || x0.x + R >= d.beta())
      throw validation_error("modulus_check: ball must sit inside the domain");
  }

  SplitMix rng(seed);
  auto sample_ball = [&]() {
    if (dim == 1) return Vec2{x0.x + R * rng.uniform(-1.0, 1.0), 0.0};
    const double r = R * std::sqrt(rng.uniform());
    const double th = rng.uniform(0.0, 2.0 * pi);
    return x0 + Vec2{r * std::cos(th), r * std::sin(th)};
  };
  std::vector<std::pair<Vec2, Vec2>> sample;
  sample.reserve(static_cast<std::size_t>(pairs));
  for (int i = 0; i < pairs; ++i) sample.emplace_back(sample_ball(), sample_ball());

  ModulusReport rep;
  const double rmax = 2.0 * R;
  rep.r_edges.resize(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b)
    rep.r_edges[static_cast<std::size_t>(b)] = rmax * (b + 1) / bins;

  for (const SolutionField* f : levels) {
    std::vector<double> curve(static_cast<std::size_t>(bins), 0.0);
    for (const auto& [x, y] : sample) {
      const double dist = (x - y).norm();
      int b = static_cast<int>(dist / rmax * bins);
      b = std::min(bins - 1, std::max(0, b));
      const double osc = std::abs((*f)(x) - (*f)(y));
      curve[static_cast<std::size_t>(b)] =
          std::max(curve[static_cast<std::size_t>(b)], osc);
    }
    for (int b = 1; b < bins; ++b)
      curve[static_cast<std::size_t>(b)] = std::max(
          curve[static_cast<std::size_t>(b)], curve[static_cast<std::size_t>(b - 1)]);
    double sup = 0.0;
    const Mesh& mesh = f->mesh();
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
      if ((mesh.vertices[v] - x0).norm() <= R)
        sup = std::max(sup, std::abs(f->nodal()[v]));
    if (!std::isfinite(sup)) rep.sup_bounded = false;
    rep.sup_norms.push_back(sup);
    rep.curves.push_back(std::move(curve));
  }

  rep.envelope.assign(static_cast<std::size_t>(bins), 0.0);
  for (const auto& curve : rep.curves)
    for (int b = 0; b < bins; ++b)
      rep.envelope[static_cast<std::size_t>(b)] =
          std::max(rep.envelope[static_cast<std::size_t>(b)], curve[static_cast<std::size_t>(b)]);
  for (int b = 0; b < bins; ++b) {
    const double env = rep.envelope[static_cast<std::size_t>(b)];
    if (env <= 0.0) continue;
    double lo = env;
    for (const auto& curve : rep.curves)
      lo = std::min(lo, curve[static_cast<std::size_t>(b)]);
    rep.collapse_spread = std::max(rep.collapse_spread, (env - lo) / env);
  }
  return rep;
}

}  // namespace ddf
