// Measures on the boundary of D: atoms plus a piecewise-linear density with
// respect to the surface measure sigma, their total variation, the kappa
// density, measure smoothing, and a bounded-Lipschitz style metric for weak
// convergence.
//
// Convention fixed here and used everywhere: in 1D the boundary is the two
// points {alpha, beta}, sigma is the counting measure on them, and the
// normals are -1 at alpha and +1 at beta. Measures then degenerate to two
// endpoint values plus optional endpoint atoms.
#pragma once

#include <algorithm>
#include <memory>
#include <vector>

#include "ddf/core.hpp"
#include "ddf/fields.hpp"
#include "ddf/geometry.hpp"
#include "ddf/mollify.hpp"

namespace ddf {

inline Vec2 boundary_point(const Domain& d, double s) {
  if (d.kind() == DomainKind::interval) return Vec2{s, 0.0};
  return d.center() + Vec2{std::cos(s), std::sin(s)} * d.radius();
}

inline Vec2 boundary_normal(const Domain& d, double s) {
  if (d.kind() == DomainKind::interval) {
    const double mid = 0.5 * (d.alpha() + d.beta());
    return Vec2{s < mid ? -1.0 : 1.0, 0.0};
  }
  return Vec2{std::cos(s), std::sin(s)};
}

struct Atom {
  double param = 0.0;  // angle in [0, 2*pi) on a circle; endpoint coordinate in 1D
  double weight = 0.0;
};

class BoundaryMeasure {
public:
  static BoundaryMeasure zero(const Domain& d, int nodes) {
    BoundaryMeasure mu;
    mu.domain_ = d;
    mu.grid_ = std::make_shared<const BoundaryGrid>(boundary_grid(d, nodes));
    mu.density_.assign(mu.grid_->size(), 0.0);
    return mu;
  }

  const Domain& domain() const { return domain_; }
  const BoundaryGrid& grid() const { return *grid_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<double>& density() const { return density_; }

  void add_atom(double param, double weight) {
    atoms_.push_back({normalize_param(param), weight});
  }

  void set_density(std::vector<double> values) {
    if (values.size() != grid_->size())
      throw validation_error("measure: density size must match the boundary grid");
    for (double v : values)
      if (!finite(v)) throw validation_error("measure: non-finite density value");
    density_ = std::move(values);
  }

  void set_density_constant(double c) {
    std::fill(density_.begin(), density_.end(), c);
  }

  template <class F>
  void set_density_from(F&& f) {  // f(param) -> value
    for (std::size_t k = 0; k < density_.size(); ++k)
      density_[k] = f(grid_->params[k]);
  }

  // Piecewise-linear density in the boundary parameter; periodic on circles.
  double density_at(double s) const {
    if (domain_.kind() == DomainKind::interval) {
      const double mid = 0.5 * (domain_.alpha() + domain_.beta());
      return s < mid ? density_.front() : density_.back();
    }
    const std::size_t m = density_.size();
    const double step = 2.0 * pi / static_cast<double>(m);
    double t = std::fmod(s, 2.0 * pi);
    if (t < 0.0) t += 2.0 * pi;
    const double u = t / step;
    std::size_t k = std::min(static_cast<std::size_t>(u), m - 1);
    const double f = u - static_cast<double>(k);
    return (1.0 - f) * density_[k] + f * density_[(k + 1) % m];
  }

  // Signed total mass: sum of atom weights plus the density integral.
  double total_mass() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.weight;
    for (std::size_t k = 0; k < density_.size(); ++k)
      s += grid_->weights[k] * density_[k];
    return s;
  }

  // Integral of a test function given as f(param) against the measure.
  template <class F>
  double integrate_param(F&& f) const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.weight * f(a.param);
    for (std::size_t k = 0; k < density_.size(); ++k)
      s += grid_->weights[k] * density_[k] * f(grid_->params[k]);
    return s;
  }

private:
  double normalize_param(double s) const {
    if (domain_.kind() == DomainKind::interval) {
      const double tol = 1e-9 * (domain_.beta() - domain_.alpha());
      if (std::abs(s - domain_.alpha()) <= tol) return domain_.alpha();
      if (std::abs(s - domain_.beta()) <= tol) return domain_.beta();
      throw validation_error("measure: interval atoms must sit at an endpoint");
    }
    double t = std::fmod(s, 2.0 * pi);
    if (t < 0.0) t += 2.0 * pi;
    return t;
  }

  Domain domain_ = Domain::interval(0.0, 1.0);
  std::shared_ptr<const BoundaryGrid> grid_;
  std::vector<Atom> atoms_;
  std::vector<double> density_;
};

struct KappaDensity {
  std::vector<double> values;  // at the boundary grid nodes
};

// kappa = <G nu, nu> / <A nu, nu> at each boundary node.
inline KappaDensity kappa(const MatrixField& A, const MatrixField& G,
                          const BoundaryGrid& grid) {
  KappaDensity k;
  k.values.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec2& nu = grid.normals[i];
    const double den = A(grid.nodes[i]).quad(nu);
    if (!(den > 0.0))
      throw numeric_error("kappa: <A nu, nu> not positive at a boundary node");
    const double val = G(grid.nodes[i]).quad(nu) / den;
    if (!finite(val)) throw numeric_error("kappa: non-finite value");
    k.values.push_back(val);
  }
  return k;
}

inline double total_variation(const BoundaryMeasure& mu) {
  double tv = 0.0;
  for (const Atom& a : mu.atoms()) tv += std::abs(a.weight);
  const auto& w = mu.grid().weights;
  for (std::size_t k = 0; k < mu.density().size(); ++k)
    tv += w[k] * std::abs(mu.density()[k]);
  return tv;
}

// Smooths a measure into a pure density: periodic convolution in the angular
// parameter, atoms becoming bumps of the same mass. In 1D the measure is
// already of the target form and atoms simply fold into endpoint values.
inline BoundaryMeasure mollify_measure(const BoundaryMeasure& mu, double eps,
                                       MollifierKind kind = MollifierKind::standard_bump) {
  if (!(eps > 0.0)) throw validation_error("mollify_measure: need eps > 0");
  const Domain& d = mu.domain();
  if (d.kind() == DomainKind::interval) {
    BoundaryMeasure out = BoundaryMeasure::zero(d, 2);
    std::vector<double> dens = mu.density();
    const double mid = 0.5 * (d.alpha() + d.beta());
    for (const Atom& a : mu.atoms()) dens[a.param < mid ? 0 : 1] += a.weight;
    out.set_density(std::move(dens));
    return out;
  }
  if (eps >= pi)
    throw validation_error("mollify_measure: kernel of width >= pi wraps around");

  // Output grid fine enough to resolve the kernel: spacing <= eps/4.
  const int m_in = static_cast<int>(mu.grid().size());
  const int m_out = std::max({m_in, 16, static_cast<int>(std::ceil(8.0 * pi / eps))});
  BoundaryMeasure out = BoundaryMeasure::zero(d, m_out);
  const double step = 2.0 * pi / m_out;
  const double R = d.radius();
  const Mollifier psi = make_mollifier(kind, eps, 1);

  auto wrap = [](double t) {
    t = std::fmod(t, 2.0 * pi);
    if (t > pi) t -= 2.0 * pi;
    if (t < -pi) t += 2.0 * pi;
    return t;
  };

  std::vector<double> dens(static_cast<std::size_t>(m_out), 0.0);

  // Density part: resample, then discrete circular convolution with taps
  // normalized to unit sum so the signed mass is conserved exactly.
  const int taps = static_cast<int>(std::floor(eps / step));
  std::vector<double> kernel(static_cast<std::size_t>(2 * taps + 1));
  double ksum = 0.0;
  for (int t = -taps; t <= taps; ++t) {
    const double v = psi.value_1d(t * step) * step;
    kernel[static_cast<std::size_t>(t + taps)] = v;
    ksum += v;
  }
  for (double& v : kernel) v /= ksum;
  std::vector<double> resampled(static_cast<std::size_t>(m_out));
  for (int k = 0; k < m_out; ++k) resampled[static_cast<std::size_t>(k)] = mu.density_at(k * step);
  for (int k = 0; k < m_out; ++k) {
    double s = 0.0;
    for (int t = -taps; t <= taps; ++t) {
      int j = (k - t) % m_out;
      if (j < 0) j += m_out;
      s += kernel[static_cast<std::size_t>(t + taps)] * resampled[static_cast<std::size_t>(j)];
    }
    dens[static_cast<std::size_t>(k)] = s;
  }

  // Atoms: bump densities of exactly the atom mass under the grid quadrature.
  for (const Atom& a : mu.atoms()) {
    std::vector<double> bump(static_cast<std::size_t>(m_out), 0.0);
    double mass = 0.0;
    for (int k = 0; k < m_out; ++k) {
      const double v = psi.value_1d(wrap(k * step - a.param));
      bump[static_cast<std::size_t>(k)] = v;
      mass += v * step;
    }
    if (!(mass > 0.0))
      throw numeric_error("mollify_measure: atom bump lost under quadrature");
    const double c = a.weight / (R * mass);
    for (int k = 0; k < m_out; ++k) dens[static_cast<std::size_t>(k)] += c * bump[static_cast<std::size_t>(k)];
  }

  out.set_density(std::move(dens));
  return out;
}

namespace measures_detail {

inline void require_same_boundary(const BoundaryMeasure& a, const BoundaryMeasure& b) {
  const Domain& da = a.domain();
  const Domain& db = b.domain();
  if (da.kind() != db.kind())
    throw validation_error("bl_distance: measures live on different boundaries");
  if (da.kind() == DomainKind::interval) {
    if (da.alpha() != db.alpha() || da.beta() != db.beta())
      throw validation_error("bl_distance: measures live on different intervals");
  } else {
    const double tol = 1e-12 * da.radius();
    if (std::abs(da.radius() - db.radius()) > tol ||
        (da.center() - db.center()).norm() > tol)
      throw validation_error("bl_distance: measures live on different circles");
  }
}

}  // namespace measures_detail

// Weak-convergence metric: sup over a fixed dictionary of Lipschitz-1,
// bound-1 test functions of the pairing gap. On circles the dictionary is
// Fourier modes up to order 32 rescaled to arclength Lipschitz constant 1;
// this is a documented lower bound of the true bounded-Lipschitz metric. On
// intervals the exact metric value is a small linear program solved at its
// vertices.
inline double bl_distance(const BoundaryMeasure& mu1, const BoundaryMeasure& mu2) {
  measures_detail::require_same_boundary(mu1, mu2);
  const Domain& d = mu1.domain();
  if (d.kind() == DomainKind::interval) {
    auto endpoint_mass = [&](const BoundaryMeasure& mu, int side) {
      const double mid = 0.5 * (d.alpha() + d.beta());
      double m = mu.density()[static_cast<std::size_t>(side)];
      for (const Atom& a : mu.atoms())
        if ((a.param < mid) == (side == 0)) m += a.weight;
      return m;
    };
    const double da = endpoint_mass(mu1, 0) - endpoint_mass(mu2, 0);
    const double db = endpoint_mass(mu1, 1) - endpoint_mass(mu2, 1);
    const double L = d.beta() - d.alpha();
    const double lo = std::max(-1.0, 1.0 - L);
    const double hi = std::min(1.0, -1.0 + L);
    const double cand[][2] = {{1.0, 1.0},  {-1.0, -1.0}, {1.0, lo},
                              {lo, 1.0},   {-1.0, hi},   {hi, -1.0}};
    double best = 0.0;
    for (const auto& uv : cand) best = std::max(best, da * uv[0] + db * uv[1]);
    return best;
  }
  const double R = d.radius();
  double best = 0.0;
  auto consider = [&](double order, bool use_sin) {
    const double scale = 1.0 / std::max(1.0, order / R);
    auto f = [&](double th) {
      return scale * (use_sin ? std::sin(order * th) : std::cos(order * th));
    };
    const double gap = mu1.integrate_param(f) - mu2.integrate_param(f);
    best = std::max(best, std::abs(gap));
  };
  consider(0.0, false);  // constants see the mass gap
  for (int k = 1; k <= 32; ++k) {
    consider(static_cast<double>(k), false);
    consider(static_cast<double>(k), true);
  }
  return best;
}

// Boundary pairing of the weak formulation: the integral over the boundary
// of <A grad_u, nu> against the measure. Atoms are summed exactly; the
// density part uses the measure's own quadrature grid.
template <class GradFn>
double pair_with_test(const BoundaryMeasure& mu, const MatrixField& A,
                      GradFn&& grad_u) {
  const Domain& d = mu.domain();
  double s = 0.0;
  for (const Atom& a : mu.atoms()) {
    const Vec2 x = boundary_point(d, a.param);
    const Vec2 nu = boundary_normal(d, a.param);
    s += a.weight * A(x).apply(grad_u(x)).dot(nu);
  }
  const BoundaryGrid& g = mu.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (mu.density()[k] == 0.0) continue;
    s += g.weights[k] * mu.density()[k] *
         A(g.nodes[k]).apply(grad_u(g.nodes[k])).dot(g.normals[k]);
  }
  return s;
}

}  // namespace ddf
