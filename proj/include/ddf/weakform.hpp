// Weak formulation checks. A test bank supplies C^2 functions vanishing on
// the boundary; pairing a candidate solution against the bank measures how
// well the integration-by-parts identity
//   int L_{A,b}u rho dx = int L_{G,h}u dx + int <A grad u, nu> d(eta)
// holds, which is the defining property of a solution with boundary data.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ddf/core.hpp"
#include "ddf/expr.hpp"
#include "ddf/fields.hpp"
#include "ddf/geometry.hpp"
#include "ddf/measures.hpp"
#include "ddf/quadrature.hpp"

namespace ddf {

// Closed ball outside of which a test function is identically zero.
struct Support {
  Vec2 center;
  double radius = 0.0;
};

// Test function with symbolically differentiated first and second
// derivatives. Functions carrying a Support are clipped to zero outside it;
// the bank only builds clipped functions whose value, gradient and Hessian
// all vanish on the support sphere, so the clipped function stays C^2.
class TestFunction {
 public:
  TestFunction(std::string name, int dim, Expr u, bool normal_derivative_one,
               std::optional<Support> support = std::nullopt)
      : name_(std::move(name)),
        dim_(dim),
        normal_derivative_one_(normal_derivative_one),
        support_(support),
        u_(u),
        d1_(u.diff(0)),
        d2_(dim > 1 ? u.diff(1) : Expr::constant(0.0)),
        d11_(d1_.diff(0)),
        d12_(dim > 1 ? d1_.diff(1) : Expr::constant(0.0)),
        d22_(dim > 1 ? d2_.diff(1) : Expr::constant(0.0)) {
    if (dim != 1 && dim != 2) throw validation_error("TestFunction: dim must be 1 or 2");
  }

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  bool normal_derivative_one() const { return normal_derivative_one_; }
  const std::optional<Support>& support() const { return support_; }
  const Expr& expr() const { return u_; }

  bool inside_support(const Vec2& x) const {
    if (!support_) return true;
    return (x - support_->center).norm_sq() <= support_->radius * support_->radius;
  }

  double value(const Vec2& x) const {
    if (!inside_support(x)) return 0.0;
    return u_(x);
  }
  Vec2 grad(const Vec2& x) const {
    if (!inside_support(x)) return Vec2{0.0, 0.0};
    return Vec2{d1_(x), dim_ > 1 ? d2_(x) : 0.0};
  }
  SymMat2 hess(const Vec2& x) const {
    if (!inside_support(x)) return SymMat2{0.0, 0.0, 0.0};
    if (dim_ == 1) return SymMat2{d11_(x), 0.0, 0.0};
    return SymMat2{d11_(x), d12_(x), d22_(x)};
  }

 private:
  std::string name_;
  int dim_;
  bool normal_derivative_one_;
  std::optional<Support> support_;
  Expr u_, d1_, d2_, d11_, d12_, d22_;
};

// L_{S,T}u = trace(S D^2 u) + <T, grad u> evaluated at x.
inline double operator_L(const SymMat2& S, const Vec2& T, const TestFunction& u,
                         const Vec2& x) {
  const SymMat2 H = u.hess(x);
  const Vec2 g = u.grad(x);
  if (u.dim() == 1) return S.a11 * H.a11 + T.x * g.x;
  return S.a11 * H.a11 + 2.0 * S.a12 * H.a12 + S.a22 * H.a22 + T.x * g.x + T.y * g.y;
}

namespace weak_detail {

inline Expr ipow(const Expr& base, int k) {
  Expr out = Expr::constant(1.0);
  for (int i = 0; i < k; ++i) out = out * base;
  return out;
}

inline std::string mono_name(int i, int j, int dim) {
  if (dim == 1) return "x" + std::to_string(i);
  return "x" + std::to_string(i) + "y" + std::to_string(j);
}

}  // namespace weak_detail

// Bank of boundary-vanishing test functions on D.
//
// Disk: (1 - |xh|^2) * xh^i yh^j for i + j <= degree in centered/scaled
// coordinates xh = (x - c)/R, plus the distinguished paraboloid
// phi = (|x - c|^2 - R^2)/(2R) whose outward normal derivative is 1
// everywhere on the boundary (flagged normal_derivative_one).
//
// Interval: (x - alpha)(beta - x) * xh^i for i <= degree with
// xh = (2x - alpha - beta)/(beta - alpha), plus two one-sided cubics
// whose normal derivative is 1 at one endpoint and 0 at the other.
inline std::vector<TestFunction> test_bank(const Domain& d, int degree) {
  if (degree < 0 || degree > 6) throw validation_error("test_bank: need 0 <= degree <= 6");
  std::vector<TestFunction> bank;
  if (d.kind() == DomainKind::interval) {
    const double a = d.alpha(), b = d.beta(), L = b - a;
    const Expr x = Expr::var(0);
    const Expr xh = (x * Expr::constant(2.0) - Expr::constant(a + b)) / Expr::constant(L);
    const Expr bubble = (x - Expr::constant(a)) * (Expr::constant(b) - x);
    for (int i = 0; i <= degree; ++i)
      bank.emplace_back("b_" + weak_detail::mono_name(i, 0, 1), 1,
                        bubble * weak_detail::ipow(xh, i), false);
    const Expr phi_a = Expr::constant(-1.0 / (L * L)) * (x - Expr::constant(a)) *
                       weak_detail::ipow(x - Expr::constant(b), 2);
    const Expr phi_b = Expr::constant(1.0 / (L * L)) * (x - Expr::constant(b)) *
                       weak_detail::ipow(x - Expr::constant(a), 2);
    bank.emplace_back("phi_alpha", 1, phi_a, false);
    bank.emplace_back("phi_beta", 1, phi_b, false);
    return bank;
  }
  const Vec2 c = d.center();
  const double R = d.radius();
  const Expr xh = (Expr::var(0) - Expr::constant(c.x)) / Expr::constant(R);
  const Expr yh = (Expr::var(1) - Expr::constant(c.y)) / Expr::constant(R);
  const Expr bubble = Expr::constant(1.0) - (xh * xh + yh * yh);
  for (int total = 0; total <= degree; ++total)
    for (int i = total; i >= 0; --i) {
      const int j = total - i;
      bank.emplace_back(
          "b_" + weak_detail::mono_name(i, j, 2), 2,
          bubble * weak_detail::ipow(xh, i) * weak_detail::ipow(yh, j), false);
    }
  const Expr phi =
      ((xh * xh + yh * yh) - Expr::constant(1.0)) * Expr::constant(R / 2.0);
  bank.emplace_back("phi", 2, phi, true);
  return bank;
}

// Bank of compactly supported interior test functions: a cubed bubble on the
// concentric ball of radius 0.9 R (0.9 half-length in 1d) times monomials.
// The cube makes value, gradient and Hessian vanish on the support sphere.
inline std::vector<TestFunction> interior_bank(const Domain& d, int degree) {
  if (degree < 0 || degree > 6)
    throw validation_error("interior_bank: need 0 <= degree <= 6");
  std::vector<TestFunction> bank;
  if (d.kind() == DomainKind::interval) {
    const double m = 0.5 * (d.alpha() + d.beta());
    const double s = 0.45 * (d.beta() - d.alpha());
    const Expr xt = (Expr::var(0) - Expr::constant(m)) / Expr::constant(s);
    const Expr cube = weak_detail::ipow(Expr::constant(1.0) - xt * xt, 3);
    const Support sup{{m, 0.0}, s};
    for (int i = 0; i <= degree; ++i)
      bank.emplace_back("i_" + weak_detail::mono_name(i, 0, 1), 1,
                        cube * weak_detail::ipow(xt, i), false, sup);
    return bank;
  }
  const Vec2 c = d.center();
  const double Rs = 0.9 * d.radius();
  const Expr xt = (Expr::var(0) - Expr::constant(c.x)) / Expr::constant(Rs);
  const Expr yt = (Expr::var(1) - Expr::constant(c.y)) / Expr::constant(Rs);
  const Expr cube = weak_detail::ipow(Expr::constant(1.0) - (xt * xt + yt * yt), 3);
  const Support sup{c, Rs};
  for (int total = 0; total <= degree; ++total)
    for (int i = total; i >= 0; --i) {
      const int j = total - i;
      bank.emplace_back("i_" + weak_detail::mono_name(i, j, 2), 2,
                        cube * weak_detail::ipow(xt, i) * weak_detail::ipow(yt, j),
                        false, sup);
    }
  return bank;
}

struct ResidualEntry {
  std::string name;
  double lhs = 0.0;       // int L_{A,b}u rho dx
  double rhs = 0.0;       // int L_{G,h}u dx
  double boundary = 0.0;  // int <A grad u, nu> d(eta)
  double residual = 0.0;  // lhs - rhs - boundary
  double scale = 0.0;     // sum of absolute-value counterparts
  double relative = 0.0;
};

struct ResidualReport {
  std::vector<ResidualEntry> entries;
  double max_relative = 0.0;
  double median_relative = 0.0;
};

namespace weak_detail {

// Signed and absolute boundary pairings against eta in one pass.
template <class GradFn>
std::pair<double, double> boundary_pairing(const BoundaryMeasure& mu,
                                           const MatrixField& A, GradFn&& grad_u) {
  const Domain& d = mu.domain();
  double signed_total = 0.0, abs_total = 0.0;
  for (const Atom& a : mu.atoms()) {
    const Vec2 x = boundary_point(d, a.param);
    const Vec2 nu = boundary_normal(d, a.param);
    const double t = A(x).apply(grad_u(x)).dot(nu);
    signed_total += a.weight * t;
    abs_total += std::abs(a.weight * t);
  }
  const BoundaryGrid& g = mu.grid();
  const auto& dens = mu.density();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (dens[k] == 0.0) continue;
    const double t = A(g.nodes[k]).apply(grad_u(g.nodes[k])).dot(g.normals[k]);
    signed_total += g.weights[k] * dens[k] * t;
    abs_total += std::abs(g.weights[k] * dens[k] * t);
  }
  return {signed_total, abs_total};
}

inline void finish_report(ResidualReport& rep) {
  std::vector<double> rel;
  rel.reserve(rep.entries.size());
  for (const auto& e : rep.entries) rel.push_back(e.relative);
  if (rel.empty()) return;
  std::sort(rel.begin(), rel.end());
  rep.max_relative = rel.back();
  const std::size_t n = rel.size();
  rep.median_relative =
      (n % 2 == 1) ? rel[n / 2] : 0.5 * (rel[n / 2 - 1] + rel[n / 2]);
}

}  // namespace weak_detail

// Volume quadrature nodes reused across the bank. Full-domain functions use
// a mesh-based midpoint rule (edge midpoints of each cell); functions with a
// support ball instead use a polar rule aligned with the support so that the
// integrand is smooth on each quadrature cell.
class ResidualQuadrature {
 public:
  ResidualQuadrature(const Domain& d, double quad_h) : domain_(d) {
    if (!(quad_h > 0.0)) throw validation_error("ResidualQuadrature: need quad_h > 0");
    quad_h_ = quad_h;
    if (d.kind() == DomainKind::interval) {
      const int cells = std::max(1, static_cast<int>(std::ceil((d.beta() - d.alpha()) / quad_h)));
      const auto gl = gauss_legendre(4);
      const double h = (d.beta() - d.alpha()) / cells;
      for (int c = 0; c < cells; ++c) {
        const double mid = d.alpha() + (c + 0.5) * h;
        for (const auto& q : gl) nodes_.push_back({{mid + 0.5 * h * q.x, 0.0}, 0.5 * h * q.w});
      }
      return;
    }
    const Mesh mesh = triangulate_disk(d, quad_h);
    for (const auto& t : mesh.tris) {
      const Vec2 p0 = mesh.vertices[static_cast<std::size_t>(t[0])];
      const Vec2 p1 = mesh.vertices[static_cast<std::size_t>(t[1])];
      const Vec2 p2 = mesh.vertices[static_cast<std::size_t>(t[2])];
      const double w = tri_area(p0, p1, p2) / 3.0;
      nodes_.push_back({(p0 + p1) * 0.5, w});
      nodes_.push_back({(p1 + p2) * 0.5, w});
      nodes_.push_back({(p2 + p0) * 0.5, w});
    }
  }

  const std::vector<QuadNode2D>& nodes_for(const TestFunction& u) const {
    if (!u.support() || domain_.kind() == DomainKind::interval) return nodes_;
    const auto key = u.support()->radius;
    auto it = support_cache_.find(key);
    if (it == support_cache_.end()) {
      const int nr = std::max(12, static_cast<int>(std::ceil(2.0 * key / quad_h_)));
      const int nth = std::max(48, static_cast<int>(std::ceil(4.0 * pi * key / quad_h_)));
      it = support_cache_
               .emplace(key, polar_disk_rule(u.support()->center, key,
                                             std::min(nr, 64), nth))
               .first;
    }
    return it->second;
  }

 private:
  Domain domain_ = Domain::interval(0.0, 1.0);
  double quad_h_ = 0.0;
  std::vector<QuadNode2D> nodes_;
  mutable std::map<double, std::vector<QuadNode2D>> support_cache_;
};

namespace weak_detail {

// One report entry: both volume integrals over the same nodes (so quadrature
// error cancels when rho is exact) plus an optional boundary pairing.
template <class Rho>
ResidualEntry entry_for(Rho&& rho, const CoefficientSet& cs, const TestFunction& u,
                        const std::vector<QuadNode2D>& nodes, double bnd,
                        double abs_bnd) {
  ResidualEntry e;
  e.name = u.name();
  double abs_lhs = 0.0, abs_rhs = 0.0;
  for (const auto& q : nodes) {
    const double la = operator_L(cs.A(q.x), cs.b(q.x), u, q.x) * rho(q.x);
    const double lg = operator_L(cs.G(q.x), cs.h(q.x), u, q.x);
    e.lhs += q.w * la;
    e.rhs += q.w * lg;
    abs_lhs += q.w * std::abs(la);
    abs_rhs += q.w * std::abs(lg);
  }
  e.boundary = bnd;
  e.residual = e.lhs - e.rhs - e.boundary;
  e.scale = abs_lhs + abs_rhs + abs_bnd;
  e.relative = e.scale > 0.0 ? std::abs(e.residual) / e.scale : 0.0;
  return e;
}

}  // namespace weak_detail

// Evaluates the Dirichlet identity for every bank member. rho is any
// callable Vec2 -> double defined on the closed domain.
template <class Rho>
ResidualReport dirichlet_residual(Rho&& rho, const CoefficientSet& cs,
                                  const BoundaryMeasure& eta,
                                  const std::vector<TestFunction>& bank,
                                  double quad_h) {
  const Domain& d = eta.domain();
  if (d.dim() != cs.dim)
    throw validation_error("dirichlet_residual: coefficient/domain dimension mismatch");
  const ResidualQuadrature quad(d, quad_h);
  ResidualReport rep;
  for (const TestFunction& u : bank) {
    if (u.dim() != cs.dim)
      throw validation_error("dirichlet_residual: bank dimension mismatch");
    const auto [bnd, abs_bnd] = weak_detail::boundary_pairing(
        eta, cs.A, [&u](const Vec2& x) { return u.grad(x); });
    rep.entries.push_back(
        weak_detail::entry_for(rho, cs, u, quad.nodes_for(u), bnd, abs_bnd));
  }
  weak_detail::finish_report(rep);
  return rep;
}

// Interior form of the identity: no boundary term, so only compactly
// supported bank members are admitted.
template <class Rho>
ResidualReport interior_residual(Rho&& rho, const CoefficientSet& cs,
                                 const Domain& d,
                                 const std::vector<TestFunction>& bank,
                                 double quad_h) {
  if (d.dim() != cs.dim)
    throw validation_error("interior_residual: coefficient/domain dimension mismatch");
  const ResidualQuadrature quad(d, quad_h);
  ResidualReport rep;
  for (const TestFunction& u : bank) {
    if (u.dim() != cs.dim)
      throw validation_error("interior_residual: bank dimension mismatch");
    if (!u.support())
      throw validation_error(
          "interior_residual: needs compactly supported test functions");
    rep.entries.push_back(
        weak_detail::entry_for(rho, cs, u, quad.nodes_for(u), 0.0, 0.0));
  }
  weak_detail::finish_report(rep);
  return rep;
}

}  // namespace ddf
