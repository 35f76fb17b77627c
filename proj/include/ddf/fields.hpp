// Coefficient fields A, b, G, h with ellipticity/integrability certificates
// and a manufactured-solution generator.
//
// A field is either closed-form (expression tree over x1, x2) or sampled on a
// uniform tensor grid with piecewise-linear interpolation. Symmetric matrix
// fields store the upper triangle only, so evaluations are symmetric
// bit-exactly by construction.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ddf/core.hpp"
#include "ddf/expr.hpp"
#include "ddf/geometry.hpp"

namespace ddf {

// Uniform tensor grid over [x0, x0+(nx-1)*dx] x [y0, y0+(ny-1)*dy] with
// bilinear interpolation (linear in 1D, where ny == 1). Queries are clamped
// to the grid box; callers keep evaluation inside the covered region.
struct TensorGrid {
  int dim = 2;
  double x0 = 0.0, y0 = 0.0;
  double dx = 1.0, dy = 1.0;
  int nx = 0, ny = 1;
  std::vector<double> v;  // v[j*nx + i]

  static TensorGrid make(int dim, double x0, double y0, double dx, double dy,
                         int nx, int ny) {
    if (nx < 2 || (dim == 2 && ny < 2) || (dim == 1 && ny != 1))
      throw validation_error("tensor_grid: bad node counts");
    if (!(dx > 0.0) || (dim == 2 && !(dy > 0.0)))
      throw validation_error("tensor_grid: spacings must be positive");
    TensorGrid g;
    g.dim = dim;
    g.x0 = x0;
    g.y0 = y0;
    g.dx = dx;
    g.dy = (dim == 2) ? dy : 1.0;
    g.nx = nx;
    g.ny = (dim == 2) ? ny : 1;
    g.v.assign(static_cast<std::size_t>(g.nx) * g.ny, 0.0);
    return g;
  }

  double& at(int i, int j) { return v[static_cast<std::size_t>(j) * nx + i]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(j) * nx + i]; }

  double eval(const Vec2& p) const {
    double tx = (p.x - x0) / dx;
    tx = std::min(std::max(tx, 0.0), static_cast<double>(nx - 1));
    int i = std::min(static_cast<int>(tx), nx - 2);
    const double fx = tx - i;
    if (dim == 1) return (1.0 - fx) * at(i, 0) + fx * at(i + 1, 0);
    double ty = (p.y - y0) / dy;
    ty = std::min(std::max(ty, 0.0), static_cast<double>(ny - 1));
    int j = std::min(static_cast<int>(ty), ny - 2);
    const double fy = ty - j;
    return (1.0 - fx) * (1.0 - fy) * at(i, j) + fx * (1.0 - fy) * at(i + 1, j) +
           (1.0 - fx) * fy * at(i, j + 1) + fx * fy * at(i + 1, j + 1);
  }
};

// Scalar field: closed form, or grid samples with optional gradient grids
// attached (the smoothing pipeline supplies kernel-differentiated gradients).
class ScalarField {
public:
  ScalarField() : ScalarField(Expr::constant(0.0)) {}

  static ScalarField closed_form(Expr e) {
    ScalarField f;
    f.expr_ = std::move(e);
    return f;
  }
  static ScalarField closed_form(std::string_view src) {
    return closed_form(Expr::parse(src));
  }
  static ScalarField constant(double c) { return closed_form(Expr::constant(c)); }

  static ScalarField sampled(TensorGrid values,
                             std::optional<TensorGrid> grad1 = std::nullopt,
                             std::optional<TensorGrid> grad2 = std::nullopt) {
    ScalarField f;
    f.expr_.reset();
    f.grid_ = std::make_shared<const TensorGrid>(std::move(values));
    if (grad1) f.grad1_ = std::make_shared<const TensorGrid>(std::move(*grad1));
    if (grad2) f.grad2_ = std::make_shared<const TensorGrid>(std::move(*grad2));
    return f;
  }

  // Opaque pointwise evaluator; carries no derivative access.
  static ScalarField callable(std::function<double(const Vec2&)> fn) {
    if (!fn) throw validation_error("field: null callable");
    ScalarField f;
    f.expr_.reset();
    f.fn_ = std::move(fn);
    return f;
  }

  bool is_closed_form() const { return expr_.has_value(); }

  const Expr& expr() const {
    if (!expr_) throw validation_error("field: not closed-form");
    return *expr_;
  }

  double operator()(const Vec2& x) const {
    const double val = expr_ ? (*expr_)(x) : (fn_ ? fn_(x) : grid_->eval(x));
    if (!finite(val))
      throw numeric_error("field: non-finite evaluation at (" +
                          std::to_string(x.x) + ", " + std::to_string(x.y) + ")");
    return val;
  }

  bool has_derivative() const {
    return expr_.has_value() || static_cast<bool>(grad1_);
  }

  // Grid access for serialization; null for non-sampled backends.
  const TensorGrid* sample_grid() const { return grid_.get(); }
  const TensorGrid* gradient_grid(int var) const {
    return (var == 0 ? grad1_ : grad2_).get();
  }

  // Partial derivative as a field: symbolic for closed forms, the attached
  // gradient grid for sampled fields.
  ScalarField derivative(int var) const {
    if (expr_) return closed_form(expr_->diff(var));
    const auto& g = (var == 0) ? grad1_ : grad2_;
    if (!g)
      throw validation_error("field: sampled field carries no gradient grid");
    ScalarField f;
    f.expr_.reset();
    f.grid_ = g;
    return f;
  }

private:
  explicit ScalarField(Expr e) : expr_(std::move(e)) {}
  std::optional<Expr> expr_;
  std::function<double(const Vec2&)> fn_;
  std::shared_ptr<const TensorGrid> grid_;
  std::shared_ptr<const TensorGrid> grad1_, grad2_;
};

class VectorField {
public:
  VectorField() : c_{ScalarField::constant(0.0), ScalarField::constant(0.0)} {}
  VectorField(ScalarField c1, ScalarField c2) : c_{std::move(c1), std::move(c2)} {}

  static VectorField zero() { return VectorField(); }
  static VectorField closed_form(std::string_view e1, std::string_view e2) {
    return VectorField(ScalarField::closed_form(e1), ScalarField::closed_form(e2));
  }

  Vec2 operator()(const Vec2& x) const { return Vec2{c_[0](x), c_[1](x)}; }
  const ScalarField& component(int i) const { return c_[i]; }

private:
  ScalarField c_[2];
};

// Symmetric matrix field; upper triangle a11, a12, a22. In 1D only a11 is
// meaningful and the rest evaluate to the identity block (a12=0, a22=1) so
// SymMat2 algebra stays well posed.
class MatrixField {
public:
  MatrixField()
      : a11_(ScalarField::constant(1.0)),
        a12_(ScalarField::constant(0.0)),
        a22_(ScalarField::constant(1.0)) {}

  static MatrixField identity() { return MatrixField(); }

  static MatrixField isotropic(ScalarField s) {
    MatrixField m;
    m.a11_ = s;
    m.a12_ = ScalarField::constant(0.0);
    m.a22_ = std::move(s);
    return m;
  }

  static MatrixField closed_form(std::string_view e11, std::string_view e12,
                                 std::string_view e22) {
    MatrixField m;
    m.a11_ = ScalarField::closed_form(e11);
    m.a12_ = ScalarField::closed_form(e12);
    m.a22_ = ScalarField::closed_form(e22);
    return m;
  }

  static MatrixField from_entries(ScalarField e11, ScalarField e12,
                                  ScalarField e22) {
    MatrixField m;
    m.a11_ = std::move(e11);
    m.a12_ = std::move(e12);
    m.a22_ = std::move(e22);
    return m;
  }

  static MatrixField scalar_1d(ScalarField s) {
    MatrixField m;
    m.a11_ = std::move(s);
    m.a12_ = ScalarField::constant(0.0);
    m.a22_ = ScalarField::constant(1.0);
    return m;
  }

  SymMat2 operator()(const Vec2& x) const {
    return SymMat2{a11_(x), a12_(x), a22_(x)};
  }

  const ScalarField& entry(int i, int j) const {
    if (i == 0 && j == 0) return a11_;
    if (i == 1 && j == 1) return a22_;
    return a12_;
  }

private:
  ScalarField a11_, a12_, a22_;
};

struct CoefficientSet {
  int dim = 2;
  MatrixField A;
  VectorField b;
  MatrixField G;
  VectorField h;

  static CoefficientSet laplace(int dim) {
    CoefficientSet c;
    c.dim = dim;
    c.A = MatrixField::identity();
    c.b = VectorField::zero();
    c.G = MatrixField::from_entries(ScalarField::constant(0.0),
                                    ScalarField::constant(0.0),
                                    ScalarField::constant(0.0));
    c.h = VectorField::zero();
    return c;
  }
};

struct ModulusSample {
  double r = 0.0;
  double value = 0.0;
};

// Sampled continuity modulus: nondecreasing, omega(0) = 0.
using Modulus = std::vector<ModulusSample>;

struct EllipticityCertificate {
  double theta = 1.0;  // 0 < theta <= 1, bracket theta*I <= A <= I/theta
  Modulus omega;
  double p = 0.0;
  double p_prime = 0.0;
  std::optional<Modulus> omega_tilde;  // sampled proxy only, heuristic
};

inline void validate_modulus(const Modulus& m) {
  if (m.empty() || m.front().r != 0.0 || m.front().value != 0.0)
    throw validation_error("certificate: modulus must start at (0, 0)");
  for (std::size_t k = 1; k < m.size(); ++k)
    if (m[k].r < m[k - 1].r || m[k].value < m[k - 1].value)
      throw validation_error("certificate: modulus must be nondecreasing");
}

inline EllipticityCertificate make_certificate(double theta, Modulus omega,
                                               double p, int dim,
                                               std::optional<Modulus> omega_tilde =
                                                   std::nullopt) {
  if (!(theta > 0.0) || !(theta <= 1.0))
    throw validation_error("certificate: need 0 < theta <= 1");
  validate_modulus(omega);
  if (!(p > dim))
    throw validation_error("certificate: need p > ambient dimension");
  if (omega_tilde) validate_modulus(*omega_tilde);
  EllipticityCertificate c;
  c.theta = theta;
  c.omega = std::move(omega);
  c.p = p;
  c.p_prime = p / (p - 1.0);
  c.omega_tilde = std::move(omega_tilde);
  return c;
}

// Deterministic uniform sample in the domain (area measure).
inline Vec2 sample_point(const Domain& d, SplitMix& rng) {
  if (d.kind() == DomainKind::interval)
    return Vec2{rng.uniform(d.alpha(), d.beta()), 0.0};
  const double r = d.radius() * std::sqrt(rng.uniform());
  const double th = 2.0 * pi * rng.uniform();
  return d.center() + Vec2{r * std::cos(th), r * std::sin(th)};
}

struct H1H2Estimate {
  double theta_est = 0.0;
  Modulus omega_est;
  int samples = 0;
};

// Sampled ellipticity bracket and continuity modulus for A on the domain.
// Estimates tighten monotonically in N: samples are the first N draws of a
// fixed stream, and the modulus pair set is all pairs among the first
// min(N, pair_cap) draws, so larger N only adds witnesses.
inline H1H2Estimate certify_h1_h2(const MatrixField& A, const Domain& domain,
                                  int N, std::uint64_t seed = 0x9e3779b9u) {
  if (N < 100) throw validation_error("certify_h1_h2: need at least 100 samples");
  const int dim = domain.dim();
  constexpr int kPairCap = 2000;
  constexpr int kBins = 32;

  SplitMix rng(seed);
  std::vector<Vec2> pts;
  const int keep = std::min(N, kPairCap);
  pts.reserve(static_cast<std::size_t>(keep));
  double theta = std::numeric_limits<double>::infinity();
  for (int s = 0; s < N; ++s) {
    const Vec2 x = sample_point(domain, rng);
    const SymMat2 a = A(x);
    const EigenRange er = eigen_range(a, dim);
    if (!(er.lo > 0.0))
      throw numeric_error("certify_h1_h2: ellipticity violated at (" +
                          std::to_string(x.x) + ", " + std::to_string(x.y) +
                          "), lambda_min = " + std::to_string(er.lo));
    theta = std::min(theta, std::min(er.lo, 1.0 / er.hi));
    if (s < keep) pts.push_back(x);
  }

  const double diam = domain.diameter();
  std::vector<double> bin_max(kBins + 1, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const SymMat2 ai = A(pts[i]);
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dist = (pts[i] - pts[j]).norm();
      int bin = 1 + static_cast<int>(std::floor(dist / diam * kBins));
      bin = std::min(bin, kBins);
      const double diff = spectral_norm(ai - A(pts[j]), dim);
      bin_max[static_cast<std::size_t>(bin)] =
          std::max(bin_max[static_cast<std::size_t>(bin)], diff);
    }
  }
  H1H2Estimate est;
  est.theta_est = theta;
  est.samples = N;
  est.omega_est.reserve(kBins + 1);
  double running = 0.0;
  for (int k = 0; k <= kBins; ++k) {
    running = std::max(running, bin_max[static_cast<std::size_t>(k)]);
    est.omega_est.push_back({diam * k / kBins, running});
  }
  return est;
}

struct H3Norms {
  double b_Lp = 0.0;
  double h_L1 = 0.0;
  double G_Lp_prime = 0.0;
  double p = 0.0;
  double p_prime = 0.0;
  int quad_order = 2;
  double mesh_h = 0.0;
};

namespace fields_detail {

// Composite quadrature of an integrand over the domain: degree-2 midpoint
// rule on triangles, two-point Gauss on segments.
template <class F>
double integrate(const Domain& d, double h, F&& f) {
  double total = 0.0;
  if (d.dim() == 1) {
    const Mesh mesh = segment_mesh(d, h);
    const double g = 0.5 / std::sqrt(3.0);
    for (const auto& s : mesh.segs) {
      const double xa = mesh.vertices[s[0]].x, xb = mesh.vertices[s[1]].x;
      const double len = xb - xa, mid = 0.5 * (xa + xb);
      total += 0.5 * len * (f(Vec2{mid - g * len, 0.0}) + f(Vec2{mid + g * len, 0.0}));
    }
    return total;
  }
  const Mesh mesh = triangulate_disk(d, h);
  for (const auto& t : mesh.tris) {
    const Vec2& p = mesh.vertices[t[0]];
    const Vec2& q = mesh.vertices[t[1]];
    const Vec2& r = mesh.vertices[t[2]];
    const double area = tri_area(p, q, r);
    const Vec2 m01 = (p + q) * 0.5, m12 = (q + r) * 0.5, m20 = (r + p) * 0.5;
    total += area / 3.0 * (f(m01) + f(m12) + f(m20));
  }
  return total;
}

}  // namespace fields_detail

// L^p / L^1 / L^{p'} norms of b, h, G over the closure of D by composite
// quadrature. Vector norms are Euclidean; the matrix norm is the max-entry
// norm (the convention recorded with every report).
inline H3Norms certify_h3(const VectorField& b, const VectorField& h,
                          const MatrixField& G, const Domain& domain, double p,
                          double mesh_h = 0.0) {
  const int dim = domain.dim();
  if (!(p > dim)) throw validation_error("certify_h3: need p > ambient dimension");
  if (mesh_h <= 0.0) mesh_h = domain.diameter() / 64.0;
  const double pp = p / (p - 1.0);
  H3Norms out;
  out.p = p;
  out.p_prime = pp;
  out.mesh_h = mesh_h;
  const double ib = fields_detail::integrate(domain, mesh_h, [&](const Vec2& x) {
    return std::pow(b(x).norm(), p);
  });
  const double ih = fields_detail::integrate(domain, mesh_h, [&](const Vec2& x) {
    return h(x).norm();
  });
  const double ig = fields_detail::integrate(domain, mesh_h, [&](const Vec2& x) {
    return std::pow(max_entry_norm(G(x), dim), pp);
  });
  if (!finite(ib) || !finite(ih) || !finite(ig))
    throw numeric_error("certify_h3: non-integrable sample (non-finite)");
  out.b_Lp = std::pow(ib, 1.0 / p);
  out.h_L1 = ih;
  out.G_Lp_prime = std::pow(ig, 1.0 / pp);
  return out;
}

// Manufactured data: given a smooth positive target density rho and closed
// form A, b, return G = rho*A and h = rho*b. The interior equation then
// holds identically with both sides equal, with zero differentiation.
inline std::pair<MatrixField, VectorField> manufacture(const ScalarField& rho,
                                                       const MatrixField& A,
                                                       const VectorField& b) {
  if (!rho.is_closed_form() || !A.entry(0, 0).is_closed_form() ||
      !A.entry(0, 1).is_closed_form() || !A.entry(1, 1).is_closed_form() ||
      !b.component(0).is_closed_form() || !b.component(1).is_closed_form())
    throw validation_error("manufacture: closed-form inputs required");
  const Expr& r = rho.expr();
  MatrixField G = MatrixField::from_entries(
      ScalarField::closed_form(r * A.entry(0, 0).expr()),
      ScalarField::closed_form(r * A.entry(0, 1).expr()),
      ScalarField::closed_form(r * A.entry(1, 1).expr()));
  VectorField h(ScalarField::closed_form(r * b.component(0).expr()),
                ScalarField::closed_form(r * b.component(1).expr()));
  return {std::move(G), std::move(h)};
}

}  // namespace ddf
