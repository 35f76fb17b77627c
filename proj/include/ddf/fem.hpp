// P1 finite elements for the divergence-form reformulation
//   div(A grad v - v bt) = div r,   v = g on the boundary,
// on the structured disk and interval meshes. Assembly always walks cells in
// storage order so runs are bit-reproducible; upwinding switches on only when
// the element Peclet number exceeds one.
#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "ddf/core.hpp"
#include "ddf/fields.hpp"
#include "ddf/geometry.hpp"
#include "ddf/mollify.hpp"

namespace ddf {

// Coefficients of the first-order-form equation. bt is the drift minus the
// row divergence of A; r is the row divergence of G minus h.
struct DivergenceFormData {
  std::function<SymMat2(const Vec2&)> A;
  std::function<Vec2(const Vec2&)> bt;
  std::function<Vec2(const Vec2&)> r;
};

// Builds the first-order-form coefficients from a double divergence set.
// Requires derivative access on the entries of A and G (closed forms or
// sampled fields carrying gradient grids).
inline DivergenceFormData divergence_form(const CoefficientSet& cs) {
  DivergenceFormData out;
  const MatrixField A = cs.A;
  const VectorField b = cs.b;
  const VectorField h = cs.h;
  out.A = [A](const Vec2& x) { return A(x); };
  if (cs.dim == 1) {
    const ScalarField da = cs.A.entry(0, 0).derivative(0);
    const ScalarField dg = cs.G.entry(0, 0).derivative(0);
    out.bt = [b, da](const Vec2& x) { return Vec2{b(x).x - da(x), 0.0}; };
    out.r = [dg, h](const Vec2& x) { return Vec2{dg(x) - h(x).x, 0.0}; };
    return out;
  }
  const ScalarField a11_1 = cs.A.entry(0, 0).derivative(0);
  const ScalarField a12_2 = cs.A.entry(0, 1).derivative(1);
  const ScalarField a12_1 = cs.A.entry(0, 1).derivative(0);
  const ScalarField a22_2 = cs.A.entry(1, 1).derivative(1);
  out.bt = [b, a11_1, a12_2, a12_1, a22_2](const Vec2& x) {
    return Vec2{b(x).x - (a11_1(x) + a12_2(x)), b(x).y - (a12_1(x) + a22_2(x))};
  };
  const ScalarField g11_1 = cs.G.entry(0, 0).derivative(0);
  const ScalarField g12_2 = cs.G.entry(0, 1).derivative(1);
  const ScalarField g12_1 = cs.G.entry(0, 1).derivative(0);
  const ScalarField g22_2 = cs.G.entry(1, 1).derivative(1);
  out.r = [g11_1, g12_2, g12_1, g22_2, h](const Vec2& x) {
    return Vec2{(g11_1(x) + g12_2(x)) - h(x).x, (g12_1(x) + g22_2(x)) - h(x).y};
  };
  return out;
}

// The divergence-form coefficients of a smoothing level. Fails when the
// level's fields lack derivative access.
inline DivergenceFormData reformulate(const AdmissibleLevel& level) {
  return divergence_form(level.smoothed);
}

// Boundary vertex indices in ascending order; Dirichlet data vectors follow
// this ordering everywhere.
inline std::vector<int> boundary_vertices(const Mesh& mesh) {
  std::vector<int> out;
  for (std::size_t v = 0; v < mesh.on_boundary.size(); ++v)
    if (mesh.on_boundary[v]) out.push_back(static_cast<int>(v));
  return out;
}

template <class F>
std::vector<double> boundary_values(const Mesh& mesh, F&& f) {  // f(Vec2) -> double
  std::vector<double> out;
  for (int v : boundary_vertices(mesh))
    out.push_back(f(mesh.vertices[static_cast<std::size_t>(v)]));
  return out;
}

// Point location on the structured meshes. The disk mesh is organized in
// annular bands; triangles are bucketed by angle within each band, so a query
// tests only a handful of candidates. Points in the sliver between the
// boundary polygon and the circle fall back to the best (slightly
// extrapolating) triangle.
class MeshLocator {
 public:
  struct Hit {
    int cell = -1;
    double l0 = 0.0, l1 = 0.0, l2 = 0.0;  // barycentric; 1d uses l0, l1
  };

  MeshLocator(std::shared_ptr<const Mesh> mesh, const Domain& domain)
      : mesh_(std::move(mesh)), domain_(domain) {
    if (domain_.kind() == DomainKind::interval) {
      cells_ = static_cast<int>(mesh_->segs.size());
      return;
    }
    rings_ = static_cast<int>(std::round(std::sqrt(mesh_->tris.size() / 6.0)));
    dr_ = domain_.radius() / rings_;
    bands_.resize(static_cast<std::size_t>(rings_));
    for (int j = 1; j <= rings_; ++j)
      bands_[static_cast<std::size_t>(j - 1)].resize(static_cast<std::size_t>(12 * j));
    for (std::size_t t = 0; t < mesh_->tris.size(); ++t) insert_triangle(static_cast<int>(t));
  }

  Hit locate(const Vec2& x) const {
    if (domain_.kind() == DomainKind::interval) return locate_1d(x);
    return locate_disk(x);
  }

 private:
  static int ring_of_vertex(int v) {
    if (v == 0) return 0;
    int j = static_cast<int>((3.0 + std::sqrt(12.0 * v - 3.0)) / 6.0);
    while (geo_detail::ring_first_index(j + 1) <= v) ++j;
    while (j > 1 && geo_detail::ring_first_index(j) > v) --j;
    return j;
  }

  double angle_of(const Vec2& p) const {
    double th = std::atan2(p.y - domain_.center().y, p.x - domain_.center().x);
    if (th < 0.0) th += 2.0 * pi;
    return th;
  }

  void insert_triangle(int t) {
    const auto& tri = mesh_->tris[static_cast<std::size_t>(t)];
    int band = 0;
    for (int k = 0; k < 3; ++k) band = std::max(band, ring_of_vertex(tri[k]));
    const int nb = 12 * band;
    const double base = angle_of(mesh_->vertices[static_cast<std::size_t>(tri[0])]);
    double lo = 0.0, hi = 0.0;
    for (int k = 1; k < 3; ++k) {
      double off = angle_of(mesh_->vertices[static_cast<std::size_t>(tri[k])]) - base;
      while (off > pi) off -= 2.0 * pi;
      while (off < -pi) off += 2.0 * pi;
      lo = std::min(lo, off);
      hi = std::max(hi, off);
    }
    const double width = 2.0 * pi / nb;
    const int b_lo = static_cast<int>(std::floor((base + lo) / width)) - 1;
    const int b_hi = static_cast<int>(std::floor((base + hi) / width)) + 1;
    auto& slots = bands_[static_cast<std::size_t>(band - 1)];
    for (int b = b_lo; b <= b_hi; ++b) {
      const int bb = ((b % nb) + nb) % nb;
      slots[static_cast<std::size_t>(bb)].push_back(t);
    }
  }

  Hit locate_1d(const Vec2& x) const {
    const double a = domain_.alpha(), b = domain_.beta();
    const double h = (b - a) / cells_;
    int i = static_cast<int>(std::floor((x.x - a) / h));
    i = std::max(0, std::min(cells_ - 1, i));
    const auto& s = mesh_->segs[static_cast<std::size_t>(i)];
    const double xl = mesh_->vertices[static_cast<std::size_t>(s[0])].x;
    const double xr = mesh_->vertices[static_cast<std::size_t>(s[1])].x;
    Hit hit;
    hit.cell = i;
    hit.l1 = (x.x - xl) / (xr - xl);
    hit.l0 = 1.0 - hit.l1;
    return hit;
  }

  Hit locate_disk(const Vec2& x) const {
    const double rho = (x - domain_.center()).norm();
    const double th = angle_of(x);
    int jq = static_cast<int>(std::floor(rho / dr_)) + 1;
    jq = std::max(1, std::min(rings_, jq));
    Hit best;
    double best_min = -std::numeric_limits<double>::infinity();
    for (int dj = -1; dj <= 1; ++dj) {
      const int band = jq + dj;
      if (band < 1 || band > rings_) continue;
      const int nb = 12 * band;
      const int bq = static_cast<int>(th / (2.0 * pi) * nb);
      for (int db = -1; db <= 1; ++db) {
        const int bb = ((bq + db) % nb + nb) % nb;
        for (int t : bands_[static_cast<std::size_t>(band - 1)][static_cast<std::size_t>(bb)]) {
          const auto& tri = mesh_->tris[static_cast<std::size_t>(t)];
          const Vec2 p0 = mesh_->vertices[static_cast<std::size_t>(tri[0])];
          const Vec2 p1 = mesh_->vertices[static_cast<std::size_t>(tri[1])];
          const Vec2 p2 = mesh_->vertices[static_cast<std::size_t>(tri[2])];
          const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
          const double l1 = ((x.x - p0.x) * (p2.y - p0.y) - (x.y - p0.y) * (p2.x - p0.x)) / det;
          const double l2 = ((p1.x - p0.x) * (x.y - p0.y) - (p1.y - p0.y) * (x.x - p0.x)) / det;
          const double l0 = 1.0 - l1 - l2;
          const double m = std::min({l0, l1, l2});
          if (m > best_min) {
            best_min = m;
            best = Hit{t, l0, l1, l2};
          }
          if (m >= -1e-12) return best;
        }
      }
    }
    if (best_min >= -0.05) return best;  // boundary sliver: extrapolate
    throw numeric_error("MeshLocator: point outside mesh");
  }

  std::shared_ptr<const Mesh> mesh_;
  Domain domain_ = Domain::interval(0.0, 1.0);
  int cells_ = 0;   // interval
  int rings_ = 0;   // disk
  double dr_ = 0.0;
  std::vector<std::vector<std::vector<int>>> bands_;
};

// Piecewise linear finite element function tied to its mesh.
class SolutionField {
 public:
  SolutionField(const Domain& domain, std::shared_ptr<const Mesh> mesh,
                std::vector<double> nodal)
      : domain_(domain), mesh_(std::move(mesh)), nodal_(std::move(nodal)) {
    if (nodal_.size() != mesh_->vertices.size())
      throw validation_error("SolutionField: nodal size mismatch");
    locator_ = std::make_shared<MeshLocator>(mesh_, domain_);
  }

  const Domain& domain() const { return domain_; }
  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const std::vector<double>& nodal() const { return nodal_; }

  double operator()(const Vec2& x) const {
    const MeshLocator::Hit hit = locator_->locate(x);
    if (domain_.kind() == DomainKind::interval) {
      const auto& s = mesh_->segs[static_cast<std::size_t>(hit.cell)];
      return hit.l0 * nodal_[static_cast<std::size_t>(s[0])] +
             hit.l1 * nodal_[static_cast<std::size_t>(s[1])];
    }
    const auto& t = mesh_->tris[static_cast<std::size_t>(hit.cell)];
    return hit.l0 * nodal_[static_cast<std::size_t>(t[0])] +
           hit.l1 * nodal_[static_cast<std::size_t>(t[1])] +
           hit.l2 * nodal_[static_cast<std::size_t>(t[2])];
  }

  // Pulls points outside the closed domain onto it before evaluating, so the
  // field extends continuously by its boundary values.
  double eval_clamped(const Vec2& x) const {
    if (domain_.kind() == DomainKind::interval) {
      const double c = std::max(domain_.alpha(), std::min(domain_.beta(), x.x));
      return (*this)(Vec2{c, 0.0});
    }
    const Vec2 d = x - domain_.center();
    const double r = d.norm();
    if (r <= domain_.radius() || r == 0.0) return (*this)(x);
    const double shrink = domain_.radius() * (1.0 - 1e-12) / r;
    return (*this)(domain_.center() + d * shrink);
  }

  double min_nodal() const {
    double m = nodal_.empty() ? 0.0 : nodal_[0];
    for (double v : nodal_) m = std::min(m, v);
    return m;
  }
  double max_nodal() const {
    double m = nodal_.empty() ? 0.0 : nodal_[0];
    for (double v : nodal_) m = std::max(m, v);
    return m;
  }

  // L^q norm over the domain by the mesh quadrature rule; q may be infinity
  // (then the piecewise linear max is attained at a node).
  double norm_Lq(double q) const { return norm_of([this](std::size_t v) { return nodal_[v]; }, q); }

  template <class NodalFn>
  double norm_of(NodalFn&& val, double q) const {
    if (std::isinf(q)) {
      double m = 0.0;
      for (std::size_t v = 0; v < nodal_.size(); ++v) m = std::max(m, std::abs(val(v)));
      return m;
    }
    if (!(q >= 1.0)) throw validation_error("norm_Lq: need q >= 1 or infinity");
    double total = 0.0;
    if (domain_.kind() == DomainKind::interval) {
      const double g = 0.5 / std::sqrt(3.0);
      for (const auto& s : mesh_->segs) {
        const double v0 = val(static_cast<std::size_t>(s[0]));
        const double v1 = val(static_cast<std::size_t>(s[1]));
        const double h = mesh_->vertices[static_cast<std::size_t>(s[1])].x -
                         mesh_->vertices[static_cast<std::size_t>(s[0])].x;
        const double m = 0.5 * (v0 + v1), d = (v1 - v0);
        total += 0.5 * h * (std::pow(std::abs(m - g * d), q) + std::pow(std::abs(m + g * d), q));
      }
      return std::pow(total, 1.0 / q);
    }
    for (const auto& t : mesh_->tris) {
      const Vec2 p0 = mesh_->vertices[static_cast<std::size_t>(t[0])];
      const Vec2 p1 = mesh_->vertices[static_cast<std::size_t>(t[1])];
      const Vec2 p2 = mesh_->vertices[static_cast<std::size_t>(t[2])];
      const double v0 = val(static_cast<std::size_t>(t[0]));
      const double v1 = val(static_cast<std::size_t>(t[1]));
      const double v2 = val(static_cast<std::size_t>(t[2]));
      const double w = tri_area(p0, p1, p2) / 3.0;
      total += w * (std::pow(std::abs(0.5 * (v0 + v1)), q) +
                    std::pow(std::abs(0.5 * (v1 + v2)), q) +
                    std::pow(std::abs(0.5 * (v2 + v0)), q));
    }
    return std::pow(total, 1.0 / q);
  }

 private:
  Domain domain_ = Domain::interval(0.0, 1.0);
  std::shared_ptr<const Mesh> mesh_;
  std::vector<double> nodal_;
  std::shared_ptr<const MeshLocator> locator_;
};

// L^q distance between two fields on the same mesh.
inline double diff_norm_Lq(const SolutionField& a, const SolutionField& b, double q) {
  if (a.mesh_ptr() != b.mesh_ptr() && a.nodal().size() != b.nodal().size())
    throw validation_error("diff_norm_Lq: fields live on different meshes");
  const auto& u = a.nodal();
  const auto& v = b.nodal();
  return a.norm_of([&u, &v](std::size_t k) { return u[k] - v[k]; }, q);
}

struct SolveStats {
  int unknowns = 0;
  int interior = 0;
  bool supg_used = false;
  double residual_inf = 0.0;  // algebraic residual of the linear solve
};

// Assembles and solves the P1 Galerkin system. g_boundary follows the
// boundary_vertices ordering. Coefficients are sampled with a 3-point edge
// midpoint rule per triangle (2-point Gauss per segment in 1d). When an
// element Peclet number |bt| h / (2 theta) exceeds 1, a streamline diffusion
// term tau (bt.grad Nj)(bt.grad Ni) with the standard optimal tau is added.
inline SolutionField solve_smooth(const Domain& domain,
                                  std::shared_ptr<const Mesh> mesh,
                                  const DivergenceFormData& eq,
                                  const std::vector<double>& g_boundary,
                                  SolveStats* stats = nullptr) {
  const int N = static_cast<int>(mesh->vertices.size());
  const std::vector<int> bverts = boundary_vertices(*mesh);
  if (g_boundary.size() != bverts.size())
    throw validation_error("solve_smooth: boundary data size mismatch");
  std::vector<int> bindex(static_cast<std::size_t>(N), -1);
  for (std::size_t k = 0; k < bverts.size(); ++k)
    bindex[static_cast<std::size_t>(bverts[k])] = static_cast<int>(k);

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  bool supg_any = false;

  auto scatter = [&](const int* gv, int nloc, const double* Ke, const double* Fe) {
    for (int i = 0; i < nloc; ++i) {
      const int gi = gv[i];
      if (bindex[static_cast<std::size_t>(gi)] >= 0) continue;
      rhs[gi] += Fe[i];
      for (int j = 0; j < nloc; ++j) {
        const int gj = gv[j];
        const int bj = bindex[static_cast<std::size_t>(gj)];
        if (bj >= 0)
          rhs[gi] -= Ke[i * nloc + j] * g_boundary[static_cast<std::size_t>(bj)];
        else
          trips.emplace_back(gi, gj, Ke[i * nloc + j]);
      }
    }
  };

  if (domain.kind() == DomainKind::interval) {
    const double g = 0.5 / std::sqrt(3.0);
    for (const auto& s : mesh->segs) {
      const double xl = mesh->vertices[static_cast<std::size_t>(s[0])].x;
      const double xr = mesh->vertices[static_cast<std::size_t>(s[1])].x;
      const double h = xr - xl;
      const double dN[2] = {-1.0 / h, 1.0 / h};
      const double xq[2] = {0.5 * (xl + xr) - g * h, 0.5 * (xl + xr) + g * h};
      const double wq = 0.5 * h;
      const Vec2 mid{0.5 * (xl + xr), 0.0};
      const double a_mid = eq.A(mid).a11;
      if (!(a_mid > 0.0)) throw numeric_error("solve_smooth: nonpositive diffusion in cell");
      const double bt_mid = std::abs(eq.bt(mid).x);
      const double pe = bt_mid * h / (2.0 * a_mid);
      double tau = 0.0;
      if (pe > 1.0) {
        tau = h / (2.0 * bt_mid) * (1.0 / std::tanh(pe) - 1.0 / pe);
        supg_any = true;
      }
      double Ke[4] = {0, 0, 0, 0};
      double Fe[2] = {0, 0};
      for (int q = 0; q < 2; ++q) {
        const Vec2 x{xq[q], 0.0};
        const double a = eq.A(x).a11;
        const double bt = eq.bt(x).x;
        const double r = eq.r(x).x;
        const double Nv[2] = {(xr - xq[q]) / h, (xq[q] - xl) / h};
        for (int i = 0; i < 2; ++i) {
          Fe[i] += wq * r * dN[i];
          for (int j = 0; j < 2; ++j)
            Ke[i * 2 + j] += wq * (a * dN[j] * dN[i] - Nv[j] * bt * dN[i] +
                                   tau * (bt * dN[j]) * (bt * dN[i]));
        }
      }
      const int gv[2] = {s[0], s[1]};
      scatter(gv, 2, Ke, Fe);
    }
  } else {
    // Barycentric coordinates of the three edge midpoints.
    static const double lam[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
    for (const auto& t : mesh->tris) {
      const Vec2 p[3] = {mesh->vertices[static_cast<std::size_t>(t[0])],
                         mesh->vertices[static_cast<std::size_t>(t[1])],
                         mesh->vertices[static_cast<std::size_t>(t[2])]};
      const double area = tri_area(p[0], p[1], p[2]);
      const double inv2A = 1.0 / (2.0 * area);
      Vec2 gradN[3];
      for (int k = 0; k < 3; ++k) {
        const Vec2 e = p[(k + 2) % 3] - p[(k + 1) % 3];
        gradN[k] = Vec2{-e.y, e.x} * inv2A;
      }
      const Vec2 centroid = (p[0] + p[1] + p[2]) / 3.0;
      const double theta_K = eigen_range(eq.A(centroid), 2).lo;
      if (!(theta_K > 0.0)) throw numeric_error("solve_smooth: ellipticity lost in cell");
      const double hK = std::sqrt(std::max({(p[1] - p[0]).norm_sq(), (p[2] - p[1]).norm_sq(),
                                            (p[0] - p[2]).norm_sq()}));
      const double bt_c = eq.bt(centroid).norm();
      const double pe = bt_c * hK / (2.0 * theta_K);
      double tau = 0.0;
      if (pe > 1.0) {
        tau = hK / (2.0 * bt_c) * (1.0 / std::tanh(pe) - 1.0 / pe);
        supg_any = true;
      }
      double Ke[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
      double Fe[3] = {0, 0, 0};
      const double wq = area / 3.0;
      for (int q = 0; q < 3; ++q) {
        const Vec2 xq = p[0] * lam[q][0] + p[1] * lam[q][1] + p[2] * lam[q][2];
        const SymMat2 a = eq.A(xq);
        const Vec2 bt = eq.bt(xq);
        const Vec2 r = eq.r(xq);
        for (int i = 0; i < 3; ++i) {
          Fe[i] += wq * r.dot(gradN[i]);
          for (int j = 0; j < 3; ++j)
            Ke[i * 3 + j] += wq * (a.apply(gradN[j]).dot(gradN[i]) -
                                   lam[q][j] * bt.dot(gradN[i]) +
                                   tau * bt.dot(gradN[j]) * bt.dot(gradN[i]));
        }
      }
      const int gv[3] = {t[0], t[1], t[2]};
      scatter(gv, 3, Ke, Fe);
    }
  }

  for (std::size_t k = 0; k < bverts.size(); ++k) {
    trips.emplace_back(bverts[k], bverts[k], 1.0);
    rhs[bverts[k]] = g_boundary[k];
  }

  Eigen::SparseMatrix<double> K(N, N);
  K.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success)
    throw numeric_error("solve_smooth: sparse factorization failed");
  Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success)
    throw numeric_error("solve_smooth: sparse back substitution failed");

  std::vector<double> nodal(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    if (!std::isfinite(sol[i])) throw numeric_error("solve_smooth: non-finite solution");
    nodal[static_cast<std::size_t>(i)] = sol[i];
  }
  if (stats) {
    stats->unknowns = N;
    stats->interior = N - static_cast<int>(bverts.size());
    stats->supg_used = supg_any;
    stats->residual_inf = (K * sol - rhs).cwiseAbs().maxCoeff();
  }
  return SolutionField(domain, std::move(mesh), std::move(nodal));
}

}  // namespace ddf
