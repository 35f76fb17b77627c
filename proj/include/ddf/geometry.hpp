// Domains (interval, disk), boundary grids with surface-measure quadrature,
// and deterministic structured meshes.
//
// Points are Vec2 throughout; in one dimension the second coordinate is
// ignored and kept at zero. An interval (a,b) plays the role of D and a
// larger interval the role of the ambient Omega; likewise concentric disks.
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "ddf/core.hpp"

namespace ddf {

enum class DomainKind { interval, disk };

class Domain {
public:
  static Domain interval(double a, double b) {
    if (!(b > a))
      throw validation_error("domain: interval requires beta > alpha");
    Domain d;
    d.kind_ = DomainKind::interval;
    d.a_ = a;
    d.b_ = b;
    return d;
  }

  static Domain disk(Vec2 center, double radius) {
    if (!(radius > 0.0))
      throw validation_error("domain: disk requires radius > 0");
    Domain d;
    d.kind_ = DomainKind::disk;
    d.center_ = center;
    d.radius_ = radius;
    return d;
  }

  DomainKind kind() const { return kind_; }
  int dim() const { return kind_ == DomainKind::interval ? 1 : 2; }

  double alpha() const { require(DomainKind::interval); return a_; }
  double beta() const { require(DomainKind::interval); return b_; }
  Vec2 center() const { require(DomainKind::disk); return center_; }
  double radius() const { require(DomainKind::disk); return radius_; }

  // Lebesgue measure of D: length or area.
  double measure() const {
    return kind_ == DomainKind::interval ? b_ - a_ : pi * radius_ * radius_;
  }
  // Surface measure of the boundary: counting measure (mass 2) or 2*pi*R.
  double boundary_measure() const {
    return kind_ == DomainKind::interval ? 2.0 : 2.0 * pi * radius_;
  }
  double diameter() const {
    return kind_ == DomainKind::interval ? b_ - a_ : 2.0 * radius_;
  }
  double inradius() const {
    return kind_ == DomainKind::interval ? 0.5 * (b_ - a_) : radius_;
  }

  // Signed distance to the boundary, positive inside.
  double signed_dist(const Vec2& x) const {
    if (kind_ == DomainKind::interval) return std::min(x.x - a_, b_ - x.x);
    return radius_ - (x - center_).norm();
  }
  bool contains(const Vec2& x) const { return signed_dist(x) > 0.0; }
  bool contains_closure(const Vec2& x) const { return signed_dist(x) >= -1e-14 * diameter(); }

  // Ambient container, when this domain was built as D inside Omega.
  bool has_container() const { return static_cast<bool>(container_); }
  const Domain& container() const {
    if (!container_) throw validation_error("domain: no container set");
    return *container_;
  }
  // Gap between the closure of D and the boundary of Omega.
  double gap() const {
    if (!container_) throw validation_error("domain: no container set");
    return gap_;
  }

  friend Domain make_domain(Domain inner, Domain outer);

private:
  Domain() = default;
  void require(DomainKind k) const {
    if (kind_ != k) throw validation_error("domain: wrong kind for accessor");
  }

  DomainKind kind_ = DomainKind::interval;
  double a_ = 0.0, b_ = 1.0;
  Vec2 center_{};
  double radius_ = 1.0;
  std::shared_ptr<const Domain> container_;
  double gap_ = 0.0;
};

// Wires D inside its ambient Omega and validates the positive gap.
inline Domain make_domain(Domain inner, Domain outer) {
  if (inner.kind_ != outer.kind_)
    throw validation_error("domain: D and its container must share a kind");
  double gap = 0.0;
  if (inner.kind_ == DomainKind::interval) {
    gap = std::min(inner.a_ - outer.a_, outer.b_ - inner.b_);
  } else {
    const double off = (inner.center_ - outer.center_).norm();
    gap = outer.radius_ - (off + inner.radius_);
  }
  if (!(gap > 0.0))
    throw validation_error(
        "domain: no positive gap between closure(D) and the container boundary");
  inner.container_ = std::make_shared<const Domain>(outer);
  inner.gap_ = gap;
  return inner;
}

// Quadrature for the surface measure sigma on the boundary of D.
// 1D: the two endpoints, counting measure, nu(alpha) = -1, nu(beta) = +1.
// 2D: m equispaced angles with trapezoidal weights 2*pi*R/m.
struct BoundaryGrid {
  std::vector<Vec2> nodes;
  std::vector<Vec2> normals;
  std::vector<double> weights;
  std::vector<double> params;  // endpoint coordinate (1D) or angle (2D)

  std::size_t size() const { return nodes.size(); }
  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * f(nodes[k], k);
    return s;
  }
};

inline BoundaryGrid boundary_grid(const Domain& d, int m) {
  BoundaryGrid g;
  if (d.kind() == DomainKind::interval) {
    if (m != 2)
      throw validation_error("boundary_grid: an interval boundary has exactly 2 nodes");
    g.nodes = {Vec2{d.alpha(), 0.0}, Vec2{d.beta(), 0.0}};
    g.normals = {Vec2{-1.0, 0.0}, Vec2{1.0, 0.0}};
    g.weights = {1.0, 1.0};
    g.params = {d.alpha(), d.beta()};
    return g;
  }
  if (m < 16)
    throw validation_error("boundary_grid: need at least 16 nodes on a circle");
  g.nodes.reserve(m);
  g.normals.reserve(m);
  g.weights.assign(m, 2.0 * pi * d.radius() / m);
  g.params.reserve(m);
  for (int k = 0; k < m; ++k) {
    const double th = 2.0 * pi * k / m;
    const Vec2 nu{std::cos(th), std::sin(th)};
    g.normals.push_back(nu);
    g.nodes.push_back(d.center() + nu * d.radius());
    g.params.push_back(th);
  }
  return g;
}

struct Mesh {
  int dim = 2;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> tris;  // dim == 2
  std::vector<std::array<int, 2>> segs;  // dim == 1
  std::vector<char> on_boundary;
  double target_h = 0.0;
  double max_edge = 0.0;

  std::size_t cell_count() const { return dim == 2 ? tris.size() : segs.size(); }
};

inline double tri_area(const Vec2& p, const Vec2& q, const Vec2& r) {
  return 0.5 * ((q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x));
}

namespace geo_detail {

// Ring j holds 6*j vertices at radius j*R/M; ring 0 is the center vertex.
inline int ring_first_index(int j) {
  // 1 + sum_{i<j} 6i
  return j == 0 ? 0 : 1 + 3 * j * (j - 1);
}

}  // namespace geo_detail

// Structured radial-layer triangulation of a disk. Deterministic: a center
// vertex plus M = ceil(R/h) concentric rings, ring j carrying 6j equispaced
// vertices; adjacent rings are stitched with a shortest-diagonal merge so the
// largest edge stays below 1.5*h. Boundary vertices lie exactly on the circle.
inline Mesh triangulate_disk(const Domain& d, double h) {
  if (d.kind() != DomainKind::disk)
    throw validation_error("triangulate_disk: domain must be a disk");
  const double R = d.radius();
  if (!(h > 0.0) || !(h < 0.5 * R))
    throw validation_error("triangulate_disk: need 0 < h < R/2");
  const int M = static_cast<int>(std::ceil(R / h));
  const std::int64_t nv = 1 + 3 * static_cast<std::int64_t>(M) * (M + 1);
  if (nv > 10'000'000)
    throw resource_error("triangulate_disk: vertex budget of 1e7 exceeded");

  Mesh mesh;
  mesh.dim = 2;
  mesh.target_h = h;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  mesh.on_boundary.assign(static_cast<std::size_t>(nv), 0);
  mesh.vertices.push_back(d.center());
  for (int j = 1; j <= M; ++j) {
    const double r = R * j / M;
    const int nj = 6 * j;
    for (int i = 0; i < nj; ++i) {
      const double th = 2.0 * pi * i / nj;
      Vec2 p = d.center() + Vec2{r * std::cos(th), r * std::sin(th)};
      if (j == M) {
        // Snap to the circle so boundary vertices are exact.
        Vec2 u = p - d.center();
        p = d.center() + u * (R / u.norm());
        mesh.on_boundary[mesh.vertices.size()] = 1;
      }
      mesh.vertices.push_back(p);
    }
  }

  auto push_tri = [&mesh](int a, int b, int c) {
    if (tri_area(mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]) < 0.0)
      std::swap(b, c);
    mesh.tris.push_back({a, b, c});
  };

  // Center fan.
  const int r1 = geo_detail::ring_first_index(1);
  for (int i = 0; i < 6; ++i) push_tri(0, r1 + i, r1 + (i + 1) % 6);

  // Stitch ring j-1 (inner) to ring j (outer) with a greedy two-pointer
  // merge that always advances across the shorter diagonal.
  for (int j = 2; j <= M; ++j) {
    const int in0 = geo_detail::ring_first_index(j - 1);
    const int out0 = geo_detail::ring_first_index(j);
    const int nin = 6 * (j - 1);
    const int nout = 6 * j;
    int i = 0, k = 0;
    auto inner_at = [&](int t) { return in0 + t % nin; };
    auto outer_at = [&](int t) { return out0 + t % nout; };
    while (i < nin || k < nout) {
      const bool can_in = i < nin;
      const bool can_out = k < nout;
      bool advance_out;
      if (!can_in) {
        advance_out = true;
      } else if (!can_out) {
        advance_out = false;
      } else {
        const Vec2& vin_next = mesh.vertices[inner_at(i + 1)];
        const Vec2& vout_next = mesh.vertices[outer_at(k + 1)];
        const Vec2& vin = mesh.vertices[inner_at(i)];
        const Vec2& vout = mesh.vertices[outer_at(k)];
        advance_out = (vout_next - vin).norm_sq() <= (vin_next - vout).norm_sq();
      }
      if (advance_out) {
        push_tri(outer_at(k), outer_at(k + 1), inner_at(i));
        ++k;
      } else {
        push_tri(inner_at(i), inner_at(i + 1), outer_at(k));
        ++i;
      }
    }
  }

  double me = 0.0;
  for (const auto& t : mesh.tris)
    for (int e = 0; e < 3; ++e)
      me = std::max(me, (mesh.vertices[t[e]] - mesh.vertices[t[(e + 1) % 3]]).norm());
  mesh.max_edge = me;
  return mesh;
}

// Uniform segment mesh of an interval with n = ceil((b-a)/h) cells.
inline Mesh segment_mesh(const Domain& d, double h) {
  if (d.kind() != DomainKind::interval)
    throw validation_error("segment_mesh: domain must be an interval");
  if (!(h > 0.0)) throw validation_error("segment_mesh: need h > 0");
  const double a = d.alpha(), b = d.beta();
  const std::int64_t n = static_cast<std::int64_t>(std::ceil((b - a) / h));
  if (n + 1 > 10'000'000)
    throw resource_error("segment_mesh: vertex budget of 1e7 exceeded");
  Mesh mesh;
  mesh.dim = 1;
  mesh.target_h = h;
  mesh.vertices.reserve(static_cast<std::size_t>(n + 1));
  for (std::int64_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    mesh.vertices.push_back(Vec2{a + t * (b - a), 0.0});
  }
  mesh.vertices.front().x = a;
  mesh.vertices.back().x = b;
  mesh.on_boundary.assign(mesh.vertices.size(), 0);
  mesh.on_boundary.front() = 1;
  mesh.on_boundary.back() = 1;
  for (std::int64_t i = 0; i < n; ++i)
    mesh.segs.push_back({static_cast<int>(i), static_cast<int>(i + 1)});
  mesh.max_edge = (b - a) / static_cast<double>(n);
  return mesh;
}

// Region Omega_n = {x in Omega : dist(x, boundary of Omega) > 1/n}.
// Exposed as an indicator; empty when 1/n reaches the inradius.
class InnerCutoff {
public:
  InnerCutoff(const Domain& omega, int n) : omega_(omega) {
    if (n < 1) throw validation_error("inner_cutoff: need n >= 1");
    margin_ = 1.0 / n;
  }

  bool contains(const Vec2& x) const { return omega_.signed_dist(x) > margin_; }
  double indicator(const Vec2& x) const { return contains(x) ? 1.0 : 0.0; }
  bool empty() const { return margin_ >= omega_.inradius(); }
  double margin() const { return margin_; }

private:
  Domain omega_;
  double margin_;
};

inline InnerCutoff inner_cutoff(const Domain& omega, int n) {
  return InnerCutoff(omega, n);
}

// Debug export: one record per line, space separated.
inline void write_mesh_text(const Mesh& mesh, std::ostream& os) {
  os << "vertices " << mesh.vertices.size() << "\n";
  char buf[96];
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu %.17g %.17g %d\n", i,
                  mesh.vertices[i].x, mesh.vertices[i].y,
                  static_cast<int>(mesh.on_boundary[i]));
    os << buf;
  }
  os << "cells " << mesh.cell_count() << "\n";
  if (mesh.dim == 2) {
    for (std::size_t c = 0; c < mesh.tris.size(); ++c)
      os << c << ' ' << mesh.tris[c][0] << ' ' << mesh.tris[c][1] << ' '
         << mesh.tris[c][2] << "\n";
  } else {
    for (std::size_t c = 0; c < mesh.segs.size(); ++c)
      os << c << ' ' << mesh.segs[c][0] << ' ' << mesh.segs[c][1] << "\n";
  }
}

}  // namespace ddf
