// Mollifiers psi_eps and the smoothing pipeline that turns rough coefficient
// sets into smooth grid-sampled levels.
//
// Convolutions use a fixed midpoint tensor quadrature at spacing eps/8 whose
// sample positions land on a shared half-step lattice, so every field is
// evaluated once per lattice point and reused across output nodes and weight
// sets. Kernel weights are renormalized so constants convolve exactly and
// (by the mirrored sample layout) affine functions and their derivatives are
// reproduced exactly; consequently values of a smoothed matrix field are
// convex combinations of original samples and the ellipticity bracket is
// preserved pointwise.
#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ddf/core.hpp"
#include "ddf/fields.hpp"
#include "ddf/geometry.hpp"

namespace ddf {

enum class MollifierKind { standard_bump, polynomial_bump };

inline const char* to_string(MollifierKind k) {
  return k == MollifierKind::standard_bump ? "standard_bump" : "polynomial_bump";
}

// Radial kernel supported in the closed unit ball before eps-scaling,
// normalized by quadrature so the integral is 1.
class Mollifier {
public:
  Mollifier(MollifierKind kind, double eps, int dim)
      : kind_(kind), eps_(eps), dim_(dim) {
    if (!(eps > 0.0)) throw validation_error("mollifier: need eps > 0");
    if (dim != 1 && dim != 2) throw validation_error("mollifier: dim must be 1 or 2");
    norm_ = 1.0 / unit_integral();
  }

  MollifierKind kind() const { return kind_; }
  double eps() const { return eps_; }
  int dim() const { return dim_; }

  // psi_eps(x) = eps^{-d} psi(x/eps)
  double value(const Vec2& x) const {
    const Vec2 u = x / eps_;
    const double q = dim_ == 1 ? u.x * u.x : u.norm_sq();
    return profile(q) * norm_ / scale();
  }

  Vec2 grad(const Vec2& x) const {
    const Vec2 u = x / eps_;
    const double q = dim_ == 1 ? u.x * u.x : u.norm_sq();
    const double c = 2.0 * dprofile(q) * norm_ / (scale() * eps_);
    return dim_ == 1 ? Vec2{c * u.x, 0.0} : Vec2{c * u.x, c * u.y};
  }

  // Kernel in one linear/angular variable; only meaningful for dim 1.
  double value_1d(double t) const {
    if (dim_ != 1)
      throw validation_error("mollifier: value_1d needs a dim-1 kernel");
    const double u = t / eps_;
    return profile(u * u) * norm_ / eps_;
  }

private:
  double scale() const { return dim_ == 1 ? eps_ : eps_ * eps_; }

  double profile(double q) const {
    if (q >= 1.0) return 0.0;
    if (kind_ == MollifierKind::standard_bump) return std::exp(-1.0 / (1.0 - q));
    const double s = 1.0 - q;
    return s * s * s * s;
  }

  // d(profile)/dq
  double dprofile(double q) const {
    if (q >= 1.0) return 0.0;
    const double s = 1.0 - q;
    if (kind_ == MollifierKind::standard_bump)
      return -std::exp(-1.0 / s) / (s * s);
    return -4.0 * s * s * s;
  }

  double unit_integral() const {
    // Composite Simpson over r in [0,1]; integrand vanishes smoothly at 1.
    constexpr int kN = 4096;
    const double h = 1.0 / kN;
    double sum = 0.0;
    for (int i = 0; i <= kN; ++i) {
      const double r = i * h;
      const double f = dim_ == 1 ? profile(r * r) : profile(r * r) * r;
      const double w = (i == 0 || i == kN) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      sum += w * f;
    }
    sum *= h / 3.0;
    return dim_ == 1 ? 2.0 * sum : 2.0 * pi * sum;
  }

  MollifierKind kind_;
  double eps_;
  int dim_;
  double norm_;
};

inline Mollifier make_mollifier(MollifierKind kind, double eps, int dim = 2) {
  return Mollifier(kind, eps, dim);
}

namespace mollify_detail {

inline void parallel_rows(int rows, int jobs, const std::function<void(int)>& body) {
  if (jobs <= 1 || rows < 4) {
    for (int r = 0; r < rows; ++r) body(r);
    return;
  }
  const int nw = std::min(jobs, rows);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nw));
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([=, &body] {
      for (int r = w; r < rows; r += nw) body(r);
    });
  }
  for (auto& t : pool) t.join();
}

// Half-cell kernel offsets u_m = (m + 1/2) * eps/8, m = 0..7; sample
// positions x_i -/+ u land on the lattice x0 + (2j-15) * eps/16.
struct KernelWeights {
  std::array<double, 8> u{};
  // 2D weight tables over the positive quadrant; mirrored by symmetry.
  std::array<std::array<double, 8>, 8> w{};   // psi
  std::array<std::array<double, 8>, 8> d1{};  // d psi / d x1
  // 1D tables
  std::array<double, 8> w1{};
  std::array<double, 8> d{};
};

inline KernelWeights kernel_weights(const Mollifier& psi) {
  KernelWeights k;
  const double eps = psi.eps();
  const double h = eps / 8.0;
  for (int m = 0; m < 8; ++m) k.u[m] = (m + 0.5) * h;
  if (psi.dim() == 1) {
    double sw = 0.0, sd = 0.0;
    for (int m = 0; m < 8; ++m) {
      k.w1[m] = psi.value(Vec2{k.u[m], 0.0}) * h;
      k.d[m] = psi.grad(Vec2{k.u[m], 0.0}).x * h;
      sw += 2.0 * k.w1[m];
      sd += 2.0 * k.d[m] * k.u[m];  // both signs contribute equally
    }
    for (int m = 0; m < 8; ++m) {
      k.w1[m] /= sw;
      k.d[m] /= -sd;  // enforce sum w'_c y_c = -1
    }
    return k;
  }
  double sw = 0.0, sd = 0.0;
  for (int m1 = 0; m1 < 8; ++m1)
    for (int m2 = 0; m2 < 8; ++m2) {
      const Vec2 y{k.u[m1], k.u[m2]};
      k.w[m1][m2] = psi.value(y) * h * h;
      k.d1[m1][m2] = psi.grad(y).x * h * h;
      sw += 4.0 * k.w[m1][m2];
      sd += 4.0 * k.d1[m1][m2] * k.u[m1];
    }
  for (int m1 = 0; m1 < 8; ++m1)
    for (int m2 = 0; m2 < 8; ++m2) {
      k.w[m1][m2] /= sw;
      k.d1[m1][m2] /= -sd;
    }
  return k;
}

}  // namespace mollify_detail

// Output grid request for a convolution: uniform nodes at spacing eps/4
// starting at (x0, y0). The spacing is fixed by the kernel resolution rule.
struct ConvGridSpec {
  int dim = 2;
  double x0 = 0.0, y0 = 0.0;
  int nx = 0, ny = 1;
  double spacing = 0.0;
};

// Covers the closure of D with `margin` extra cells on every side.
inline ConvGridSpec conv_grid_for(const Domain& d, double eps, int margin = 2) {
  ConvGridSpec s;
  s.dim = d.dim();
  s.spacing = eps / 4.0;
  if (d.dim() == 1) {
    s.x0 = d.alpha() - margin * s.spacing;
    const double hi = d.beta() + margin * s.spacing;
    s.nx = 2 + static_cast<int>(std::ceil((hi - s.x0) / s.spacing));
    s.ny = 1;
    s.y0 = 0.0;
    return s;
  }
  const Vec2 c = d.center();
  const double R = d.radius();
  s.x0 = c.x - R - margin * s.spacing;
  s.y0 = c.y - R - margin * s.spacing;
  const double hi = 2.0 * (R + margin * s.spacing);
  s.nx = s.ny = 2 + static_cast<int>(std::ceil(hi / s.spacing));
  return s;
}

// Convolve an (already extended) function with psi_eps on the grid, returning
// a sampled field; when want_grads is set the returned field carries the
// kernel-differentiated gradient grids.
inline ScalarField convolve(const std::function<double(const Vec2&)>& f_ext,
                            const Mollifier& psi, const ConvGridSpec& spec,
                            bool want_grads = false, int jobs = 1) {
  if (spec.dim != psi.dim())
    throw validation_error("convolve: grid and mollifier dimensions differ");
  if (!(spec.spacing > 0.0) || spec.spacing > psi.eps() / 4.0 * (1.0 + 1e-12))
    throw validation_error("convolve: grid must resolve the kernel (spacing <= eps/4)");
  if (spec.nx < 2 || (spec.dim == 2 && spec.ny < 2))
    throw validation_error("convolve: grid too small");
  const double halfstep = psi.eps() / 16.0;
  const mollify_detail::KernelWeights K = mollify_detail::kernel_weights(psi);

  const std::int64_t lx = 2 * static_cast<std::int64_t>(spec.nx) + 14;
  const std::int64_t ly = spec.dim == 2 ? 2 * static_cast<std::int64_t>(spec.ny) + 14 : 1;
  if (lx * ly > 30'000'000)
    throw resource_error("convolve: sample lattice exceeds the memory budget");

  // Lattice of field samples; index j corresponds to x0 + (2j-15)*eps/16.
  std::vector<double> F(static_cast<std::size_t>(lx * ly));
  mollify_detail::parallel_rows(
      static_cast<int>(ly), jobs, [&](int j2) {
        const double y = spec.dim == 2 ? spec.y0 + (2.0 * j2 - 15.0) * halfstep : 0.0;
        double* row = F.data() + static_cast<std::size_t>(j2) * lx;
        for (std::int64_t j1 = 0; j1 < lx; ++j1)
          row[j1] = f_ext(Vec2{spec.x0 + (2.0 * j1 - 15.0) * halfstep, y});
      });

  TensorGrid out = TensorGrid::make(spec.dim, spec.x0, spec.y0, spec.spacing,
                                    spec.spacing, spec.nx, spec.ny);
  std::optional<TensorGrid> g1, g2;
  if (want_grads) {
    g1 = out;
    if (spec.dim == 2) g2 = out;
  }

  if (spec.dim == 1) {
    for (int i = 0; i < spec.nx; ++i) {
      double v = 0.0, dv = 0.0;
      for (int m = 0; m < 8; ++m) {
        const double fp = F[static_cast<std::size_t>(2 * i + 7 - m)];
        const double fm = F[static_cast<std::size_t>(2 * i + 8 + m)];
        v += K.w1[m] * (fp + fm);
        dv += K.d[m] * (fp - fm);
      }
      out.at(i, 0) = v;
      if (want_grads) g1->at(i, 0) = dv;
    }
    return ScalarField::sampled(std::move(out), std::move(g1), std::nullopt);
  }

  mollify_detail::parallel_rows(spec.ny, jobs, [&](int i2) {
    for (int i1 = 0; i1 < spec.nx; ++i1) {
      double v = 0.0, d1 = 0.0, d2 = 0.0;
      for (int m1 = 0; m1 < 8; ++m1) {
        const std::int64_t jp1 = 2 * i1 + 7 - m1;
        const std::int64_t jm1 = 2 * i1 + 8 + m1;
        for (int m2 = 0; m2 < 8; ++m2) {
          const std::int64_t jp2 = 2 * i2 + 7 - m2;
          const std::int64_t jm2 = 2 * i2 + 8 + m2;
          const double fpp = F[static_cast<std::size_t>(jp2 * lx + jp1)];
          const double fpm = F[static_cast<std::size_t>(jm2 * lx + jp1)];
          const double fmp = F[static_cast<std::size_t>(jp2 * lx + jm1)];
          const double fmm = F[static_cast<std::size_t>(jm2 * lx + jm1)];
          v += K.w[m1][m2] * (fpp + fpm + fmp + fmm);
          // d/dx1 pairs across the first axis; d/dx2 across the second.
          d1 += K.d1[m1][m2] * ((fpp + fpm) - (fmp + fmm));
          d2 += K.d1[m2][m1] * ((fpp + fmp) - (fpm + fmm));
        }
      }
      out.at(i1, i2) = v;
      if (want_grads) {
        g1->at(i1, i2) = d1;
        g2->at(i1, i2) = d2;
      }
    }
  });
  return ScalarField::sampled(std::move(out), std::move(g1), std::move(g2));
}

// One level of the smoothing schedule: coefficients convolved with psi_{1/n}
// after the extension rule (A continued by the identity outside Omega; b, G, h
// continued by zero and cut off to Omega_n before smoothing).
struct AdmissibleLevel {
  int n = 0;  // 0 marks an exact closed-form level (no smoothing applied)
  double eps = 0.0;
  int dim = 2;
  CoefficientSet smoothed;
  // Distances between the level and the original data on the closure of D.
  double dist_A_sup = 0.0;
  double dist_b_Lp = 0.0;
  double dist_G_Lpp = 0.0;
  double dist_h_L1 = 0.0;

  // Wraps exact closed-form coefficients as a level; used when the data is
  // already smooth and the schedule is bypassed.
  static AdmissibleLevel exact(const CoefficientSet& coeffs) {
    AdmissibleLevel lv;
    lv.n = 0;
    lv.eps = 0.0;
    lv.dim = coeffs.dim;
    lv.smoothed = coeffs;
    return lv;
  }
};

struct AdmissibleOptions {
  MollifierKind kind = MollifierKind::standard_bump;
  double p = 4.0;  // exponent for the b-distance; G uses the conjugate
  int jobs = 1;
  int grid_margin = 2;
  // Opt-in disk cache for smoothed levels, keyed by (cache_key, n, kind).
  // cache_key must identify the coefficient set; callers with a config file
  // hash its text. Grids above the size cap are computed but not stored.
  std::string cache_dir;
  std::uint64_t cache_key = 0;
};

namespace mollify_detail {

inline std::string cache_path(const AdmissibleOptions& opt, int n,
                              const char* entry) {
  char key[32];
  std::snprintf(key, sizeof key, "%016llx",
                static_cast<unsigned long long>(opt.cache_key));
  return opt.cache_dir + "/" + key + "_n" + std::to_string(n) + "_" +
         to_string(opt.kind) + "_" + entry + ".csv";
}

// Grid dump: one header row with the lattice geometry, then one row per node
// with the value and any gradient samples.
inline void save_cached_field(const std::string& path, const ScalarField& f) {
  const TensorGrid* g = f.sample_grid();
  if (!g || g->v.size() > 2'000'000) return;  // size cap: recompute instead
  const TensorGrid* g1 = f.gradient_grid(0);
  const TensorGrid* g2 = f.gradient_grid(1);
  std::ofstream out(path + ".tmp", std::ios::trunc);
  if (!out) return;  // cache is best-effort; the computed field stands
  out << "dim,x0,y0,dx,dy,nx,ny,grads\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  out << g->dim << ',';
  put(g->x0);
  out << ',';
  put(g->y0);
  out << ',';
  put(g->dx);
  out << ',';
  put(g->dy);
  out << ',' << g->nx << ',' << g->ny << ',' << (g1 ? (g2 ? 2 : 1) : 0) << '\n';
  for (std::size_t i = 0; i < g->v.size(); ++i) {
    put(g->v[i]);
    if (g1) {
      out << ',';
      put(g1->v[i]);
    }
    if (g2) {
      out << ',';
      put(g2->v[i]);
    }
    out << '\n';
  }
  out.close();
  std::error_code ec;
  std::filesystem::rename(path + ".tmp", path, ec);
}

inline bool load_cached_field(const std::string& path, ScalarField& out_field) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  if (!std::getline(in, line) || line != "dim,x0,y0,dx,dy,nx,ny,grads")
    return false;
  int dim = 0, nx = 0, ny = 0, grads = 0;
  double x0 = 0.0, y0 = 0.0, dx = 0.0, dy = 0.0;
  char c;
  if (!std::getline(in, line)) return false;
  {
    std::istringstream hs(line);
    if (!(hs >> dim >> c >> x0 >> c >> y0 >> c >> dx >> c >> dy >> c >> nx >>
          c >> ny >> c >> grads))
      return false;
  }
  TensorGrid g, g1, g2;
  try {
    g = TensorGrid::make(dim, x0, y0, dx, dy, nx, ny);
  } catch (const validation_error&) {
    return false;
  }
  if (grads >= 1) g1 = g;
  if (grads >= 2) g2 = g;
  for (std::size_t i = 0; i < g.v.size(); ++i) {
    if (!std::getline(in, line)) return false;
    std::istringstream ls(line);
    if (!(ls >> g.v[i])) return false;
    if (grads >= 1 && !(ls >> c >> g1.v[i])) return false;
    if (grads >= 2 && !(ls >> c >> g2.v[i])) return false;
  }
  out_field = ScalarField::sampled(
      std::move(g),
      grads >= 1 ? std::optional<TensorGrid>(std::move(g1)) : std::nullopt,
      grads >= 2 ? std::optional<TensorGrid>(std::move(g2)) : std::nullopt);
  return true;
}

}  // namespace mollify_detail

// Builds the level-n smoothed coefficient set for D inside its container.
inline AdmissibleLevel admissible_sequence(const CoefficientSet& coeffs,
                                           const Domain& domain, int n,
                                           const AdmissibleOptions& opt = {}) {
  if (n < 1) throw validation_error("admissible_sequence: need n >= 1");
  const Domain& omega = domain.container();  // throws when unset
  const double delta = domain.gap();
  const double eps = 1.0 / n;
  if (eps >= delta)
    throw validation_error("admissible_sequence: cutoff would touch D (1/n >= gap)");
  const int dim = domain.dim();
  const Mollifier psi = make_mollifier(opt.kind, eps, dim);
  const ConvGridSpec spec = conv_grid_for(domain, eps, opt.grid_margin);
  const InnerCutoff cutoff = inner_cutoff(omega, n);

  const bool caching = !opt.cache_dir.empty();
  if (caching) std::filesystem::create_directories(opt.cache_dir);
  auto smooth_entry = [&](const ScalarField& f, bool identity_extension,
                          double diag, bool grads, const char* name) {
    if (caching) {
      ScalarField cached;
      if (mollify_detail::load_cached_field(
              mollify_detail::cache_path(opt, n, name), cached))
        return cached;
    }
    auto f_ext = [&f, &omega, &cutoff, identity_extension,
                  diag](const Vec2& x) -> double {
      if (identity_extension) return omega.contains(x) ? f(x) : diag;
      return cutoff.contains(x) ? f(x) : 0.0;
    };
    ScalarField smoothed = convolve(f_ext, psi, spec, grads, opt.jobs);
    if (caching)
      mollify_detail::save_cached_field(
          mollify_detail::cache_path(opt, n, name), smoothed);
    return smoothed;
  };

  AdmissibleLevel lv;
  lv.n = n;
  lv.eps = eps;
  lv.dim = dim;
  lv.smoothed.dim = dim;
  if (dim == 1) {
    lv.smoothed.A = MatrixField::scalar_1d(
        smooth_entry(coeffs.A.entry(0, 0), true, 1.0, true, "a11"));
    lv.smoothed.G = MatrixField::from_entries(
        smooth_entry(coeffs.G.entry(0, 0), false, 0.0, true, "g11"),
        ScalarField::constant(0.0), ScalarField::constant(0.0));
  } else {
    lv.smoothed.A = MatrixField::from_entries(
        smooth_entry(coeffs.A.entry(0, 0), true, 1.0, true, "a11"),
        smooth_entry(coeffs.A.entry(0, 1), true, 0.0, true, "a12"),
        smooth_entry(coeffs.A.entry(1, 1), true, 1.0, true, "a22"));
    lv.smoothed.G = MatrixField::from_entries(
        smooth_entry(coeffs.G.entry(0, 0), false, 0.0, true, "g11"),
        smooth_entry(coeffs.G.entry(0, 1), false, 0.0, true, "g12"),
        smooth_entry(coeffs.G.entry(1, 1), false, 0.0, true, "g22"));
  }
  lv.smoothed.b = VectorField(
      smooth_entry(coeffs.b.component(0), false, 0.0, false, "b1"),
      dim == 2 ? smooth_entry(coeffs.b.component(1), false, 0.0, false, "b2")
               : ScalarField::constant(0.0));
  lv.smoothed.h = VectorField(
      smooth_entry(coeffs.h.component(0), false, 0.0, false, "h1"),
      dim == 2 ? smooth_entry(coeffs.h.component(1), false, 0.0, false, "h2")
               : ScalarField::constant(0.0));

  // Distances on the closure of D, for the convergence report.
  {
    SplitMix rng(0xd15fa5eull);
    double sup = 0.0;
    for (int s = 0; s < 4000; ++s) {
      const Vec2 x = sample_point(domain, rng);
      sup = std::max(sup, spectral_norm(lv.smoothed.A(x) - coeffs.A(x), dim));
    }
    lv.dist_A_sup = sup;
    const double p = opt.p, pp = p / (p - 1.0);
    const double hq = domain.diameter() / 64.0;
    const double ib = fields_detail::integrate(domain, hq, [&](const Vec2& x) {
      return std::pow((lv.smoothed.b(x) - coeffs.b(x)).norm(), p);
    });
    const double ig = fields_detail::integrate(domain, hq, [&](const Vec2& x) {
      return std::pow(max_entry_norm(lv.smoothed.G(x) - coeffs.G(x), dim), pp);
    });
    lv.dist_h_L1 = fields_detail::integrate(domain, hq, [&](const Vec2& x) {
      return (lv.smoothed.h(x) - coeffs.h(x)).norm();
    });
    lv.dist_b_Lp = std::pow(ib, 1.0 / p);
    lv.dist_G_Lpp = std::pow(ig, 1.0 / pp);
  }
  return lv;
}

}  // namespace ddf
