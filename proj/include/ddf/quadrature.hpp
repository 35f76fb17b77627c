// Shared quadrature rules: Gauss-Legendre nodes, composite interval rules,
// and a polar tensor rule on disks (Gauss in radius, trapezoid in angle)
// that is spectrally accurate for integrands smooth in polar coordinates.
#pragma once

#include <vector>

#include "ddf/core.hpp"

namespace ddf {

struct QuadNode1D {
  double x = 0.0;
  double w = 0.0;
};

// Gauss-Legendre rule on [-1, 1] by Newton iteration on the Legendre
// recurrence; deterministic and accurate to machine precision for n <= 64.
inline std::vector<QuadNode1D> gauss_legendre(int n) {
  if (n < 1 || n > 64) throw validation_error("gauss_legendre: need 1 <= n <= 64");
  std::vector<QuadNode1D> out(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    out[static_cast<std::size_t>(i)] = {-x, w};
    out[static_cast<std::size_t>(n - 1 - i)] = {x, w};
  }
  if (n % 2 == 1) out[static_cast<std::size_t>(n / 2)].x = 0.0;
  return out;
}

// Composite Gauss rule over [a, b] with `cells` equal subintervals.
template <class F>
double integrate_interval(double a, double b, int cells, int order, F&& f) {
  const auto gl = gauss_legendre(order);
  const double h = (b - a) / cells;
  double total = 0.0;
  for (int c = 0; c < cells; ++c) {
    const double mid = a + (c + 0.5) * h;
    for (const auto& q : gl) total += 0.5 * h * q.w * f(mid + 0.5 * h * q.x);
  }
  return total;
}

struct QuadNode2D {
  Vec2 x;
  double w = 0.0;
};

// Tensor rule on the disk B(center, R): Gauss-Legendre in radius against the
// weight r dr, uniform trapezoid in angle.
inline std::vector<QuadNode2D> polar_disk_rule(const Vec2& center, double R,
                                               int nr, int ntheta) {
  if (!(R > 0.0)) throw validation_error("polar_disk_rule: need R > 0");
  if (nr < 1 || ntheta < 4) throw validation_error("polar_disk_rule: rule too small");
  const auto gl = gauss_legendre(nr);
  std::vector<QuadNode2D> nodes;
  nodes.reserve(static_cast<std::size_t>(nr) * ntheta);
  const double dth = 2.0 * pi / ntheta;
  for (const auto& q : gl) {
    const double r = 0.5 * R * (q.x + 1.0);
    const double wr = 0.5 * R * q.w * r;  // includes the polar Jacobian
    for (int k = 0; k < ntheta; ++k) {
      const double th = k * dth;
      nodes.push_back({center + Vec2{r * std::cos(th), r * std::sin(th)}, wr * dth});
    }
  }
  return nodes;
}

template <class F>
double integrate_disk_polar(const Vec2& center, double R, int nr, int ntheta,
                            F&& f) {
  double total = 0.0;
  for (const auto& q : polar_disk_rule(center, R, nr, ntheta)) total += q.w * f(q.x);
  return total;
}

}  // namespace ddf
