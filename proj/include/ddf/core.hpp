// Small dense math types shared by every module: 2-vectors, symmetric
// 2x2 matrices, and the error types thrown across the library.
// Dimension 1 problems reuse the same types with the y / off-diagonal
// slots ignored (callers pass dim explicitly where it matters).
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace ddf {

/// Invalid input: a precondition or type invariant was violated.
class validation_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure at run time (singular system, NaN, non-convergence).
class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Request exceeds a hard memory or time budget.
class resource_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  double norm_sq() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Symmetric 2x2 matrix; 1D fields use a11 only.
struct SymMat2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  SymMat2() = default;
  SymMat2(double m11, double m12, double m22) : a11(m11), a12(m12), a22(m22) {}

  static SymMat2 identity(int dim) {
    return dim == 1 ? SymMat2{1.0, 0.0, 0.0} : SymMat2{1.0, 0.0, 1.0};
  }

  Vec2 apply(const Vec2& v) const {
    return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y};
  }
  // v^T M v
  double quad(const Vec2& v) const {
    return a11 * v.x * v.x + 2.0 * a12 * v.x * v.y + a22 * v.y * v.y;
  }
  double trace(int dim) const { return dim == 1 ? a11 : a11 + a22; }

  SymMat2 operator+(const SymMat2& o) const {
    return {a11 + o.a11, a12 + o.a12, a22 + o.a22};
  }
  SymMat2 operator-(const SymMat2& o) const {
    return {a11 - o.a11, a12 - o.a12, a22 - o.a22};
  }
  SymMat2 operator*(double s) const { return {a11 * s, a12 * s, a22 * s}; }
};

// Eigenvalue range of a symmetric matrix, closed form.
struct EigenRange {
  double lo = 0.0;
  double hi = 0.0;
};

inline EigenRange eigen_range(const SymMat2& m, int dim) {
  if (dim == 1) return {m.a11, m.a11};
  const double mean = 0.5 * (m.a11 + m.a22);
  const double disc = std::hypot(0.5 * (m.a11 - m.a22), m.a12);
  return {mean - disc, mean + disc};
}

// Spectral norm; for symmetric matrices the largest |eigenvalue|.
inline double spectral_norm(const SymMat2& m, int dim) {
  const EigenRange r = eigen_range(m, dim);
  return std::max(std::abs(r.lo), std::abs(r.hi));
}

inline double max_entry_norm(const SymMat2& m, int dim) {
  if (dim == 1) return std::abs(m.a11);
  return std::max({std::abs(m.a11), std::abs(m.a12), std::abs(m.a22)});
}

inline bool finite(double v) { return std::isfinite(v); }
inline bool finite(const Vec2& v) {
  return std::isfinite(v.x) && std::isfinite(v.y);
}
inline bool finite(const SymMat2& m) {
  return std::isfinite(m.a11) && std::isfinite(m.a12) && std::isfinite(m.a22);
}

constexpr double pi = 3.14159265358979323846;

// Deterministic 64-bit mix (splitmix64), used for seeded sampling streams
// and content hashes for the level cache.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Small deterministic PRNG for sampling certificates and property tests.
class SplitMix {
public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }
  // uniform in [0,1)
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
  std::uint64_t state_;
};

}  // namespace ddf
