#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

namespace sphmean {

/// How samples continue to the left of index 0 (the t = 0 or xn = 0 node).
enum class Reflect {
  None,  // one-sided stencils at the boundary
  Even,  // y(-s) = y(s)
  Odd,   // y(-s) = -y(s)
};

/// Four-point Lagrange stencil in fractional-index space. Indices may be -1
/// when the left side is reflected; `start + 3` never exceeds n - 1.
struct CubicStencil {
  std::ptrdiff_t start = 0;
  std::array<double, 4> w{};
};

inline CubicStencil cubic_stencil(double s, std::size_t n, Reflect left) noexcept {
  const auto last_start = static_cast<std::ptrdiff_t>(n) - 4;
  auto start = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
  const std::ptrdiff_t first_start = left == Reflect::None ? 0 : -1;
  if (start < first_start) start = first_start;
  if (start > last_start) start = last_start;
  const double u = s - static_cast<double>(start);
  const double u1 = u - 1.0, u2 = u - 2.0, u3 = u - 3.0;
  return {start,
          {-u1 * u2 * u3 / 6.0, u * u2 * u3 / 2.0, -u * u1 * u3 / 2.0, u * u1 * u2 / 6.0}};
}

inline double sample_reflected(std::span<const double> y, std::ptrdiff_t k,
                               Reflect left) noexcept {
  if (k >= 0) return y[static_cast<std::size_t>(k)];
  const double v = y[static_cast<std::size_t>(-k)];
  return left == Reflect::Odd ? -v : v;
}

inline double apply_stencil(const CubicStencil& st, std::span<const double> y,
                            Reflect left) noexcept {
  double acc = 0.0;
  for (int m = 0; m < 4; ++m) acc += st.w[m] * sample_reflected(y, st.start + m, left);
  return acc;
}

/// Cubic interpolation of uniformly spaced samples y_j = y(origin + j*step).
/// Queries left of the origin use the reflection rule; queries past the last
/// sample extrapolate from the final stencil, so callers keep x <= back().
/// Needs y.size() >= 4.
inline double cubic_interpolate(std::span<const double> y, double origin, double step,
                                double x, Reflect left) noexcept {
  double s = (x - origin) / step;
  double sign = 1.0;
  if (s < 0.0 && left != Reflect::None) {
    s = -s;
    if (left == Reflect::Odd) sign = -1.0;
  }
  return sign * apply_stencil(cubic_stencil(s, y.size(), left), y, left);
}

}  // namespace sphmean
