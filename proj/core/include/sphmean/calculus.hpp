#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "sphmean/grid.hpp"

namespace sphmean::calculus {

/// Samples of a smooth even function on t_j = j * step, j >= 0. The stored
/// half represents the even extension.
struct EvenProfile {
  double step = 1.0;
  std::vector<double> samples;

  std::size_t size() const noexcept { return samples.size(); }
  double t(std::size_t j) const noexcept { return static_cast<double>(j) * step; }
};

/// d/d(tau) on the non-uniform nodes tau_j = (j * step)^2 using a
/// (degree + 1)-point Lagrange stencil, centred where possible. `out` may not
/// alias `h`.
void d_dtau(std::span<const double> h, double step, std::span<double> out, int degree = 2);

/// (Dh)(t) = h'(t) / (2t), i.e. d/d(t^2). Exact on t^0, t^2, t^4; the t = 0
/// value is the even-extension limit h''(0)/2 from the first three nodes.
EvenProfile apply_D(const EvenProfile& h);

/// D^m h by m passes of a (max(2, m) + 1)-point tau stencil; exact on t^(2m).
EvenProfile apply_D_powers(const EvenProfile& h, int m);

/// t -> integral_0^t r^(n-1) (t^2 - r^2)^(-1/2) phi(r) dr, evaluated on the
/// profile's own grid. The substitution r = t sin(psi) removes the endpoint
/// singularity; psi is integrated with composite 4-point Gauss-Legendre
/// panels whose count grows with the grid index. phi between samples comes
/// from even-reflected cubic interpolation.
EvenProfile abel_forward(const EvenProfile& phi, int n);

struct KernelIntegralOptions {
  double t_max = std::numeric_limits<double>::infinity();     // time truncation
  double aperture = std::numeric_limits<double>::infinity();  // |y'| <= aperture
  double panel_cells = 2.0;  // sigma panel width in units of the t step
};

/// Integral over y' and t of H(s) s^(-1/2) W(x' + y', t), s = t^2 - xn^2 - |y'|^2,
/// for W sampled on (y', t) with the t axis starting at 0. The t integral is
/// taken in sigma with sigma^2 = s, where the integrand W/t is smooth; y' uses
/// the trapezoid rule over the sampled columns. Throws NonPositiveXn for xn <= 0.
double backproject_kernel_integral(const GridField& W, double xp, double xn,
                                   const KernelIntegralOptions& opts = {});

/// q(x', t) = F(x', t) / t over an (x', t) field with q = 0 at t = 0.
/// Throws VanishingOrderTooLow when F does not vanish to order >= 2 at t = 0:
/// a nonzero F(x', 0), or |q| at the first node above 3/4 of its largest value
/// over the next seven, on columns where it is above roundoff.
std::vector<double> divide_by_t(const GridField& F, std::string_view op, bool check_order = true);

/// Nodes and weights of the 4-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre4 {
  static constexpr std::array<double, 4> x = {-0.8611363115940526, -0.3399810435848563,
                                              0.3399810435848563, 0.8611363115940526};
  static constexpr std::array<double, 4> w = {0.3478548451374538, 0.6521451548625461,
                                              0.6521451548625461, 0.3478548451374538};
};

/// Composite 4-point Gauss-Legendre over [a, b] with `panels` equal panels.
template <typename F>
double gauss_legendre_composite(F&& f, double a, double b, std::size_t panels) {
  const double h = (b - a) / static_cast<double>(panels);
  double acc = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * h;
    double part = 0.0;
    for (int k = 0; k < 4; ++k) part += GaussLegendre4::w[k] * f(mid + 0.5 * h * GaussLegendre4::x[k]);
    acc += part;
  }
  return acc * 0.5 * h;
}

}  // namespace sphmean::calculus
