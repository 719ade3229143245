#include "sphmean/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sphmean/error.hpp"
#include "sphmean/interp.hpp"

namespace sphmean::calculus {

namespace {

// Derivative at x0 of the Lagrange polynomial through (x_a, y_a).
double lagrange_derivative(std::span<const double> x, std::span<const double> y, double x0) {
  const std::size_t q = x.size();
  double d = 0.0;
  for (std::size_t a = 0; a < q; ++a) {
    double la = 0.0;
    for (std::size_t b = 0; b < q; ++b) {
      if (b == a) continue;
      double term = 1.0 / (x[a] - x[b]);
      for (std::size_t c = 0; c < q; ++c) {
        if (c == a || c == b) continue;
        term *= (x0 - x[c]) / (x[a] - x[c]);
      }
      la += term;
    }
    d += y[a] * la;
  }
  return d;
}

}  // namespace

void d_dtau(std::span<const double> h, double step, std::span<double> out, int degree) {
  const std::size_t n = h.size();
  const auto q = static_cast<std::size_t>(std::max(degree, 1)) + 1;
  if (n < q)
    throw Error(ErrorCode::InvalidArgument, "d_dtau needs at least degree + 1 samples");
  if (out.size() != n) throw Error(ErrorCode::InvalidArgument, "d_dtau output size mismatch");
  // Work in index units: tau_j = j^2 exactly representable, rescale at the end.
  std::vector<double> xs(q), ys(q);
  const double scale = 1.0 / (step * step);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t start = j >= q / 2 ? j - q / 2 : 0;
    start = std::min(start, n - q);
    for (std::size_t m = 0; m < q; ++m) {
      const auto idx = static_cast<double>(start + m);
      xs[m] = idx * idx;
      ys[m] = h[start + m];
    }
    const auto jj = static_cast<double>(j);
    out[j] = lagrange_derivative(xs, ys, jj * jj) * scale;
  }
}

EvenProfile apply_D(const EvenProfile& h) {
  if (h.size() < 4) throw Error(ErrorCode::InvalidArgument, "apply_D needs >= 4 samples");
  EvenProfile out{h.step, std::vector<double>(h.size())};
  d_dtau(h.samples, h.step, out.samples, 2);
  return out;
}

EvenProfile apply_D_powers(const EvenProfile& h, int m) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "apply_D_powers needs m >= 1");
  if (h.size() < static_cast<std::size_t>(2 * m + 2))
    throw Error(ErrorCode::InvalidArgument, "apply_D_powers needs >= 2m + 2 samples");
  const int degree = std::max(2, m);
  EvenProfile cur = h;
  EvenProfile next{h.step, std::vector<double>(h.size())};
  for (int k = 0; k < m; ++k) {
    d_dtau(cur.samples, h.step, next.samples, degree);
    std::swap(cur.samples, next.samples);
  }
  return cur;
}

EvenProfile abel_forward(const EvenProfile& phi, int n) {
  if (n < 2 || n % 2 != 0)
    throw Error(ErrorCode::UnsupportedDimension, "abel_forward needs an even dimension n >= 2");
  if (phi.size() < 4) throw Error(ErrorCode::InvalidArgument, "abel_forward needs >= 4 samples");
  EvenProfile out{phi.step, std::vector<double>(phi.size(), 0.0)};
  const std::span<const double> y(phi.samples);
  for (std::size_t j = 1; j < phi.size(); ++j) {
    const double t = phi.t(j);
    const std::size_t panels = std::max<std::size_t>(16, j);
    out.samples[j] = gauss_legendre_composite(
        [&](double psi) {
          const double r = t * std::sin(psi);
          return std::pow(r, n - 1) * cubic_interpolate(y, 0.0, phi.step, r, Reflect::Even);
        },
        0.0, std::numbers::pi / 2.0, panels);
  }
  return out;
}

std::vector<double> divide_by_t(const GridField& F, std::string_view op, bool check_order) {
  F.require_real_2d(op);
  F.require_finite(op);
  const Axis& xa = F.axis(0);
  const Axis& ta = F.axis(1);
  if (ta.origin != 0.0 || ta.count < 3)
    throw Error(ErrorCode::InvalidArgument, std::string(op) + " needs a t axis starting at 0");
  const std::size_t nt = ta.count;
  double peak = 0.0;
  for (double v : F.values()) peak = std::max(peak, std::abs(v));

  std::vector<double> q(F.size(), 0.0);
  double q_peak = 0.0;
  for (std::size_t i = 0; i < xa.count; ++i) {
    if (check_order && std::abs(F(i, 0)) > 1e-10 * peak)
      throw Error(ErrorCode::VanishingOrderTooLow,
                  std::string(op) + ": data does not vanish at t = 0");
    for (std::size_t j = 1; j < nt; ++j) {
      q[i * nt + j] = F(i, j) / ta.at(j);
      q_peak = std::max(q_peak, std::abs(q[i * nt + j]));
    }
  }
  // F/t = O(t) grows roughly linearly over the first nodes; a quotient that
  // does not vanish stays flat (or grows toward t = 0). Comparing against the
  // largest of the first few nodes tolerates cancellation at any single one.
  const std::size_t probe = std::min<std::size_t>(8, nt - 1);
  for (std::size_t i = 0; i < xa.count && check_order; ++i) {
    const double q1 = std::abs(q[i * nt + 1]);
    double q_near = 0.0;
    for (std::size_t j = 2; j <= probe; ++j) q_near = std::max(q_near, std::abs(q[i * nt + j]));
    if (q1 > 1e-6 * q_peak && q1 > 0.75 * q_near)
      throw Error(ErrorCode::VanishingOrderTooLow,
                  std::string(op) + ": F/t does not vanish at t = 0");
  }
  return q;
}

double backproject_kernel_integral(const GridField& W, double xp, double xn,
                                   const KernelIntegralOptions& opts) {
  W.require_real_2d("backproject_kernel_integral");
  if (!(xn > 0.0))
    throw Error(ErrorCode::NonPositiveXn, "backproject_kernel_integral needs xn > 0");
  const Axis& ya = W.axis(0);
  const Axis& ta = W.axis(1);
  if (ta.origin != 0.0)
    throw Error(ErrorCode::InvalidArgument, "W needs a t axis starting at 0");
  const double t_max = std::min(opts.t_max, ta.back());
  const double panel = std::max(opts.panel_cells, 0.25) * ta.step;

  double total = 0.0;
  for (std::size_t i = 0; i < ya.count; ++i) {
    const double dy = ya.at(i) - xp;
    if (std::abs(dy) > opts.aperture) continue;
    const double rho2 = xn * xn + dy * dy;
    const double smax2 = t_max * t_max - rho2;
    if (smax2 <= 0.0) continue;
    const double smax = std::sqrt(smax2);
    const auto panels = static_cast<std::size_t>(std::max(2.0, std::ceil(smax / panel)));
    const auto col = W.row(i);
    const double inner = gauss_legendre_composite(
        [&](double sigma) {
          const double t = std::sqrt(sigma * sigma + rho2);
          return cubic_interpolate(col, 0.0, ta.step, t, Reflect::None) / t;
        },
        0.0, smax, panels);
    const double w = (i == 0 || i + 1 == ya.count) ? 0.5 * ya.step : ya.step;
    total += w * inner;
  }
  return total;
}

}  // namespace sphmean::calculus
