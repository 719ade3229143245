#include "sphmean/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "fft.hpp"
#include "sphmean/calculus.hpp"
#include "sphmean/error.hpp"
#include "sphmean/forward.hpp"
#include "sphmean/interp.hpp"

namespace sphmean::spectral {

namespace {

std::size_t zero_index(const Axis& pn) {
  const double s = -pn.origin / pn.step;
  const double r = std::round(s);
  if (std::abs(s - r) > 1e-6 || r < 0.0 || r >= static_cast<double>(pn.count))
    throw Error(ErrorCode::GridMismatch, "pn axis has no node at 0");
  return static_cast<std::size_t>(r);
}

}  // namespace

ZGrid default_zgrid(double t_max, double pn_step) {
  return ZGrid{pn_step, t_max * t_max + 16.0 * pn_step, 2};
}

GridField zconvert(const GridField& F, const ZGrid& grid) {
  const std::vector<double> q = calculus::divide_by_t(F, "zconvert");
  const Axis& xa = F.axis(0);
  const Axis& ta = F.axis(1);
  const double t_max = ta.back();
  if (!(grid.pn_step > 0.0) || grid.pad_xp < 1)
    throw Error(ErrorCode::InvalidArgument, "zconvert needs pn_step > 0 and pad_xp >= 1");
  if (grid.P < t_max * t_max)
    throw Error(ErrorCode::InvalidArgument, "zconvert needs P >= t_max^2");

  const std::size_t nx = xa.count, nt = ta.count;
  const std::size_t n1 = forward::next_fast_size(grid.pad_xp * nx);
  const std::size_t off = (n1 - nx) / 2;
  const std::size_t half = forward::next_fast_size(static_cast<std::size_t>(std::ceil(grid.P / grid.pn_step)));
  const std::size_t n2 = 2 * half;
  const Axis pp{"x'", xa.origin - static_cast<double>(off) * xa.step, xa.step, n1, Parity::None};
  const Axis pn{"pn", -static_cast<double>(half) * grid.pn_step, grid.pn_step, n2, Parity::None};

  const double p_top = t_max * t_max * (1.0 + 1e-12);
  std::vector<double> g(n1 * n2, 0.0);
  for (std::size_t i = 0; i < nx; ++i) {
    const std::span<const double> row(q.data() + i * nt, nt);
    double* out = g.data() + (off + i) * n2;
    for (std::size_t k = half + 1; k < n2; ++k) {
      const double p = pn.at(k);
      if (p > p_top) break;
      out[k] = cubic_interpolate(row, 0.0, ta.step, std::sqrt(p), Reflect::None);
    }
  }
  nlohmann::json meta = F.meta();
  meta["role"] = "half_space";
  meta["t_max"] = t_max;
  return GridField({pp, pn}, std::move(g), std::move(meta));
}

GridField zinvert(const GridField& g, const Axis& xp, const Axis& xn) {
  g.require_real_2d("zinvert");
  g.require_finite("zinvert");
  xp.validate();
  xn.validate();
  const Axis& pp = g.axis(0);
  const Axis& pn = g.axis(1);
  const std::size_t k0 = zero_index(pn);
  if (xn.origin < 0.0) throw Error(ErrorCode::NonPositiveXn, "zinvert needs xn >= 0");
  if (xn.back() * xn.back() > pn.back())
    throw Error(ErrorCode::GridMismatch, "xn range exceeds the pn axis");
  if (std::abs(xp.step - pp.step) > 1e-12 * pp.step)
    throw Error(ErrorCode::GridMismatch, "x' step differs from the p' step");
  const double s0 = (xp.origin - pp.origin) / pp.step;
  const double r0 = std::round(s0);
  if (std::abs(s0 - r0) > 1e-6 || r0 < 0.0 || r0 + static_cast<double>(xp.count) > static_cast<double>(pp.count))
    throw Error(ErrorCode::GridMismatch, "x' nodes are not on the p' grid");
  const auto col0 = static_cast<std::size_t>(r0);

  // g / sqrt(p) is smooth at p = 0 for admissible data; interpolate that and
  // use f = xn^2 (g / sqrt(p))(xn^2).
  const std::size_t nr = pn.count - k0 - 1;
  if (nr < 4) throw Error(ErrorCode::GridMismatch, "pn axis has too few positive nodes");
  std::vector<double> r(nr);
  std::vector<double> out(xp.count * xn.count, 0.0);
  for (std::size_t i = 0; i < xp.count; ++i) {
    const auto row = g.row(col0 + i);
    for (std::size_t k = 0; k < nr; ++k) r[k] = row[k0 + 1 + k] / std::sqrt(pn.at(k0 + 1 + k));
    for (std::size_t j = 0; j < xn.count; ++j) {
      const double x = xn.at(j);
      if (x == 0.0) continue;
      out[i * xn.count + j] = x * x * cubic_interpolate(r, pn.step, pn.step, x * x, Reflect::None);
    }
  }
  Axis xn_axis = xn;
  if (xn.origin == 0.0) xn_axis.parity = Parity::Even;
  nlohmann::json meta = g.meta();
  meta["role"] = "spatial";
  return GridField({xp, xn_axis}, std::move(out), std::move(meta));
}

std::complex<double> multiplier(double xi_p, double xi_n, int sign) {
  if (xi_n == 0.0) return 1.0;
  const double s = sign >= 0 ? 1.0 : -1.0;
  return std::polar(1.0, s * xi_p * xi_p / (4.0 * xi_n));
}

MultiplierResult apply_N(const GridField& g, int sign, const ApplyNOptions& opts) {
  g.require_real_2d("apply_N");
  g.require_finite("apply_N");
  const Axis& pp = g.axis(0);
  const Axis& pn = g.axis(1);
  const std::size_t n1 = pp.count, n2 = pn.count;
  const auto v = g.values();

  if (opts.check_support) {
    double total = 0.0, edge = 0.0;
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t k = 0; k < n2; ++k) {
        const double e = v[i * n2 + k] * v[i * n2 + k];
        total += e;
        if (i < 3 || i + 3 >= n1 || k < 3 || k + 3 >= n2) edge += e;
      }
    if (edge > 1e-8 * total)
      throw Error(ErrorCode::SupportLeak, "input energy near the box boundary would wrap around");
  }

  std::vector<std::complex<double>> spec(v.begin(), v.end());
  detail::fft_2d(spec, n1, n2, detail::FftDirection::Forward);
  const double dxi_n = 2.0 * std::numbers::pi / (static_cast<double>(n2) * pn.step);
  const double norm = 1.0 / (static_cast<double>(n1) * static_cast<double>(n2));
  for (std::size_t k1 = 0; k1 < n1; ++k1) {
    const double xi_p = detail::dft_frequency(k1, n1, pp.step);
    for (std::size_t k2 = 0; k2 < n2; ++k2) {
      // The Nyquist row is its own mirror image, so it gets the xi_n = 0 value.
      if (n2 % 2 == 0 && k2 == n2 / 2) {
        spec[k1 * n2 + k2] *= norm;
        continue;
      }
      const double xi_n = detail::dft_frequency(k2, n2, pn.step);
      std::complex<double> m = multiplier(xi_p, xi_n, sign);
      if (opts.crossfade_cells > 0.0 && xi_n != 0.0) {
        const double u = std::min(1.0, std::abs(xi_n) / (opts.crossfade_cells * dxi_n));
        const double ramp = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
        if (ramp < 1.0)
          m = std::polar(1.0, (sign >= 0 ? 1.0 : -1.0) * xi_p * xi_p / (4.0 * xi_n) * ramp);
      }
      spec[k1 * n2 + k2] *= m * norm;
    }
  }
  detail::fft_2d(spec, n1, n2, detail::FftDirection::Backward);

  MultiplierResult res;
  std::vector<double> re(spec.size());
  double im2 = 0.0, re2 = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    re[k] = spec[k].real();
    re2 += re[k] * re[k];
    im2 += spec[k].imag() * spec[k].imag();
    res.max_imag = std::max(res.max_imag, std::abs(spec[k].imag()));
  }
  res.imag_ratio = re2 > 0.0 ? std::sqrt(im2 / re2) : 0.0;
  nlohmann::json meta = g.meta();
  meta["multiplier_sign"] = sign >= 0 ? 1 : -1;
  res.field = GridField(g.axes(), std::move(re), std::move(meta));
  return res;
}

std::complex<double> regularized_symbol(double xi_p, double xi_n, double eps) {
  using C = std::complex<double>;
  const double pi = std::numbers::pi;
  const C z1(eps * eps + eps, xi_n);
  const C z2(eps, xi_n);
  const C f_eps = std::sqrt(pi) / std::sqrt(z1) * std::exp(-xi_p * xi_p / (4.0 * z1)) *
                  std::sqrt(pi) / std::sqrt(z2);
  return C(0.0, xi_n) * f_eps / pi;
}

std::vector<MultiplierDeviation> verify_multiplier(const Axis& xi_p, const Axis& xi_n,
                                                   std::span<const double> eps_list) {
  xi_p.validate();
  xi_n.validate();
  std::vector<MultiplierDeviation> rows;
  rows.reserve(eps_list.size());
  for (double eps : eps_list) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps values must be positive");
    double worst = 0.0;
    for (std::size_t j = 0; j < xi_n.count; ++j) {
      const double b = xi_n.at(j);
      if (std::abs(b) < 1e-12 * xi_n.step) continue;
      for (std::size_t i = 0; i < xi_p.count; ++i) {
        const double a = xi_p.at(i);
        worst = std::max(worst, std::abs(regularized_symbol(a, b, eps) - multiplier(a, b, +1)));
      }
    }
    rows.push_back({eps, worst});
  }
  return rows;
}

void write_csv(std::span<const MultiplierDeviation> rows, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string());
  os << "eps,max_abs_deviation\n" << std::setprecision(17);
  for (const auto& r : rows) os << r.eps << ',' << r.max_abs_deviation << '\n';
}

}  // namespace sphmean::spectral
