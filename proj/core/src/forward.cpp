#include "sphmean/forward.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "fft.hpp"
#include "sphmean/calculus.hpp"
#include "sphmean/error.hpp"
#include "sphmean/parallel.hpp"

namespace sphmean::forward {

namespace {

void require_t_axis(const Axis& t, std::string_view op) {
  t.validate();
  if (t.origin != 0.0)
    throw Error(ErrorCode::InvalidArgument, std::string(op) + " needs a t axis starting at 0");
}

// Integer offset of `x` on the grid (origin, step), or throws GridMismatch.
std::ptrdiff_t grid_offset(double x, double origin, double step, std::string_view what) {
  const double s = (x - origin) / step;
  const double r = std::round(s);
  if (std::abs(s - r) > 1e-6)
    throw Error(ErrorCode::GridMismatch, std::string(what) + " is not on the field grid");
  return static_cast<std::ptrdiff_t>(r);
}

}  // namespace

std::size_t circle_nodes(double t, double width) {
  return std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(32.0 * t * std::sqrt(width))));
}

GridField spherical_means(const Phantom& p, const Axis& xp, const Axis& t) {
  p.validate();
  xp.validate();
  require_t_axis(t, "spherical_means");
  const std::size_t nx = xp.count, nt = t.count;
  std::vector<double> out(nx * nt, 0.0);
  const double reach = p.radius;

  parallel_for(nx, [&](std::size_t i) {
    const double x0 = xp.at(i);
    const double dist = std::abs(x0 - p.center_xp);
    for (std::size_t j = 0; j < nt; ++j) {
      const double r = t.at(j);
      if (r == 0.0) {
        out[i * nt + j] = eval_phantom(p, x0, 0.0);
        continue;
      }
      // Circle misses the support ball.
      if (r >= dist + reach || r <= dist - reach) continue;
      const std::size_t n = circle_nodes(r, p.width);
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        acc += eval_phantom(p, x0 + r * std::cos(theta), r * std::sin(theta));
      }
      out[i * nt + j] = acc / static_cast<double>(n);
    }
  });

  Axis t_axis = t;
  t_axis.parity = Parity::Even;
  nlohmann::json meta = {{"role", "mean_data"}, {"phantom", to_json(p)}};
  return GridField({xp, t_axis}, std::move(out), std::move(meta));
}

GridField mean_to_trace(const GridField& means, int n) {
  means.require_real_2d("mean_to_trace");
  means.require_finite("mean_to_trace");
  if (n != 2) throw Error(ErrorCode::UnsupportedDimension, "mean_to_trace supports n = 2 only");
  const Axis& xp = means.axis(0);
  const Axis& t = means.axis(1);
  require_t_axis(t, "mean_to_trace");
  const std::size_t nx = xp.count, nt = t.count;
  std::vector<double> out(nx * nt, 0.0);

  // u = 2t D(A) with A the Abel integral of the means. Writing A = t B with B
  // even and smooth, 2t D(t B) = B + 2 t^2 D(B).
  parallel_for(nx, [&](std::size_t i) {
    const auto row = means.row(i);
    calculus::EvenProfile phi{t.step, std::vector<double>(row.begin(), row.end())};
    const calculus::EvenProfile a = calculus::abel_forward(phi, 2);
    calculus::EvenProfile b{t.step, std::vector<double>(nt)};
    b.samples[0] = phi.samples[0];
    for (std::size_t j = 1; j < nt; ++j) b.samples[j] = a.samples[j] / t.at(j);
    const calculus::EvenProfile db = calculus::apply_D(b);
    for (std::size_t j = 0; j < nt; ++j) {
      const double tj = t.at(j);
      out[i * nt + j] = b.samples[j] + 2.0 * tj * tj * db.samples[j];
    }
  });

  Axis t_axis = t;
  t_axis.parity = Parity::Even;
  nlohmann::json meta = means.meta();
  meta["role"] = "trace_data";
  meta["route"] = "abel";
  return GridField({xp, t_axis}, std::move(out), std::move(meta));
}

GridField wave_trace_spectral(const GridField& f_in, const Axis& t, const Axis& window,
                              const WaveTraceOptions& opts) {
  f_in.require_real_2d("wave_trace_spectral");
  f_in.require_finite("wave_trace_spectral");
  require_t_axis(t, "wave_trace_spectral");
  window.validate();
  const GridField f = f_in.axis(1).parity == Parity::Even ? materialize_even(f_in, 1) : f_in;
  const Axis& ax = f.axis(0);
  const Axis& an = f.axis(1);
  const std::size_t n1 = ax.count, n2 = an.count;

  if (std::abs(window.step - ax.step) > 1e-12 * ax.step)
    throw Error(ErrorCode::GridMismatch, "window step differs from the field x' step");
  const std::ptrdiff_t w0 = grid_offset(window.origin, ax.origin, ax.step, "window origin");
  if (w0 < 0 || static_cast<std::size_t>(w0) + window.count > n1)
    throw Error(ErrorCode::GridMismatch, "window extends past the field x' range");
  const std::ptrdiff_t i0 = grid_offset(0.0, an.origin, an.step, "xn = 0");
  if (i0 < 0 || static_cast<std::size_t>(i0) >= n2)
    throw Error(ErrorCode::GridMismatch, "the xn axis does not contain 0");

  if (opts.check_wraparound) {
    double a = INFINITY, b = -INFINITY, sn = 0.0;
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t j = 0; j < n2; ++j)
        if (f(i, j) != 0.0) {
          a = std::min(a, ax.at(i));
          b = std::max(b, ax.at(i));
          sn = std::max(sn, std::abs(an.at(j)));
        }
    if (a <= b) {
      const double t_max = t.back();
      const double px = static_cast<double>(n1) * ax.step;
      const double pn = static_cast<double>(n2) * an.step;
      const double need_x = t_max + std::max(window.back() - a, b - window.origin);
      if (px <= need_x || pn - sn <= t_max)
        throw Error(ErrorCode::BoxTooSmall,
                    "periodic images of the support reach the trace window before t_max");
    }
  }

  std::vector<std::complex<double>> spec(n1 * n2);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] = f.values()[k];
  detail::fft_2d(spec, n1, n2, detail::FftDirection::Forward);

  // Fold the evaluation at xn = 0 and the normalization into the spectrum.
  std::vector<double> wavenumber(n1 * n2);
  const double norm = 1.0 / (static_cast<double>(n1) * static_cast<double>(n2));
  for (std::size_t k2 = 0; k2 < n2; ++k2) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k2 * static_cast<std::size_t>(i0) % n2) /
                         static_cast<double>(n2);
    const std::complex<double> phase = std::polar(norm, angle);
    const double xi_n = detail::dft_frequency(k2, n2, an.step);
    for (std::size_t k1 = 0; k1 < n1; ++k1) {
      const double xi_p = detail::dft_frequency(k1, n1, ax.step);
      spec[k1 * n2 + k2] *= phase;
      wavenumber[k1 * n2 + k2] = std::hypot(xi_p, xi_n);
    }
  }

  const std::size_t nt = t.count;
  std::vector<double> out(window.count * nt);
  parallel_for(nt, [&](std::size_t j) {
    const double tj = t.at(j);
    std::vector<std::complex<double>> line(n1);
    for (std::size_t k1 = 0; k1 < n1; ++k1) {
      std::complex<double> acc = 0.0;
      const std::size_t base = k1 * n2;
      for (std::size_t k2 = 0; k2 < n2; ++k2) acc += spec[base + k2] * std::cos(wavenumber[base + k2] * tj);
      line[k1] = acc;
    }
    detail::fft_1d(line, detail::FftDirection::Backward);
    for (std::size_t i = 0; i < window.count; ++i)
      out[i * nt + j] = line[static_cast<std::size_t>(w0) + i].real();
  });

  Axis xp_axis = window;
  xp_axis.parity = Parity::None;
  Axis t_axis = t;
  t_axis.parity = Parity::Even;
  nlohmann::json meta = f_in.meta();
  meta["role"] = "trace_data";
  meta["route"] = "spectral";
  return GridField({xp_axis, t_axis}, std::move(out), std::move(meta));
}

std::size_t next_fast_size(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

GridField periodic_box(const Phantom& p, double t_max, const Axis& window, double margin) {
  p.validate();
  window.validate();
  if (!(t_max >= 0.0) || !(margin >= 1.0))
    throw Error(ErrorCode::InvalidArgument, "periodic_box needs t_max >= 0 and margin >= 1");
  const double h = window.step;
  const double c = p.center_xp;
  const double half_x = margin * std::max({p.radius + t_max, std::abs(window.origin - c),
                                           std::abs(window.back() - c)});
  const double half_n = margin * (p.radius + t_max);

  const auto left = static_cast<std::size_t>(std::max(0.0, std::ceil((window.origin - (c - half_x)) / h)));
  std::size_t n1 = next_fast_size(static_cast<std::size_t>(std::ceil(2.0 * half_x / h)));
  if (n1 < left + window.count) n1 = next_fast_size(left + window.count);
  const std::size_t n2 = next_fast_size(2 * static_cast<std::size_t>(std::ceil(half_n / h)));

  const Axis ax{"x'", window.origin - static_cast<double>(left) * h, h, n1, Parity::None};
  const Axis an{"xn", -static_cast<double>(n2 / 2) * h, h, n2, Parity::None};
  std::vector<double> v(n1 * n2);
  parallel_for(n1, [&](std::size_t i) {
    for (std::size_t j = 0; j < n2; ++j) v[i * n2 + j] = eval_phantom(p, ax.at(i), an.at(j));
  });
  nlohmann::json meta = {{"role", "spatial"}, {"phantom", to_json(p)}};
  return GridField({ax, an}, std::move(v), std::move(meta));
}

DecayProfile decay_profile(const GridField& trace) {
  trace.require_real_2d("decay_profile");
  const Axis& xp = trace.axis(0);
  const Axis& t = trace.axis(1);
  DecayProfile prof;
  prof.t.resize(t.count);
  prof.sup.assign(t.count, 0.0);
  prof.compensated.assign(t.count, 0.0);
  for (std::size_t j = 0; j < t.count; ++j) prof.t[j] = t.at(j);
  for (std::size_t i = 0; i < xp.count; ++i) {
    const double r = std::abs(xp.at(i));
    for (std::size_t j = 0; j < t.count; ++j) {
      const double u = std::abs(trace(i, j));
      const double tj = std::abs(t.at(j));
      prof.sup[j] = std::max(prof.sup[j], u);
      prof.compensated[j] = std::max(
          prof.compensated[j], u * std::sqrt(1.0 + tj) * std::sqrt(1.0 + std::abs(tj - r)));
    }
  }
  return prof;
}

void write_csv(const DecayProfile& profile, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string());
  os << "t,sup,compensated\n" << std::setprecision(17);
  for (std::size_t j = 0; j < profile.t.size(); ++j)
    os << profile.t[j] << ',' << profile.sup[j] << ',' << profile.compensated[j] << '\n';
}

}  // namespace sphmean::forward
