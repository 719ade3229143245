#include "sphmean/analysis.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>

#include "sphmean/calculus.hpp"
#include "sphmean/error.hpp"
#include "sphmean/interp.hpp"
#include "sphmean/inversion.hpp"
#include "sphmean/parallel.hpp"

namespace sphmean::analysis {

namespace {

double peak_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [0, 1) from the top 53 bits.
double unit_uniform(std::uint64_t& state) {
  state = splitmix64(state);
  return static_cast<double>(state >> 11) * 0x1.0p-53;
}

}  // namespace

WeightedNormReport isometry_check(const GridField& f, const GridField& trace,
                                  const IsometryOptions& opts) {
  f.require_real_2d("isometry_check");
  f.require_finite("isometry_check");
  trace.require_real_2d("isometry_check");
  trace.require_finite("isometry_check");
  WeightedNormReport rep;

  const Axis& fx = f.axis(0);
  const Axis& fn = f.axis(1);
  const double fpeak = peak_abs(f.values());
  const double mirror = fn.parity == Parity::Even ? 2.0 : 1.0;
  double lhs = 0.0;
  for (std::size_t j = 0; j < fn.count; ++j) {
    const double xn = std::abs(fn.at(j));
    if (xn < 0.5 * fn.step) {
      for (std::size_t i = 0; i < fx.count; ++i)
        if (std::abs(f(i, j)) > 1e-10 * fpeak)
          throw Error(ErrorCode::VanishingOrderTooLow,
                      "isometry_check: f does not vanish on the hyperplane");
      continue;
    }
    double col = 0.0;
    for (std::size_t i = 0; i < fx.count; ++i) col += f(i, j) * f(i, j);
    lhs += col / xn;
  }
  rep.lhs = mirror * lhs * fx.step * fn.step;

  const Axis& xa = trace.axis(0);
  const Axis& ta = trace.axis(1);
  if (ta.origin != 0.0) throw Error(ErrorCode::InvalidArgument, "isometry_check needs t from 0");
  const std::size_t nt = ta.count;
  std::vector<double> e(nt, 0.0);
  for (std::size_t j = 1; j < nt; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < xa.count; ++i) s += trace(i, j) * trace(i, j);
    e[j] = s * xa.step / ta.at(j);
  }
  const double t_max = ta.back();
  const double half_width = 0.5 * (xa.back() - xa.origin);
  const double t_cut_req = opts.t_cut > 0.0 ? opts.t_cut : 0.75 * std::min(t_max, half_width);
  const auto jc = std::min(nt - 1, static_cast<std::size_t>(std::floor(t_cut_req / ta.step + 1e-9)));
  const double tc = ta.at(jc);
  rep.t_cut = tc;

  double in = 0.0;
  for (std::size_t j = 0; j <= jc; ++j) in += (j == 0 || j == jc ? 0.5 : 1.0) * e[j];
  in *= ta.step;

  // Least squares for e ~ C t^-2 + D t^-3 on [t_max/4, t_cut].
  double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
  std::size_t used = 0;
  for (std::size_t j = 1; j <= jc; ++j) {
    const double t = ta.at(j);
    if (t < 0.25 * t_max) continue;
    const double u = 1.0 / (t * t), v = u / t;
    a11 += u * u;
    a12 += u * v;
    a22 += v * v;
    b1 += u * e[j];
    b2 += v * e[j];
    ++used;
  }
  double tail = 0.0;
  const double det = a11 * a22 - a12 * a12;
  if (used >= 2 && det > 0.0) {
    const double c = (b1 * a22 - b2 * a12) / det;
    const double d = (a11 * b2 - a12 * b1) / det;
    tail = c / tc + d / (2.0 * tc * tc);
  }
  rep.tail = 2.0 * tail;
  rep.rhs_in_window = 2.0 * in;
  rep.rhs = 2.0 * (in + tail);
  rep.rel_gap = std::abs(rep.lhs - rep.rhs) / std::max({rep.lhs, rep.rhs, 1e-300});
  return rep;
}

nlohmann::json to_json(const WeightedNormReport& r) {
  return {{"lhs", r.lhs},         {"rhs", r.rhs},   {"rel_gap", r.rel_gap},
          {"rhs_in_window", r.rhs_in_window}, {"tail", r.tail}, {"t_cut", r.t_cut}};
}

std::vector<Probe> probe_lattice(double X, double center) {
  std::vector<Probe> out;
  const double xs[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const double ns[] = {-1.0, -0.5, -0.25, 0.25, 0.5, 1.0};
  for (double a : xs)
    for (double b : ns) out.push_back({center + a * X, b * X});
  return out;
}

RangeReport range_residual(const GridField& trace, std::span<const Probe> probes,
                           const RangeOptions& opts) {
  const GridField W = inversion::precompute_W(trace, 2, opts.check_order);
  const Axis& ya = W.axis(0);
  const Axis& ta = W.axis(1);
  const double t_max = std::min(opts.t_max, ta.back());
  const double panel = std::max(opts.panel_cells, 0.25) * ta.step;

  RangeReport rep;
  rep.probes.assign(probes.begin(), probes.end());
  rep.residual.assign(probes.size(), 0.0);
  rep.normalized.assign(probes.size(), 0.0);
  rep.peak = peak_abs(trace.values());

  parallel_for(probes.size(), [&](std::size_t p) {
    const double x0 = probes[p].xp;
    const double x1 = probes[p].xn;
    if (x1 == 0.0) throw Error(ErrorCode::NonPositiveXn, "range probes must have xn != 0");
    double total = 0.0;
    for (std::size_t i = 0; i < ya.count; ++i) {
      const double dy = ya.at(i) - x0;
      const double s2 = dy * dy - x1 * x1;  // kernel positive for t^2 > s2
      const auto col = W.row(i);
      double inner = 0.0;
      if (s2 >= 0.0) {
        if (s2 >= t_max * t_max) continue;
        const double smax = std::sqrt(t_max * t_max - s2);
        const auto panels = static_cast<std::size_t>(std::max(2.0, std::ceil(smax / panel)));
        inner = calculus::gauss_legendre_composite(
            [&](double sigma) {
              const double t = std::sqrt(sigma * sigma + s2);
              return cubic_interpolate(col, 0.0, ta.step, t, Reflect::None) / t;
            },
            0.0, smax, panels);
      } else {
        const double c = -s2;
        const auto panels = static_cast<std::size_t>(std::max(2.0, std::ceil(t_max / panel)));
        inner = calculus::gauss_legendre_composite(
            [&](double t) {
              return cubic_interpolate(col, 0.0, ta.step, t, Reflect::None) / std::sqrt(t * t + c);
            },
            0.0, t_max, panels);
      }
      total += (i == 0 || i + 1 == ya.count ? 0.5 : 1.0) * ya.step * inner;
    }
    rep.residual[p] = total;
    rep.normalized[p] =
        rep.peak > 0.0 ? 2.0 * std::abs(x1) / std::numbers::pi * std::abs(total) / rep.peak : 0.0;
  });
  rep.max_normalized = peak_abs(rep.normalized);
  return rep;
}

double range_noise_floor(const GridField& trace, std::span<const Probe> probes,
                         const RangeOptions& opts) {
  trace.require_real_2d("range_noise_floor");
  const double peak = peak_abs(trace.values());
  if (peak == 0.0) return 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  const std::size_t nt = trace.axis(1).count;
  std::vector<double> noise(trace.size(), 0.0);
  for (std::size_t k = 0; k < noise.size(); ++k) {
    if (k % nt == 0) continue;
    noise[k] = (splitmix64(k) & 1 ? 1.0 : -1.0) * eps * peak;
  }
  RangeOptions o = opts;
  o.check_order = false;
  const RangeReport r = range_residual(GridField(trace.axes(), std::move(noise)), probes, o);
  // r is normalized by the noise peak eps * peak; rescale to the data peak.
  return r.max_normalized * eps;
}

double range_leak(const GridField& trace, const spectral::ZGrid& grid) {
  trace.require_real_2d("range_leak");
  if (peak_abs(trace.values()) == 0.0) return 0.0;
  const GridField g = spectral::zconvert(trace, grid);
  return inversion::negative_half_fraction(spectral::apply_N(g, -1).field);
}

GridField perturb_trace(const GridField& trace, double eps, std::uint64_t seed) {
  trace.require_real_2d("perturb_trace");
  const Axis& xa = trace.axis(0);
  const Axis& ta = trace.axis(1);
  std::uint64_t state = seed;
  double amp[4], ctr[4];
  for (int m = 0; m < 4; ++m) {
    amp[m] = 2.0 * unit_uniform(state) - 1.0;
    ctr[m] = 4.0 * unit_uniform(state) - 2.0;
  }
  std::vector<double> v(trace.values().begin(), trace.values().end());
  for (std::size_t i = 0; i < xa.count; ++i) {
    const double x = xa.at(i);
    double g = 0.0;
    for (int m = 0; m < 4; ++m) g += amp[m] * std::exp(-(x - ctr[m]) * (x - ctr[m]));
    for (std::size_t j = 0; j < ta.count; ++j) {
      const double t = ta.at(j);
      v[i * ta.count + j] += eps * t * t * std::exp(-t * t) * g;
    }
  }
  nlohmann::json meta = trace.meta();
  meta["perturbation"] = {{"eps", eps}, {"seed", seed}};
  return GridField(trace.axes(), std::move(v), std::move(meta));
}

PerturbationSweep perturbation_sweep(const GridField& trace, std::span<const Probe> probes,
                                     std::span<const double> eps_rel, std::uint64_t seed,
                                     const spectral::ZGrid& grid, const RangeOptions& opts) {
  PerturbationSweep s;
  const double peak = peak_abs(trace.values());
  for (double e : eps_rel) {
    const GridField p = perturb_trace(trace, e * peak, seed);
    s.eps.push_back(e * peak);
    // Normalized by the unperturbed peak so every eps shares one scale.
    const RangeReport r = range_residual(p, probes, opts);
    s.max_normalized.push_back(peak > 0.0 ? r.max_normalized * r.peak / peak : 0.0);
    s.leak.push_back(range_leak(p, grid));
  }
  const LinearFit fit = fit_line(s.eps, s.max_normalized);
  s.slope = fit.slope;
  s.intercept = fit.intercept;
  s.r_squared = fit.r_squared;
  s.rank_correlation = spearman(s.max_normalized, s.leak);
  return s;
}

nlohmann::json to_json(const RangeReport& r) {
  nlohmann::json probes = nlohmann::json::array();
  for (std::size_t k = 0; k < r.probes.size(); ++k)
    probes.push_back({{"xp", r.probes[k].xp},
                      {"xn", r.probes[k].xn},
                      {"residual", r.residual[k]},
                      {"normalized", r.normalized[k]}});
  return {{"peak", r.peak}, {"max_normalized", r.max_normalized}, {"probes", probes}};
}

nlohmann::json to_json(const PerturbationSweep& s) {
  return {{"eps", s.eps},
          {"max_normalized", s.max_normalized},
          {"leak", s.leak},
          {"slope", s.slope},
          {"intercept", s.intercept},
          {"r_squared", s.r_squared},
          {"rank_correlation", s.rank_correlation}};
}

void write_csv(const RangeReport& r, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string());
  os << "xp,xn,residual,normalized\n" << std::setprecision(17);
  for (std::size_t k = 0; k < r.probes.size(); ++k)
    os << r.probes[k].xp << ',' << r.probes[k].xn << ',' << r.residual[k] << ','
       << r.normalized[k] << '\n';
}

GaussianOracle gaussian_integral_oracle(std::complex<double> w, double tau) {
  if (!(w.real() > 0.0))
    throw Error(ErrorCode::NonPositiveRealPart, "gaussian_integral_oracle needs Re w > 0");
  using boost::math::quadrature::gauss_kronrod;
  using C = std::complex<double>;
  const double T = std::sqrt(40.0 / w.real());
  auto integrand = [&](double t) { return std::exp(-w * t * t - C(0.0, t * tau)); };
  auto integrate = [](auto&& fn, double a, double b) {
    return gauss_kronrod<double, 61>::integrate(fn, a, b, 15, 1e-13);
  };
  GaussianOracle out;
  out.numeric = {integrate([&](double t) { return integrand(t).real(); }, -T, T),
                 integrate([&](double t) { return integrand(t).imag(); }, -T, T)};
  out.closed_form = std::sqrt(std::numbers::pi / w) * std::exp(-tau * tau / (4.0 * w));
  // t = s^2 turns exp(-w t) t^(-1/2) dt into 2 exp(-w s^2) ds.
  auto half = [&](double s) { return 2.0 * std::exp(-w * s * s); };
  out.half_line_numeric = {integrate([&](double s) { return half(s).real(); }, 0.0, T),
                           integrate([&](double s) { return half(s).imag(); }, 0.0, T)};
  out.half_line_closed = std::sqrt(std::numbers::pi / w);
  return out;
}

DecayFit decay_check(const forward::DecayProfile& profile, double t_lo, double t_hi) {
  std::vector<double> x, y;
  for (std::size_t j = 0; j < profile.t.size(); ++j) {
    const double t = profile.t[j];
    if (t < t_lo || t > t_hi || !(profile.compensated[j] > 0.0)) continue;
    x.push_back(std::log(t));
    y.push_back(std::log(profile.compensated[j]));
  }
  DecayFit fit;
  fit.points = x.size();
  if (x.size() < 2) return fit;
  const LinearFit lf = fit_line(x, y);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  return fit;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  LinearFit f;
  if (x.size() < 2 || x.size() != y.size()) return f;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size();) {
      std::size_t m = k;
      while (m + 1 < idx.size() && v[idx[m + 1]] == v[idx[k]]) ++m;
      const double avg = 0.5 * static_cast<double>(k + m);
      for (std::size_t q = k; q <= m; ++q) r[idx[q]] = avg;
      k = m + 1;
    }
    return r;
  };
  if (x.size() != y.size() || x.size() < 2) return 0.0;
  const auto rx = ranks(x), ry = ranks(y);
  const LinearFit f = fit_line(rx, ry);
  const double r = std::sqrt(f.r_squared);
  return f.slope < 0.0 ? -r : r;
}

}  // namespace sphmean::analysis
