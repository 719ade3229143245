#include "sphmean/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sphmean/calculus.hpp"
#include "sphmean/error.hpp"
#include "sphmean/parallel.hpp"

namespace sphmean::inversion {

namespace {

void require_positive_xn(const Axis& xn) {
  xn.validate();
  if (!(xn.origin > 0.0))
    throw Error(ErrorCode::NonPositiveXn, "reconstruction grid needs xn > 0");
}

nlohmann::json steps_meta(const Axis& xp, const Axis& xn, const Axis& data_xp, const Axis& t) {
  return {{"xp", xp.step}, {"xn", xn.step}, {"data_xp", data_xp.step}, {"t", t.step}};
}

}  // namespace

GridField precompute_W(const GridField& trace, int n, bool check_order) {
  if (n != 2) throw Error(ErrorCode::UnsupportedDimension, "precompute_W supports n = 2 only");
  const std::vector<double> q = calculus::divide_by_t(trace, "precompute_W", check_order);
  const Axis& xa = trace.axis(0);
  const Axis& ta = trace.axis(1);
  const std::size_t nt = ta.count;
  std::vector<double> w(q.size());
  std::vector<double> dq(nt);
  for (std::size_t i = 0; i < xa.count; ++i) {
    const std::span<const double> col(q.data() + i * nt, nt);
    calculus::d_dtau(col, ta.step, dq, 2);
    for (std::size_t j = 0; j < nt; ++j) w[i * nt + j] = ta.at(j) * dq[j];
  }
  Axis t_axis = ta;
  t_axis.parity = Parity::None;
  nlohmann::json meta = trace.meta();
  meta["role"] = "kernel_data";
  return GridField({xa, t_axis}, std::move(w), std::move(meta));
}

GridField invert_direct(const GridField& trace, const Axis& xp, const Axis& xn,
                        const DirectOptions& opts) {
  xp.validate();
  require_positive_xn(xn);
  const GridField W = precompute_W(trace);
  const Axis& ya = W.axis(0);
  const Axis& ta = W.axis(1);
  const double t_max = std::min(opts.t_max, ta.back());
  if (opts.t_max > ta.back() * (1.0 + 1e-12) && std::isfinite(opts.t_max))
    throw Error(ErrorCode::InvalidArgument, "t_max exceeds the trace t range");

  const calculus::KernelIntegralOptions kopts{t_max, opts.aperture, opts.panel_cells};
  std::vector<double> out(xp.count * xn.count);
  parallel_for(out.size(), [&](std::size_t k) {
    const double x1 = xn.at(k % xn.count);
    const double x0 = xp.at(k / xn.count);
    out[k] = -2.0 * x1 / std::numbers::pi * calculus::backproject_kernel_integral(W, x0, x1, kopts);
  });

  nlohmann::json meta = trace.meta();
  meta["role"] = "reconstruction";
  meta["route"] = "direct";
  meta["t_max"] = t_max;
  meta["aperture"] = std::isfinite(opts.aperture) ? nlohmann::json(opts.aperture) : nlohmann::json("inf");
  meta["steps"] = steps_meta(xp, xn, ya, ta);
  const double reach = std::min(opts.aperture, std::sqrt(std::max(0.0, t_max * t_max - xn.origin * xn.origin)));
  const double tol = 0.5 * ya.step;
  if (xp.origin - reach < ya.origin - tol || xp.back() + reach > ya.back() + tol) {
    meta["warnings"] = nlohmann::json::array(
        {"ApertureTooSmall: data columns do not cover the cone footprint of every output point"});
  }
  return GridField({xp, xn}, std::move(out), std::move(meta));
}

double negative_half_fraction(const GridField& h) {
  h.require_real_2d("negative_half_fraction");
  const Axis& pn = h.axis(1);
  double neg = 0.0, total = 0.0;
  for (std::size_t i = 0; i < h.axis(0).count; ++i) {
    const auto row = h.row(i);
    for (std::size_t k = 0; k < pn.count; ++k) {
      const double e = row[k] * row[k];
      total += e;
      if (pn.at(k) < -0.5 * pn.step) neg += e;
    }
  }
  return total > 0.0 ? neg / total : 0.0;
}

GridField invert_spectral(const GridField& trace, const Axis& xp, const Axis& xn,
                          const spectral::ZGrid& grid, const spectral::ApplyNOptions& nopts) {
  xp.validate();
  require_positive_xn(xn);
  const GridField g = spectral::zconvert(trace, grid);
  const spectral::MultiplierResult h = spectral::apply_N(g, -1, nopts);
  const double leak = negative_half_fraction(h.field);
  GridField f = spectral::zinvert(h.field, xp, xn);

  nlohmann::json meta = trace.meta();
  meta["role"] = "reconstruction";
  meta["route"] = "spectral";
  meta["t_max"] = trace.axis(1).back();
  meta["range_leak"] = leak;
  meta["imag_ratio"] = h.imag_ratio;
  meta["zgrid"] = {{"pn_step", grid.pn_step}, {"P", grid.P}, {"pad_xp", grid.pad_xp}};
  meta["steps"] = steps_meta(xp, xn, trace.axis(0), trace.axis(1));
  return f.with_meta(std::move(meta));
}

}  // namespace sphmean::inversion
