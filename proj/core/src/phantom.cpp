#include "sphmean/phantom.hpp"

#include <cmath>

#include "sphmean/error.hpp"

namespace sphmean {

void Phantom::validate() const {
  if (!(width > 0.0)) throw Error(ErrorCode::InvalidArgument, "phantom width a must be > 0");
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "phantom radius R must be > 0");
  if (kind == PhantomKind::GaussPoly && half_order < 1)
    throw Error(ErrorCode::InvalidArgument, "gauss_poly needs vanishing order 2k with k >= 1");
  if (!std::isfinite(center_xp) || !std::isfinite(amplitude))
    throw Error(ErrorCode::InvalidArgument, "phantom centre and amplitude must be finite");
}

double smooth_cutoff(double rho) noexcept {
  if (rho <= 0.5) return 1.0;
  if (rho >= 1.0) return 0.0;
  const double u = 2.0 * rho - 1.0;
  return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double eval_phantom(const Phantom& p, double xp, double xn) {
  const double dx = xp - p.center_xp;
  const double r2 = dx * dx + xn * xn;
  const double rho = std::sqrt(r2) / p.radius;
  if (rho >= 1.0) return 0.0;
  double profile;
  if (p.kind == PhantomKind::GaussPoly) {
    profile = std::pow(xn * xn, p.half_order);
  } else {
    profile = xn == 0.0 ? 0.0 : std::exp(-1.0 / (xn * xn));
  }
  return p.amplitude * profile * std::exp(-p.width * r2) * smooth_cutoff(rho);
}

double Phantom::operator()(double xp, double xn) const { return eval_phantom(*this, xp, xn); }

GridField sample_phantom(const Phantom& p, const Axis& xp, const Axis& xn) {
  p.validate();
  xp.validate();
  xn.validate();
  const bool half = xn.origin == 0.0;
  const double eps = 1e-12 * p.radius;
  const bool covers_xp = xp.origin <= p.center_xp - p.radius + eps &&
                         xp.back() >= p.center_xp + p.radius - eps;
  const bool covers_xn = xn.back() >= p.radius - eps && (half || xn.origin <= -p.radius + eps);
  if (!covers_xp || !covers_xn)
    throw Error(ErrorCode::GridTooSmall, "grid does not cover the phantom support ball");

  Axis xn_axis = xn;
  if (half) xn_axis.parity = Parity::Even;
  std::vector<double> v(xp.count * xn.count);
  for (std::size_t i = 0; i < xp.count; ++i)
    for (std::size_t j = 0; j < xn.count; ++j)
      v[i * xn.count + j] = eval_phantom(p, xp.at(i), xn_axis.at(j));
  nlohmann::json meta = {{"role", "spatial"}, {"phantom", to_json(p)}};
  return GridField({xp, xn_axis}, std::move(v), std::move(meta));
}

nlohmann::json to_json(const Phantom& p) {
  return {{"kind", p.kind == PhantomKind::GaussPoly ? "gauss_poly" : "gauss_flat"},
          {"center_xp", p.center_xp},
          {"a", p.width},
          {"k", p.half_order},
          {"amplitude", p.amplitude},
          {"R", p.radius}};
}

Phantom phantom_from_json(const nlohmann::json& j) {
  Phantom p;
  const std::string kind = j.value("kind", std::string("gauss_poly"));
  if (kind == "gauss_poly") {
    p.kind = PhantomKind::GaussPoly;
  } else if (kind == "gauss_flat") {
    p.kind = PhantomKind::GaussFlat;
  } else {
    throw Error(ErrorCode::InvalidArgument, "phantom.kind must be gauss_poly or gauss_flat");
  }
  p.center_xp = j.value("center_xp", 0.0);
  p.width = j.value("a", 1.0);
  p.half_order = j.value("k", 1);
  p.amplitude = j.value("amplitude", 1.0);
  p.radius = j.value("R", 1.0);
  p.validate();
  return p;
}

}  // namespace sphmean
