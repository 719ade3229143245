#pragma once

#include <nlohmann/json.hpp>

#include "sphmean/grid.hpp"

namespace sphmean {

enum class PhantomKind {
  GaussPoly,  // xn^(2k) * gaussian: vanishes to order 2k on xn = 0
  GaussFlat,  // exp(-1/xn^2) * gaussian: vanishes to infinite order
};

/// Analytic test function on R^2, even in xn, centred on the hyperplane
/// (the centre's xn coordinate is 0 by construction), exactly zero outside
/// the ball of radius `radius`.
struct Phantom {
  PhantomKind kind = PhantomKind::GaussPoly;
  double center_xp = 0.0;
  double width = 1.0;  // gaussian rate a in exp(-a |x - c|^2)
  int half_order = 1;  // k; gauss_poly vanishes to order 2k
  double amplitude = 1.0;
  double radius = 1.0;

  void validate() const;
  double operator()(double xp, double xn) const;
};

/// C^2 quintic smoothstep cutoff of the normalised radius: 1 on [0, 1/2],
/// 0 on [1, inf).
double smooth_cutoff(double rho) noexcept;

double eval_phantom(const Phantom& p, double xp, double xn);

/// Samples p on the (x', xn) grid. An xn axis starting at 0 is tagged Even
/// and holds the upper half only. Throws GridTooSmall when the support ball
/// is not covered.
GridField sample_phantom(const Phantom& p, const Axis& xp, const Axis& xn);

nlohmann::json to_json(const Phantom& p);
Phantom phantom_from_json(const nlohmann::json& j);

}  // namespace sphmean
