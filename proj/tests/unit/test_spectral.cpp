#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "sphmean/error.hpp"
#include "sphmean/spectral.hpp"

using namespace sphmean;
using namespace sphmean::spectral;

namespace {

double h_of(double x) { return std::exp(-x * x) * (1.0 + 0.5 * x); }

// F(x', t) = t^2 h(x') on x' in [-2, 2], t in [0, 4].
GridField t2_field(double dt = 1.0 / 32.0) {
  const Axis xp{"x'", -2.0, 1.0 / 8.0, 33, Parity::None};
  const auto nt = static_cast<std::size_t>(std::lround(4.0 / dt)) + 1;
  const Axis t{"t", 0.0, dt, nt, Parity::Even};
  std::vector<double> v(xp.count * nt);
  for (std::size_t i = 0; i < xp.count; ++i)
    for (std::size_t j = 0; j < nt; ++j) v[i * nt + j] = t.at(j) * t.at(j) * h_of(xp.at(i));
  return GridField({xp, t}, v);
}

GridField bump_field(std::size_t n, double h, double cx, double cy, double s) {
  const Axis a{"x'", -0.5 * h * static_cast<double>(n), h, n, Parity::None};
  const Axis b{"pn", -0.5 * h * static_cast<double>(n), h, n, Parity::None};
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double dx = a.at(i) - cx, dy = b.at(k) - cy;
      v[i * n + k] = std::exp(-(dx * dx + dy * dy) / (s * s)) * (1.0 + dx);
    }
  return GridField({a, b}, v);
}

}  // namespace

TEST_CASE("zconvert of t^2 h(x') is sqrt(pn) h(p') on the positive half") {
  const GridField F = t2_field();
  const ZGrid grid{1.0 / 64.0, 17.0, 2};
  const GridField g = zconvert(F, grid);
  const Axis& pp = g.axis(0);
  const Axis& pn = g.axis(1);
  double worst = 0.0;
  for (std::size_t i = 0; i < pp.count; ++i) {
    const double x = pp.at(i);
    const bool inside = x >= -2.0 - 1e-12 && x <= 2.0 + 1e-12;
    for (std::size_t k = 0; k < pn.count; ++k) {
      const double p = pn.at(k);
      const double expect = (inside && p > 0.0 && p <= 16.0 + 1e-12) ? std::sqrt(p) * h_of(x) : 0.0;
      worst = std::max(worst, std::abs(g(i, k) - expect));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("zconvert of zero is zero and the change of variables keeps the weighted norm") {
  const GridField F = t2_field();
  const GridField Z(F.axes(), std::vector<double>(F.size(), 0.0));
  const GridField gz = zconvert(Z, default_zgrid(4.0));
  for (double v : gz.values()) REQUIRE(v == 0.0);

  // F = t^2 exp(-t^2) h: sum |ZF|^2 dp' dpn = 2 int int F^2 / t dt dx' = (1/4) int h^2 dx'.
  const Axis& xp = F.axis(0);
  const Axis& t = F.axis(1);
  std::vector<double> v(F.size());
  for (std::size_t i = 0; i < xp.count; ++i)
    for (std::size_t j = 0; j < t.count; ++j)
      v[i * t.count + j] = t.at(j) * t.at(j) * std::exp(-t.at(j) * t.at(j)) * h_of(xp.at(i));
  const GridField g = zconvert(GridField(F.axes(), v), ZGrid{1.0 / 256.0, 17.0, 2});
  double h2 = 0.0;
  for (std::size_t i = 0; i < xp.count; ++i) h2 += h_of(xp.at(i)) * h_of(xp.at(i)) * xp.step;
  CHECK(std::abs(g.l2_norm_squared() - 0.25 * h2) / (0.25 * h2) <= 1e-4);
}

TEST_CASE("zconvert detects data that does not vanish to second order") {
  GridField F = t2_field();
  std::vector<double> v(F.values().begin(), F.values().end());
  const std::size_t nt = F.axis(1).count;
  for (std::size_t i = 0; i < F.axis(0).count; ++i)
    for (std::size_t j = 0; j < nt; ++j) v[i * nt + j] = F.axis(1).at(j) * h_of(F.axis(0).at(i));
  try {
    zconvert(GridField(F.axes(), v), default_zgrid(4.0));
    FAIL("expected VanishingOrderTooLow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::VanishingOrderTooLow);
  }
}

TEST_CASE("zinvert examples") {
  const GridField F = t2_field();
  const GridField g = zconvert(F, ZGrid{1.0 / 64.0, 17.0, 2});
  const Axis xp{"x'", -1.0, 1.0 / 8.0, 17, Parity::None};
  const Axis xn = Axis::spanning("xn", 0.0, 1.5, 31);
  const GridField f = zinvert(g, xp, xn);
  double worst = 0.0;
  for (std::size_t i = 0; i < xp.count; ++i)
    for (std::size_t j = 0; j < xn.count; ++j)
      worst = std::max(worst, std::abs(f(i, j) - xn.at(j) * xn.at(j) * h_of(xp.at(i))));
  CHECK(worst <= 1e-12);

  const GridField z(g.axes(), std::vector<double>(g.size(), 0.0));
  const GridField fz = zinvert(z, xp, xn);
  for (double v : fz.values()) REQUIRE(v == 0.0);
  try {
    zinvert(g, xp, Axis{"xn", -0.1, 0.1, 5, Parity::None});
    FAIL("expected NonPositiveXn");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveXn);
  }
}

TEST_CASE("zinvert(zconvert(F)) recovers a smooth field vanishing to order 4") {
  const Axis xp{"x'", -2.0, 1.0 / 8.0, 33, Parity::None};
  const Axis t{"t", 0.0, 1.0 / 64.0, 257, Parity::Even};
  std::vector<double> v(xp.count * t.count);
  for (std::size_t i = 0; i < xp.count; ++i)
    for (std::size_t j = 0; j < t.count; ++j) {
      const double tt = t.at(j);
      v[i * t.count + j] = std::pow(tt, 4) * std::exp(-2.0 * tt * tt) * h_of(xp.at(i));
    }
  const GridField F({xp, t}, v);
  const GridField back = zinvert(zconvert(F, ZGrid{1.0 / 1024.0, 16.0 + 1.0 / 64.0, 2}), xp, t);
  CHECK(relative_l2(back, F) <= 1e-6);
}

TEST_CASE("multiplier examples") {
  CHECK(multiplier(0.0, 0.7, +1) == std::complex<double>(1.0, 0.0));
  CHECK(multiplier(1.3, 0.0, -1) == std::complex<double>(1.0, 0.0));
  const auto m = multiplier(2.0, 1.0, +1);
  CHECK(m.real() == doctest::Approx(std::cos(1.0)).epsilon(1e-15));
  CHECK(m.imag() == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
  for (double a : {-3.0, -0.2, 0.0, 1.7})
    for (double b : {-2.0, -0.01, 0.0, 0.5}) {
      CHECK(std::abs(multiplier(a, b, +1) * multiplier(a, b, -1) - 1.0) <= 1e-15);
      CHECK(std::abs(std::abs(multiplier(a, b, +1)) - 1.0) <= 1e-15);
    }
}

TEST_CASE("apply_N is unitary, inverted by the opposite sign, and returns real data") {
  const GridField g = bump_field(128, 1.0 / 8.0, 0.3, -0.5, 1.0);
  const double n0 = std::sqrt(g.l2_norm_squared());
  for (int s : {+1, -1}) {
    const MultiplierResult r = apply_N(g, s);
    CHECK(std::abs(std::sqrt(r.field.l2_norm_squared()) / n0 - 1.0) <= 1e-12);
    CHECK(r.max_imag <= 1e-10 * n0);
  }
  const MultiplierResult plus = apply_N(g, +1);
  const MultiplierResult back = apply_N(plus.field, -1, {0.0, false});
  CHECK(relative_l2(back.field, g) <= 1e-12);

  ApplyNOptions soft;
  soft.crossfade_cells = 3.0;
  const MultiplierResult c = apply_N(g, +1, soft);
  CHECK(std::abs(std::sqrt(c.field.l2_norm_squared()) / n0 - 1.0) <= 1e-12);
}

TEST_CASE("apply_N refuses data touching the box boundary") {
  const GridField g = bump_field(64, 1.0 / 8.0, 3.9, 0.0, 0.5);
  try {
    apply_N(g, +1);
    FAIL("expected SupportLeak");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SupportLeak);
  }
}

TEST_CASE("regularized symbol tends to the multiplier") {
  for (double xi_n : {-1.5, 0.3, 2.0}) {
    CHECK(std::abs(regularized_symbol(0.0, xi_n, 1e-9) - 1.0) <= 1e-6);
    CHECK(std::abs(regularized_symbol(1.2, xi_n, 1e-9) - multiplier(1.2, xi_n, +1)) <= 1e-6);
  }
  const double pi = std::numbers::pi;
  const Axis xi_p{"freq", -pi, 2.0 * pi / 64.0, 64, Parity::None};
  const Axis xi_n{"freq", -2.0 * pi, 4.0 * pi / 64.0, 64, Parity::None};
  const std::vector<double> eps = {1e-1, 1e-3, 1e-5, 1e-8};
  const auto rows = verify_multiplier(xi_p, xi_n, eps);
  REQUIRE(rows.size() == 4);
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].max_abs_deviation < rows[k - 1].max_abs_deviation);
  CHECK(rows.back().max_abs_deviation <= 1e-6);
}
