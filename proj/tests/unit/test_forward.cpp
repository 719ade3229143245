#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include <gsl/gsl_sf_bessel.h>

#include "sphmean/error.hpp"
#include "sphmean/forward.hpp"
#include "sphmean/phantom.hpp"

using namespace sphmean;
using namespace sphmean::forward;

namespace {

Phantom poly(int k, double a, double R, double c = 0.0) {
  Phantom p;
  p.half_order = k;
  p.width = a;
  p.radius = R;
  p.center_xp = c;
  return p;
}

double max_abs(const GridField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("spherical_means at t = 0 and for circles missing the support") {
  const Phantom p = poly(2, 4.0, 1.0, 0.25);
  const Axis xp{"x'", -4.0, 0.25, 33, Parity::None};
  const Axis t{"t", 0.0, 0.125, 41, Parity::Even};
  const GridField m = spherical_means(p, xp, t);
  CHECK(m.axis(1).parity == Parity::Even);
  for (std::size_t i = 0; i < xp.count; ++i) {
    CHECK(m(i, 0) == eval_phantom(p, xp.at(i), 0.0));
    for (std::size_t j = 0; j < t.count; ++j)
      if (t.at(j) > std::abs(xp.at(i) - p.center_xp) + p.radius) REQUIRE(m(i, j) == 0.0);
  }
}

TEST_CASE("spherical_means of x_n^2 exp(-a|y|^2) against the Bessel closed form") {
  // Mean over the circle of radius t about (x, 0): exp(-a(x^2+t^2)) t^2 I1(z)/z, z = 2axt.
  const double a = 1.5;
  const Phantom p = poly(1, a, 40.0);  // cutoff inactive on the sampled range
  const Axis xp{"x'", -2.0, 0.25, 17, Parity::None};
  const Axis t{"t", 0.0, 0.125, 25, Parity::Even};
  const GridField m = spherical_means(p, xp, t);
  double worst = 0.0;
  for (std::size_t i = 0; i < xp.count; ++i)
    for (std::size_t j = 0; j < t.count; ++j) {
      const double x = xp.at(i), tt = t.at(j), z = 2.0 * a * x * tt;
      const double ratio = z == 0.0 ? 0.5 : gsl_sf_bessel_I1(z) / z;
      const double exact = std::exp(-a * (x * x + tt * tt)) * tt * tt * ratio;
      worst = std::max(worst, std::abs(m(i, j) - exact));
    }
  CHECK(worst <= 1e-12);
}

TEST_CASE("mean_to_trace: zero in, zero out; only n = 2") {
  const Axis xp{"x'", -1.0, 0.25, 9, Parity::None};
  const Axis t{"t", 0.0, 0.125, 17, Parity::Even};
  const GridField z({xp, t}, std::vector<double>(xp.count * t.count, 0.0));
  const GridField u = mean_to_trace(z);
  CHECK(max_abs(u) == 0.0);
  CHECK(u.meta()["route"] == "abel");
  try {
    mean_to_trace(z, 4);
    FAIL("expected UnsupportedDimension");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedDimension);
  }
}

TEST_CASE("both routes vanish at t = 0 and agree on a small grid") {
  const Phantom p = poly(2, 4.0, 1.0);
  const Axis window{"x'", -4.0, 1.0 / 16.0, 128, Parity::None};
  const Axis t{"t", 0.0, 1.0 / 32.0, 129, Parity::Even};
  const GridField abel = mean_to_trace(spherical_means(p, window, t));
  const GridField spec = wave_trace_spectral(periodic_box(p, t.back(), window), t, window);
  CHECK(spec.meta()["route"] == "spectral");
  const double peak = max_abs(spec);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < window.count; ++i) {
    CHECK(std::abs(abel(i, 0)) <= 1e-12 * peak);
    CHECK(std::abs(spec(i, 0)) <= 1e-12 * peak);
    for (std::size_t j = 1; j < t.count; ++j) {
      const double w = 1.0 / t.at(j);
      num += w * std::pow(abel(i, j) - spec(i, j), 2);
      den += w * spec(i, j) * spec(i, j);
    }
  }
  CHECK(std::sqrt(num / den) <= 0.01);
}

TEST_CASE("wave_trace_spectral propagates a single plane wave exactly") {
  const double pi = std::numbers::pi;
  const std::size_t n = 64;
  const double h = 2.0 * pi / n;
  const Axis x{"x'", -pi, h, n, Parity::None};
  const Axis y{"xn", -pi, h, n, Parity::None};
  const double k1 = 3.0, k2 = 4.0;  // |k| = 5
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] = std::cos(k1 * x.at(i) + k2 * y.at(j));
  const GridField f({x, y}, v);
  const Axis t{"t", 0.0, 0.05, 41, Parity::Even};
  const GridField u = wave_trace_spectral(f, t, x, {false});
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < t.count; ++j)
      worst = std::max(worst, std::abs(u(i, j) - std::cos(k1 * x.at(i)) * std::cos(5.0 * t.at(j))));
  CHECK(worst <= 1e-12);
}

TEST_CASE("wave_trace_spectral rejects a box that wraps around") {
  const Phantom p = poly(2, 4.0, 1.0);
  const Axis x{"x'", -2.0, 1.0 / 8.0, 32, Parity::None};
  const Axis y{"xn", -2.0, 1.0 / 8.0, 33, Parity::None};
  const GridField f = sample_phantom(p, x, y);
  const Axis t{"t", 0.0, 1.0 / 8.0, 33, Parity::Even};  // T = 4 > box half-width
  try {
    wave_trace_spectral(f, t, x);
    FAIL("expected BoxTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BoxTooSmall);
  }
}

TEST_CASE("spectral route is linear in f") {
  const Phantom p = poly(2, 4.0, 1.0);
  const Phantom q = poly(1, 2.0, 1.0);
  const Axis window{"x'", -3.0, 1.0 / 8.0, 48, Parity::None};
  const Axis t{"t", 0.0, 1.0 / 16.0, 33, Parity::Even};
  const GridField fp = periodic_box(p, t.back(), window);
  const GridField fq = periodic_box(q, t.back(), window);
  REQUIRE(fp.axes() == fq.axes());
  std::vector<double> mix(fp.size());
  for (std::size_t k = 0; k < mix.size(); ++k) mix[k] = 2.0 * fp.values()[k] - 3.0 * fq.values()[k];
  const GridField um = wave_trace_spectral(GridField(fp.axes(), mix), t, window);
  const GridField up = wave_trace_spectral(fp, t, window);
  const GridField uq = wave_trace_spectral(fq, t, window);
  double worst = 0.0;
  for (std::size_t k = 0; k < um.size(); ++k)
    worst = std::max(worst, std::abs(um.values()[k] - (2.0 * up.values()[k] - 3.0 * uq.values()[k])));
  CHECK(worst <= 1e-13);
}

TEST_CASE("next_fast_size and circle_nodes") {
  CHECK(next_fast_size(1) == 1);
  CHECK(next_fast_size(11) == 12);
  CHECK(next_fast_size(97) == 98);
  CHECK(next_fast_size(1000) == 1000);
  CHECK(next_fast_size(1021) == 1024);
  CHECK(circle_nodes(0.0, 4.0) == 64);
  CHECK(circle_nodes(8.0, 4.0) == 512);
}

TEST_CASE("decay_profile of a zero field and csv output") {
  const Axis xp{"x'", -1.0, 0.5, 5, Parity::None};
  const Axis t{"t", 0.0, 0.5, 5, Parity::Even};
  const DecayProfile d = decay_profile(GridField({xp, t}, std::vector<double>(25, 0.0)));
  REQUIRE(d.t.size() == 5);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(d.sup[j] == 0.0);
    CHECK(d.compensated[j] == 0.0);
  }
  const auto path = std::filesystem::temp_directory_path() / "sphmean_decay.csv";
  write_csv(d, path);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,sup,compensated");
}
