#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <nlohmann/json.hpp>

#include "sphmean/error.hpp"
#include "sphmean/field_io.hpp"
#include "sphmean/grid.hpp"
#include "sphmean/phantom.hpp"

using namespace sphmean;
namespace fs = std::filesystem;

namespace {

Phantom poly(int k, double a, double R) {
  Phantom p;
  p.kind = PhantomKind::GaussPoly;
  p.half_order = k;
  p.width = a;
  p.radius = R;
  return p;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "sphmean_unit_core";
  fs::create_directories(d);
  return d / name;
}

struct OracleCtx {
  const Phantom* p;
  double xp;
  gsl_integration_workspace* inner;
};

double inner_integrand(double xn, void* params) {
  auto* c = static_cast<OracleCtx*>(params);
  const double f = eval_phantom(*c->p, c->xp, xn);
  return f * f / xn;
}

double outer_integrand(double xp, void* params) {
  auto* c = static_cast<OracleCtx*>(params);
  c->xp = xp;
  gsl_function fn{inner_integrand, c};
  double r = 0.0, err = 0.0;
  const double R = c->p->radius;
  gsl_integration_qag(&fn, 1e-300, R, 0.0, 1e-12, 1000, GSL_INTEG_GAUSS61, c->inner, &r, &err);
  return 2.0 * r;  // both signs of xn
}

}  // namespace

TEST_CASE("eval_phantom examples") {
  const Phantom p = poly(1, 1.0, 10.0);
  CHECK(eval_phantom(p, 0.0, 0.0) == 0.0);
  CHECK(eval_phantom(p, 0.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

  Phantom flat = p;
  flat.kind = PhantomKind::GaussFlat;
  CHECK(eval_phantom(flat, 0.3, 0.0) == 0.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const Phantom q = poly(2, 2.0, 2.5);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng), y = u(rng);
    REQUIRE(eval_phantom(q, x, -y) == eval_phantom(q, x, y));
    REQUIRE(eval_phantom(flat, x, -y) == eval_phantom(flat, x, y));
  }
  CHECK(eval_phantom(q, 0.0, 2.5) == 0.0);
}

TEST_CASE("phantom validation and json") {
  Phantom p = poly(1, 1.0, 1.0);
  p.width = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  const Phantom q = poly(2, 4.0, 1.0);
  const Phantom r = phantom_from_json(to_json(q));
  CHECK(r.half_order == 2);
  CHECK(r.width == 4.0);
  CHECK_THROWS_AS(phantom_from_json({{"kind", "disc"}}), Error);
}

TEST_CASE("sample_phantom half grid matches full evaluation") {
  const Phantom p = poly(2, 4.0, 1.0);
  const Axis xp{"x'", -1.5, 1.0 / 16.0, 49, Parity::None};
  const Axis xn{"xn", 0.0, 1.0 / 16.0, 25, Parity::Even};
  const GridField f = sample_phantom(p, xp, xn);
  CHECK(f.axis(1).parity == Parity::Even);
  const GridField full = materialize_even(f, 1);
  REQUIRE(full.axis(1).count == 49);
  for (std::size_t i = 0; i < xp.count; ++i)
    for (std::size_t j = 0; j < full.axis(1).count; ++j)
      REQUIRE(full(i, j) == eval_phantom(p, xp.at(i), full.axis(1).at(j)));
}

TEST_CASE("sample_phantom rejects a grid smaller than the support") {
  const Phantom p = poly(1, 1.0, 3.0);
  const Axis xp{"x'", -1.0, 0.1, 21, Parity::None};
  const Axis xn{"xn", 0.0, 0.1, 11, Parity::Even};
  try {
    sample_phantom(p, xp, xn);
    FAIL("expected GridTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooSmall);
  }
}

TEST_CASE("weighted integral of a sampled phantom against nested GSL quadrature") {
  gsl_set_error_handler_off();
  const Phantom p = poly(2, 4.0, 1.0);
  const double h = 1.0 / 128.0;
  const Axis xp{"x'", -1.0 - 2 * h, h, 261, Parity::None};
  const Axis xn{"xn", 0.0, h, 131, Parity::Even};
  const GridField f = sample_phantom(p, xp, xn);
  double sum = 0.0;
  for (std::size_t i = 0; i < xp.count; ++i)
    for (std::size_t j = 1; j < xn.count; ++j) sum += 2.0 * f(i, j) * f(i, j) / xn.at(j);
  sum *= h * h;

  gsl_integration_workspace* wi = gsl_integration_workspace_alloc(1000);
  gsl_integration_workspace* wo = gsl_integration_workspace_alloc(1000);
  OracleCtx ctx{&p, 0.0, wi};
  gsl_function fn{outer_integrand, &ctx};
  double oracle = 0.0, err = 0.0;
  gsl_integration_qag(&fn, -1.0, 1.0, 0.0, 1e-11, 1000, GSL_INTEG_GAUSS61, wo, &oracle, &err);
  gsl_integration_workspace_free(wi);
  gsl_integration_workspace_free(wo);
  CHECK(std::abs(sum - oracle) / oracle <= 1e-6);
}

TEST_CASE("axis helpers") {
  const Axis a = Axis::spanning("x", 0.1, 1.5, 29);
  CHECK(a.step == doctest::Approx(0.05));
  CHECK(a.back() == doctest::Approx(1.5));
  CHECK(a.nearest(0.52) == 8);
  CHECK_THROWS_AS((Axis{"x", 0.0, -1.0, 4, Parity::None}.validate()), Error);
  CHECK_THROWS_AS((Axis{"x", 0.5, 1.0, 4, Parity::Even}.validate()), Error);
}

TEST_CASE("field round trip is bit exact") {
  std::vector<double> v = {0.0, -0.0, 5e-324, -1.5, std::numeric_limits<double>::max(), 0.1};
  const GridField f({Axis{"x'", -1.0, 0.5, 3, Parity::None}, Axis{"t", 0.0, 0.25, 2, Parity::Even}}, v,
                    {{"role", "test"}});
  const fs::path stem = scratch("roundtrip");
  write_field(f, stem);
  const GridField r = read_field(stem.string() + ".json");
  CHECK(r.axes() == f.axes());
  CHECK(r.meta()["role"] == "test");
  for (std::size_t k = 0; k < v.size(); ++k)
    CHECK(std::bit_cast<std::uint64_t>(r.raw()[k]) == std::bit_cast<std::uint64_t>(v[k]));
}

TEST_CASE("read_field rejects count mismatch, bad checksum and malformed headers") {
  const GridField f({Axis{"x'", 0.0, 1.0, 3, Parity::None}, Axis{"t", 0.0, 1.0, 2, Parity::Even}},
                    {1, 2, 3, 4, 5, 6});
  const fs::path stem = scratch("broken");
  auto expect_code = [&](ErrorCode code) {
    try {
      read_field(stem);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == code);
    }
  };

  write_field(f, stem);
  nlohmann::json h;
  std::ifstream(header_path(stem)) >> h;
  h["axes"][0]["count"] = 4;
  std::ofstream(header_path(stem)) << h.dump();
  expect_code(ErrorCode::CountMismatch);

  write_field(f, stem);
  {
    std::fstream bin(payload_path(stem), std::ios::in | std::ios::out | std::ios::binary);
    bin.seekp(3);
    bin.put('\x7f');
  }
  expect_code(ErrorCode::ChecksumMismatch);

  std::ofstream(header_path(stem)) << "{ not json";
  expect_code(ErrorCode::MalformedHeader);
}

TEST_CASE("non-finite payload loads with the flag set and is rejected downstream") {
  const GridField f({Axis{"x'", 0.0, 1.0, 2, Parity::None}, Axis{"t", 0.0, 1.0, 2, Parity::Even}},
                    {0.0, std::numeric_limits<double>::quiet_NaN(), 1.0, 2.0});
  const fs::path stem = scratch("nan");
  write_field(f, stem);
  const GridField r = read_field(stem);
  CHECK(r.has_nonfinite());
  try {
    r.require_finite("test");
    FAIL("expected NonFiniteData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteData);
  }
}

TEST_CASE("relative_l2 and norms") {
  const Axis a{"x", 0.0, 0.5, 2, Parity::None};
  const GridField x({a, a}, {1, 2, 3, 4});
  const GridField z({a, a}, {0, 0, 0, 0});
  CHECK(x.l2_norm_squared() == doctest::Approx(30.0 * 0.25));
  CHECK(relative_l2(x, x) == 0.0);
  CHECK(relative_l2(x, z) == doctest::Approx(std::sqrt(30.0)));  // zero reference: plain norm
}
