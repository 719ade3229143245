#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sphmean/forward.hpp"
#include "sphmean/grid.hpp"
#include "sphmean/spectral.hpp"

namespace sphmean::analysis {

// ---- weighted norm identity ----

struct WeightedNormReport {
  double lhs = 0.0;  // integral of f^2 / |xn|
  double rhs = 0.0;  // integral of F^2 / |t|, in-window part plus tail model
  double rel_gap = 0.0;
  double rhs_in_window = 0.0;  // same integral cut at t_cut, no tail
  double tail = 0.0;
  double t_cut = 0.0;
};

struct IsometryOptions {
  /// End of the trusted t range; <= 0 selects 0.75 min(t_max, window half-width).
  double t_cut = 0.0;
};

/// Both sides of the weighted norm identity. The trace energy per unit t
/// beyond t_cut is modelled as C/t^2 + D/t^3, fitted on [t_max/4, t_cut].
WeightedNormReport isometry_check(const GridField& f, const GridField& trace,
                                  const IsometryOptions& opts = {});

nlohmann::json to_json(const WeightedNormReport& r);

// ---- range residual ----

struct Probe {
  double xp = 0.0;
  double xn = 0.0;
};

/// x' in {-X, -X/2, 0, X/2, X} (shifted by center) times xn in {+-1/4, +-1/2, +-1} X.
std::vector<Probe> probe_lattice(double X, double center = 0.0);

struct RangeOptions {
  double t_max = std::numeric_limits<double>::infinity();
  double panel_cells = 2.0;
  bool check_order = true;
};

struct RangeReport {
  std::vector<Probe> probes;
  std::vector<double> residual;    // raw integral
  std::vector<double> normalized;  // 2|xn|/pi |residual| / peak
  double peak = 0.0;               // max |F|
  double max_normalized = 0.0;
};

/// The range functional at each probe (integral with kernel
/// (t^2 + xn^2 - |y'|^2)^(-1/2) over its positive set).
RangeReport range_residual(const GridField& trace, std::span<const Probe> probes,
                           const RangeOptions& opts = {});

/// Max normalized residual of +-eps_mach peak|F| sign noise (zero at t = 0),
/// normalized by the peak of `trace`.
double range_noise_floor(const GridField& trace, std::span<const Probe> probes,
                         const RangeOptions& opts = {});

/// Fraction of the energy of N^-1 Z F at pn < 0.
double range_leak(const GridField& trace, const spectral::ZGrid& grid);

/// F + eps t^2 exp(-t^2) g(x') with g a seeded sum of four gaussian bumps.
GridField perturb_trace(const GridField& trace, double eps, std::uint64_t seed);

struct PerturbationSweep {
  std::vector<double> eps;
  std::vector<double> max_normalized;
  std::vector<double> leak;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double rank_correlation = 0.0;  // Spearman, residual vs leak
};

/// eps_rel values are scaled by peak|F|, and every residual is normalized by
/// that unperturbed peak.
PerturbationSweep perturbation_sweep(const GridField& trace, std::span<const Probe> probes,
                                     std::span<const double> eps_rel, std::uint64_t seed,
                                     const spectral::ZGrid& grid, const RangeOptions& opts = {});

nlohmann::json to_json(const RangeReport& r);
nlohmann::json to_json(const PerturbationSweep& s);
void write_csv(const RangeReport& r, const std::filesystem::path& path);

// ---- gaussian integrals ----

struct GaussianOracle {
  std::complex<double> numeric;      // integral of exp(-w t^2 - i t tau) over R
  std::complex<double> closed_form;  // sqrt(pi / w) exp(-tau^2 / (4 w))
  std::complex<double> half_line_numeric;  // integral of exp(-w t) t^(-1/2) over t > 0
  std::complex<double> half_line_closed;   // sqrt(pi / w)
};

/// Adaptive Gauss-Kronrod on [-T, T], T = sqrt(40 / Re w). Throws
/// NonPositiveRealPart for Re w <= 0.
GaussianOracle gaussian_integral_oracle(std::complex<double> w, double tau);

// ---- decay ----

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log(compensated) against log(t) over [t_lo, t_hi].
DecayFit decay_check(const forward::DecayProfile& profile, double t_lo, double t_hi);

// ---- helpers ----

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LinearFit fit_line(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace sphmean::analysis
