#pragma once

#include <complex>
#include <filesystem>
#include <span>
#include <vector>

#include "sphmean/grid.hpp"

namespace sphmean::spectral {

/// Sampling of the half-space domain: pn in [-P, P) with spacing pn_step,
/// p' the source x' grid zero-padded by pad_xp.
struct ZGrid {
  double pn_step = 1.0 / 16.0;
  double P = 0.0;
  std::size_t pad_xp = 2;
};

/// P = t_max^2 plus 16 cells, enough to keep converted data off the box edge.
ZGrid default_zgrid(double t_max, double pn_step = 1.0 / 16.0);

/// g(p', pn) = F(p', sqrt(pn)) / sqrt(pn) for pn > 0 (and pn <= t_max^2),
/// zero for pn <= 0. F is an (x', t) or (x', xn) field whose second axis
/// starts at 0. Throws VanishingOrderTooLow when F/t blows up at 0.
GridField zconvert(const GridField& F, const ZGrid& grid);

/// f(x', xn) = xn g(x', xn^2) on the requested grid. The x' nodes must lie
/// on the p' grid of g.
GridField zinvert(const GridField& g, const Axis& xp, const Axis& xn);

/// exp(sign i |xi'|^2 / (4 xi_n)), and 1 on xi_n = 0.
std::complex<double> multiplier(double xi_p, double xi_n, int sign);

struct ApplyNOptions {
  /// Width in frequency cells of a smooth ramp of the phase near xi_n = 0.
  /// 0 keeps the hard convention.
  double crossfade_cells = 0.0;
  bool check_support = true;
};

struct MultiplierResult {
  GridField field;          // real part of the result
  double max_imag = 0.0;    // max |imaginary part|
  double imag_ratio = 0.0;  // ||imaginary part|| / ||real part||
};

/// Applies the multiplier with the given sign through a 2D DFT. Throws
/// SupportLeak when more than 1e-8 of the input energy sits within 3 cells
/// of the box boundary.
MultiplierResult apply_N(const GridField& g, int sign, const ApplyNOptions& opts = {});

/// pi^-1 (i xi_n) F_eps(xi) for n = 2, which tends to multiplier(xi, +1) as eps -> 0.
std::complex<double> regularized_symbol(double xi_p, double xi_n, double eps);

struct MultiplierDeviation {
  double eps = 0.0;
  double max_abs_deviation = 0.0;
};

/// Max over the (xi', xi_n) grid, skipping xi_n = 0, of
/// |regularized_symbol - multiplier| for each eps.
std::vector<MultiplierDeviation> verify_multiplier(const Axis& xi_p, const Axis& xi_n,
                                                   std::span<const double> eps_list);
void write_csv(std::span<const MultiplierDeviation> rows, const std::filesystem::path& path);

}  // namespace sphmean::spectral
