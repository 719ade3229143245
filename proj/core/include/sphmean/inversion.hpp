#pragma once

#include <limits>

#include "sphmean/grid.hpp"
#include "sphmean/spectral.hpp"

namespace sphmean::inversion {

/// W(y', t) = t D[F(y', .) / t](t) per column (n = 2).
GridField precompute_W(const GridField& trace, int n = 2, bool check_order = true);

struct DirectOptions {
  double t_max = std::numeric_limits<double>::infinity();
  double aperture = std::numeric_limits<double>::infinity();  // L, on |y'|
  double panel_cells = 2.0;
};

/// Back-projection reconstruction on the (x', xn) grid; xn must be > 0.
/// Records route, truncation and grid steps in the metadata, plus an
/// ApertureTooSmall warning when the data columns do not cover the cone
/// footprint of some output point.
GridField invert_direct(const GridField& trace, const Axis& xp, const Axis& xn,
                        const DirectOptions& opts = {});

/// Reconstruction through the half-space domain: convert, apply the inverse
/// multiplier, keep pn > 0, convert back. The fraction of energy found at
/// pn < 0 is recorded as range_leak.
GridField invert_spectral(const GridField& trace, const Axis& xp, const Axis& xn,
                          const spectral::ZGrid& grid, const spectral::ApplyNOptions& nopts = {});

/// Fraction of the squared norm of a (p', pn) field carried by pn < 0.
double negative_half_fraction(const GridField& h);

}  // namespace sphmean::inversion
