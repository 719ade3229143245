#pragma once

#include <filesystem>
#include <vector>

#include "sphmean/grid.hpp"
#include "sphmean/phantom.hpp"

namespace sphmean::forward {

/// Angles used by the circle rule at radius t for gaussian rate a.
std::size_t circle_nodes(double t, double width);

/// Circle averages of the phantom centred on the hyperplane, over (x', t).
/// The t axis must start at 0; it is tagged Even in the result.
GridField spherical_means(const Phantom& p, const Axis& xp, const Axis& t);

/// Wave trace from mean data. Only n = 2 is supported.
GridField mean_to_trace(const GridField& means, int n = 2);

struct WaveTraceOptions {
  bool check_wraparound = true;
};

/// Trace of the free wave solution with initial value f (zero velocity),
/// computed on the periodic box spanned by f's grid. `window` picks the x'
/// nodes returned and must lie on f's x' grid. An Even xn axis is
/// materialized first. Throws BoxTooSmall when a periodic image of the
/// support can reach a window point by t = t.back().
GridField wave_trace_spectral(const GridField& f, const Axis& t, const Axis& window,
                              const WaveTraceOptions& opts = {});

/// Zero-padded periodic box for wave_trace_spectral: the phantom sampled on
/// a grid aligned with `window`, with half-widths `margin` times the minimal
/// no-wraparound extent for times up to t_max. The xn axis is a full axis
/// with a node at 0.
GridField periodic_box(const Phantom& p, double t_max, const Axis& window,
                       double margin = 1.25);

/// Smallest n' >= n whose prime factors are all in {2, 3, 5, 7}.
std::size_t next_fast_size(std::size_t n);

struct DecayProfile {
  std::vector<double> t;
  std::vector<double> sup;          // max over x' of |u|
  std::vector<double> compensated;  // max over x' of |u| (1+t)^(1/2) (1+||t|-|x'||)^(1/2)
};

DecayProfile decay_profile(const GridField& trace);
void write_csv(const DecayProfile& profile, const std::filesystem::path& path);

}  // namespace sphmean::forward
