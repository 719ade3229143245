#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "sphmean/grid.hpp"

namespace sphmean {

// A field on disk is a pair sharing a stem:
//   <stem>.json  header: dims, axes {name, origin, step, count, parity},
//                scalar kind, byte order, payload sha256, nonfinite flag, meta
//   <stem>.bin   raw little-endian float64 samples (complex interleaved
//                re, im), row-major in axis order
// Passing "out/trace" or "out/trace.json" names the same pair.

inline constexpr const char* kFieldFormat = "sphmean-grid-field";
inline constexpr int kFieldFormatVersion = 1;

void write_field(const GridField& field, const std::filesystem::path& stem);

/// Parses and validates the header, checks the payload size and checksum.
/// Non-finite payloads load with has_nonfinite() set; consumers reject them.
GridField read_field(const std::filesystem::path& stem);

/// One row per sample: axis coordinates, then value (or re, im).
void write_csv(const GridField& field, const std::filesystem::path& path);

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_file(const std::filesystem::path& path);

std::filesystem::path header_path(const std::filesystem::path& stem);
std::filesystem::path payload_path(const std::filesystem::path& stem);

}  // namespace sphmean
