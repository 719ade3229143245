#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace sphmean {

enum class Parity { None, Even };
enum class ScalarKind { Real64, Complex128 };

std::string_view to_string(Parity p) noexcept;
std::string_view to_string(ScalarKind k) noexcept;

/// Uniform sampling of one coordinate: sample j sits at origin + j * step.
/// An axis tagged Even starts at 0 and stores only the non-negative half of
/// an even function.
struct Axis {
  std::string name;
  double origin = 0.0;
  double step = 1.0;
  std::size_t count = 2;
  Parity parity = Parity::None;

  double at(std::size_t j) const noexcept {
    return origin + static_cast<double>(j) * step;
  }
  double back() const noexcept { return at(count - 1); }

  /// Throws InvalidArgument unless step > 0, count >= 2 and Even axes start at 0.
  void validate() const;

  /// Axis with `count` samples from `lo` to `hi` inclusive.
  static Axis spanning(std::string name, double lo, double hi, std::size_t count,
                       Parity parity = Parity::None);

  /// Nearest sample index to `x`, clamped to the axis.
  std::size_t nearest(double x) const noexcept;

  friend bool operator==(const Axis&, const Axis&) = default;
};

/// Dense row-major samples over a list of axes (axis 0 varies slowest).
/// Values are real64 or complex128; complex storage is interleaved re, im.
/// Immutable once built.
class GridField {
 public:
  GridField() = default;
  GridField(std::vector<Axis> axes, std::vector<double> values,
            nlohmann::json meta = nlohmann::json::object());

  static GridField from_complex(std::vector<Axis> axes,
                                std::span<const std::complex<double>> values,
                                nlohmann::json meta = nlohmann::json::object());
  /// Raw constructor used by the reader: `raw` is already interleaved for complex.
  static GridField from_raw(std::vector<Axis> axes, ScalarKind kind,
                            std::vector<double> raw, nlohmann::json meta);

  const std::vector<Axis>& axes() const noexcept { return axes_; }
  const Axis& axis(std::size_t k) const { return axes_.at(k); }
  std::size_t rank() const noexcept { return axes_.size(); }
  std::size_t size() const noexcept;  // number of samples
  ScalarKind kind() const noexcept { return kind_; }
  bool is_complex() const noexcept { return kind_ == ScalarKind::Complex128; }

  std::span<const double> values() const;  // real fields only
  std::vector<std::complex<double>> complex_values() const;
  std::span<const double> raw() const noexcept { return data_; }

  /// 2D real access: value at (i along axis 0, j along axis 1).
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * axes_[1].count + j];
  }
  /// Contiguous samples along the last axis for fixed axis-0 index (2D real).
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * axes_[1].count, axes_[1].count);
  }

  bool has_nonfinite() const noexcept { return nonfinite_; }
  /// Throws NonFiniteData naming `op` when the payload holds NaN or Inf.
  void require_finite(std::string_view op) const;
  /// Throws InvalidArgument unless the field is a 2D real field.
  void require_real_2d(std::string_view op) const;

  const nlohmann::json& meta() const noexcept { return meta_; }
  GridField with_meta(nlohmann::json meta) const;

  /// Plain sum of |value|^2 times the cell volume (product of steps).
  double l2_norm_squared() const;

 private:
  std::vector<Axis> axes_;
  ScalarKind kind_ = ScalarKind::Real64;
  std::vector<double> data_;
  bool nonfinite_ = false;
  nlohmann::json meta_ = nlohmann::json::object();
};

/// Expands an Even axis into a symmetric full axis (-s_max .. s_max) by
/// mirroring the stored half.
GridField materialize_even(const GridField& field, std::size_t axis_index);

/// Relative L2 distance ||a - b|| / ||b|| over matching 2D real fields.
double relative_l2(const GridField& a, const GridField& b);

}  // namespace sphmean
