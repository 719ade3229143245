#include "sphmean/grid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "sphmean/error.hpp"

namespace sphmean {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::BoxTooSmall: return "BoxTooSmall";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::NonFiniteData: return "NonFiniteData";
    case ErrorCode::VanishingOrderTooLow: return "VanishingOrderTooLow";
    case ErrorCode::NonPositiveXn: return "NonPositiveXn";
    case ErrorCode::SupportLeak: return "SupportLeak";
    case ErrorCode::NonPositiveRealPart: return "NonPositiveRealPart";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(Parity p) noexcept {
  return p == Parity::Even ? "even" : "none";
}

std::string_view to_string(ScalarKind k) noexcept {
  return k == ScalarKind::Complex128 ? "complex128" : "real64";
}

void Axis::validate() const {
  if (!(step > 0.0) || !std::isfinite(step))
    throw Error(ErrorCode::InvalidArgument, "axis '" + name + "' needs step > 0");
  if (count < 2)
    throw Error(ErrorCode::InvalidArgument, "axis '" + name + "' needs count >= 2");
  if (!std::isfinite(origin))
    throw Error(ErrorCode::InvalidArgument, "axis '" + name + "' has non-finite origin");
  if (parity == Parity::Even && origin != 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "even axis '" + name + "' must have origin 0");
}

Axis Axis::spanning(std::string name, double lo, double hi, std::size_t count,
                    Parity parity) {
  if (count < 2 || !(hi > lo))
    throw Error(ErrorCode::InvalidArgument, "Axis::spanning needs hi > lo and count >= 2");
  Axis a{std::move(name), lo, (hi - lo) / static_cast<double>(count - 1), count, parity};
  a.validate();
  return a;
}

std::size_t Axis::nearest(double x) const noexcept {
  const double s = std::round((x - origin) / step);
  if (s <= 0.0) return 0;
  return std::min(count - 1, static_cast<std::size_t>(s));
}

namespace {

bool any_nonfinite(const std::vector<double>& v) {
  return std::any_of(v.begin(), v.end(), [](double x) { return !std::isfinite(x); });
}

std::size_t product_of_counts(const std::vector<Axis>& axes) {
  return std::accumulate(axes.begin(), axes.end(), std::size_t{1},
                         [](std::size_t acc, const Axis& a) { return acc * a.count; });
}

}  // namespace

GridField::GridField(std::vector<Axis> axes, std::vector<double> values,
                     nlohmann::json meta)
    : axes_(std::move(axes)), kind_(ScalarKind::Real64), data_(std::move(values)),
      meta_(std::move(meta)) {
  for (const auto& a : axes_) a.validate();
  if (axes_.empty())
    throw Error(ErrorCode::InvalidArgument, "GridField needs at least one axis");
  if (data_.size() != product_of_counts(axes_))
    throw Error(ErrorCode::CountMismatch,
                "values length " + std::to_string(data_.size()) +
                    " != product of axis counts " +
                    std::to_string(product_of_counts(axes_)));
  nonfinite_ = any_nonfinite(data_);
}

GridField GridField::from_complex(std::vector<Axis> axes,
                                  std::span<const std::complex<double>> values,
                                  nlohmann::json meta) {
  std::vector<double> raw(2 * values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    raw[2 * i] = values[i].real();
    raw[2 * i + 1] = values[i].imag();
  }
  return from_raw(std::move(axes), ScalarKind::Complex128, std::move(raw), std::move(meta));
}

GridField GridField::from_raw(std::vector<Axis> axes, ScalarKind kind,
                              std::vector<double> raw, nlohmann::json meta) {
  GridField g;
  g.axes_ = std::move(axes);
  g.kind_ = kind;
  g.data_ = std::move(raw);
  g.meta_ = std::move(meta);
  for (const auto& a : g.axes_) a.validate();
  if (g.axes_.empty())
    throw Error(ErrorCode::InvalidArgument, "GridField needs at least one axis");
  const std::size_t per = kind == ScalarKind::Complex128 ? 2 : 1;
  if (g.data_.size() != per * product_of_counts(g.axes_))
    throw Error(ErrorCode::CountMismatch, "payload length does not match axis counts");
  g.nonfinite_ = any_nonfinite(g.data_);
  return g;
}

std::size_t GridField::size() const noexcept { return product_of_counts(axes_); }

std::span<const double> GridField::values() const {
  if (is_complex())
    throw Error(ErrorCode::InvalidArgument, "values() called on a complex field");
  return data_;
}

std::vector<std::complex<double>> GridField::complex_values() const {
  std::vector<std::complex<double>> out(size());
  if (is_complex()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {data_[2 * i], data_[2 * i + 1]};
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = data_[i];
  }
  return out;
}

void GridField::require_finite(std::string_view op) const {
  if (nonfinite_)
    throw Error(ErrorCode::NonFiniteData,
                std::string(op) + " rejects a field with non-finite samples");
}

void GridField::require_real_2d(std::string_view op) const {
  if (rank() != 2 || is_complex())
    throw Error(ErrorCode::InvalidArgument, std::string(op) + " needs a 2D real field");
}

GridField GridField::with_meta(nlohmann::json meta) const {
  GridField g = *this;
  g.meta_ = std::move(meta);
  return g;
}

double GridField::l2_norm_squared() const {
  double cell = 1.0;
  for (const auto& a : axes_) cell *= a.step;
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s * cell;
}

GridField materialize_even(const GridField& field, std::size_t axis_index) {
  field.require_real_2d("materialize_even");
  const Axis& half = field.axis(axis_index);
  if (half.parity != Parity::Even)
    throw Error(ErrorCode::InvalidArgument, "materialize_even needs an even axis");
  const std::size_t n = half.count;
  Axis full{half.name, -half.back(), half.step, 2 * n - 1, Parity::None};
  std::vector<Axis> axes = field.axes();
  axes[axis_index] = full;
  const std::size_t n0 = axes[0].count, n1 = axes[1].count;
  std::vector<double> out(n0 * n1);
  for (std::size_t i = 0; i < n0; ++i) {
    for (std::size_t j = 0; j < n1; ++j) {
      std::size_t si = i, sj = j;
      std::size_t& mirrored = axis_index == 0 ? si : sj;
      mirrored = mirrored >= n - 1 ? mirrored - (n - 1) : (n - 1) - mirrored;
      out[i * n1 + j] = field(si, sj);
    }
  }
  return GridField(std::move(axes), std::move(out), field.meta());
}

double relative_l2(const GridField& a, const GridField& b) {
  const auto va = a.values();
  const auto vb = b.values();
  if (va.size() != vb.size())
    throw Error(ErrorCode::GridMismatch, "relative_l2 on fields of different size");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    num += (va[i] - vb[i]) * (va[i] - vb[i]);
    den += vb[i] * vb[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace sphmean
