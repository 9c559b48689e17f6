#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <span>
#include <string>

#include "sanov/errors.hpp"

namespace sanov {

/// Real number extended with +inf and -inf.
///
/// Addition follows the convention inf - inf = -inf: any sum containing -inf
/// is -inf, otherwise any sum containing +inf is +inf. NaN is never stored.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  ExtReal(double v) : v_(v) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(v)) throw InputError("ExtReal cannot hold NaN");
  }

  static constexpr ExtReal pos_inf() { return ExtReal(Raw{}, std::numeric_limits<double>::infinity()); }
  static constexpr ExtReal neg_inf() { return ExtReal(Raw{}, -std::numeric_limits<double>::infinity()); }

  constexpr double value() const { return v_; }
  constexpr bool is_finite() const {
    return v_ != std::numeric_limits<double>::infinity() && v_ != -std::numeric_limits<double>::infinity();
  }
  constexpr bool is_pos_inf() const { return v_ == std::numeric_limits<double>::infinity(); }
  constexpr bool is_neg_inf() const { return v_ == -std::numeric_limits<double>::infinity(); }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.is_neg_inf() || b.is_neg_inf()) return neg_inf();
    if (a.is_pos_inf() || b.is_pos_inf()) return pos_inf();
    return ExtReal(Raw{}, a.v_ + b.v_);
  }
  friend ExtReal operator-(ExtReal a) { return ExtReal(Raw{}, -a.v_); }
  friend ExtReal operator-(ExtReal a, ExtReal b) { return a + (-b); }
  ExtReal& operator+=(ExtReal o) { return *this = *this + o; }
  ExtReal& operator-=(ExtReal o) { return *this = *this - o; }

  /// Multiplication by a nonnegative weight with 0 * (+-inf) = 0 (integration convention).
  friend ExtReal weighted(double w, ExtReal a) {
    if (w == 0.0) return ExtReal{};
    if (!a.is_finite()) return a;
    return ExtReal(Raw{}, w * a.v_);
  }

  friend constexpr bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }
  friend constexpr auto operator<=>(ExtReal a, ExtReal b) { return a.v_ <=> b.v_; }

  std::string to_string() const;

 private:
  struct Raw {};
  constexpr ExtReal(Raw, double v) : v_(v) {}
  double v_ = 0.0;
};

inline ExtReal max(ExtReal a, ExtReal b) { return a < b ? b : a; }
inline ExtReal min(ExtReal a, ExtReal b) { return b < a ? b : a; }

/// Integral of `values` against nonnegative `weights` under the ExtReal conventions.
ExtReal integrate(std::span<const ExtReal> values, std::span<const double> weights);

/// Parses "inf", "+inf", "-inf" (case-insensitive) or a decimal number.
ExtReal parse_ext_real(const std::string& text);

}  // namespace sanov
