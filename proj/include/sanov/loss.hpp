#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "sanov/ext_real.hpp"

namespace sanov {

/// Nondecreasing, nonconstant, convex loss l : R -> R_+ with l(x) < 1 for x < 0,
/// the generator of a shortfall risk measure.
class LossFn {
 public:
  enum class Kind { Exp, PowerPlus, Custom };

  /// l(x) = e^x.
  static LossFn exp();
  /// l(x) = ((1 + x)^+)^q, q > 1.
  static LossFn power_plus(double q);
  /// Arbitrary convex nondecreasing callable. `left_limit` is lim_{x -> -inf} l(x);
  /// [domain_lo, domain_hi] is the effective domain used for the numeric conjugate.
  /// `max_slope`, when finite, is the slope of a linear right tail (l* = +inf beyond it).
  static LossFn custom(std::function<double(double)> fn, double left_limit, double domain_lo, double domain_hi,
                       double max_slope = std::numeric_limits<double>::infinity(), std::string name = "custom");
  /// Piecewise-linear interpolation of knots, constant `left_limit` far left, linear right tail.
  static LossFn piecewise_linear(std::vector<double> xs, std::vector<double> ys, double left_limit);

  Kind kind() const { return kind_; }
  double q() const { return q_; }
  const std::string& name() const { return name_; }

  double operator()(double x) const;
  /// l(-inf) for -inf arguments, l(x) otherwise.
  double eval(ExtReal x) const;
  double left_limit() const { return left_limit_; }
  /// Right derivative.
  double derivative(double x) const;

  /// l*(y) = sup_x (x y - l(x)).
  ExtReal conjugate(double y) const;
  /// A maximizer of x y - l(x) (the derivative of l* at y), for y in the interior of dom l*.
  double conjugate_argmax(double y) const;

  /// Points of the numeric grid used for the Custom conjugate.
  static constexpr int kConjugateGrid = 4097;

 private:
  LossFn() = default;
  void validate() const;

  Kind kind_ = Kind::Exp;
  double q_ = 0.0;
  double left_limit_ = 0.0;
  double lo_ = -10.0;
  double hi_ = 10.0;
  double max_slope_ = std::numeric_limits<double>::infinity();
  std::string name_;
  std::shared_ptr<const std::function<double(double)>> fn_;
  std::shared_ptr<const std::vector<double>> grid_x_;  // Custom: conjugate grid
  std::shared_ptr<const std::vector<double>> grid_l_;
};

}  // namespace sanov
