#include "sanov/loss.hpp"

#include <algorithm>
#include <cmath>

#include "sanov/errors.hpp"
#include "sanov/scalar_search.hpp"

namespace sanov {

LossFn LossFn::exp() {
  LossFn l;
  l.kind_ = Kind::Exp;
  l.left_limit_ = 0.0;
  l.name_ = "exp";
  l.validate();
  return l;
}

LossFn LossFn::power_plus(double q) {
  if (!(q > 1.0) || !std::isfinite(q)) throw InputError("power_plus loss requires finite q > 1");
  LossFn l;
  l.kind_ = Kind::PowerPlus;
  l.q_ = q;
  l.left_limit_ = 0.0;
  l.name_ = "power_plus";
  l.validate();
  return l;
}

LossFn LossFn::custom(std::function<double(double)> fn, double left_limit, double domain_lo, double domain_hi,
                      double max_slope, std::string name) {
  if (!fn) throw InputError("custom loss: empty callable");
  if (!(domain_lo < domain_hi)) throw InputError("custom loss: empty domain");
  if (!(left_limit >= 0.0) || !(left_limit < 1.0)) throw InputError("custom loss: left limit must lie in [0, 1)");
  LossFn l;
  l.kind_ = Kind::Custom;
  l.left_limit_ = left_limit;
  l.lo_ = domain_lo;
  l.hi_ = domain_hi;
  l.max_slope_ = max_slope;
  l.name_ = std::move(name);
  l.fn_ = std::make_shared<const std::function<double(double)>>(std::move(fn));
  auto gx = std::make_shared<std::vector<double>>(kConjugateGrid);
  auto gl = std::make_shared<std::vector<double>>(kConjugateGrid);
  for (int i = 0; i < kConjugateGrid; ++i) {
    const double x = domain_lo + (domain_hi - domain_lo) * i / (kConjugateGrid - 1);
    (*gx)[static_cast<std::size_t>(i)] = x;
    (*gl)[static_cast<std::size_t>(i)] = (*l.fn_)(x);
  }
  l.grid_x_ = std::move(gx);
  l.grid_l_ = std::move(gl);
  l.validate();
  return l;
}

LossFn LossFn::piecewise_linear(std::vector<double> xs, std::vector<double> ys, double left_limit) {
  if (xs.size() < 2 || xs.size() != ys.size()) throw InputError("piecewise_linear loss: need >= 2 knots");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw InputError("piecewise_linear loss: knots must increase");
  }
  const double s0 = (ys[1] - ys[0]) / (xs[1] - xs[0]);
  const std::size_t K = xs.size() - 1;
  const double s_last = (ys[K] - ys[K - 1]) / (xs[K] - xs[K - 1]);
  if (left_limit > ys[0]) throw InputError("piecewise_linear loss: left limit exceeds first knot value");
  auto fn = [xs, ys, left_limit, s0, s_last, K](double x) {
    if (x <= xs[0]) return std::max(left_limit, ys[0] + s0 * (x - xs[0]));
    if (x >= xs[K]) return ys[K] + s_last * (x - xs[K]);
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return ys[j - 1] + t * (ys[j] - ys[j - 1]);
  };
  // effective domain covers the left kink where the affine piece meets the floor
  double lo = xs[0] - 1.0;
  if (s0 > 0.0) lo = std::min(lo, xs[0] - (ys[0] - left_limit) / s0 - 1.0);
  return custom(fn, left_limit, lo, xs[K] + 1.0, s_last, "piecewise_linear");
}

double LossFn::operator()(double x) const {
  switch (kind_) {
    case Kind::Exp:
      return std::exp(x);
    case Kind::PowerPlus: {
      const double z = 1.0 + x;
      return z > 0.0 ? std::pow(z, q_) : 0.0;
    }
    case Kind::Custom:
      return (*fn_)(x);
  }
  return 0.0;
}

double LossFn::eval(ExtReal x) const {
  if (x.is_neg_inf()) return left_limit_;
  if (x.is_pos_inf()) return std::numeric_limits<double>::infinity();
  return (*this)(x.value());
}

double LossFn::derivative(double x) const {
  switch (kind_) {
    case Kind::Exp:
      return std::exp(x);
    case Kind::PowerPlus: {
      const double z = 1.0 + x;
      return z > 0.0 ? q_ * std::pow(z, q_ - 1.0) : 0.0;
    }
    case Kind::Custom: {
      const double h = 1e-6 * (1.0 + std::abs(x));
      return ((*fn_)(x + h) - (*fn_)(x)) / h;
    }
  }
  return 0.0;
}

ExtReal LossFn::conjugate(double y) const {
  if (y < 0.0) return ExtReal::pos_inf();
  if (y == 0.0) return ExtReal(-left_limit_);
  switch (kind_) {
    case Kind::Exp:
      return ExtReal(y * std::log(y) - y);
    case Kind::PowerPlus: {
      // sup over z = 1 + x >= 0 of (z - 1) y - z^q, attained at z = (y/q)^{1/(q-1)}
      const double z = std::pow(y / q_, 1.0 / (q_ - 1.0));
      return ExtReal(-y + z * y * (q_ - 1.0) / q_);
    }
    case Kind::Custom: {
      if (y > max_slope_) return ExtReal::pos_inf();
      const double x = conjugate_argmax(y);
      return ExtReal(x * y - (*fn_)(x));
    }
  }
  return ExtReal::pos_inf();
}

double LossFn::conjugate_argmax(double y) const {
  switch (kind_) {
    case Kind::Exp:
      return std::log(y);
    case Kind::PowerPlus:
      return std::pow(y / q_, 1.0 / (q_ - 1.0)) - 1.0;
    case Kind::Custom: {
      const auto& gx = *grid_x_;
      const auto& gl = *grid_l_;
      std::size_t best = 0;
      double best_v = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < gx.size(); ++i) {
        const double v = gx[i] * y - gl[i];
        if (v > best_v) {
          best_v = v;
          best = i;
        }
      }
      // supporting-line refinement between the neighbouring grid cells
      const double a = gx[best == 0 ? 0 : best - 1];
      const double b = gx[std::min(best + 1, gx.size() - 1)];
      const auto r = golden_section_maximize([&](double x) { return x * y - (*fn_)(x); }, a, b, 1e-13);
      return r.value >= best_v ? r.x : gx[best];
    }
  }
  return 0.0;
}

void LossFn::validate() const {
  const double lo = kind_ == Kind::Custom ? lo_ : -10.0;
  const double hi = kind_ == Kind::Custom ? hi_ : 10.0;
  constexpr int kChecks = 401;
  std::vector<double> xs(kChecks);
  std::vector<double> ls(kChecks);
  for (int i = 0; i < kChecks; ++i) {
    xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (kChecks - 1);
    ls[static_cast<std::size_t>(i)] = (*this)(xs[static_cast<std::size_t>(i)]);
    if (!(ls[static_cast<std::size_t>(i)] >= 0.0)) throw InputError("loss " + name_ + " must be nonnegative");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (ls[i] < ls[i - 1] - 1e-12) throw InputError("loss " + name_ + " is not nondecreasing");
  }
  for (std::size_t i = 2; i < xs.size(); ++i) {
    if (ls[i - 1] > 0.5 * (ls[i] + ls[i - 2]) + 1e-9) throw InputError("loss " + name_ + " is not convex");
  }
  if (!(ls.back() > ls.front())) throw InputError("loss " + name_ + " is constant");
  for (double x : {-1e-3, -1.0, -10.0}) {
    if (!((*this)(x) < 1.0)) throw InputError("loss " + name_ + " must satisfy l(x) < 1 for x < 0");
  }
}

}  // namespace sanov
