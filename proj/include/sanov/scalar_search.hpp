#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace sanov {

struct ScalarMin {
  double x;
  double value;
};

/// Golden-section search for the minimum of a unimodal function on [lo, hi].
/// Stops once the bracket is narrower than `tol`.
inline ScalarMin golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                         double tol = 1e-12, int max_iter = 400) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  // the endpoints may beat the interior probes when the minimum sits on the boundary
  ScalarMin best{c, fc};
  if (fd < best.value) best = {d, fd};
  for (double e : {lo, hi}) {
    const double fe = f(e);
    if (fe < best.value) best = {e, fe};
  }
  return best;
}

inline ScalarMin golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                         double tol = 1e-12, int max_iter = 400) {
  auto r = golden_section_minimize([&](double x) { return -f(x); }, lo, hi, tol, max_iter);
  return {r.x, -r.value};
}

}  // namespace sanov
