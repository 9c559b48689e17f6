#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sanov/alpha.hpp"

namespace sanov {

/// log sum_i mu_i e^{f_i}.
ExtReal rho_entropy(std::span<const ExtReal> f, const Dist& mu);

/// inf{m : sum_i mu_i l(f_i - m) <= 1}, by bisection.
/// LpEntropy with exponent p uses l = power_plus(p / (p - 1)).
ExtReal rho_shortfall(std::span<const ExtReal> f, const Dist& mu, const LossFn& loss);

/// phi* generators for the optimized certainty equivalent inf_m (int phi*(f - m) dmu + m).
class OceGenerator {
 public:
  enum class Kind { ExpMinusOne, PositivePart, ChiSquared };

  /// e^x - 1.
  static OceGenerator exp_minus_one() { return OceGenerator(Kind::ExpMinusOne, 1.0); }
  /// scale * max(x, 0).
  static OceGenerator positive_part(double scale = 1.0);
  /// x + x^2/4 for x >= -2, -1 below (conjugate of (y - 1)^2 on y >= 0).
  static OceGenerator chi_squared() { return OceGenerator(Kind::ChiSquared, 1.0); }

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  double operator()(double x) const;
  double at_minus_inf() const;

 private:
  OceGenerator(Kind kind, double scale) : kind_(kind), scale_(scale) {}
  Kind kind_;
  double scale_;
};

struct OceResult {
  ExtReal value;
  double m = 0.0;           // minimizing cash level (when finite)
  std::string diagnostic;   // set when the objective is unbounded below
};

OceResult rho_oce(std::span<const ExtReal> f, const Dist& mu, const OceGenerator& phi_star);

/// max over generators of log sum mu_j e^f.
ExtReal rho_robust(std::span<const ExtReal> f, const std::vector<Dist>& generators);

/// max over generators of int f d mu_j.
ExtReal rho_set_indicator(std::span<const ExtReal> f, const std::vector<Dist>& generators);

/// sum_x mu(x) max_y (f(y) - c(x, y)).
ExtReal rho_transport(std::span<const ExtReal> f, const Dist& mu, std::span<const ExtReal> cost);

/// Closed-form rho for any spec.
ExtReal rho(std::span<const ExtReal> f, const AlphaSpec& spec);

/// A maximizer nu* of int f d nu - alpha(nu) (none when rho(f) is infinite).
std::optional<Dist> rho_argmax(std::span<const ExtReal> f, const AlphaSpec& spec);

enum class RhoMethod { ClosedForm, SimplexOpt, RootFind };
std::string to_string(RhoMethod method);

struct RhoResult {
  ExtReal value;
  std::optional<Dist> maximizer;
  RhoMethod method = RhoMethod::ClosedForm;
  std::optional<ExtReal> closed_form;
  bool certified = false;  // |value - closed_form| <= 1e-6
};

/// Closed-form value with its maximizer; shortfall-type specs are tagged RootFind.
RhoResult rho_evaluate(std::span<const ExtReal> f, const AlphaSpec& spec);

struct GenericOptions {
  int restarts = 200;
  int max_iter = 2000;
  std::uint64_t seed = 0;
};

/// Maximizes nu -> int f d nu - alpha(nu) over the simplex by projected
/// gradient ascent with backtracking, from Dirichlet(1) restarts, followed by
/// pairwise-transfer refinement. Certified against the closed form.
RhoResult rho_generic(std::span<const ExtReal> f, const AlphaSpec& spec, const GenericOptions& opts = {});

struct ConjugateResult {
  ExtReal lower_bound;      // sup over the f-box of int f d nu - rho(f)
  ExtReal direct;           // alpha(nu)
  ExtReal gap;              // direct - lower_bound
  std::vector<double> f;    // best f found
};

/// Lower approximation of alpha(nu) = sup_f (int f d nu - rho(f)) over the
/// box [-bound, bound]^m: grid with step `step`, then coordinate ascent.
ConjugateResult conjugate_alpha(const Dist& nu, const AlphaSpec& spec, double bound, double step);

}  // namespace sanov
