#pragma once

#include <string>
#include <variant>
#include <vector>

#include "sanov/ext_real.hpp"
#include "sanov/loss.hpp"
#include "sanov/space.hpp"

namespace sanov {

struct RelativeEntropySpec {
  Dist mu;
};
struct LpEntropySpec {
  Dist mu;
  double p;
};
struct ShortfallSpec {
  Dist mu;
  LossFn loss;
};
struct RobustSpec {
  std::vector<Dist> generators;
};
struct SetIndicatorSpec {
  std::vector<Dist> generators;  // interpreted as their convex hull
};
struct TransportSpec {
  Dist mu;
  std::vector<ExtReal> cost;  // m x m, row x = source (mu), column y = target (nu)
};

/// Which penalty functional is in force, with its parameters.
class AlphaSpec {
 public:
  enum class Kind { RelativeEntropy, LpEntropy, Shortfall, Robust, SetIndicator, Transport };
  using Variant =
      std::variant<RelativeEntropySpec, LpEntropySpec, ShortfallSpec, RobustSpec, SetIndicatorSpec, TransportSpec>;

  static AlphaSpec relative_entropy(Dist mu);
  static AlphaSpec lp_entropy(Dist mu, double p);
  static AlphaSpec shortfall(Dist mu, LossFn loss);
  static AlphaSpec robust(std::vector<Dist> generators);
  static AlphaSpec set_indicator(std::vector<Dist> generators);
  /// Each cost row needs a finite entry. With `require_finite_diagonal`, c(x,x) must be finite.
  static AlphaSpec transport(Dist mu, std::vector<ExtReal> cost, bool require_finite_diagonal = false);

  Kind kind() const { return static_cast<Kind>(v_.index()); }
  const Variant& variant() const { return v_; }
  const FiniteSpace& space() const;
  std::string name() const;

  template <class T>
  const T& as() const {
    return std::get<T>(v_);
  }

 private:
  explicit AlphaSpec(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

std::string to_string(AlphaSpec::Kind kind);

/// H(nu | mu) with 0 log 0 = 0; +inf unless nu << mu.
ExtReal relative_entropy(const Dist& nu, const Dist& mu);

/// || d nu / d mu ||_{L^p(mu)} - 1; +inf unless nu << mu.
ExtReal lp_entropy(const Dist& nu, const Dist& mu, double p);

/// inf_{t > 0} (1/t) (1 + sum_i mu_i l*(t nu_i / mu_i)); +inf unless nu << mu.
ExtReal shortfall_alpha(const Dist& nu, const Dist& mu, const LossFn& loss);

struct RobustAlphaResult {
  ExtReal value;
  std::vector<double> weights;  // optimal mixture weights over the generators
};

/// min over the convex hull of the generators of H(nu | .).
RobustAlphaResult robust_alpha_weights(const Dist& nu, const std::vector<Dist>& generators);
ExtReal robust_alpha(const Dist& nu, const std::vector<Dist>& generators);

/// 0 if nu lies in conv(generators) within Euclidean distance 1e-9, else +inf.
ExtReal set_indicator_alpha(const Dist& nu, const std::vector<Dist>& generators);

/// Optimal transport cost from mu to nu.
ExtReal transport_alpha(const Dist& nu, const Dist& mu, std::span<const ExtReal> cost);

ExtReal alpha(const Dist& nu, const AlphaSpec& spec);

/// A subgradient of alpha at nu (empty when alpha(nu) = +inf).
/// For SetIndicator the zero vector is returned on the hull.
std::vector<double> alpha_subgradient(const Dist& nu, const AlphaSpec& spec);

/// E_nu sum_k alpha(nu_{k-1,k}); zero-probability prefixes contribute 0.
ExtReal alpha_n(const ProductDist& nu, const AlphaSpec& spec);

}  // namespace sanov
