#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sanov/ext_real.hpp"

namespace sanov {

/// Law of a random vector X in R^d (d <= 3): a finite sample, a finite-support
/// law, or a named one-dimensional family.
class SampleLaw {
 public:
  enum class Kind { Empirical, FiniteSupport, Pareto, StudentT, LogNormal };

  static SampleLaw empirical(std::vector<std::vector<double>> samples);
  static SampleLaw finite_support(std::vector<std::vector<double>> points, std::vector<double> probs);
  /// Standard Pareto with tail index a (scale 1) plus `shift`.
  static SampleLaw pareto(double a, double shift);
  /// Pareto shifted by its mean a/(a-1); requires a > 1.
  static SampleLaw pareto_centered(double a);
  static SampleLaw student_t(double df);
  /// exp(sigma Z), centered by exp(sigma^2 / 2) when requested.
  static SampleLaw lognormal(double sigma, bool centered = true);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  bool is_closed() const { return kind_ != Kind::Empirical && kind_ != Kind::FiniteSupport; }
  double param() const { return param_; }
  double shift() const { return shift_; }
  /// Atoms and weights of discrete laws (samples get weight 1/N).
  const std::vector<std::vector<double>>& points() const { return points_; }
  const std::vector<double>& probs() const { return probs_; }
  std::string name() const;

  /// Throws InputError unless E|X|^q < infinity.
  void check_admissible(double q) const;

  /// E[g(X)]. For closed families g must be piecewise smooth with breaks only at `kinks`.
  double expect(const std::function<double(std::span<const double>)>& g, std::span<const double> kinks = {}) const;

  double mean(std::size_t coord = 0) const;

 private:
  SampleLaw() = default;

  Kind kind_ = Kind::Empirical;
  std::size_t dim_ = 1;
  double param_ = 0.0;
  double shift_ = 0.0;
  std::vector<std::vector<double>> points_;
  std::vector<double> probs_;
};

/// Lambda(x*) = inf{m : E[((1 + <x*, X> - m)^+)^q] <= 1}.
ExtReal lambda(std::span<const double> x_star, const SampleLaw& law, double q);

/// Plug-in Lambda on an empirical law with a bootstrap standard error.
struct LambdaEstimate {
  double value;
  double se;
};
LambdaEstimate lambda_bootstrap(std::span<const double> x_star, const SampleLaw& law, double q, int resamples,
                                std::uint64_t seed);

struct LambdaStarResult {
  ExtReal value;
  std::vector<double> argmax;
};

struct LambdaStarSearch {
  double radius = 8.0;        // initial box half-width for the dual grid
  int grid = 0;               // points per axis; 0 picks 65, 17, 9 for d = 1, 2, 3
  double ray_radius = 1e3;    // divergence test radius
};

/// Lambda*(x) = sup_{x*} (<x*, x> - Lambda(x*)).
LambdaStarResult lambda_star(std::span<const double> x, const SampleLaw& law, double q,
                             const LambdaStarSearch& search = {});

/// M_q = E[|X|^q]^{1/q} (Euclidean norm).
double moment_mq(const SampleLaw& law, double q);

/// (M_q / (r - M_q))^q n^{1-q}; requires r > M_q.
double deviation_bound(double r, double mq, double q, double n);

}  // namespace sanov
