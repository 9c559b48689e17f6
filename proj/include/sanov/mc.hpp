#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sanov/cramer.hpp"
#include "sanov/ext_real.hpp"
#include "sanov/random.hpp"

namespace sanov {

/// Draws from a one-dimensional SampleLaw (closed families by inversion or
/// standard transforms, discrete laws by CDF search).
class Sampler {
 public:
  explicit Sampler(SampleLaw law);

  const SampleLaw& law() const { return law_; }
  double draw(CounterRng& rng) const;

 private:
  SampleLaw law_;
  std::vector<double> values_;
  std::vector<double> cdf_;
};

struct WilsonInterval {
  double lo;
  double hi;
};

/// Wilson score interval for hits out of trials (default 95%).
WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z = 1.959963984540054);

struct TailEstimate {
  int n = 0;
  double r = 0.0;
  std::uint64_t replications = 0;
  std::uint64_t hits = 0;
  double p_hat = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

inline constexpr std::uint64_t kMinReplications = 1000;

/// Fraction of R replications with S_n / n >= r; replication i draws from stream
/// `stream_offset + i` of `seed`. Throws InconclusiveError if R < 10^3.
TailEstimate estimate_tail(const Sampler& sampler, int n, double r, std::uint64_t R, std::uint64_t seed,
                           int threads = 1, std::uint64_t stream_offset = 0);

struct RatePoint {
  double n;
  double p;
  double weight;  // inverse variance of log p; zero excludes the point
};

struct RateFit {
  enum class Status { Ok, Inconclusive };
  Status status = Status::Inconclusive;
  double slope = 0.0;
  double intercept = 0.0;
  double se = 0.0;
  int points = 0;
  /// slope + 1.645 se: the one-sided 95% upper bound.
  double upper95() const { return slope + 1.6448536269514722 * se; }
};

/// Weighted least squares of log p on log n over points with p > 0 and weight > 0.
/// The standard error is inflated by the residual dispersion when it exceeds one.
RateFit rate_fit(std::span<const RatePoint> points);
/// Weights are the hit counts (var log p_hat ~ 1 / hits).
RateFit rate_fit(std::span<const TailEstimate> estimates);

struct MannKendall {
  double s = 0.0;
  double variance = 0.0;
  double z = 0.0;
  double p_upward = 1.0;  // one-sided p-value for an increasing trend
};

/// Mann-Kendall trend test with the tie correction.
MannKendall mann_kendall(std::span<const double> series);

/// A loss h(x, w) with its breakpoints in w (for quadrature) and the growth
/// exponent k of sup_x |h(x, w)| = O(|w|^k).
struct SaaLoss {
  std::string name;
  std::function<double(double, double)> h;
  std::function<std::vector<double>(double)> kinks;
  double growth = 1.0;
};

SaaLoss huber_loss(double delta);
SaaLoss quadratic_loss();
SaaLoss absolute_loss();

struct SaaInstance {
  std::vector<double> grid;  // decisions
  SaaLoss loss;
  SampleLaw law;
  double eps = 0.0;
  double q = 2.0;
};

/// Checks the grid, the law dimension and integrability of psi^q (via the growth exponent).
void validate(const SaaInstance& inst);

struct SaaValue {
  double value;
  std::size_t argmin;
  std::vector<double> per_decision;
};

/// V(mu) = min over the grid of E h(x, W).
SaaValue saa_value(const SaaInstance& inst);
/// V(L_n) for a sample.
SaaValue saa_value(const SaaInstance& inst, std::span<const double> sample);

struct SaaReport {
  double v_mu = 0.0;
  std::vector<TailEstimate> estimates;  // r = eps
  std::vector<double> scaled;           // n^{q-1} p_hat
  MannKendall trend;
  RateFit rate;
};

/// Estimates P(|V(L_n) - V(mu)| >= eps) over the schedule.
SaaReport saa_run(const SaaInstance& inst, const std::vector<int>& schedule, std::uint64_t R, std::uint64_t seed,
                  int threads = 1);

/// Exact P(|V(L_n) - V(mu)| >= eps) by enumerating all outcomes of a finite-support law.
double saa_exact_exceedance(const SaaInstance& inst, int n);

struct GrowthFn {
  std::string name;
  std::function<double(double)> phi;
};

/// phi(d) = c d^2.
GrowthFn quadratic_growth(double c);

struct ArgminReport {
  double x_hat = 0.0;
  std::vector<TailEstimate> estimates;  // event phi(|x_hat(L_n) - x_hat(mu)|) >= eps
  RateFit rate;
};

/// Throws InputError with a report when the argmin over the grid is not unique or
/// V(x) - V(x_hat) >= phi(|x - x_hat|) fails at some grid point.
void validate_growth(const SaaInstance& inst, const GrowthFn& phi);

ArgminReport argmin_tracking(const SaaInstance& inst, const GrowthFn& phi, const std::vector<int>& schedule,
                             std::uint64_t R, std::uint64_t seed, int threads = 1);

/// Exact exceedance probability of the argmin event for a finite-support law.
double argmin_exact_exceedance(const SaaInstance& inst, const GrowthFn& phi, int n);

/// Increments with E[exp(y D) | past] <= exp(phi(y)).
enum class IncrementFamily { Rademacher, Uniform, Scripted };

std::string to_string(IncrementFamily f);
IncrementFamily increment_family_from_string(const std::string& s);

/// log cosh y for Rademacher and Scripted, log(sinh y / y) for Uniform.
double increment_phi(IncrementFamily f, double y);
/// phi*(x) = sup_y (x y - phi(y)).
ExtReal increment_phi_star(IncrementFamily f, double x);

/// One step of the martingale given the current partial sum after k steps.
double increment_step(IncrementFamily f, CounterRng& rng, double partial_sum, int k, double r);

struct AzumaPoint {
  TailEstimate estimate;
  ExtReal log_rate;  // (1/n) log p_hat
  double bound;      // -phi*(r)
  bool ok;           // log_rate <= bound + slack
};

struct AzumaReport {
  IncrementFamily family;
  double r;
  double slack;
  std::vector<AzumaPoint> points;
};

AzumaReport azuma_experiment(IncrementFamily family, const std::vector<int>& schedule, double r, std::uint64_t R,
                             std::uint64_t seed, int threads = 1, double slack = 0.1);

}  // namespace sanov
