#include "sanov/cramer.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/pareto.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "sanov/errors.hpp"
#include "sanov/random.hpp"
#include "sanov/scalar_search.hpp"

namespace sanov {
namespace {

constexpr double kQuadTol = 1e-11;

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_points(const std::vector<std::vector<double>>& pts) {
  if (pts.empty()) throw InputError("law needs at least one point");
  const std::size_t d = pts.front().size();
  if (d == 0 || d > 3) throw InputError("law dimension must be 1, 2 or 3");
  for (const auto& p : pts) {
    if (p.size() != d) throw InputError("law points have inconsistent dimension");
    for (double v : p)
      if (!std::isfinite(v)) throw InputError("law points must be finite");
  }
}

// E[g(Q(U))] split at the median: the upper half is integrated in v = 1 - u through the
// complementary quantile so that the heavy tail stays resolved near v = 0.
template <class D>
double closed_expect(const D& dist, double shift, const std::function<double(double)>& g, std::span<const double> kinks) {
  using boost::math::cdf;
  using boost::math::complement;
  using boost::math::quantile;
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator;

  const double median = quantile(dist, 0.5);
  std::vector<double> lower{0.0, 0.5};
  std::vector<double> upper{0.0, 0.5};
  for (double k : kinks) {
    const double x = k - shift;
    if (!std::isfinite(x)) continue;
    if (x < median) {
      const double u = cdf(dist, std::max(x, boost::math::support(dist).first));
      if (u > 0.0 && u < 0.5) lower.push_back(u);
    } else if (x > median) {
      const double v = cdf(complement(dist, x));
      if (v > 0.0 && v < 0.5) upper.push_back(v);
    }
  }
  std::sort(lower.begin(), lower.end());
  std::sort(upper.begin(), upper.end());

  auto safe = [](double y) { return std::isfinite(y) ? y : 0.0; };
  auto lo_f = [&](double u) {
    u = std::clamp(u, DBL_MIN, 0.5);
    return safe(g(quantile(dist, u) + shift));
  };
  auto hi_f = [&](double v) {
    v = std::clamp(v, DBL_MIN, 0.5);
    return safe(g(quantile(complement(dist, v)) + shift));
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < lower.size(); ++i)
    if (lower[i + 1] > lower[i]) total += integrator.integrate(lo_f, lower[i], lower[i + 1], kQuadTol);
  for (std::size_t i = 0; i + 1 < upper.size(); ++i)
    if (upper[i + 1] > upper[i]) total += integrator.integrate(hi_f, upper[i], upper[i + 1], kQuadTol);
  return total;
}

}  // namespace

SampleLaw SampleLaw::empirical(std::vector<std::vector<double>> samples) {
  check_points(samples);
  SampleLaw law;
  law.kind_ = Kind::Empirical;
  law.dim_ = samples.front().size();
  law.probs_.assign(samples.size(), 1.0 / static_cast<double>(samples.size()));
  law.points_ = std::move(samples);
  return law;
}

SampleLaw SampleLaw::finite_support(std::vector<std::vector<double>> points, std::vector<double> probs) {
  check_points(points);
  if (probs.size() != points.size()) throw InputError("finite_support: points and probs differ in length");
  double s = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InputError("finite_support: probabilities must be nonnegative");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9) throw InputError("finite_support: probabilities must sum to one");
  for (double& p : probs) p /= s;
  SampleLaw law;
  law.kind_ = Kind::FiniteSupport;
  law.dim_ = points.front().size();
  law.points_ = std::move(points);
  law.probs_ = std::move(probs);
  return law;
}

SampleLaw SampleLaw::pareto(double a, double shift) {
  if (!(a > 0.0) || !std::isfinite(a)) throw InputError("pareto: tail index must be positive");
  if (!std::isfinite(shift)) throw InputError("pareto: shift must be finite");
  SampleLaw law;
  law.kind_ = Kind::Pareto;
  law.param_ = a;
  law.shift_ = shift;
  return law;
}

SampleLaw SampleLaw::pareto_centered(double a) {
  if (!(a > 1.0)) throw InputError("pareto_centered: the mean is finite only for a > 1");
  return pareto(a, -a / (a - 1.0));
}

SampleLaw SampleLaw::student_t(double df) {
  if (!(df > 0.0) || !std::isfinite(df)) throw InputError("student_t: degrees of freedom must be positive");
  SampleLaw law;
  law.kind_ = Kind::StudentT;
  law.param_ = df;
  return law;
}

SampleLaw SampleLaw::lognormal(double sigma, bool centered) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("lognormal: sigma must be positive");
  SampleLaw law;
  law.kind_ = Kind::LogNormal;
  law.param_ = sigma;
  law.shift_ = centered ? -std::exp(0.5 * sigma * sigma) : 0.0;
  return law;
}

std::string SampleLaw::name() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Empirical: os << "empirical(N=" << points_.size() << ", d=" << dim_ << ")"; break;
    case Kind::FiniteSupport: os << "finite_support(k=" << points_.size() << ", d=" << dim_ << ")"; break;
    case Kind::Pareto: os << "pareto(a=" << param_ << ", shift=" << shift_ << ")"; break;
    case Kind::StudentT: os << "student_t(df=" << param_ << ")"; break;
    case Kind::LogNormal: os << "lognormal(sigma=" << param_ << ", shift=" << shift_ << ")"; break;
  }
  return os.str();
}

void SampleLaw::check_admissible(double q) const {
  if (!(q > 1.0) || !std::isfinite(q)) throw InputError("q must be finite and > 1");
  if (kind_ == Kind::Pareto && !(param_ > q))
    throw InputError("pareto tail index " + std::to_string(param_) + " must exceed q = " + std::to_string(q));
  if (kind_ == Kind::StudentT && !(param_ > q))
    throw InputError("student_t degrees of freedom " + std::to_string(param_) + " must exceed q = " + std::to_string(q));
}

double SampleLaw::expect(const std::function<double(std::span<const double>)>& g, std::span<const double> kinks) const {
  if (!is_closed()) {
    double s = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (probs_[i] > 0.0) s += probs_[i] * g(points_[i]);
    return s;
  }
  auto g1 = [&](double x) { return g(std::span<const double>(&x, 1)); };
  switch (kind_) {
    case Kind::Pareto: return closed_expect(boost::math::pareto_distribution<double>(1.0, param_), shift_, g1, kinks);
    case Kind::StudentT: return closed_expect(boost::math::students_t_distribution<double>(param_), shift_, g1, kinks);
    case Kind::LogNormal:
      return closed_expect(boost::math::lognormal_distribution<double>(0.0, param_), shift_, g1, kinks);
    default: break;
  }
  throw InputError("unknown law kind");
}

double SampleLaw::mean(std::size_t coord) const {
  if (coord >= dim_) throw InputError("mean: coordinate out of range");
  switch (kind_) {
    case Kind::Pareto:
      if (!(param_ > 1.0)) throw InputError("pareto mean is infinite for a <= 1");
      return param_ / (param_ - 1.0) + shift_;
    case Kind::StudentT:
      if (!(param_ > 1.0)) throw InputError("student_t mean is undefined for df <= 1");
      return 0.0;
    case Kind::LogNormal: return std::exp(0.5 * param_ * param_) + shift_;
    default: break;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) s += probs_[i] * points_[i][coord];
  return s;
}

ExtReal lambda(std::span<const double> x_star, const SampleLaw& law, double q) {
  law.check_admissible(q);
  if (x_star.size() != law.dim()) throw InputError("lambda: x* has the wrong dimension");
  if (norm(x_star) == 0.0) return 0.0;

  std::function<double(double)> G;
  if (law.is_closed()) {
    const double t = x_star[0];
    G = [&law, q, t](double m) {
      const double kink = (m - 1.0) / t;
      return law.expect(
          [&](std::span<const double> x) {
            const double z = 1.0 + t * x[0] - m;
            return z > 0.0 ? std::pow(z, q) : 0.0;
          },
          std::span<const double>(&kink, 1));
    };
  } else {
    std::vector<double> proj(law.points().size());
    for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = dot(x_star, law.points()[i]);
    G = [proj = std::move(proj), &law, q](double m) {
      double s = 0.0;
      for (std::size_t i = 0; i < proj.size(); ++i) {
        const double z = 1.0 + proj[i] - m;
        if (z > 0.0) s += law.probs()[i] * std::pow(z, q);
      }
      return s;
    };
  }

  // bracket the crossing of G = 1 (G is continuous and nonincreasing)
  double hi = 1.0;
  while (G(hi) > 1.0) {
    hi *= 2.0;
    if (hi > 1e300) return ExtReal::pos_inf();
  }
  double lo = -1.0;
  while (G(lo) <= 1.0) {
    hi = lo;
    lo *= 2.0;
    if (lo < -1e300) throw NumericError("lambda: G stays below one on the expanded bracket");
  }
  auto h = [&](double m) { return G(m) - 1.0; };
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(h, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (r.first + r.second);
}

LambdaEstimate lambda_bootstrap(std::span<const double> x_star, const SampleLaw& law, double q, int resamples,
                                std::uint64_t seed) {
  if (law.kind() != SampleLaw::Kind::Empirical) throw InputError("lambda_bootstrap needs an empirical law");
  if (resamples < 2) throw InputError("lambda_bootstrap needs at least two resamples");
  const double value = lambda(x_star, law, q).value();
  const std::size_t n = law.points().size();
  std::vector<double> reps(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    CounterRng rng(seed, static_cast<std::uint64_t>(b));
    std::vector<std::vector<double>> pts(n);
    for (auto& p : pts) p = law.points()[rng.below(n)];
    reps[static_cast<std::size_t>(b)] = lambda(x_star, SampleLaw::empirical(std::move(pts)), q).value();
  }
  const double mean = std::accumulate(reps.begin(), reps.end(), 0.0) / resamples;
  double ss = 0.0;
  for (double r : reps) ss += (r - mean) * (r - mean);
  return {value, std::sqrt(ss / (resamples - 1))};
}

LambdaStarResult lambda_star(std::span<const double> x, const SampleLaw& law, double q, const LambdaStarSearch& search) {
  law.check_admissible(q);
  const std::size_t d = law.dim();
  if (x.size() != d) throw InputError("lambda_star: x has the wrong dimension");
  if (d > 3) throw InputError("lambda_star: dimension must be at most 3");
  for (double v : x)
    if (!std::isfinite(v)) throw InputError("lambda_star: x must be finite");

  auto phi = [&](std::span<const double> y) {
    const ExtReal l = lambda(y, law, q);
    return l.is_finite() ? dot(y, x) - l.value() : -std::numeric_limits<double>::infinity();
  };
  const int per_axis = search.grid > 0 ? search.grid : (d == 1 ? 65 : d == 2 ? 17 : 9);
  if (per_axis < 3) throw InputError("lambda_star: grid needs at least 3 points per axis");

  std::vector<double> best(d, 0.0);
  double best_value = phi(best);
  double radius = search.radius;
  double step = 0.0;
  for (;;) {
    step = 2.0 * radius / (per_axis - 1);
    std::size_t cells = 1;
    for (std::size_t c = 0; c < d; ++c) cells *= static_cast<std::size_t>(per_axis);
    std::vector<double> y(d);
    bool on_edge = false;
    for (std::size_t idx = 0; idx < cells; ++idx) {
      std::size_t rest = idx;
      for (std::size_t c = 0; c < d; ++c) {
        y[c] = -radius + step * static_cast<double>(rest % per_axis);
        rest /= per_axis;
      }
      const double v = phi(y);
      if (v > best_value) {
        best_value = v;
        best = y;
      }
    }
    for (double b : best) on_edge = on_edge || std::abs(b) >= radius - 1e-12 * radius;
    if (!on_edge) break;
    if (radius >= search.ray_radius) {
      // argmax keeps running to the box boundary: test growth along the ray through it
      const double n = norm(best);
      std::vector<double> near(d), far(d);
      for (std::size_t c = 0; c < d; ++c) {
        far[c] = best[c] / n * search.ray_radius;
        near[c] = far[c] / 10.0;
      }
      const double v_far = phi(far);
      if (v_far - phi(near) > 1e-3) return {ExtReal::pos_inf(), far};
      break;
    }
    radius = std::min(radius * 4.0, search.ray_radius);
  }

  // coordinate-wise golden section, halving the bracket once no coordinate hits its edge
  double h = step;
  for (int cycle = 0; cycle < 400 && h > 1e-10 * (1.0 + norm(best)); ++cycle) {
    bool hit_edge = false;
    for (std::size_t c = 0; c < d; ++c) {
      const double lo = std::max(best[c] - h, -radius);
      const double hi = std::min(best[c] + h, radius);
      std::vector<double> y = best;
      const auto r = golden_section_maximize(
          [&](double t) {
            y[c] = t;
            return phi(y);
          },
          lo, hi, 1e-12 * (1.0 + std::abs(best[c])), 200);
      if (r.value > best_value) {
        best_value = r.value;
        best[c] = r.x;
        if ((r.x == lo && lo > -radius) || (r.x == hi && hi < radius)) hit_edge = true;
      }
    }
    if (!hit_edge) h *= 0.5;
  }
  return {best_value, best};
}

double moment_mq(const SampleLaw& law, double q) {
  law.check_admissible(q);
  const double zero = 0.0;
  const double m = law.expect([q](std::span<const double> x) { return std::pow(norm(x), q); },
                              std::span<const double>(&zero, 1));
  return std::pow(m, 1.0 / q);
}

double deviation_bound(double r, double mq, double q, double n) {
  if (!(q > 1.0)) throw InputError("deviation_bound: q must be > 1");
  if (!(mq >= 0.0) || !std::isfinite(mq)) throw InputError("deviation_bound: M_q must be finite and nonnegative");
  if (!(n > 0.0)) throw InputError("deviation_bound: n must be positive");
  if (!(r > mq)) throw InputError("deviation_bound: r must exceed M_q, otherwise the bound is vacuous");
  return std::pow(mq / (r - mq), q) * std::pow(n, 1.0 - q);
}

}  // namespace sanov
