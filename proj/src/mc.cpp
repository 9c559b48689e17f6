#include "sanov/mc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "sanov/errors.hpp"
#include "sanov/parallel.hpp"
#include "sanov/scalar_search.hpp"
#include "sanov/space.hpp"

namespace sanov {
namespace {

void require_replications(std::uint64_t R) {
  if (R < kMinReplications)
    throw InconclusiveError("at least " + std::to_string(kMinReplications) + " replications are required, got " +
                            std::to_string(R));
}

void require_schedule(const std::vector<int>& schedule) {
  if (schedule.empty()) throw InputError("schedule must not be empty");
  for (int n : schedule)
    if (n < 1) throw InputError("schedule entries must be positive");
}

// Counts replications i in [0, R) for which hit(rng_i) holds.
template <class Hit>
std::uint64_t count_hits(std::uint64_t R, std::uint64_t seed, std::uint64_t stream_offset, int threads, Hit&& hit) {
  std::vector<std::uint8_t> flags(R, 0);
  parallel_for(R, threads, [&](std::size_t i) {
    CounterRng rng(seed, stream_offset + i);
    flags[i] = hit(rng) ? 1 : 0;
  });
  return std::accumulate(flags.begin(), flags.end(), std::uint64_t{0});
}

TailEstimate make_estimate(int n, double r, std::uint64_t R, std::uint64_t hits) {
  const auto ci = wilson_interval(hits, R);
  return {n, r, R, hits, static_cast<double>(hits) / static_cast<double>(R), ci.lo, ci.hi};
}

double log_cosh(double y) {
  const double a = std::abs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double log_sinhc(double y) {
  const double a = std::abs(y);
  if (a < 1e-4) return a * a / 6.0;
  return a + std::log1p(-std::exp(-2.0 * a)) - std::log(2.0 * a);
}

}  // namespace

Sampler::Sampler(SampleLaw law) : law_(std::move(law)) {
  if (law_.dim() != 1) throw InputError("Sampler: only one-dimensional laws can be sampled");
  if (!law_.is_closed()) {
    double c = 0.0;
    for (std::size_t i = 0; i < law_.points().size(); ++i) {
      values_.push_back(law_.points()[i][0]);
      c += law_.probs()[i];
      cdf_.push_back(c);
    }
    cdf_.back() = 1.0;
  }
}

double Sampler::draw(CounterRng& rng) const {
  switch (law_.kind()) {
    case SampleLaw::Kind::Pareto: return std::pow(rng.uniform(), -1.0 / law_.param()) + law_.shift();
    case SampleLaw::Kind::StudentT: {
      const double df = law_.param();
      const double z = rng.normal();
      const double chi2 = 2.0 * rng.gamma(0.5 * df);
      return z / std::sqrt(chi2 / df);
    }
    case SampleLaw::Kind::LogNormal: return std::exp(law_.param() * rng.normal()) + law_.shift();
    default: break;
  }
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return values_[std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), values_.size() - 1)];
}

WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z) {
  if (trials == 0) throw InputError("wilson_interval: no trials");
  if (hits > trials) throw InputError("wilson_interval: more hits than trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, std::min(centre - half, p)), std::min(1.0, std::max(centre + half, p))};
}

TailEstimate estimate_tail(const Sampler& sampler, int n, double r, std::uint64_t R, std::uint64_t seed, int threads,
                           std::uint64_t stream_offset) {
  require_replications(R);
  if (n < 1) throw InputError("estimate_tail: n must be positive");
  const std::uint64_t hits = count_hits(R, seed, stream_offset, threads, [&](CounterRng& rng) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += sampler.draw(rng);
    return s / n >= r;
  });
  return make_estimate(n, r, R, hits);
}

RateFit rate_fit(std::span<const RatePoint> points) {
  std::vector<double> x, y, w;
  for (const auto& p : points) {
    if (!(p.p > 0.0) || !(p.weight > 0.0)) continue;
    if (!(p.n > 0.0)) throw InputError("rate_fit: n must be positive");
    x.push_back(std::log(p.n));
    y.push_back(std::log(p.p));
    w.push_back(p.weight);
  }
  RateFit fit;
  fit.points = static_cast<int>(x.size());
  if (x.size() < 3) return fit;
  const double sw = std::accumulate(w.begin(), w.end(), 0.0);
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xbar += w[i] * x[i];
    ybar += w[i] * y[i];
  }
  xbar /= sw;
  ybar /= sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
    sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
  }
  if (!(sxx > 0.0)) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double res = y[i] - fit.intercept - fit.slope * x[i];
    chi2 += w[i] * res * res;
  }
  const double dispersion = chi2 / static_cast<double>(x.size() - 2);
  fit.se = std::sqrt(std::max(1.0, dispersion) / sxx);
  fit.status = RateFit::Status::Ok;
  return fit;
}

RateFit rate_fit(std::span<const TailEstimate> estimates) {
  std::vector<RatePoint> pts;
  for (const auto& e : estimates) pts.push_back({static_cast<double>(e.n), e.p_hat, static_cast<double>(e.hits)});
  return rate_fit(pts);
}

MannKendall mann_kendall(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 3) throw InputError("mann_kendall: at least three points are required");
  MannKendall mk;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) mk.s += (series[j] > series[i]) - (series[j] < series[i]);
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    ties += t * (t - 1.0) * (2.0 * t + 5.0);
    i = j;
  }
  const double nn = static_cast<double>(n);
  mk.variance = (nn * (nn - 1.0) * (2.0 * nn + 5.0) - ties) / 18.0;
  if (mk.variance > 0.0) {
    if (mk.s > 0.0) mk.z = (mk.s - 1.0) / std::sqrt(mk.variance);
    if (mk.s < 0.0) mk.z = (mk.s + 1.0) / std::sqrt(mk.variance);
  }
  mk.p_upward = boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), mk.z));
  return mk;
}

SaaLoss huber_loss(double delta) {
  if (!(delta > 0.0)) throw InputError("huber_loss: delta must be positive");
  return {"huber(" + std::to_string(delta) + ")",
          [delta](double x, double w) {
            const double a = std::abs(w - x);
            return a <= delta ? 0.5 * a * a : delta * (a - 0.5 * delta);
          },
          [delta](double x) { return std::vector<double>{x - delta, x + delta}; }, 1.0};
}

SaaLoss quadratic_loss() {
  return {"quadratic", [](double x, double w) { return (w - x) * (w - x); },
          [](double) { return std::vector<double>{}; }, 2.0};
}

SaaLoss absolute_loss() {
  return {"absolute", [](double x, double w) { return std::abs(w - x); },
          [](double x) { return std::vector<double>{x}; }, 1.0};
}

void validate(const SaaInstance& inst) {
  if (inst.grid.empty()) throw InputError("SAA: decision grid must not be empty");
  for (double x : inst.grid)
    if (!std::isfinite(x)) throw InputError("SAA: decision grid must be finite");
  if (!inst.loss.h) throw InputError("SAA: loss is missing");
  if (inst.law.dim() != 1) throw InputError("SAA: the law must be one-dimensional");
  if (!(inst.eps > 0.0)) throw InputError("SAA: eps must be positive");
  if (!(inst.q > 1.0)) throw InputError("SAA: q must be > 1");
  if (inst.loss.growth < 0.0) throw InputError("SAA: growth exponent must be nonnegative");
  // psi = sup_x h(x, .)^+ = O(|w|^growth), so psi^q is integrable when E|W|^(q growth) is finite
  if (inst.law.is_closed() && inst.loss.growth > 0.0) {
    const double order = inst.q * inst.loss.growth;
    if (order > 1.0) {
      inst.law.check_admissible(order);
    } else if (inst.law.kind() == SampleLaw::Kind::Pareto && !(inst.law.param() > order)) {
      throw InputError("SAA: psi^q is not integrable under " + inst.law.name());
    }
  }
}

SaaValue saa_value(const SaaInstance& inst) {
  validate(inst);
  SaaValue v{0.0, 0, {}};
  for (double x : inst.grid) {
    const auto kinks = inst.loss.kinks ? inst.loss.kinks(x) : std::vector<double>{};
    v.per_decision.push_back(inst.law.expect([&](std::span<const double> w) { return inst.loss.h(x, w[0]); }, kinks));
  }
  v.argmin = static_cast<std::size_t>(std::min_element(v.per_decision.begin(), v.per_decision.end()) - v.per_decision.begin());
  v.value = v.per_decision[v.argmin];
  return v;
}

SaaValue saa_value(const SaaInstance& inst, std::span<const double> sample) {
  if (sample.empty()) throw InputError("saa_value: empty sample");
  SaaValue v{0.0, 0, std::vector<double>(inst.grid.size(), 0.0)};
  for (std::size_t j = 0; j < inst.grid.size(); ++j) {
    double s = 0.0;
    for (double w : sample) s += inst.loss.h(inst.grid[j], w);
    v.per_decision[j] = s / static_cast<double>(sample.size());
  }
  v.argmin = static_cast<std::size_t>(std::min_element(v.per_decision.begin(), v.per_decision.end()) - v.per_decision.begin());
  v.value = v.per_decision[v.argmin];
  return v;
}

SaaReport saa_run(const SaaInstance& inst, const std::vector<int>& schedule, std::uint64_t R, std::uint64_t seed,
                  int threads) {
  require_replications(R);
  require_schedule(schedule);
  SaaReport rep;
  rep.v_mu = saa_value(inst).value;
  const Sampler sampler(inst.law);
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    const int n = schedule[j];
    const std::uint64_t hits = count_hits(R, seed, j * R, threads, [&](CounterRng& rng) {
      std::vector<double> sample(static_cast<std::size_t>(n));
      for (double& w : sample) w = sampler.draw(rng);
      return std::abs(saa_value(inst, sample).value - rep.v_mu) >= inst.eps;
    });
    rep.estimates.push_back(make_estimate(n, inst.eps, R, hits));
    rep.scaled.push_back(std::pow(static_cast<double>(n), inst.q - 1.0) * rep.estimates.back().p_hat);
  }
  if (rep.scaled.size() >= 3) rep.trend = mann_kendall(rep.scaled);
  rep.rate = rate_fit(rep.estimates);
  return rep;
}

namespace {

// Sum over type classes of a finite-support law of P(type) * event(sample with that type).
template <class Event>
double enumerate_types(const SaaInstance& inst, int n, Event&& event) {
  if (inst.law.is_closed()) throw InputError("exact enumeration needs a discrete law");
  if (n < 1) throw InputError("exact enumeration: n must be positive");
  const auto& pts = inst.law.points();
  const auto& probs = inst.law.probs();
  double total = 0.0;
  for (const auto& tc : type_classes(n, pts.size())) {
    double logp = tc.log_multiplicity;
    std::vector<double> sample;
    bool possible = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (tc.counts[i] == 0) continue;
      if (probs[i] == 0.0) {
        possible = false;
        break;
      }
      logp += tc.counts[i] * std::log(probs[i]);
      sample.insert(sample.end(), static_cast<std::size_t>(tc.counts[i]), pts[i][0]);
    }
    if (possible && event(sample)) total += std::exp(logp);
  }
  return std::min(total, 1.0);
}

}  // namespace

double saa_exact_exceedance(const SaaInstance& inst, int n) {
  const double v_mu = saa_value(inst).value;
  return enumerate_types(inst, n, [&](const std::vector<double>& s) {
    return std::abs(saa_value(inst, s).value - v_mu) >= inst.eps;
  });
}

GrowthFn quadratic_growth(double c) {
  if (!(c > 0.0)) throw InputError("quadratic_growth: c must be positive");
  return {"quadratic(" + std::to_string(c) + ")", [c](double d) { return c * d * d; }};
}

void validate_growth(const SaaInstance& inst, const GrowthFn& phi) {
  if (!phi.phi) throw InputError("growth function is missing");
  const auto v = saa_value(inst);
  const double x_hat = inst.grid[v.argmin];
  const double vmin = v.value;
  std::ostringstream report;
  bool refused = false;
  for (std::size_t j = 0; j < inst.grid.size(); ++j) {
    if (j == v.argmin) continue;
    const double gap = v.per_decision[j] - vmin;
    const double need = phi.phi(std::abs(inst.grid[j] - x_hat));
    const double tol = 1e-12 * (1.0 + std::abs(vmin));
    if (gap <= tol) {
      report << "  x = " << inst.grid[j] << " ties the argmin x = " << x_hat << " (gap " << gap << ")\n";
      refused = true;
    } else if (gap < need - tol) {
      report << "  x = " << inst.grid[j] << ": V(x) - V(x_hat) = " << gap << " < phi(d) = " << need << "\n";
      refused = true;
    }
  }
  if (refused)
    throw InputError("growth condition " + phi.name + " fails on the decision grid under loss " + inst.loss.name +
                     ":\n" + report.str());
}

ArgminReport argmin_tracking(const SaaInstance& inst, const GrowthFn& phi, const std::vector<int>& schedule,
                             std::uint64_t R, std::uint64_t seed, int threads) {
  require_replications(R);
  require_schedule(schedule);
  validate_growth(inst, phi);
  ArgminReport rep;
  rep.x_hat = inst.grid[saa_value(inst).argmin];
  const Sampler sampler(inst.law);
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    const int n = schedule[j];
    const std::uint64_t hits = count_hits(R, seed, j * R, threads, [&](CounterRng& rng) {
      std::vector<double> sample(static_cast<std::size_t>(n));
      for (double& w : sample) w = sampler.draw(rng);
      const double x_n = inst.grid[saa_value(inst, sample).argmin];
      return phi.phi(std::abs(x_n - rep.x_hat)) >= inst.eps;
    });
    rep.estimates.push_back(make_estimate(n, inst.eps, R, hits));
  }
  rep.rate = rate_fit(rep.estimates);
  return rep;
}

double argmin_exact_exceedance(const SaaInstance& inst, const GrowthFn& phi, int n) {
  validate_growth(inst, phi);
  const double x_hat = inst.grid[saa_value(inst).argmin];
  return enumerate_types(inst, n, [&](const std::vector<double>& s) {
    return phi.phi(std::abs(inst.grid[saa_value(inst, s).argmin] - x_hat)) >= inst.eps;
  });
}

std::string to_string(IncrementFamily f) {
  switch (f) {
    case IncrementFamily::Rademacher: return "rademacher";
    case IncrementFamily::Uniform: return "uniform";
    case IncrementFamily::Scripted: return "scripted";
  }
  return "?";
}

IncrementFamily increment_family_from_string(const std::string& s) {
  for (auto f : {IncrementFamily::Rademacher, IncrementFamily::Uniform, IncrementFamily::Scripted})
    if (to_string(f) == s) return f;
  throw InputError("unknown increment family '" + s + "' (expected rademacher, uniform or scripted)");
}

double increment_phi(IncrementFamily f, double y) {
  return f == IncrementFamily::Uniform ? log_sinhc(y) : log_cosh(y);
}

ExtReal increment_phi_star(IncrementFamily f, double x) {
  const double a = std::abs(x);
  if (a > 1.0) return ExtReal::pos_inf();
  if (a == 1.0) return f == IncrementFamily::Uniform ? ExtReal::pos_inf() : ExtReal(std::numbers::ln2);
  const auto r = golden_section_maximize([&](double y) { return x * y - increment_phi(f, y); }, -60.0, 60.0, 1e-12);
  return std::max(r.value, 0.0);
}

double increment_step(IncrementFamily f, CounterRng& rng, double partial_sum, int k, double r) {
  switch (f) {
    case IncrementFamily::Rademacher: return rng.uniform() < 0.5 ? -1.0 : 1.0;
    case IncrementFamily::Uniform: return 2.0 * rng.uniform() - 1.0;
    case IncrementFamily::Scripted: {
      // behind pace: fair +-1; on or ahead of pace: lazy step in {-1, 0, 1} with
      // probabilities 1/4, 1/2, 1/4 (conditional mgf (1 + cosh y) / 2 <= cosh y)
      const double u = rng.uniform();
      if (partial_sum < r * k) return u < 0.5 ? -1.0 : 1.0;
      return u < 0.25 ? -1.0 : (u < 0.75 ? 0.0 : 1.0);
    }
  }
  return 0.0;
}

AzumaReport azuma_experiment(IncrementFamily family, const std::vector<int>& schedule, double r, std::uint64_t R,
                             std::uint64_t seed, int threads, double slack) {
  require_replications(R);
  require_schedule(schedule);
  if (!std::isfinite(r)) throw InputError("azuma_experiment: r must be finite");
  AzumaReport rep{family, r, slack, {}};
  const ExtReal star = increment_phi_star(family, r);
  const double bound = star.is_finite() ? -star.value() : -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    const int n = schedule[j];
    const std::uint64_t hits = count_hits(R, seed, j * R, threads, [&](CounterRng& rng) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += increment_step(family, rng, s, k, r);
      return s / n >= r;
    });
    const TailEstimate e = make_estimate(n, r, R, hits);
    const ExtReal log_rate = hits == 0 ? ExtReal::neg_inf() : ExtReal(std::log(e.p_hat) / n);
    const bool ok = hits == 0 || (std::isfinite(bound) && log_rate.value() <= bound + slack);
    rep.points.push_back({e, log_rate, bound, ok});
  }
  return rep;
}

}  // namespace sanov
