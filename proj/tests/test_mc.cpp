#include <cmath>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "doctest.h"
#include "sanov/errors.hpp"
#include "sanov/mc.hpp"

using namespace sanov;

namespace {

// P(S_n / n >= r) for fair +-1 steps: heads k with 2k - n >= r n
double binomial_tail(int n, double r) {
  const double kmin = std::ceil((r * n + n) / 2.0 - 1e-12);
  if (kmin <= 0) return 1.0;
  if (kmin > n) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::binomial_distribution<double>(n, 0.5), kmin - 1));
}

Sampler coin() { return Sampler(SampleLaw::finite_support({{-1.0}, {1.0}}, {0.5, 0.5})); }

}  // namespace

TEST_CASE("samplers are centered") {
  const std::vector<Sampler> samplers{Sampler(SampleLaw::pareto_centered(2.5)), Sampler(SampleLaw::student_t(5.0)),
                                      Sampler(SampleLaw::lognormal(0.5)),
                                      Sampler(SampleLaw::finite_support({{-2.0}, {1.0}}, {1.0 / 3.0, 2.0 / 3.0}))};
  for (const auto& s : samplers) {
    CounterRng rng(99);
    constexpr int kDraws = 1'000'000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double x = s.draw(rng);
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / kDraws;
    const double se = std::sqrt((sum2 / kDraws - mean * mean) / kDraws);
    INFO(s.law().name());
    CHECK(std::abs(mean) <= 3.0 * se);
  }
}

TEST_CASE("tail estimates: determinism and guards") {
  const Sampler s(SampleLaw::pareto_centered(2.5));
  const auto a = estimate_tail(s, 50, 0.5, 4000, 7, 1);
  const auto b = estimate_tail(s, 50, 0.5, 4000, 7, 4);
  CHECK(a.hits == b.hits);
  CHECK(a.p_hat == b.p_hat);
  CHECK(a.lo <= a.p_hat);
  CHECK(a.p_hat <= a.hi);
  CHECK(estimate_tail(s, 50, 0.5, 4000, 8, 1).hits != a.hits);

  const Sampler zero(SampleLaw::finite_support({{0.0}}, {1.0}));
  CHECK(estimate_tail(zero, 30, 0.1, 1000, 1).hits == 0);
  CHECK_THROWS_AS(estimate_tail(s, 50, 0.5, 999, 7), InconclusiveError);
}

TEST_CASE("tail estimates: exact binomial tails") {
  for (double r : {0.5, 0.1, 0.2}) {
    const auto e = estimate_tail(coin(), 100, r, 100'000, 3, 4);
    const double exact = binomial_tail(100, r);
    MESSAGE("r = " << r << ": p_hat = " << e.p_hat << ", exact = " << exact);
    CHECK(e.lo <= exact);
    CHECK(exact <= e.hi);
  }
}

TEST_CASE("wilson interval coverage") {
  const double exact = binomial_tail(20, 0.2);
  int covered = 0;
  constexpr int kRuns = 500;
  for (int run = 0; run < kRuns; ++run) {
    const auto e = estimate_tail(coin(), 20, 0.2, 1000, 1000 + run, 4);
    covered += e.lo <= exact && exact <= e.hi;
  }
  MESSAGE("coverage " << covered << " / " << kRuns);
  CHECK(covered >= 0.93 * kRuns);
  const auto w = wilson_interval(0, 1000);
  CHECK(w.lo == 0.0);
  CHECK(w.hi == doctest::Approx(0.003827).epsilon(1e-3));
}

TEST_CASE("rate fit") {
  std::vector<RatePoint> pts;
  for (double n : {10.0, 30.0, 100.0, 300.0, 1000.0}) pts.push_back({n, std::pow(n, -1.5), 1.0});
  const auto fit = rate_fit(pts);
  CHECK(fit.status == RateFit::Status::Ok);
  CHECK(fit.slope == doctest::Approx(-1.5).epsilon(1e-12));

  pts[1].p = 0.0;
  pts[3].weight = 0.0;
  pts[4].p = 0.0;
  CHECK(rate_fit(pts).status == RateFit::Status::Inconclusive);

  // light tails decay exponentially, far below n^{1-q}
  std::vector<RatePoint> light;
  for (int n : {25, 50, 100, 200, 400}) light.push_back({static_cast<double>(n), binomial_tail(n, 0.2), 1.0});
  const auto lf = rate_fit(light);
  MESSAGE("binomial slope " << lf.slope);
  CHECK(lf.slope < -1.0 - 2.0);
}

TEST_CASE("mann-kendall") {
  const std::vector<double> up{1, 2, 3, 4, 5};
  const auto mk = mann_kendall(up);
  CHECK(mk.s == 10.0);
  CHECK(mk.variance == doctest::Approx(50.0 / 3.0));
  CHECK(mk.z == doctest::Approx(9.0 / std::sqrt(50.0 / 3.0)));
  CHECK(mk.p_upward == doctest::Approx(0.013723).epsilon(1e-3));
  const std::vector<double> down{5, 4, 4, 2, 1};
  CHECK(mann_kendall(down).p_upward > 0.95);
  const std::vector<double> flat{0, 0, 0, 0};
  CHECK(mann_kendall(flat).p_upward == doctest::Approx(0.5));
}

TEST_CASE("saa: value and loss independent of w") {
  SaaInstance inst{{-1.0, 0.0, 1.0}, {"const", [](double x, double) { return x * x + 1.0; }, nullptr, 0.0},
                   SampleLaw::pareto_centered(2.5), 0.01, 2.0};
  const auto rep = saa_run(inst, {10, 20, 40}, 1000, 5);
  CHECK(rep.v_mu == doctest::Approx(1.0));
  for (const auto& e : rep.estimates) CHECK(e.hits == 0);

  // Huber values by quadrature against a discretized expectation
  SaaInstance hub{{-0.5, 0.0, 0.5}, huber_loss(1.0), SampleLaw::pareto_centered(3.0), 0.1, 2.0};
  const auto v = saa_value(hub);
  CounterRng rng(4);
  const Sampler s(hub.law);
  std::vector<double> sample(2'000'000);
  for (double& w : sample) w = s.draw(rng);
  const auto mc = saa_value(hub, sample);
  for (std::size_t j = 0; j < 3; ++j) CHECK(v.per_decision[j] == doctest::Approx(mc.per_decision[j]).epsilon(5e-3));

  // psi^q integrability
  SaaInstance bad{{0.0}, quadratic_loss(), SampleLaw::pareto_centered(2.5), 0.1, 2.0};
  CHECK_THROWS_AS(validate(bad), InputError);
  bad.law = SampleLaw::pareto_centered(4.5);
  CHECK_NOTHROW(validate(bad));
}

TEST_CASE("saa: exact enumeration at n = 3") {
  const std::vector<double> atoms{0.0, 0.5, 2.0};
  const std::vector<double> probs{0.5, 0.3, 0.2};
  SaaInstance inst{{0.0, 1.0}, absolute_loss(), SampleLaw::finite_support({{0.0}, {0.5}, {2.0}}, probs), 0.2, 2.0};
  CHECK(saa_value(inst).value == doctest::Approx(0.55).epsilon(1e-14));

  double brute = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        const std::vector<double> w{atoms[a], atoms[b], atoms[c]};
        double v0 = 0.0, v1 = 0.0;
        for (double x : w) {
          v0 += std::abs(x) / 3.0;
          v1 += std::abs(x - 1.0) / 3.0;
        }
        if (std::abs(std::min(v0, v1) - 0.55) >= 0.2) brute += probs[a] * probs[b] * probs[c];
      }
  const double exact = saa_exact_exceedance(inst, 3);
  CHECK(exact == doctest::Approx(brute).epsilon(1e-14));

  const auto rep = saa_run(inst, {3, 6, 12}, 100'000, 21, 4);
  const auto& e = rep.estimates[0];
  MESSAGE("exact " << exact << ", p_hat " << e.p_hat);
  CHECK(std::abs(e.p_hat - exact) <= 3.0 * std::sqrt(exact * (1.0 - exact) / 100'000.0));
  for (std::size_t j = 1; j < 3; ++j)
    CHECK(std::abs(rep.estimates[j].p_hat - saa_exact_exceedance(inst, rep.estimates[j].n)) <= 4e-3);
}

TEST_CASE("argmin tracking: growth validation and exact exceedance") {
  SaaInstance inst{{-1.0, -0.5, 0.0, 0.5, 1.0}, quadratic_loss(),
                   SampleLaw::finite_support({{-1.0}, {0.0}, {1.0}}, {0.25, 0.5, 0.25}), 0.25, 2.0};
  CHECK_NOTHROW(validate_growth(inst, quadratic_growth(1.0)));
  CHECK_THROWS_AS(validate_growth(inst, quadratic_growth(1.5)), InputError);

  double prev = 1.0;
  for (int n : {16, 64, 256}) {
    const double p = argmin_exact_exceedance(inst, quadratic_growth(1.0), n);
    MESSAGE("n = " << n << ": " << p);
    CHECK(p <= prev);
    prev = p;
  }
  CHECK(prev < 1e-3);

  SaaInstance flat = inst;
  flat.loss = {"x-free", [](double, double w) { return w * w; }, nullptr, 2.0};
  CHECK_THROWS_AS(validate_growth(flat, quadratic_growth(1.0)), InputError);
  CHECK_THROWS_AS(argmin_tracking(flat, quadratic_growth(1.0), {10, 20, 40}, 1000, 1), InputError);

  const auto rep = argmin_tracking(inst, quadratic_growth(1.0), {4, 16}, 50'000, 9, 4);
  for (const auto& e : rep.estimates)
    CHECK(std::abs(e.p_hat - argmin_exact_exceedance(inst, quadratic_growth(1.0), e.n)) <= 5e-3);
}

TEST_CASE("azuma: conjugates") {
  auto bern = [](double x) { return 0.5 * (1 + x) * std::log1p(x) + 0.5 * (1 - x) * std::log1p(-x); };
  for (double x : {0.0, 0.1, 0.5, 0.9, -0.7})
    CHECK(increment_phi_star(IncrementFamily::Rademacher, x).value() == doctest::Approx(bern(x)).epsilon(1e-9));
  CHECK(increment_phi_star(IncrementFamily::Rademacher, 0.5).value() == doctest::Approx(0.130812).epsilon(1e-5));
  CHECK(increment_phi_star(IncrementFamily::Rademacher, 1.5).is_pos_inf());
  // uniform: phi(y) = log(sinh y / y) against a direct maximization on a fine grid
  double best = 0.0;
  for (double y = 0.0; y < 20.0; y += 1e-4) best = std::max(best, 0.5 * y - std::log(std::sinh(y) / y));
  CHECK(increment_phi_star(IncrementFamily::Uniform, 0.5).value() == doctest::Approx(best).epsilon(1e-7));
  CHECK(increment_phi(IncrementFamily::Uniform, 0.0) == 0.0);
  CHECK(increment_phi(IncrementFamily::Rademacher, 800.0) == doctest::Approx(800.0 - std::log(2.0)));
}

TEST_CASE("azuma: bounds hold for every family") {
  for (auto f : {IncrementFamily::Rademacher, IncrementFamily::Uniform, IncrementFamily::Scripted}) {
    const auto rep = azuma_experiment(f, {20, 40, 400}, 0.5, 20'000, 17, 4);
    for (const auto& p : rep.points) {
      MESSAGE(to_string(f) << " n = " << p.estimate.n << ": hits " << p.estimate.hits << ", rate "
                           << p.log_rate.to_string() << ", bound " << p.bound);
      CHECK(p.ok);
    }
  }
  const auto imp = azuma_experiment(IncrementFamily::Rademacher, {10, 50}, 1.2, 1000, 2);
  for (const auto& p : imp.points) CHECK(p.estimate.hits == 0);
  CHECK(increment_family_from_string("scripted") == IncrementFamily::Scripted);
  CHECK_THROWS_AS(increment_family_from_string("gauss"), InputError);
}

TEST_CASE("argmin tracking: quadratic loss under a heavy tail decays faster than n^{1-q}") {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(-1.0 + 0.1 * i);
  const SaaInstance inst{grid, quadratic_loss(), SampleLaw::pareto_centered(4.5), 0.01, 2.0};
  const auto rep = argmin_tracking(inst, quadratic_growth(1.0), {100, 200, 400, 800}, 20'000, 3, 4);
  for (const auto& e : rep.estimates) MESSAGE("n = " << e.n << ": hits " << e.hits);
  REQUIRE(rep.rate.status == RateFit::Status::Ok);
  MESSAGE("slope " << rep.rate.slope << ", upper " << rep.rate.upper95());
  CHECK(rep.rate.upper95() <= 1.0 - inst.q + 0.25);
}
