#include "doctest.h"

#include <cmath>
#include <vector>

#include "sanov/alpha.hpp"
#include "sanov/cramer.hpp"
#include "sanov/errors.hpp"
#include "sanov/random.hpp"
#include "sanov/scalar_search.hpp"

using namespace sanov;

namespace {

double lam(double t, const SampleLaw& law, double q) { return lambda(std::span<const double>(&t, 1), law, q).value(); }

ExtReal lam_star(double x, const SampleLaw& law, double q) { return lambda_star(std::span<const double>(&x, 1), law, q).value; }

SampleLaw coin() { return SampleLaw::finite_support({{-1.0}, {1.0}}, {0.5, 0.5}); }

// inf{ ||dnu/dmu||_p - 1 : nu on the atoms of a 3-point law, mean(nu) = x }
double constrained_lp(const std::vector<double>& atoms, const std::vector<double>& mu, double p, double x) {
  const FiniteSpace space(3);
  const Dist base(space, mu);
  auto value = [&](double w0) {
    // w1 + w2 = 1 - w0 and w1 a1 + w2 a2 = x - w0 a0
    const double rest = 1.0 - w0;
    const double target = x - w0 * atoms[0];
    const double w2 = (target - rest * atoms[1]) / (atoms[2] - atoms[1]);
    const double w1 = rest - w2;
    if (w1 < -1e-15 || w2 < -1e-15) return std::numeric_limits<double>::infinity();
    const Dist nu(space, {w0, std::max(w1, 0.0), std::max(w2, 0.0)});
    return lp_entropy(nu, base, p).value();
  };
  double best = std::numeric_limits<double>::infinity();
  double arg = 0.0;
  constexpr int kGrid = 4000;
  for (int i = 0; i <= kGrid; ++i) {
    const double w0 = static_cast<double>(i) / kGrid;
    const double v = value(w0);
    if (v < best) {
      best = v;
      arg = w0;
    }
  }
  const auto r = golden_section_minimize(value, std::max(0.0, arg - 1.0 / kGrid), std::min(1.0, arg + 1.0 / kGrid), 1e-13);
  return std::min(best, r.value);
}

}  // namespace

TEST_CASE("lambda: trivial cases") {
  const auto zero = SampleLaw::finite_support({{0.0}}, {1.0});
  for (double t : {-3.0, -0.5, 0.7, 10.0}) CHECK(lam(t, zero, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
  for (const auto& law : {coin(), SampleLaw::pareto_centered(3.0), SampleLaw::student_t(4.0)})
    CHECK(lam(0.0, law, 2.0) == 0.0);
}

TEST_CASE("lambda: coin against a dense grid on m") {
  const auto law = coin();
  for (double t : {-2.0, -0.9, -0.3, 0.1, 0.5, 0.8, 1.7}) {
    auto G = [t](double m) {
      auto part = [](double z) { return z > 0.0 ? z * z : 0.0; };
      return 0.5 * part(1.0 + t - m) + 0.5 * part(1.0 - t - m);
    };
    // first grid point with G <= 1, refined by linear interpolation
    const double step = 1e-5;
    double m = -5.0;
    while (G(m) > 1.0) m += step;
    const double g0 = G(m - step);
    const double g1 = G(m);
    const double root = (m - step) + step * (g0 - 1.0) / (g0 - g1);
    CHECK(lam(t, law, 2.0) == doctest::Approx(root).epsilon(1e-8));
  }
  // both terms positive for |t| <= 1/sqrt(2): (1 - m)^2 + t^2 = 1
  CHECK(lam(0.5, law, 2.0) == doctest::Approx(1.0 - std::sqrt(0.75)).epsilon(1e-12));
}

TEST_CASE("lambda: convex on a grid, dominates the linear minorant") {
  for (const auto& law : {coin(), SampleLaw::pareto_centered(3.0), SampleLaw::student_t(5.0), SampleLaw::lognormal(0.5)}) {
    const double q = 2.0;
    const double mean = law.mean();
    for (double t = -2.0; t <= 2.0; t += 0.25) {
      const double mid = lam(t, law, q);
      CHECK(mid <= 0.5 * (lam(t - 0.25, law, q) + lam(t + 0.25, law, q)) + 1e-9);
      CHECK(mid >= t * mean - 1e-9);
    }
  }
}

TEST_CASE("moments") {
  CHECK(moment_mq(SampleLaw::finite_support({{-3.0}}, {1.0}), 2.5) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(moment_mq(coin(), 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(moment_mq(SampleLaw::finite_support({{3.0, 4.0}}, {1.0}), 3.0) == doctest::Approx(5.0).epsilon(1e-14));

  // centered Pareto(a): variance a / ((a - 1)^2 (a - 2))
  for (double a : {2.5, 3.0, 4.5}) {
    const auto law = SampleLaw::pareto_centered(a);
    CHECK(law.expect([](std::span<const double> x) { return x[0]; }) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(moment_mq(law, 2.0) == doctest::Approx(std::sqrt(a / ((a - 1) * (a - 1) * (a - 2)))).epsilon(1e-9));
  }
  CHECK(moment_mq(SampleLaw::student_t(5.0), 2.0) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-9));
  const double s = 0.5;
  CHECK(moment_mq(SampleLaw::lognormal(s), 2.0) ==
        doctest::Approx(std::sqrt((std::exp(s * s) - 1.0) * std::exp(s * s))).epsilon(1e-9));

  // against 10^7 draws; a = 4.5 keeps E X^4 finite so the standard error is meaningful
  const auto law = SampleLaw::pareto_centered(4.5);
  CounterRng rng(2024);
  constexpr int kDraws = 10'000'000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double x = std::pow(rng.uniform(), -1.0 / 4.5) - 4.5 / 3.5;
    sum += x * x;
    sum2 += x * x * x * x;
  }
  const double m2 = sum / kDraws;
  const double se = std::sqrt((sum2 / kDraws - m2 * m2) / kDraws);
  CHECK(std::abs(std::pow(moment_mq(law, 2.0), 2.0) - m2) <= 3.0 * se);
}

TEST_CASE("admissibility") {
  CHECK_THROWS_AS(lam(0.3, SampleLaw::pareto_centered(2.5), 3.0), InputError);
  CHECK_THROWS_AS(moment_mq(SampleLaw::student_t(2.0), 2.0), InputError);
  CHECK_THROWS_AS(lam(0.3, coin(), 1.0), InputError);
  CHECK_NOTHROW(moment_mq(SampleLaw::pareto_centered(2.5), 2.0));
  CHECK_THROWS_AS(SampleLaw::finite_support({{0.0}, {1.0, 2.0}}, {0.5, 0.5}), InputError);
  CHECK_THROWS_AS(SampleLaw::finite_support({{0.0, 0.0, 0.0, 0.0}}, {1.0}), InputError);
}

TEST_CASE("deviation bound") {
  CHECK(deviation_bound(2.0, 1.0, 2.0, 100.0) == doctest::Approx(0.01).epsilon(1e-14));
  double prev = deviation_bound(1.01, 1.0, 2.0, 50.0);
  for (double r = 1.5; r < 1e6; r *= 3.0) {
    const double b = deviation_bound(r, 1.0, 2.0, 50.0);
    CHECK(b < prev);
    prev = b;
  }
  CHECK(prev < 1e-9);
  for (double q : {1.5, 2.0, 3.0})
    CHECK(deviation_bound(3.0, 1.2, q, 200.0) / deviation_bound(3.0, 1.2, q, 100.0) ==
          doctest::Approx(std::pow(2.0, 1.0 - q)).epsilon(1e-12));
  CHECK_THROWS_AS(deviation_bound(1.0, 1.0, 2.0, 10.0), InputError);
  CHECK_THROWS_AS(deviation_bound(0.5, 1.0, 2.0, 10.0), InputError);
}

TEST_CASE("lambda star: coin") {
  const auto law = coin();
  CHECK(lam_star(0.0, law, 2.0).value() == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  // t - Lambda(t) = sqrt(2) - 1 once the lower atom drops out
  CHECK(lam_star(1.0, law, 2.0).value() == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-8));
  CHECK(lam_star(-1.0, law, 2.0).value() == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-8));
  CHECK(lam_star(1.5, law, 2.0).is_pos_inf());
  CHECK(lam_star(-1.2, law, 2.0).is_pos_inf());
}

TEST_CASE("lambda star: point mass and mean") {
  const auto zero = SampleLaw::finite_support({{0.0}}, {1.0});
  CHECK(lam_star(0.3, zero, 2.0).is_pos_inf());
  CHECK(lam_star(0.0, zero, 2.0).value() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  const auto zero2 = SampleLaw::finite_support({{0.0, 0.0}}, {1.0});
  const std::vector<double> x{0.2, -0.1};
  CHECK(lambda_star(x, zero2, 2.0).value.is_pos_inf());

  for (const auto& law : {SampleLaw::finite_support({{-1.0}, {0.5}, {2.0}}, {0.3, 0.5, 0.2}), SampleLaw::pareto_centered(3.0)}) {
    const double v = lam_star(law.mean(), law, 2.0).value();
    MESSAGE(law.name() << ": Lambda*(mean) = " << v);
    CHECK(v >= -1.0);
    CHECK(v <= 1e-8);
  }
}

TEST_CASE("lambda star: minorant -1 + |x| / M_q") {
  CounterRng rng(77);
  const auto fs = SampleLaw::finite_support({{-1.0}, {0.5}, {2.0}}, {0.3, 0.5, 0.2});
  const auto pa = SampleLaw::pareto_centered(3.0);
  for (const auto* law : {&fs, &pa}) {
    const double q = 2.0;
    const double mq = moment_mq(*law, q);
    for (int i = 0; i < 20; ++i) {
      const double x = -3.0 + 6.0 * rng.uniform();
      const ExtReal v = lam_star(x, *law, q);
      CHECK(v >= ExtReal(-1.0 + std::abs(x) / mq - 1e-9));
    }
  }
  // in two dimensions
  const auto law2 = SampleLaw::finite_support({{1.0, 0.0}, {-1.0, 0.5}, {0.0, -1.0}}, {0.4, 0.3, 0.3});
  const double mq = moment_mq(law2, 2.0);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> x{-1.0 + 2.0 * rng.uniform(), -1.0 + 2.0 * rng.uniform()};
    const ExtReal v = lambda_star(x, law2, 2.0).value;
    CHECK(v >= ExtReal(-1.0 + std::hypot(x[0], x[1]) / mq - 1e-9));
  }
}

TEST_CASE("lambda star: constrained Lp form on finite supports") {
  const std::vector<double> atoms{-1.0, 0.5, 2.0};
  const std::vector<double> probs{0.3, 0.5, 0.2};
  const auto law = SampleLaw::finite_support({{-1.0}, {0.5}, {2.0}}, probs);
  for (double q : {1.5, 2.0, 3.0}) {
    const double p = q / (q - 1.0);
    for (double x : {-0.9, -0.5, 0.0, 0.3, 0.8, 1.5, 1.9}) {
      const double dual = lam_star(x, law, q).value();
      const double primal = constrained_lp(atoms, probs, p, x);
      CHECK(dual == doctest::Approx(primal).epsilon(5e-3).scale(1.0));
    }
  }
}

TEST_CASE("lambda star: convex on a grid") {
  const auto law = SampleLaw::finite_support({{-1.0}, {0.5}, {2.0}}, {0.3, 0.5, 0.2});
  for (double x = -0.8; x <= 1.8; x += 0.2) {
    const double mid = lam_star(x, law, 2.0).value();
    CHECK(mid <= 0.5 * (lam_star(x - 0.1, law, 2.0).value() + lam_star(x + 0.1, law, 2.0).value()) + 1e-7);
  }
}

TEST_CASE("empirical lambda with bootstrap error") {
  CounterRng rng(5);
  std::vector<std::vector<double>> pts(4000);
  for (auto& p : pts) p = {rng.uniform() < 0.5 ? -1.0 : 1.0};
  const auto emp = SampleLaw::empirical(std::move(pts));
  const double t = 0.6;
  const auto est = lambda_bootstrap(std::span<const double>(&t, 1), emp, 2.0, 200, 11);
  CHECK(est.se > 0.0);
  CHECK(std::abs(est.value - lam(t, coin(), 2.0)) <= 3.0 * est.se);
}
