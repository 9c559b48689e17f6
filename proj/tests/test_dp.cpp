#include <cmath>

#include "doctest.h"
#include "sanov/dp.hpp"
#include "sanov/random.hpp"
#include "sanov/rho.hpp"

using namespace sanov;

namespace {

FiniteSpace sp(std::size_t m) { return FiniteSpace(m); }
Dist rand_dist(CounterRng& rng, std::size_t m) { return Dist(sp(m), rng.dirichlet(m)); }

std::vector<ExtReal> rand_values(CounterRng& rng, std::size_t size, double scale = 1.0) {
  std::vector<ExtReal> v(size);
  for (auto& x : v) x = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

std::vector<ExtReal> rand_cost(CounterRng& rng, std::size_t m) {
  std::vector<ExtReal> c(m * m);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < m; ++y) c[x * m + y] = x == y ? 0.0 : 1.5 * rng.uniform();
  }
  return c;
}

std::vector<AlphaSpec> all_specs(CounterRng& rng, std::size_t m) {
  const Dist mu = rand_dist(rng, m);
  return {AlphaSpec::relative_entropy(mu),
          AlphaSpec::lp_entropy(mu, 2.0),
          AlphaSpec::shortfall(mu, LossFn::power_plus(3.0)),
          AlphaSpec::robust({rand_dist(rng, m), rand_dist(rng, m)}),
          AlphaSpec::set_indicator({rand_dist(rng, m), rand_dist(rng, m)}),
          AlphaSpec::transport(mu, rand_cost(rng, m))};
}

double joint_dot(std::span<const ExtReal> f, const ProductDist& nu) { return integrate(f, nu.tensor()).value(); }

}  // namespace

TEST_CASE("classical dense recursion is log-sum-exp") {
  CounterRng rng(1);
  for (std::size_t m : {2u, 3u}) {
    for (int n = 1; n <= 6; ++n) {
      const Dist mu = rand_dist(rng, m);
      const auto mun = ProductDist::iid(mu, n);
      const auto vals = rand_values(rng, mun.tensor().size(), 2.0);
      double acc = 0.0;
      for (std::size_t k = 0; k < vals.size(); ++k) acc += mun.tensor()[k] * std::exp(vals[k].value());
      const auto r = rho_n_dense(RealFieldN::dense(sp(m), n, vals), AlphaSpec::relative_entropy(mu));
      CHECK(std::abs(r.value.value() - std::log(acc)) <= 1e-9);
    }
  }
}

TEST_CASE("singleton set indicator is the expectation") {
  CounterRng rng(2);
  const Dist mu = rand_dist(rng, 2);
  const auto vals = rand_values(rng, 4);
  const auto r = rho_n_dense(RealFieldN::dense(sp(2), 2, vals), AlphaSpec::set_indicator({mu}));
  CHECK(r.value.value() == doctest::Approx(joint_dot(vals, ProductDist::iid(mu, 2))).epsilon(1e-12));
}

TEST_CASE("robust recursion matches enumeration of product-form kernels") {
  CounterRng rng(3);
  for (int t = 0; t < 20; ++t) {
    const std::vector<Dist> M{rand_dist(rng, 2), rand_dist(rng, 2)};
    const auto vals = rand_values(rng, 4, 2.0);
    double best = -1e300;
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t i0 = 0; i0 < 2; ++i0) {
        for (std::size_t i1 = 0; i1 < 2; ++i1) {
          const std::size_t pick[2] = {i0, i1};
          double acc = 0.0;
          for (std::size_t x1 = 0; x1 < 2; ++x1) {
            for (std::size_t x2 = 0; x2 < 2; ++x2) acc += M[j][x1] * M[pick[x1]][x2] * std::exp(vals[2 * x1 + x2].value());
          }
          best = std::max(best, std::log(acc));
        }
      }
    }
    CHECK(std::abs(rho_n_dense(RealFieldN::dense(sp(2), 2, vals), AlphaSpec::robust(M)).value.value() - best) <= 1e-9);
  }
}

TEST_CASE("greedy optimizer attains the recursion value and bounds sampled laws") {
  CounterRng rng(4);
  for (int n : {2, 3}) {
    for (const auto& spec : all_specs(rng, 2)) {
      const std::size_t size = dense_size(2, n);
      const auto vals = rand_values(rng, size);
      const auto r = rho_n_dense(RealFieldN::dense(sp(2), n, vals), spec, true);
      const ProductDist opt = greedy_optimizer(*r.trace, spec);
      const double achieved = joint_dot(vals, opt) - alpha_n(opt, spec).value();
      CHECK(std::abs(achieved - r.value.value()) <= 1e-6);
      for (int k = 0; k < 200; ++k) {
        const ProductDist nu(sp(2), n, rng.dirichlet(size));
        const ExtReal a = alpha_n(nu, spec);
        if (a.is_finite()) CHECK(r.value.value() >= joint_dot(vals, nu) - a.value() - 1e-7);
      }
    }
  }
}

TEST_CASE("recursion is monotone and translation additive") {
  CounterRng rng(5);
  for (const auto& spec : all_specs(rng, 2)) {
    const auto vals = rand_values(rng, 8);
    auto up = vals;
    auto shifted = vals;
    for (std::size_t k = 0; k < 8; ++k) {
      up[k] = vals[k] + ExtReal(rng.uniform());
      shifted[k] = vals[k] + ExtReal(0.37);
    }
    const double base = rho_n_dense(RealFieldN::dense(sp(2), 3, vals), spec).value.value();
    CHECK(rho_n_dense(RealFieldN::dense(sp(2), 3, up), spec).value.value() >= base - 1e-12);
    CHECK(rho_n_dense(RealFieldN::dense(sp(2), 3, shifted), spec).value.value() == doctest::Approx(base + 0.37).epsilon(1e-9));
  }
}

TEST_CASE("symmetric recursion agrees with the dense one") {
  CounterRng rng(6);
  for (int t = 0; t < 25; ++t) {
    const double a = rng.uniform();
    const double b = 2.0 * rng.uniform() - 1.0;
    const double c = rng.uniform();
    const auto F = [&](std::span<const double> nu) { return ExtReal(b * nu[0] - a * (nu[0] - c) * (nu[0] - c)); };
    for (const auto& spec : all_specs(rng, 2)) {
      for (int n = 1; n <= 6; ++n) {
        const auto f = RealFieldN::from_empirical(sp(2), n, F);
        const double sym = rho_n_symmetric(f, spec).value();
        const double dense = rho_n_dense(f.to_dense(), spec).value.value();
        CHECK(std::abs(sym - dense) <= 1e-8);
      }
    }
  }
  std::vector<ExtReal> nonsym{0.0, 1.0, 2.0, 3.0};
  CHECK_THROWS_AS(rho_n_symmetric(RealFieldN::dense(sp(2), 2, nonsym), AlphaSpec::relative_entropy(Dist::uniform(sp(2)))),
                  InputError);
}

TEST_CASE("linear and constant functionals") {
  CounterRng rng(7);
  const Dist mu = rand_dist(rng, 3);
  const auto spec = AlphaSpec::relative_entropy(mu);
  const std::vector<ExtReal> fbar{0.3, -0.8, 1.1};
  const auto lin = [&](std::span<const double> nu) { return nu[0] * 0.3 - nu[1] * 0.8 + nu[2] * 1.1; };
  const auto run = sanov_limit(lin, spec, {1, 5, 20, 60});
  for (const auto& p : run.points) CHECK(p.v_n == doctest::Approx(rho_entropy(fbar, mu).value()).epsilon(1e-10));
  CHECK(std::abs(run.target - rho_entropy(fbar, mu).value()) <= 1e-6);
  for (const auto& s : all_specs(rng, 3)) {
    const auto cst = sanov_limit([](std::span<const double>) { return -0.25; }, s, {1, 4, 10});
    for (const auto& p : cst.points) CHECK(p.v_n == doctest::Approx(-0.25).epsilon(1e-9));
  }
}

TEST_CASE("classical Sanov example") {
  const Dist mu = Dist::uniform(sp(2));
  const auto F = [](std::span<const double> nu) { return -(nu[0] - 0.7) * (nu[0] - 0.7); };
  const auto run = sanov_limit(F, AlphaSpec::relative_entropy(mu), {25, 50, 100, 200});
  double prev = 1e300;
  for (const auto& p : run.points) {
    const int n = p.n;
    std::vector<double> terms;
    for (int j = 0; j <= n; ++j) {
      terms.push_back(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) - n * std::log(2.0) +
                      n * F(std::vector<double>{static_cast<double>(j) / n, 1.0 - static_cast<double>(j) / n}));
    }
    const double mx = *std::max_element(terms.begin(), terms.end());
    double s = 0.0;
    for (double x : terms) s += std::exp(x - mx);
    CHECK(std::abs(p.v_n - (mx + std::log(s)) / n) <= 1e-9);
    CHECK(std::abs(p.gap) < prev);
    prev = std::abs(p.gap);
  }
  CHECK(prev <= 0.05);
  for (int n : {10, 40}) {
    const auto f = RealFieldN::from_empirical(sp(2), n, [&](std::span<const double> nu) { return ExtReal(F(nu)); });
    const double vn = rho_n_symmetric(f, AlphaSpec::relative_entropy(mu)).value() / n;
    CHECK(vn >= sanov_lower_bound(F, AlphaSpec::relative_entropy(mu), n, 100) - 1e-9);
  }
}

TEST_CASE("set indicator Sanov run approaches the hull supremum") {
  const std::vector<Dist> M{Dist(sp(2), {0.2, 0.8}), Dist(sp(2), {0.6, 0.4})};
  const auto spec = AlphaSpec::set_indicator(M);
  const auto F = [](std::span<const double> nu) { return -std::abs(nu[0] - 0.5); };
  const auto run = sanov_limit(F, spec, {10, 40, 160});
  CHECK(run.target == doctest::Approx(0.0).epsilon(1e-9));
  for (const auto& p : run.points) CHECK(p.v_n <= run.target + 1e-9);
  CHECK(run.points.back().v_n > run.points.front().v_n);
  CHECK(std::abs(run.points.back().gap) <= 0.05);
}

TEST_CASE("superhedging certificates") {
  CounterRng rng(8);
  const Dist mu = rand_dist(rng, 2);
  const auto f1 = rand_values(rng, 2);
  const auto one = superhedge(RealFieldN::dense(sp(2), 1, f1), AlphaSpec::relative_entropy(mu));
  CHECK(one.Y[0][0] == doctest::Approx(f1[0].value() - rho_entropy(f1, mu).value()));
  CHECK(one.slice_rho <= 1e-12);
  for (int t = 0; t < 10; ++t) {
    const auto f = rand_values(rng, 4, 2.0);
    const auto c = superhedge(RealFieldN::dense(sp(2), 2, f), AlphaSpec::relative_entropy(mu));
    CHECK(c.residual <= 1e-10);
    CHECK(c.slice_rho <= 1e-9);
    CHECK(c.ok);
    const auto s = superhedge(RealFieldN::dense(sp(2), 2, f), AlphaSpec::shortfall(mu, LossFn::power_plus(2.0)));
    REQUIRE(s.slice_loss.has_value());
    CHECK(*s.slice_loss <= 1e-7);
    CHECK(s.ok);
  }
}

TEST_CASE("transport control value") {
  CounterRng rng(9);
  const Dist mu = rand_dist(rng, 2);
  const auto f = rand_values(rng, 4);
  const auto field = RealFieldN::dense(sp(2), 2, f);
  const std::vector<ExtReal> forced{0.0, ExtReal::pos_inf(), ExtReal::pos_inf(), 0.0};
  CHECK(control_value_transport(field, mu, forced).value() == doctest::Approx(joint_dot(f, ProductDist::iid(mu, 2))));
  double mx = -1e300;
  for (const auto& v : f) mx = std::max(mx, v.value());
  CHECK(control_value_transport(field, mu, std::vector<ExtReal>(4, 0.0)).value() == doctest::Approx(mx));

  for (int t = 0; t < 20; ++t) {
    const Dist m2 = rand_dist(rng, 2);
    const auto cost = rand_cost(rng, 2);
    const auto g = rand_values(rng, 4, 2.0);
    const auto gf = RealFieldN::dense(sp(2), 2, g);
    const double ctrl = control_value_transport(gf, m2, cost).value();
    const double dp = rho_n_dense(gf, AlphaSpec::transport(m2, cost)).value.value();
    CHECK(std::abs(ctrl - dp) <= 1e-10);
    // every adapted policy: y1 = a(x1), y2 = b(x1, x2)
    double best = -1e300;
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 16; ++b) {
        double v = 0.0;
        for (std::size_t x1 = 0; x1 < 2; ++x1) {
          for (std::size_t x2 = 0; x2 < 2; ++x2) {
            const std::size_t y1 = (static_cast<std::size_t>(a) >> x1) & 1u;
            const std::size_t y2 = (static_cast<std::size_t>(b) >> (2 * x1 + x2)) & 1u;
            v += m2[x1] * m2[x2] *
                 (g[2 * y1 + y2].value() - cost[2 * x1 + y1].value() - cost[2 * x2 + y2].value());
          }
        }
        best = std::max(best, v);
      }
    }
    CHECK(std::abs(ctrl - best) <= 1e-10);
  }
}

TEST_CASE("transport long-run targets") {
  CounterRng rng(10);
  const Dist mu = rand_dist(rng, 2);
  const auto cost = rand_cost(rng, 2);
  const std::vector<ExtReal> fbar{0.4, -0.2};
  const auto lin = [](std::span<const double> nu) { return 0.4 * nu[0] - 0.2 * nu[1]; };
  const auto run = transport_longrun(lin, mu, cost, {5, 20});
  CHECK(std::abs(run.target - rho_transport(fbar, mu, cost).value()) <= 1e-6);
  CHECK(std::abs(*run.coupling_target - run.target) <= 1e-6);
  const auto cst = transport_longrun([](std::span<const double>) { return 0.7; }, mu, cost, {3});
  CHECK(cst.target == doctest::Approx(0.7));
  CHECK(*cst.coupling_target == doctest::Approx(0.7));

  const Dist u = Dist::uniform(sp(2));
  const std::vector<ExtReal> flip{0.0, 1.0, 1.0, 0.0};
  const auto kink = [](std::span<const double> nu) { return -std::abs(nu[0] - 0.9); };
  const auto k = transport_longrun(kink, u, flip, {10, 50, 200});
  CHECK(std::abs(*k.coupling_target - k.target) <= 1e-6);
  CHECK(k.target == doctest::Approx(-0.4).epsilon(1e-9));
}
