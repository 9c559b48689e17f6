#include <cmath>
#include <numeric>

#include "doctest.h"
#include "sanov/random.hpp"
#include "sanov/space.hpp"

using namespace sanov;

namespace {
FiniteSpace ab() { return FiniteSpace(std::vector<std::string>{"a", "b"}); }
}  // namespace

TEST_CASE("ext_real arithmetic") {
  const ExtReal inf = ExtReal::pos_inf();
  const ExtReal ninf = ExtReal::neg_inf();
  CHECK((inf - inf).is_neg_inf());
  CHECK((inf + ninf).is_neg_inf());
  CHECK((ExtReal(2.0) + inf).is_pos_inf());
  CHECK(weighted(0.0, inf) == ExtReal(0.0));
  CHECK(parse_ext_real("inf").is_pos_inf());
  CHECK(parse_ext_real("-Inf").is_neg_inf());
  CHECK(parse_ext_real("2.5").value() == 2.5);
  CHECK_THROWS_AS(ExtReal(std::nan("")), InputError);
  const std::vector<ExtReal> v{1.0, ninf};
  const std::vector<double> w{1.0, 0.0};
  CHECK(integrate(v, w).value() == 1.0);
}

TEST_CASE("dist validation") {
  CHECK_THROWS_AS(Dist(ab(), {0.7, 0.7}), InputError);
  CHECK_THROWS_AS(Dist(ab(), {1.1, -0.1}), InputError);
  const Dist d(ab(), {0.5, 0.5 + 1e-11});
  CHECK(d[0] + d[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(FiniteSpace(std::vector<std::string>{"a", "a"}), InputError);
}

TEST_CASE("empirical measure") {
  const auto e = empirical_measure(ab(), std::vector<std::size_t>{0, 0, 1, 0});
  CHECK(e[0] == 0.75);
  CHECK(e[1] == 0.25);
  const auto p = empirical_measure(ab(), std::vector<std::size_t>{0});
  CHECK(p[0] == 1.0);
  const FiniteSpace abc(std::vector<std::string>{"a", "b", "c"});
  const auto e3 = empirical_measure(abc, std::vector<std::size_t>{2, 1, 0, 2, 2, 1});
  CHECK(e3[0] == doctest::Approx(1.0 / 6));
  CHECK(e3[1] == doctest::Approx(2.0 / 6));
  CHECK(e3[2] == doctest::Approx(3.0 / 6));
  const auto perm = empirical_measure(abc, std::vector<std::size_t>{1, 2, 2, 0, 2, 1});
  for (std::size_t i = 0; i < 3; ++i) CHECK(perm[i] == e3[i]);
  CHECK_THROWS_AS(empirical_measure(ab(), std::vector<std::size_t>{2}), InputError);
}

TEST_CASE("disintegrate product and point mass") {
  const Dist mu(ab(), {0.3, 0.7});
  const auto d = disintegrate(ProductDist::iid(mu, 2));
  CHECK(d.first[0] == doctest::Approx(0.3));
  for (std::size_t x = 0; x < 2; ++x) {
    CHECK(d.kernels[0].row(x)[0] == doctest::Approx(0.3));
    CHECK(d.kernels[0].row(x)[1] == doctest::Approx(0.7));
  }
  const ProductDist pm(ab(), 2, {0.0, 1.0, 0.0, 0.0});
  const auto dp = disintegrate(pm);
  CHECK(dp.first[0] == 1.0);
  CHECK(dp.kernels[0].row(0)[1] == 1.0);
  CHECK(dp.kernels[0].row(1)[0] == 0.5);  // zero-mass prefix maps to uniform
}

TEST_CASE("disintegrate matches conditionals and round trips") {
  CounterRng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = rng.dirichlet(4);
    const ProductDist nu(ab(), 2, w);
    const auto d = disintegrate(nu);
    for (std::size_t x1 = 0; x1 < 2; ++x1) {
      const double row = w[2 * x1] + w[2 * x1 + 1];
      for (std::size_t x2 = 0; x2 < 2; ++x2) CHECK(d.kernels[0].row(x1)[x2] == doctest::Approx(w[2 * x1 + x2] / row));
    }
    const auto back = compose(d.first, d.kernels);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(back.tensor()[k] - w[k]) <= 1e-12);
  }
  const FiniteSpace s3(3);
  const ProductDist nu3(s3, 3, rng.dirichlet(27));
  const auto d3 = disintegrate(nu3);
  const auto back3 = compose(d3.first, d3.kernels);
  for (std::size_t k = 0; k < 27; ++k) CHECK(std::abs(back3.tensor()[k] - nu3.tensor()[k]) <= 1e-12);
}

TEST_CASE("compose constant and point kernels") {
  const Dist mu(ab(), {0.25, 0.75});
  const std::vector<Kernel> ks{Kernel::constant(2, mu)};
  const auto pd = compose(mu, ks);
  CHECK(pd.tensor()[1] == doctest::Approx(0.25 * 0.75));
  const std::vector<Kernel> kp{Kernel(2, ab(), {0.0, 1.0, 0.5, 0.5})};
  const auto pm = compose(Dist::point_mass(ab(), 0), kp);
  CHECK(pm.tensor()[1] == 1.0);
  const std::vector<Kernel> bad{Kernel(3, ab(), std::vector<double>(8, 0.5))};
  CHECK_THROWS_AS(compose(mu, bad), InputError);
}

TEST_CASE("type classes") {
  const auto t22 = type_classes(2, 2);
  REQUIRE(t22.size() == 3);
  CHECK(t22[0].counts == std::vector<int>{2, 0});
  CHECK(t22[1].multiplicity == 2.0);
  CHECK(t22[2].counts == std::vector<int>{0, 2});
  CHECK(type_classes(1, 3).size() == 3);
  const auto t42 = type_classes(4, 2);
  const std::vector<double> binom{1, 4, 6, 4, 1};
  double total = 0.0;
  for (std::size_t i = 0; i < t42.size(); ++i) {
    CHECK(t42[i].multiplicity == binom[i]);
    total += t42[i].multiplicity;
  }
  CHECK(total == 16.0);

  // class probabilities under mu^n sum to one
  const std::vector<double> mu{0.2, 0.3, 0.5};
  double mass = 0.0;
  for (const auto& tc : type_classes(12, 3)) {
    double lp = tc.log_multiplicity;
    for (std::size_t i = 0; i < 3; ++i) lp += tc.counts[i] * std::log(mu[i]);
    mass += std::exp(lp);
  }
  CHECK(std::abs(mass - 1.0) <= 1e-10);

  // large n: floating multinomial stays accurate
  const auto big = type_classes(200, 2);
  CHECK(big[100].log_multiplicity == doctest::Approx(std::lgamma(201.0) - 2 * std::lgamma(101.0)).epsilon(1e-12));
}

TEST_CASE("dense cap") {
  CHECK_THROWS_AS(dense_size(2, 25), CapacityError);
  CHECK(dense_size(2, 24) == (std::size_t{1} << 24));
}

TEST_CASE("symmetric fields") {
  const auto F = [](std::span<const double> nu) { return ExtReal(-(nu[0] - 0.7) * (nu[0] - 0.7)); };
  const auto sym = RealFieldN::from_empirical(ab(), 4, F);
  const auto dense = sym.to_dense();
  const std::vector<std::size_t> x{1, 0, 0, 1};
  CHECK(dense.at(x).value() == doctest::Approx(4 * -(0.5 - 0.7) * (0.5 - 0.7)));
  CHECK(dense.to_symmetric().has_value());
  std::vector<ExtReal> v(dense.values().begin(), dense.values().end());
  v[1] = ExtReal(3.0);
  CHECK_FALSE(RealFieldN::dense(ab(), 4, v).to_symmetric().has_value());
}

TEST_CASE("philox known answers") {
  // Random123 reference vector (counter 0, key 0)
  const auto r0 = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(r0 == std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  // independent implementation (randomgen Philox(number=4, width=32)), first block after increment
  const auto r1 = philox4x32({1, 0, 0, 0}, {0, 0});
  CHECK(r1 == std::array<std::uint32_t, 4>{0xf8e4cca4, 0x5cb200db, 0xb1a574eb, 0x097eff67});
  const auto rp = philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
  CHECK(rp == std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter rng streams are reproducible and distinct") {
  CounterRng a(42, 3);
  CounterRng b = CounterRng(42).split(3);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  CounterRng c(42, 4);
  CounterRng d(42, 3);
  int same = 0;
  for (int i = 0; i < 10; ++i) same += c() == d() ? 1 : 0;
  CHECK(same < 3);
  CounterRng u(1);
  double s = 0.0;
  for (int i = 0; i < 100000; ++i) s += u.uniform();
  CHECK(s / 100000 == doctest::Approx(0.5).epsilon(0.01));
}
