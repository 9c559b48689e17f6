#include "sanov/rho.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sanov/errors.hpp"
#include "sanov/random.hpp"
#include "sanov/scalar_search.hpp"
#include "sanov/simplex.hpp"

namespace sanov {

namespace {

void require_size(std::span<const ExtReal> f, std::size_t m, const char* what) {
  if (f.size() != m) throw InputError(std::string(what) + ": f has " + std::to_string(f.size()) + " entries, space has " +
                                      std::to_string(m));
}

// Shortfall loss behind the L^p entropy; validating a LossFn is not free, so reuse per thread.
const LossFn& lp_loss(double p) {
  thread_local double cached_p = 0.0;
  thread_local std::optional<LossFn> cached;
  if (!cached || cached_p != p) {
    cached = LossFn::power_plus(p / (p - 1.0));
    cached_p = p;
  }
  return *cached;
}

double inner(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

ExtReal rho_entropy(std::span<const ExtReal> f, const Dist& mu) {
  require_size(f, mu.size(), "rho_entropy");
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (mu[i] == 0.0) continue;
    if (f[i].is_pos_inf()) return ExtReal::pos_inf();
    shift = std::max(shift, f[i].value());
  }
  if (shift == -std::numeric_limits<double>::infinity()) return ExtReal::neg_inf();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (mu[i] == 0.0 || f[i].is_neg_inf()) continue;
    acc += mu[i] * std::exp(f[i].value() - shift);
  }
  return ExtReal(shift + std::log(acc));
}

ExtReal rho_shortfall(std::span<const ExtReal> f, const Dist& mu, const LossFn& loss) {
  require_size(f, mu.size(), "rho_shortfall");
  double fmin = std::numeric_limits<double>::infinity();
  double fmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (mu[i] == 0.0) continue;
    if (f[i].is_pos_inf()) return ExtReal::pos_inf();
    if (f[i].is_finite()) {
      fmin = std::min(fmin, f[i].value());
      fmax = std::max(fmax, f[i].value());
    }
  }
  // only -inf entries: G(m) = l(-inf) < 1 for every m
  if (fmax == -std::numeric_limits<double>::infinity()) return ExtReal::neg_inf();

  auto G = [&](double m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (mu[i] == 0.0) continue;
      acc += mu[i] * (f[i].is_neg_inf() ? loss.left_limit() : loss(f[i].value() - m));
    }
    return acc;
  };

  double lo = fmin - 1.0;
  double hi = fmax + 1.0;
  double w = 1.0;
  int expand = 0;
  while (!(G(hi) <= 1.0)) {
    hi += w;
    w *= 2.0;
    if (++expand > 1100) return ExtReal::pos_inf();
  }
  w = 1.0;
  expand = 0;
  while (G(lo) <= 1.0) {
    lo -= w;
    w *= 2.0;
    if (++expand > 1100) return ExtReal::neg_inf();
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-10 * (1.0 + std::abs(mid))) break;
    if (G(mid) <= 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return ExtReal(0.5 * (lo + hi));
}

OceGenerator OceGenerator::positive_part(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("positive_part OCE generator needs a finite scale > 0");
  return OceGenerator(Kind::PositivePart, scale);
}

double OceGenerator::operator()(double x) const {
  switch (kind_) {
    case Kind::ExpMinusOne:
      return std::expm1(x);
    case Kind::PositivePart:
      return scale_ * std::max(x, 0.0);
    case Kind::ChiSquared:
      return x >= -2.0 ? x + 0.25 * x * x : -1.0;
  }
  return 0.0;
}

double OceGenerator::at_minus_inf() const {
  switch (kind_) {
    case Kind::ExpMinusOne:
    case Kind::ChiSquared:
      return -1.0;
    case Kind::PositivePart:
      return 0.0;
  }
  return 0.0;
}

OceResult rho_oce(std::span<const ExtReal> f, const Dist& mu, const OceGenerator& phi_star) {
  require_size(f, mu.size(), "rho_oce");
  double fmin = std::numeric_limits<double>::infinity();
  double fmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (mu[i] == 0.0) continue;
    if (f[i].is_pos_inf()) return {ExtReal::pos_inf(), 0.0, ""};
    if (f[i].is_finite()) {
      fmin = std::min(fmin, f[i].value());
      fmax = std::max(fmax, f[i].value());
    }
  }
  if (fmax == -std::numeric_limits<double>::infinity()) {
    return {ExtReal::neg_inf(), 0.0, "f is -inf on the support of mu; objective decreases without bound as m -> -inf"};
  }
  auto J = [&](double m) {
    double acc = m;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (mu[i] == 0.0) continue;
      acc += mu[i] * (f[i].is_neg_inf() ? phi_star.at_minus_inf() : phi_star(f[i].value() - m));
    }
    return acc;
  };
  constexpr double kLimit = 1e12;
  double lo = fmin - 1.0;
  double w = 1.0;
  while (J(lo - w) < J(lo)) {
    lo -= w;
    w *= 2.0;
    if (lo < -kLimit) {
      return {ExtReal::neg_inf(), lo, "objective keeps decreasing as m -> -inf (phi* slope below 1 on the left)"};
    }
  }
  const double left = lo - w;
  double hi = fmax + 1.0;
  w = 1.0;
  while (J(hi + w) < J(hi)) {
    hi += w;
    w *= 2.0;
    if (hi > kLimit) return {ExtReal::neg_inf(), hi, "objective keeps decreasing as m -> +inf"};
  }
  const double right = hi + w;
  const auto r = golden_section_minimize(J, left, right, 1e-12 * (1.0 + std::abs(left) + std::abs(right)));
  return {ExtReal(r.value), r.x, ""};
}

ExtReal rho_robust(std::span<const ExtReal> f, const std::vector<Dist>& generators) {
  if (generators.empty()) throw InputError("rho_robust: no generators");
  ExtReal best = ExtReal::neg_inf();
  for (const Dist& mu : generators) best = max(best, rho_entropy(f, mu));
  return best;
}

ExtReal rho_set_indicator(std::span<const ExtReal> f, const std::vector<Dist>& generators) {
  if (generators.empty()) throw InputError("rho_set_indicator: no generators");
  ExtReal best = ExtReal::neg_inf();
  for (const Dist& mu : generators) {
    require_size(f, mu.size(), "rho_set_indicator");
    best = max(best, integrate(f, mu.weights()));
  }
  return best;
}

ExtReal rho_transport(std::span<const ExtReal> f, const Dist& mu, std::span<const ExtReal> cost) {
  const std::size_t m = mu.size();
  require_size(f, m, "rho_transport");
  if (cost.size() != m * m) throw InputError("rho_transport: cost must be m x m");
  ExtReal total(0.0);
  for (std::size_t x = 0; x < m; ++x) {
    if (mu[x] == 0.0) continue;
    ExtReal best = ExtReal::neg_inf();
    for (std::size_t y = 0; y < m; ++y) best = max(best, f[y] - cost[x * m + y]);
    total += weighted(mu[x], best);
  }
  return total;
}

ExtReal rho(std::span<const ExtReal> f, const AlphaSpec& spec) {
  return std::visit(
      [&](const auto& s) -> ExtReal {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, RelativeEntropySpec>) {
          return rho_entropy(f, s.mu);
        } else if constexpr (std::is_same_v<T, LpEntropySpec>) {
          return rho_shortfall(f, s.mu, lp_loss(s.p));
        } else if constexpr (std::is_same_v<T, ShortfallSpec>) {
          return rho_shortfall(f, s.mu, s.loss);
        } else if constexpr (std::is_same_v<T, RobustSpec>) {
          return rho_robust(f, s.generators);
        } else if constexpr (std::is_same_v<T, SetIndicatorSpec>) {
          return rho_set_indicator(f, s.generators);
        } else {
          return rho_transport(f, s.mu, s.cost);
        }
      },
      spec.variant());
}

namespace {

std::optional<Dist> tilted(std::span<const ExtReal> f, const Dist& mu) {
  const ExtReal r = rho_entropy(f, mu);
  if (!r.is_finite()) return std::nullopt;
  std::vector<double> w(mu.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (mu[i] > 0.0 && f[i].is_finite()) w[i] = mu[i] * std::exp(f[i].value() - r.value());
  }
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= s;
  return Dist(mu.space(), std::move(w));
}

std::optional<Dist> shortfall_argmax(std::span<const ExtReal> f, const Dist& mu, const LossFn& loss) {
  const ExtReal r = rho_shortfall(f, mu, loss);
  if (!r.is_finite()) return std::nullopt;
  std::vector<double> w(mu.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (mu[i] > 0.0 && f[i].is_finite()) w[i] = mu[i] * loss.derivative(f[i].value() - r.value());
  }
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(s > 0.0)) return std::nullopt;
  for (double& x : w) x /= s;
  return Dist(mu.space(), std::move(w));
}

}  // namespace

std::optional<Dist> rho_argmax(std::span<const ExtReal> f, const AlphaSpec& spec) {
  return std::visit(
      [&](const auto& s) -> std::optional<Dist> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, RelativeEntropySpec>) {
          return tilted(f, s.mu);
        } else if constexpr (std::is_same_v<T, LpEntropySpec>) {
          return shortfall_argmax(f, s.mu, lp_loss(s.p));
        } else if constexpr (std::is_same_v<T, ShortfallSpec>) {
          return shortfall_argmax(f, s.mu, s.loss);
        } else if constexpr (std::is_same_v<T, RobustSpec>) {
          std::size_t best = 0;
          ExtReal best_v = ExtReal::neg_inf();
          for (std::size_t j = 0; j < s.generators.size(); ++j) {
            const ExtReal v = rho_entropy(f, s.generators[j]);
            if (v > best_v) {
              best_v = v;
              best = j;
            }
          }
          return tilted(f, s.generators[best]);
        } else if constexpr (std::is_same_v<T, SetIndicatorSpec>) {
          std::size_t best = 0;
          ExtReal best_v = ExtReal::neg_inf();
          for (std::size_t j = 0; j < s.generators.size(); ++j) {
            const ExtReal v = integrate(f, s.generators[j].weights());
            if (v > best_v) {
              best_v = v;
              best = j;
            }
          }
          if (!best_v.is_finite()) return std::nullopt;
          return s.generators[best];
        } else {
          const std::size_t m = s.mu.size();
          if (!rho_transport(f, s.mu, s.cost).is_finite()) return std::nullopt;
          std::vector<double> w(m, 0.0);
          for (std::size_t x = 0; x < m; ++x) {
            if (s.mu[x] == 0.0) continue;
            std::size_t arg = 0;
            ExtReal best = ExtReal::neg_inf();
            for (std::size_t y = 0; y < m; ++y) {
              const ExtReal v = f[y] - s.cost[x * m + y];
              if (v > best) {
                best = v;
                arg = y;
              }
            }
            w[arg] += s.mu[x];
          }
          return Dist(s.mu.space(), std::move(w));
        }
      },
      spec.variant());
}

std::string to_string(RhoMethod method) {
  switch (method) {
    case RhoMethod::ClosedForm:
      return "closed_form";
    case RhoMethod::SimplexOpt:
      return "simplex_opt";
    case RhoMethod::RootFind:
      return "root_find";
  }
  return "unknown";
}

RhoResult rho_generic(std::span<const ExtReal> f, const AlphaSpec& spec, const GenericOptions& opts) {
  const std::size_t m = spec.space().size();
  require_size(f, m, "rho_generic");
  RhoResult out;
  out.method = RhoMethod::SimplexOpt;
  out.closed_form = rho(f, spec);

  // atoms where nu may put mass: f > -inf, and inside the effective domain of alpha
  std::vector<char> allowed(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    if (f[i].is_neg_inf()) allowed[i] = 0;
    if (f[i].is_pos_inf()) {
      // the supremum is +inf as soon as a finite-penalty nu charges atom i; defer to the closed form
      out.value = *out.closed_form;
      out.method = RhoMethod::ClosedForm;
      out.certified = true;
      return out;
    }
  }
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, RobustSpec> || std::is_same_v<T, SetIndicatorSpec>) {
          for (std::size_t i = 0; i < m; ++i) {
            bool charged = false;
            for (const Dist& g : s.generators) charged = charged || g[i] > 0.0;
            if (!charged) allowed[i] = 0;
          }
        } else if constexpr (!std::is_same_v<T, TransportSpec>) {
          for (std::size_t i = 0; i < m; ++i) {
            if (s.mu[i] == 0.0) allowed[i] = 0;
          }
        }
      },
      spec.variant());
  const std::size_t k = static_cast<std::size_t>(std::count(allowed.begin(), allowed.end(), 1));
  if (k == 0) {
    out.value = ExtReal::neg_inf();
    out.certified = out.closed_form->is_neg_inf();
    return out;
  }

  std::vector<double> fv(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) fv[i] = allowed[i] ? f[i].value() : 0.0;
  const FiniteSpace& space = spec.space();

  auto objective = [&](std::span<const double> w) -> double {
    for (std::size_t i = 0; i < m; ++i) {
      if (!allowed[i] && w[i] > 0.0) return -std::numeric_limits<double>::infinity();
    }
    const ExtReal a = alpha(Dist(space, std::vector<double>(w.begin(), w.end())), spec);
    if (a.is_pos_inf()) return -std::numeric_limits<double>::infinity();
    return inner(fv, w) - a.value();
  };

  double best_v = -std::numeric_limits<double>::infinity();
  std::vector<double> best_w;
  CounterRng base(opts.seed);

  if (spec.kind() == AlphaSpec::Kind::SetIndicator) {
    // alpha is 0 on the hull and +inf off it: ascend over mixture weights instead
    const auto& gens = spec.as<SetIndicatorSpec>().generators;
    for (const Dist& g : gens) {
      const double v = integrate(f, g.weights()).value();
      if (v > best_v) {
        best_v = v;
        best_w.assign(g.weights().begin(), g.weights().end());
      }
    }
  } else {
    std::vector<double> trial(m);
    std::vector<double> sub;
    for (int r = 0; r < opts.restarts; ++r) {
      CounterRng rng = base.split(static_cast<std::uint64_t>(r));
      const auto d = rng.dirichlet(k);
      std::vector<double> w(m, 0.0);
      for (std::size_t i = 0, j = 0; i < m; ++i) {
        if (allowed[i]) w[i] = d[j++];
      }
      double v = objective(w);
      if (!std::isfinite(v)) continue;
      double step = 1.0;
      for (int it = 0; it < opts.max_iter; ++it) {
        const auto sg = alpha_subgradient(Dist(space, w), spec);
        if (sg.empty()) break;
        std::vector<double> g(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) g[i] = allowed[i] ? fv[i] - sg[i] : 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 50; ++bt) {
          sub.clear();
          for (std::size_t i = 0; i < m; ++i) {
            if (allowed[i]) sub.push_back(w[i] + step * g[i]);
          }
          project_to_simplex(sub);
          for (std::size_t i = 0, j = 0; i < m; ++i) trial[i] = allowed[i] ? sub[j++] : 0.0;
          double inc = 0.0;
          for (std::size_t i = 0; i < m; ++i) inc += g[i] * (trial[i] - w[i]);
          const double vt = objective(trial);
          if (std::isfinite(vt) && vt >= v + 1e-4 * inc && vt > v) {
            double move = 0.0;
            for (std::size_t i = 0; i < m; ++i) move += std::abs(trial[i] - w[i]);
            w = trial;
            v = vt;
            accepted = move > 1e-14;
            break;
          }
          step *= 0.5;
        }
        if (!accepted) break;
        step = std::min(2.0 * step, 1e3);
      }
      if (v > best_v) {
        best_v = v;
        best_w = w;
      }
    }
    if (!best_w.empty()) best_v = simplex_compass_ascent(objective, best_w, 1e-3, 1e-12, 20000);
  }

  if (best_w.empty()) {
    out.value = ExtReal::neg_inf();
  } else {
    out.value = ExtReal(best_v);
    out.maximizer = Dist(space, best_w);
  }
  const ExtReal cf = *out.closed_form;
  out.certified = cf.is_finite() && out.value.is_finite() ? std::abs(cf.value() - out.value.value()) <= 1e-6
                                                          : cf == out.value;
  return out;
}

ConjugateResult conjugate_alpha(const Dist& nu, const AlphaSpec& spec, double bound, double step) {
  const std::size_t m = nu.size();
  if (spec.space().size() != m) throw InputError("conjugate_alpha: spec and nu live on different spaces");
  if (!(bound > 0.0) || !(step > 0.0)) throw InputError("conjugate_alpha: bound and step must be positive");
  auto value = [&](std::span<const double> f) {
    std::vector<ExtReal> fe(f.begin(), f.end());
    const ExtReal r = rho(fe, spec);
    if (!r.is_finite()) return -std::numeric_limits<double>::infinity();
    return inner(f, nu.weights()) - r.value();
  };

  // rho is cash additive, so the first coordinate can be pinned at 0
  int per_axis = static_cast<int>(std::floor(2.0 * bound / step)) + 1;
  const double cells = std::pow(static_cast<double>(per_axis), static_cast<double>(m - 1));
  if (cells > 2e5) per_axis = std::max(2, static_cast<int>(std::pow(2e5, 1.0 / static_cast<double>(m - 1))));
  const double h = 2.0 * bound / (per_axis - 1);

  std::vector<double> f(m, 0.0);
  std::vector<double> best(m, 0.0);
  double best_v = value(best);
  std::vector<int> idx(m, 0);
  if (m > 1) {
    for (;;) {
      for (std::size_t i = 1; i < m; ++i) f[i] = -bound + h * idx[i];
      const double v = value(f);
      if (v > best_v) {
        best_v = v;
        best = f;
      }
      std::size_t pos = 1;
      while (pos < m && ++idx[pos] == per_axis) idx[pos++] = 0;
      if (pos == m) break;
    }
  }
  // cyclic coordinate ascent inside the box
  for (int sweep = 0; sweep < 200; ++sweep) {
    const double before = best_v;
    for (std::size_t i = 0; i < m; ++i) {
      f = best;
      const auto r = golden_section_maximize(
          [&](double t) {
            f[i] = t;
            return value(f);
          },
          -bound, bound, 1e-12);
      if (r.value > best_v) {
        best_v = r.value;
        best[i] = r.x;
      }
    }
    if (best_v - before <= 1e-13) break;
  }
  ConjugateResult out;
  out.lower_bound = ExtReal(best_v);
  out.direct = alpha(nu, spec);
  out.gap = out.direct - out.lower_bound;
  out.f = best;
  return out;
}

}  // namespace sanov

namespace sanov {

RhoResult rho_evaluate(std::span<const ExtReal> f, const AlphaSpec& spec) {
  RhoResult r;
  r.value = rho(f, spec);
  r.maximizer = rho_argmax(f, spec);
  const auto k = spec.kind();
  r.method = (k == AlphaSpec::Kind::Shortfall || k == AlphaSpec::Kind::LpEntropy) ? RhoMethod::RootFind
                                                                                    : RhoMethod::ClosedForm;
  r.closed_form = r.value;
  r.certified = true;
  return r;
}

}  // namespace sanov
