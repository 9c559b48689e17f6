#include "sanov/alpha.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sanov/errors.hpp"
#include "sanov/scalar_search.hpp"
#include "sanov/simplex.hpp"
#include "sanov/transport.hpp"

namespace sanov {

namespace {

void require_same_space(const Dist& a, const Dist& b, const char* what) {
  if (a.size() != b.size()) throw InputError(std::string(what) + ": distributions live on different spaces");
}

constexpr double kBig = 1e300;

struct ShortfallOpt {
  ExtReal value;
  double t = 1.0;
};

ShortfallOpt shortfall_opt(const Dist& nu, const Dist& mu, const LossFn& loss) {
  require_same_space(nu, mu, "shortfall_alpha");
  if (!nu.absolutely_continuous_wrt(mu)) return {ExtReal::pos_inf(), 1.0};
  const std::size_t m = mu.size();
  auto objective = [&](double s) {
    const double t = std::exp(s);
    double acc = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (mu[i] == 0.0) continue;
      const ExtReal c = loss.conjugate(t * nu[i] / mu[i]);
      if (!c.is_finite()) return kBig;
      acc += mu[i] * c.value();
    }
    return acc / t;
  };
  constexpr double kLo = -30.0;
  constexpr double kHi = 30.0;
  constexpr int kScan = 240;
  int best = 0;
  double best_v = kBig;
  for (int k = 0; k <= kScan; ++k) {
    const double v = objective(kLo + (kHi - kLo) * k / kScan);
    if (v < best_v) {
      best_v = v;
      best = k;
    }
  }
  if (best_v >= kBig) return {ExtReal::pos_inf(), 1.0};
  const double step = (kHi - kLo) / kScan;
  const double a = std::max(kLo, kLo + step * (best - 1));
  const double b = std::min(kHi, kLo + step * (best + 1));
  const auto r = golden_section_minimize(objective, a, b, 1e-12);
  if (r.value < best_v) return {ExtReal(r.value), std::exp(r.x)};
  return {ExtReal(best_v), std::exp(kLo + step * best)};
}

double mixture_log_objective(const Dist& nu, const std::vector<Dist>& gens, std::span<const double> w) {
  // -sum_i nu_i log mu_w(i); +inf (kBig) when nu charges an atom mu_w misses
  double acc = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] == 0.0) continue;
    double mw = 0.0;
    for (std::size_t j = 0; j < gens.size(); ++j) mw += w[j] * gens[j][i];
    if (mw <= 0.0) return kBig;
    acc -= nu[i] * std::log(mw);
  }
  return acc;
}

}  // namespace

AlphaSpec AlphaSpec::relative_entropy(Dist mu) { return AlphaSpec(RelativeEntropySpec{std::move(mu)}); }

AlphaSpec AlphaSpec::lp_entropy(Dist mu, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InputError("LpEntropy requires finite p > 1");
  return AlphaSpec(LpEntropySpec{std::move(mu), p});
}

AlphaSpec AlphaSpec::shortfall(Dist mu, LossFn loss) { return AlphaSpec(ShortfallSpec{std::move(mu), std::move(loss)}); }

AlphaSpec AlphaSpec::robust(std::vector<Dist> generators) {
  if (generators.empty()) throw InputError("Robust spec needs at least one generator");
  for (const Dist& g : generators) require_same_space(g, generators.front(), "Robust spec");
  return AlphaSpec(RobustSpec{std::move(generators)});
}

AlphaSpec AlphaSpec::set_indicator(std::vector<Dist> generators) {
  if (generators.empty()) throw InputError("SetIndicator spec needs at least one generator");
  for (const Dist& g : generators) require_same_space(g, generators.front(), "SetIndicator spec");
  return AlphaSpec(SetIndicatorSpec{std::move(generators)});
}

AlphaSpec AlphaSpec::transport(Dist mu, std::vector<ExtReal> cost, bool require_finite_diagonal) {
  const std::size_t m = mu.size();
  if (cost.size() != m * m) throw InputError("Transport cost must be an m x m matrix");
  for (std::size_t x = 0; x < m; ++x) {
    bool finite_entry = false;
    for (std::size_t y = 0; y < m; ++y) {
      const ExtReal c = cost[x * m + y];
      if (c.is_neg_inf() || c < ExtReal(0.0)) throw InputError("Transport cost entries must be >= 0");
      finite_entry = finite_entry || c.is_finite();
    }
    if (!finite_entry) throw InputError("Transport cost row " + std::to_string(x) + " has no finite entry");
    if (require_finite_diagonal && !cost[x * m + x].is_finite()) {
      throw InputError("Transport cost diagonal must be finite");
    }
  }
  return AlphaSpec(TransportSpec{std::move(mu), std::move(cost)});
}

const FiniteSpace& AlphaSpec::space() const {
  return std::visit(
      [](const auto& s) -> const FiniteSpace& {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, RobustSpec> || std::is_same_v<T, SetIndicatorSpec>) {
          return s.generators.front().space();
        } else {
          return s.mu.space();
        }
      },
      v_);
}

std::string to_string(AlphaSpec::Kind kind) {
  switch (kind) {
    case AlphaSpec::Kind::RelativeEntropy:
      return "relative_entropy";
    case AlphaSpec::Kind::LpEntropy:
      return "lp_entropy";
    case AlphaSpec::Kind::Shortfall:
      return "shortfall";
    case AlphaSpec::Kind::Robust:
      return "robust";
    case AlphaSpec::Kind::SetIndicator:
      return "set_indicator";
    case AlphaSpec::Kind::Transport:
      return "transport";
  }
  return "unknown";
}

std::string AlphaSpec::name() const { return to_string(kind()); }

ExtReal relative_entropy(const Dist& nu, const Dist& mu) {
  require_same_space(nu, mu, "relative_entropy");
  double acc = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] == 0.0) continue;
    if (mu[i] == 0.0) return ExtReal::pos_inf();
    acc += nu[i] * std::log(nu[i] / mu[i]);
  }
  return ExtReal(acc);
}

ExtReal lp_entropy(const Dist& nu, const Dist& mu, double p) {
  require_same_space(nu, mu, "lp_entropy");
  if (!(p > 1.0)) throw InputError("lp_entropy requires p > 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] == 0.0) continue;
    if (mu[i] == 0.0) return ExtReal::pos_inf();
    acc += mu[i] * std::pow(nu[i] / mu[i], p);
  }
  return ExtReal(std::pow(acc, 1.0 / p) - 1.0);
}

ExtReal shortfall_alpha(const Dist& nu, const Dist& mu, const LossFn& loss) {
  return shortfall_opt(nu, mu, loss).value;
}

RobustAlphaResult robust_alpha_weights(const Dist& nu, const std::vector<Dist>& generators) {
  const std::size_t k = generators.size();
  if (k == 0) throw InputError("robust_alpha: no generators");
  for (const Dist& g : generators) require_same_space(nu, g, "robust_alpha");
  double neg_entropy = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] > 0.0) neg_entropy += nu[i] * std::log(nu[i]);
  }

  // vertex values bound the hull minimum from above
  RobustAlphaResult best{ExtReal::pos_inf(), std::vector<double>(k, 0.0)};
  for (std::size_t j = 0; j < k; ++j) {
    const ExtReal h = relative_entropy(nu, generators[j]);
    if (h < best.value) {
      best.value = h;
      std::fill(best.weights.begin(), best.weights.end(), 0.0);
      best.weights[j] = 1.0;
    }
  }
  if (k == 1) return best;

  std::vector<double> w(k, 1.0 / static_cast<double>(k));
  double phi = mixture_log_objective(nu, generators, w);
  if (phi >= kBig) return best;  // no mixture dominates nu

  std::vector<double> g(k);
  std::vector<double> trial(k);
  double step = 1.0;
  for (int it = 0; it < 20000; ++it) {
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i < nu.size(); ++i) {
      if (nu[i] == 0.0) continue;
      double mw = 0.0;
      for (std::size_t j = 0; j < k; ++j) mw += w[j] * generators[j][i];
      for (std::size_t j = 0; j < k; ++j) g[j] -= nu[i] * generators[j][i] / mw;
    }
    // gradient-mapping norm at unit step
    for (std::size_t j = 0; j < k; ++j) trial[j] = w[j] - g[j];
    project_to_simplex(trial);
    double gm = 0.0;
    for (std::size_t j = 0; j < k; ++j) gm += (trial[j] - w[j]) * (trial[j] - w[j]);
    if (std::sqrt(gm) <= 1e-9) break;

    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t j = 0; j < k; ++j) trial[j] = w[j] - step * g[j];
      project_to_simplex(trial);
      double dec = 0.0;
      for (std::size_t j = 0; j < k; ++j) dec += g[j] * (trial[j] - w[j]);
      const double phi_t = mixture_log_objective(nu, generators, trial);
      if (phi_t <= phi + 1e-4 * dec) {
        w = trial;
        phi = phi_t;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step = std::min(step * 2.0, 1e6);
  }
  const ExtReal value(neg_entropy + phi);
  if (value < best.value) {
    best.value = value;
    best.weights = w;
  }
  return best;
}

ExtReal robust_alpha(const Dist& nu, const std::vector<Dist>& generators) {
  return robust_alpha_weights(nu, generators).value;
}

ExtReal set_indicator_alpha(const Dist& nu, const std::vector<Dist>& generators) {
  if (generators.empty()) throw InputError("set_indicator_alpha: no generators");
  std::vector<std::vector<double>> pts;
  pts.reserve(generators.size());
  for (const Dist& g : generators) {
    require_same_space(nu, g, "set_indicator_alpha");
    pts.emplace_back(g.weights().begin(), g.weights().end());
  }
  const auto r = closest_hull_point(pts, nu.weights());
  return r.distance <= 1e-9 ? ExtReal(0.0) : ExtReal::pos_inf();
}

ExtReal transport_alpha(const Dist& nu, const Dist& mu, std::span<const ExtReal> cost) {
  require_same_space(nu, mu, "transport_alpha");
  return solve_transport(mu.weights(), nu.weights(), cost).cost;
}

ExtReal alpha(const Dist& nu, const AlphaSpec& spec) {
  return std::visit(
      [&](const auto& s) -> ExtReal {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, RelativeEntropySpec>) {
          return relative_entropy(nu, s.mu);
        } else if constexpr (std::is_same_v<T, LpEntropySpec>) {
          return lp_entropy(nu, s.mu, s.p);
        } else if constexpr (std::is_same_v<T, ShortfallSpec>) {
          return shortfall_alpha(nu, s.mu, s.loss);
        } else if constexpr (std::is_same_v<T, RobustSpec>) {
          return robust_alpha(nu, s.generators);
        } else if constexpr (std::is_same_v<T, SetIndicatorSpec>) {
          return set_indicator_alpha(nu, s.generators);
        } else {
          return transport_alpha(nu, s.mu, s.cost);
        }
      },
      spec.variant());
}

std::vector<double> alpha_subgradient(const Dist& nu, const AlphaSpec& spec) {
  const std::size_t m = nu.size();
  constexpr double kFloor = 1e-300;
  auto entropy_grad = [&](auto&& ref) {
    std::vector<double> g(m);
    for (std::size_t i = 0; i < m; ++i) g[i] = std::log(std::max(nu[i], kFloor) / std::max(ref(i), kFloor)) + 1.0;
    return g;
  };
  return std::visit(
      [&](const auto& s) -> std::vector<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, RelativeEntropySpec>) {
          if (!nu.absolutely_continuous_wrt(s.mu)) return {};
          return entropy_grad([&](std::size_t i) { return s.mu[i]; });
        } else if constexpr (std::is_same_v<T, LpEntropySpec>) {
          if (!nu.absolutely_continuous_wrt(s.mu)) return {};
          double acc = 0.0;
          for (std::size_t i = 0; i < m; ++i) {
            if (s.mu[i] > 0.0) acc += s.mu[i] * std::pow(nu[i] / s.mu[i], s.p);
          }
          const double norm = std::pow(acc, 1.0 / s.p);
          std::vector<double> g(m, 0.0);
          for (std::size_t i = 0; i < m; ++i) {
            if (s.mu[i] > 0.0) g[i] = std::pow(norm, 1.0 - s.p) * std::pow(nu[i] / s.mu[i], s.p - 1.0);
          }
          return g;
        } else if constexpr (std::is_same_v<T, ShortfallSpec>) {
          const auto opt = shortfall_opt(nu, s.mu, s.loss);
          if (!opt.value.is_finite()) return {};
          std::vector<double> g(m, 0.0);
          for (std::size_t i = 0; i < m; ++i) {
            if (s.mu[i] == 0.0) continue;
            const double y = opt.t * nu[i] / s.mu[i];
            g[i] = y > 0.0 ? s.loss.conjugate_argmax(y) : s.loss.conjugate_argmax(1e-300);
          }
          return g;
        } else if constexpr (std::is_same_v<T, RobustSpec>) {
          const auto r = robust_alpha_weights(nu, s.generators);
          if (!r.value.is_finite()) return {};
          return entropy_grad([&](std::size_t i) {
            double mw = 0.0;
            for (std::size_t j = 0; j < s.generators.size(); ++j) mw += r.weights[j] * s.generators[j][i];
            return mw;
          });
        } else if constexpr (std::is_same_v<T, SetIndicatorSpec>) {
          if (!set_indicator_alpha(nu, s.generators).is_finite()) return {};
          return std::vector<double>(m, 0.0);
        } else {
          const auto plan = solve_transport(s.mu.weights(), nu.weights(), s.cost);
          if (!plan.cost.is_finite()) return {};
          return plan.col_potential;
        }
      },
      spec.variant());
}

ExtReal alpha_n(const ProductDist& nu, const AlphaSpec& spec) {
  const std::size_t m = nu.base_space().size();
  if (spec.space().size() != m) throw InputError("alpha_n: spec and joint law live on different spaces");
  const auto dis = disintegrate(nu);
  const auto marg = prefix_marginals(nu);
  ExtReal total = alpha(dis.first, spec);
  for (const Kernel& k : dis.kernels) {
    const auto& level = marg[static_cast<std::size_t>(k.stage() - 1)];
    for (std::size_t prefix = 0; prefix < k.num_prefixes(); ++prefix) {
      if (level[prefix] == 0.0) continue;
      total += weighted(level[prefix], alpha(k.at(prefix), spec));
    }
  }
  return total;
}

}  // namespace sanov
