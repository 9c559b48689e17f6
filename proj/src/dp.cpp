#include "sanov/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sanov/errors.hpp"
#include "sanov/parallel.hpp"
#include "sanov/rho.hpp"
#include "sanov/simplex.hpp"

namespace sanov {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int default_resolution(std::size_t dim) {
  switch (dim) {
    case 1:
    case 2:
      return 1000;
    case 3:
    case 4:
      return 100;
    default:
      return 20;
  }
}

std::size_t ipow(std::size_t m, int k) {
  std::size_t s = 1;
  for (int i = 0; i < k; ++i) s *= m;
  return s;
}

// Grid maximization followed by pairwise-transfer ascent on a simplex of dimension `dim`.
std::pair<double, std::vector<double>> maximize_on_simplex(const SimplexFn& obj, std::size_t dim, int resolution) {
  double best = kNegInf;
  std::vector<double> arg;
  for_each_simplex_grid(dim, resolution, [&](std::span<const double> w) {
    const double v = obj(w);
    if (v > best) {
      best = v;
      arg.assign(w.begin(), w.end());
    }
  });
  if (arg.empty()) return {kNegInf, {}};
  best = simplex_compass_ascent(obj, arg, 1.0 / resolution, 1e-12, 200000);
  return {best, arg};
}

}  // namespace

RealFieldN DPTrace::field(const FiniteSpace& space, int k) const {
  return RealFieldN::dense(space, k, levels.at(static_cast<std::size_t>(k)));
}

DPResult rho_n_dense(const RealFieldN& f, const AlphaSpec& spec, bool keep_trace, int threads) {
  const std::size_t m = f.space().size();
  if (spec.space().size() != m) throw InputError("rho_n_dense: spec and f live on different spaces");
  const int n = f.n();
  dense_size(m, n);
  const RealFieldN dense = f.to_dense();

  DPResult out;
  std::vector<ExtReal> cur(dense.values().begin(), dense.values().end());
  DPTrace trace;
  if (keep_trace) {
    trace.n = n;
    trace.m = m;
    trace.levels.resize(static_cast<std::size_t>(n) + 1);
    trace.levels[static_cast<std::size_t>(n)] = cur;
  }
  for (int k = n; k >= 1; --k) {
    std::vector<ExtReal> prev(cur.size() / m);
    parallel_for(prev.size(), threads, [&](std::size_t p) {
      prev[p] = rho(std::span<const ExtReal>(cur).subspan(p * m, m), spec);
    });
    cur = std::move(prev);
    if (keep_trace) trace.levels[static_cast<std::size_t>(k - 1)] = cur;
  }
  out.value = cur.front();
  if (keep_trace) out.trace = std::move(trace);
  return out;
}

ProductDist greedy_optimizer(const DPTrace& trace, const AlphaSpec& spec) {
  const std::size_t m = trace.m;
  const FiniteSpace& space = spec.space();
  auto slice_argmax = [&](int k, std::size_t prefix) {
    const auto& lvl = trace.levels[static_cast<std::size_t>(k)];
    auto nu = rho_argmax(std::span<const ExtReal>(lvl).subspan(prefix * m, m), spec);
    return nu ? *nu : Dist::uniform(space);
  };
  const Dist first = slice_argmax(1, 0);
  std::vector<Kernel> kernels;
  for (int k = 2; k <= trace.n; ++k) {
    const std::size_t prefixes = ipow(m, k - 1);
    std::vector<double> rows(prefixes * m);
    for (std::size_t p = 0; p < prefixes; ++p) {
      const Dist d = slice_argmax(k, p);
      std::copy(d.weights().begin(), d.weights().end(), rows.begin() + static_cast<std::ptrdiff_t>(p * m));
    }
    kernels.emplace_back(k, space, std::move(rows));
  }
  return compose(first, kernels);
}

ExtReal rho_n_symmetric(const RealFieldN& f, const AlphaSpec& spec, int threads) {
  const std::size_t m = f.space().size();
  if (spec.space().size() != m) throw InputError("rho_n_symmetric: spec and f live on different spaces");
  std::optional<RealFieldN> sym = f.is_dense() ? f.to_symmetric() : std::optional<RealFieldN>(f);
  if (!sym) throw InputError("rho_n_symmetric: f is not permutation invariant");
  const int n = f.n();
  std::vector<ExtReal> cur(sym->values().begin(), sym->values().end());
  CompositionIndex upper(n, m);
  for (int k = n; k >= 1; --k) {
    CompositionIndex lower(k - 1, m);
    std::vector<ExtReal> prev(lower.size());
    parallel_for(lower.size(), threads, [&](std::size_t r) {
      std::vector<int> c(lower.counts(r).begin(), lower.counts(r).end());
      std::vector<ExtReal> slice(m);
      for (std::size_t i = 0; i < m; ++i) {
        ++c[i];
        slice[i] = cur[upper.rank(c)];
        --c[i];
      }
      prev[r] = rho(slice, spec);
    });
    cur = std::move(prev);
    upper = std::move(lower);
  }
  return cur.front();
}

std::pair<double, std::vector<double>> variational_target(const SimplexFn& F, const AlphaSpec& spec,
                                                          int grid_resolution) {
  const std::size_t m = spec.space().size();
  const FiniteSpace& space = spec.space();
  if (spec.kind() == AlphaSpec::Kind::SetIndicator) {
    const auto& gens = spec.as<SetIndicatorSpec>().generators;
    std::vector<double> nu(m);
    auto mix = [&](std::span<const double> w) {
      std::fill(nu.begin(), nu.end(), 0.0);
      for (std::size_t j = 0; j < gens.size(); ++j) {
        for (std::size_t i = 0; i < m; ++i) nu[i] += w[j] * gens[j][i];
      }
      return F(nu);
    };
    const int res = grid_resolution > 0 ? grid_resolution : default_resolution(gens.size());
    auto [v, w] = maximize_on_simplex(mix, gens.size(), res);
    std::vector<double> point(m, 0.0);
    for (std::size_t j = 0; j < gens.size(); ++j) {
      for (std::size_t i = 0; i < m; ++i) point[i] += w[j] * gens[j][i];
    }
    return {v, point};
  }
  auto obj = [&](std::span<const double> w) {
    const ExtReal a = alpha(Dist(space, std::vector<double>(w.begin(), w.end())), spec);
    if (!a.is_finite()) return kNegInf;
    return F(w) - a.value();
  };
  const int res = grid_resolution > 0 ? grid_resolution : default_resolution(m);
  return maximize_on_simplex(obj, m, res);
}

SanovRun sanov_limit(const SimplexFn& F, const AlphaSpec& spec, const std::vector<int>& schedule,
                     const SanovOptions& opts) {
  SanovRun run;
  run.spec = spec.name();
  auto [target, arg] = variational_target(F, spec, opts.grid_resolution);
  run.target = target;
  run.target_argmax = std::move(arg);
  for (int n : schedule) {
    if (n < 1) throw InputError("sanov_limit: schedule entries must be >= 1");
    const auto f = RealFieldN::from_empirical(spec.space(), n, [&](std::span<const double> nu) { return ExtReal(F(nu)); });
    const ExtReal r = rho_n_symmetric(f, spec, opts.threads);
    if (!r.is_finite()) throw NumericError("sanov_limit: rho_n is not finite at n=" + std::to_string(n));
    const double v = r.value() / n;
    run.points.push_back({n, v, v - target});
  }
  return run;
}

double sanov_lower_bound(const SimplexFn& F, const AlphaSpec& spec, int n, int grid_resolution) {
  const std::size_t m = spec.space().size();
  const auto classes = type_classes(n, m);
  std::vector<double> Fc(classes.size());
  std::vector<double> emp(m);
  for (std::size_t r = 0; r < classes.size(); ++r) {
    for (std::size_t i = 0; i < m; ++i) emp[i] = static_cast<double>(classes[r].counts[i]) / n;
    Fc[r] = F(emp);
  }
  double best = kNegInf;
  for_each_simplex_grid(m, grid_resolution, [&](std::span<const double> nu) {
    const ExtReal a = alpha(Dist(spec.space(), std::vector<double>(nu.begin(), nu.end())), spec);
    if (!a.is_finite()) return;
    double e = 0.0;
    for (std::size_t r = 0; r < classes.size(); ++r) {
      double lp = classes[r].log_multiplicity;
      bool possible = true;
      for (std::size_t i = 0; i < m; ++i) {
        const int c = classes[r].counts[i];
        if (c == 0) continue;
        if (nu[i] == 0.0) {
          possible = false;
          break;
        }
        lp += c * std::log(nu[i]);
      }
      if (possible) e += std::exp(lp) * Fc[r];
    }
    best = std::max(best, e - a.value());
  });
  return best;
}

SuperhedgeCert superhedge(const RealFieldN& f, const AlphaSpec& spec) {
  const auto res = rho_n_dense(f, spec, true);
  const DPTrace& tr = *res.trace;
  const std::size_t m = tr.m;
  const int n = tr.n;
  for (const auto& lvl : tr.levels) {
    for (const ExtReal& v : lvl) {
      if (!v.is_finite()) throw NumericError("superhedge: the recursion produced an infinite value");
    }
  }
  SuperhedgeCert cert;
  cert.y = tr.levels[0][0].value();
  for (int k = 1; k <= n; ++k) {
    const auto& lk = tr.levels[static_cast<std::size_t>(k)];
    const auto& lp = tr.levels[static_cast<std::size_t>(k - 1)];
    std::vector<double> Yk(lk.size());
    for (std::size_t i = 0; i < lk.size(); ++i) Yk[i] = lk[i].value() - lp[i / m].value();
    cert.Y.push_back(std::move(Yk));
  }
  const auto& fv = tr.levels[static_cast<std::size_t>(n)];
  for (std::size_t idx = 0; idx < fv.size(); ++idx) {
    double acc = fv[idx].value() - cert.y;
    std::size_t div = fv.size();
    for (int k = 1; k <= n; ++k) {
      div /= m;
      acc -= cert.Y[static_cast<std::size_t>(k - 1)][idx / div];
    }
    cert.residual = std::max(cert.residual, std::abs(acc));
  }
  const LossFn* loss = nullptr;
  std::optional<LossFn> lp_loss;
  const Dist* mu = nullptr;
  if (spec.kind() == AlphaSpec::Kind::Shortfall) {
    loss = &spec.as<ShortfallSpec>().loss;
    mu = &spec.as<ShortfallSpec>().mu;
  } else if (spec.kind() == AlphaSpec::Kind::LpEntropy) {
    const double p = spec.as<LpEntropySpec>().p;
    lp_loss = LossFn::power_plus(p / (p - 1.0));
    loss = &*lp_loss;
    mu = &spec.as<LpEntropySpec>().mu;
  }
  if (loss) cert.slice_loss = 0.0;
  std::vector<ExtReal> slice(m);
  for (const auto& Yk : cert.Y) {
    for (std::size_t p = 0; p < Yk.size() / m; ++p) {
      for (std::size_t i = 0; i < m; ++i) slice[i] = Yk[p * m + i];
      cert.slice_rho = std::max(cert.slice_rho, std::abs(rho(slice, spec).value()));
      if (loss) {
        double g = 0.0;
        for (std::size_t i = 0; i < m; ++i) g += (*mu)[i] * (*loss)(Yk[p * m + i]);
        cert.slice_loss = std::max(*cert.slice_loss, std::abs(g - 1.0));
      }
    }
  }
  cert.ok = cert.residual <= 1e-8 && cert.slice_rho <= 1e-7;
  return cert;
}

ExtReal control_value_transport(const RealFieldN& f, const Dist& mu, std::span<const ExtReal> cost) {
  const std::size_t m = mu.size();
  if (f.space().size() != m) throw InputError("control_value_transport: f and mu live on different spaces");
  if (cost.size() != m * m) throw InputError("control_value_transport: cost must be m x m");
  const int n = f.n();
  dense_size(m, 2 * n);
  const RealFieldN dense = f.to_dense();

  // V_k indexed by (x-history, y-history): x_index * m^k + y_index
  std::size_t mk = ipow(m, n);
  std::vector<ExtReal> V(mk * mk);
  for (std::size_t xi = 0; xi < mk; ++xi) {
    for (std::size_t yi = 0; yi < mk; ++yi) V[xi * mk + yi] = dense.values()[yi];
  }
  for (int k = n; k >= 1; --k) {
    const std::size_t mp = mk / m;
    std::vector<ExtReal> W(mp * mp);
    for (std::size_t xp = 0; xp < mp; ++xp) {
      for (std::size_t yp = 0; yp < mp; ++yp) {
        ExtReal acc(0.0);
        for (std::size_t x = 0; x < m; ++x) {
          if (mu[x] == 0.0) continue;
          ExtReal best = ExtReal::neg_inf();
          for (std::size_t y = 0; y < m; ++y) {
            best = max(best, V[(xp * m + x) * mk + (yp * m + y)] - cost[x * m + y]);
          }
          acc += weighted(mu[x], best);
        }
        W[xp * mp + yp] = acc;
      }
    }
    V = std::move(W);
    mk = mp;
  }
  return V.front();
}

std::pair<double, std::vector<double>> coupling_target(const SimplexFn& F, const Dist& mu,
                                                       std::span<const ExtReal> cost) {
  const std::size_t m = mu.size();
  if (cost.size() != m * m) throw InputError("coupling_target: cost must be m x m");
  std::vector<std::size_t> rows;  // rows with positive mass
  for (std::size_t x = 0; x < m; ++x) {
    if (mu[x] > 0.0) rows.push_back(x);
  }
  const int res = m <= 2 ? 200 : (m == 3 ? 10 : 3);
  std::vector<std::vector<double>> row_grid;
  for_each_simplex_grid(m, res, [&](std::span<const double> w) { row_grid.emplace_back(w.begin(), w.end()); });

  std::vector<double> K(m * m, 0.0);
  for (std::size_t x = 0; x < m; ++x) K[x * m + x] = 1.0;
  std::vector<double> nu(m);
  auto value = [&](std::span<const double> k) {
    std::fill(nu.begin(), nu.end(), 0.0);
    double c = 0.0;
    for (std::size_t x : rows) {
      for (std::size_t y = 0; y < m; ++y) {
        const double pi = mu[x] * k[x * m + y];
        if (pi <= 0.0) continue;
        if (!cost[x * m + y].is_finite()) return kNegInf;
        nu[y] += pi;
        c += pi * cost[x * m + y].value();
      }
    }
    return F(nu) - c;
  };

  double best = kNegInf;
  std::vector<double> best_k = K;
  std::vector<std::size_t> odo(rows.size(), 0);
  for (;;) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::copy(row_grid[odo[r]].begin(), row_grid[odo[r]].end(), K.begin() + static_cast<std::ptrdiff_t>(rows[r] * m));
    }
    const double v = value(K);
    if (v > best) {
      best = v;
      best_k = K;
    }
    std::size_t pos = 0;
    while (pos < rows.size() && ++odo[pos] == row_grid.size()) odo[pos++] = 0;
    if (pos == rows.size()) break;
  }

  // pairwise transfers inside each kernel row with shrinking steps
  K = best_k;
  std::vector<double> trial;
  int evals = 0;
  for (double h = 1.0 / res; h >= 1e-12 && evals < 2000000;) {
    bool improved = false;
    for (std::size_t x : rows) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          if (i == j || K[x * m + j] <= 0.0) continue;
          trial = K;
          const double t = std::min(h, trial[x * m + j]);
          trial[x * m + i] += t;
          trial[x * m + j] -= t;
          const double v = value(trial);
          ++evals;
          if (v > best) {
            best = v;
            K = trial;
            improved = true;
          }
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  std::fill(nu.begin(), nu.end(), 0.0);
  for (std::size_t x : rows) {
    for (std::size_t y = 0; y < m; ++y) nu[y] += mu[x] * K[x * m + y];
  }
  return {best, nu};
}

SanovRun transport_longrun(const SimplexFn& F, const Dist& mu, std::span<const ExtReal> cost,
                           const std::vector<int>& schedule, const SanovOptions& opts) {
  const auto spec = AlphaSpec::transport(mu, std::vector<ExtReal>(cost.begin(), cost.end()));
  SanovRun run = sanov_limit(F, spec, schedule, opts);
  run.coupling_target = coupling_target(F, mu, cost).first;
  return run;
}

}  // namespace sanov
