#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sanov/alpha.hpp"
#include "sanov/space.hpp"

namespace sanov {

/// Value fields of the backward recursion: levels[k] holds g_k on E^k
/// (m^k entries, row-major), so levels[n] = f and levels[0] = {rho_n(f)}.
struct DPTrace {
  int n = 0;
  std::size_t m = 0;
  std::vector<std::vector<ExtReal>> levels;

  /// g_k as a field (k >= 1).
  RealFieldN field(const FiniteSpace& space, int k) const;
};

struct DPResult {
  ExtReal value;
  std::optional<DPTrace> trace;
};

/// rho_n(f) by g_{k-1}(x_1..x_{k-1}) = rho(g_k(x_1..x_{k-1}, .)).
/// Slices within a stage are evaluated on up to `threads` workers.
DPResult rho_n_dense(const RealFieldN& f, const AlphaSpec& spec, bool keep_trace = false, int threads = 1);

/// The law on E^n built from the slice maximizers of a trace; it attains rho_n(f).
ProductDist greedy_optimizer(const DPTrace& trace, const AlphaSpec& spec);

/// rho_n(f) for a permutation-invariant f, by backward recursion over the
/// occupancy vector of the consumed prefix. Dense inputs are accepted only if symmetric.
ExtReal rho_n_symmetric(const RealFieldN& f, const AlphaSpec& spec, int threads = 1);

/// A function on the probability simplex.
using SimplexFn = std::function<double(std::span<const double>)>;

struct SanovPoint {
  int n;
  double v_n;   // (1/n) rho_n(n F(L_n))
  double gap;   // v_n - target
};

struct SanovRun {
  std::string spec;
  std::vector<SanovPoint> points;
  double target = 0.0;                 // sup_nu (F(nu) - alpha(nu))
  std::vector<double> target_argmax;
  std::optional<double> coupling_target;  // transport runs: sup over couplings with first marginal mu
};

struct SanovOptions {
  int grid_resolution = 0;  // 0 picks a resolution from m (step <= 1e-2)
  int threads = 1;
};

/// v_n over the schedule and the variational target.
SanovRun sanov_limit(const SimplexFn& F, const AlphaSpec& spec, const std::vector<int>& schedule,
                     const SanovOptions& opts = {});

/// sup_nu (F(nu) - alpha(nu)) by a simplex grid plus pairwise-transfer ascent
/// (over hull weights for SetIndicator specs).
std::pair<double, std::vector<double>> variational_target(const SimplexFn& F, const AlphaSpec& spec,
                                                          int grid_resolution = 0);

/// max over grid nu of E_{nu^n}[F(L_n)] - alpha(nu), a finite-n lower bound for v_n.
double sanov_lower_bound(const SimplexFn& F, const AlphaSpec& spec, int n, int grid_resolution);

struct SuperhedgeCert {
  double y = 0.0;
  std::vector<std::vector<double>> Y;  // Y[k-1] on E^k
  double residual = 0.0;               // max |f - y - sum_k Y_k|
  double slice_rho = 0.0;              // max |rho(Y_k(prefix, .))|
  std::optional<double> slice_loss;    // shortfall specs: max |int l(Y_k) d mu - 1|
  bool ok = false;                     // residual <= 1e-8 and slice_rho <= 1e-7
};

/// y = rho_n(f) and increments Y_k = g_k - g_{k-1} from the trace.
SuperhedgeCert superhedge(const RealFieldN& f, const AlphaSpec& spec);

/// sup over adapted controls of E[f(Y_1..Y_n) - sum_i c(X_i, Y_i)], X_i iid mu,
/// by backward induction over full (x, y) histories.
ExtReal control_value_transport(const RealFieldN& f, const Dist& mu, std::span<const ExtReal> cost);

/// sup over couplings pi with first marginal mu of F(pi(E x .)) - int c d pi.
std::pair<double, std::vector<double>> coupling_target(const SimplexFn& F, const Dist& mu,
                                                       std::span<const ExtReal> cost);

/// sanov_limit under the transport spec, with the coupling form of the target as well.
SanovRun transport_longrun(const SimplexFn& F, const Dist& mu, std::span<const ExtReal> cost,
                           const std::vector<int>& schedule, const SanovOptions& opts = {});

}  // namespace sanov
