#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sanov/ext_real.hpp"

namespace sanov {

struct TransportPlan {
  ExtReal cost;                  // +inf when every coupling charges an infinite-cost cell
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> flow;      // rows x cols, row-major
  std::vector<double> row_potential;  // u_i (finite-cost part)
  std::vector<double> col_potential;  // v_j (finite-cost part)
  int pivots = 0;
};

/// Exact transportation problem min sum c_ij pi_ij over couplings of
/// `supply` (rows) and `demand` (cols), by the transportation simplex:
/// northwest-corner start, MODI potentials, Bland's rule.
///
/// Infinite costs are handled lexicographically: the solver first minimizes
/// the mass placed on infinite cells, then the finite cost. Degenerate bases
/// keep zero-flow basic cells so the basis is always a spanning tree.
TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                              std::span<const ExtReal> cost);

}  // namespace sanov
