#include "sanov/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "sanov/errors.hpp"

namespace sanov {

namespace {

// Cost split into (infinite-cell indicator, finite cost), compared lexicographically.
struct LexCost {
  double inf = 0.0;
  double fin = 0.0;
  LexCost operator-(const LexCost& o) const { return {inf - o.inf, fin - o.fin}; }
  LexCost operator+(const LexCost& o) const { return {inf + o.inf, fin + o.fin}; }
};

struct Cell {
  std::size_t i;
  std::size_t j;
};

}  // namespace

TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                              std::span<const ExtReal> cost) {
  const std::size_t R = supply.size();
  const std::size_t C = demand.size();
  if (R == 0 || C == 0) throw InputError("solve_transport: empty marginals");
  if (cost.size() != R * C) throw InputError("solve_transport: cost matrix has wrong size");
  for (const ExtReal& c : cost) {
    if (c.is_neg_inf() || c < ExtReal(0.0)) throw InputError("solve_transport: costs must be >= 0");
  }

  std::vector<LexCost> c(R * C);
  double cmax = 0.0;
  for (std::size_t k = 0; k < R * C; ++k) {
    if (cost[k].is_pos_inf()) {
      c[k] = {1.0, 0.0};
    } else {
      c[k] = {0.0, cost[k].value()};
      cmax = std::max(cmax, cost[k].value());
    }
  }
  const double tol = 1e-12 * (1.0 + cmax);

  // Northwest-corner basis: R + C - 1 cells forming a spanning tree.
  std::vector<double> s(supply.begin(), supply.end());
  std::vector<double> d(demand.begin(), demand.end());
  std::vector<double> flow(R * C, 0.0);
  std::vector<char> basic(R * C, 0);
  {
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < R && j < C) {
      if (i == R - 1 && j == C - 1) {
        flow[i * C + j] = std::max(0.0, std::min(s[i], d[j]));
        basic[i * C + j] = 1;
        break;
      }
      if (j == C - 1 || (i < R - 1 && s[i] <= d[j])) {
        const double x = s[i];
        flow[i * C + j] = std::max(0.0, x);
        basic[i * C + j] = 1;
        d[j] -= x;
        s[i] = 0.0;
        ++i;
      } else {
        const double x = d[j];
        flow[i * C + j] = std::max(0.0, x);
        basic[i * C + j] = 1;
        s[i] -= x;
        d[j] = 0.0;
        ++j;
      }
    }
  }

  std::vector<LexCost> u(R);
  std::vector<LexCost> v(C);
  std::vector<std::vector<std::size_t>> adj(R + C);  // node ids: rows 0..R-1, cols R..R+C-1

  auto rebuild_adjacency = [&]() {
    for (auto& a : adj) a.clear();
    for (std::size_t i = 0; i < R; ++i) {
      for (std::size_t j = 0; j < C; ++j) {
        if (basic[i * C + j]) {
          adj[i].push_back(R + j);
          adj[R + j].push_back(i);
        }
      }
    }
  };

  auto compute_potentials = [&]() {
    std::vector<char> known(R + C, 0);
    std::deque<std::size_t> queue{0};
    known[0] = 1;
    u[0] = {};
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      for (std::size_t nb : adj[node]) {
        if (known[nb]) continue;
        known[nb] = 1;
        if (node < R) {
          v[nb - R] = c[node * C + (nb - R)] - u[node];
        } else {
          u[nb] = c[nb * C + (node - R)] - v[node - R];
        }
        queue.push_back(nb);
      }
    }
  };

  // Path between two nodes in the basis tree (inclusive), as a node sequence.
  auto tree_path = [&](std::size_t from, std::size_t to) {
    std::vector<std::size_t> parent(R + C, R + C);
    std::deque<std::size_t> queue{from};
    parent[from] = from;
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      if (node == to) break;
      for (std::size_t nb : adj[node]) {
        if (parent[nb] == R + C) {
          parent[nb] = node;
          queue.push_back(nb);
        }
      }
    }
    if (parent[to] == R + C) throw NumericError("solve_transport: basis is not a spanning tree");
    std::vector<std::size_t> path{to};
    while (path.back() != from) path.push_back(parent[path.back()]);
    std::reverse(path.begin(), path.end());
    return path;
  };

  TransportPlan plan;
  plan.rows = R;
  plan.cols = C;
  const int max_pivots = 1000 * static_cast<int>(R + C) + 1000;
  for (;;) {
    rebuild_adjacency();
    compute_potentials();

    // Bland's rule: first improving cell in index order.
    std::size_t enter = R * C;
    for (std::size_t k = 0; k < R * C && enter == R * C; ++k) {
      if (basic[k]) continue;
      const LexCost red = c[k] - u[k / C] - v[k % C];
      if (red.inf < -0.5 || (std::abs(red.inf) < 0.5 && red.fin < -tol)) enter = k;
    }
    if (enter == R * C) break;
    if (++plan.pivots > max_pivots) throw NumericError("solve_transport: pivot limit reached");

    const std::size_t ei = enter / C;
    const std::size_t ej = enter % C;
    // cycle: entering cell (+), then the tree path col ej -> row ei alternating (-, +, ...)
    const auto path = tree_path(R + ej, ei);
    std::vector<std::size_t> minus_cells;
    std::vector<std::size_t> plus_cells{enter};
    for (std::size_t e = 0; e + 1 < path.size(); ++e) {
      const std::size_t a = path[e];
      const std::size_t b = path[e + 1];
      const std::size_t cell = a < R ? a * C + (b - R) : b * C + (a - R);
      (e % 2 == 0 ? minus_cells : plus_cells).push_back(cell);
    }
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t k : minus_cells) theta = std::min(theta, flow[k]);
    std::size_t leave = R * C;
    for (std::size_t k : minus_cells) {
      if (flow[k] == theta && k < leave) leave = k;
    }
    for (std::size_t k : plus_cells) flow[k] += theta;
    for (std::size_t k : minus_cells) flow[k] = std::max(0.0, flow[k] - theta);
    flow[leave] = 0.0;
    basic[leave] = 0;
    basic[enter] = 1;
  }

  double inf_mass = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < R * C; ++k) {
    if (flow[k] <= 0.0) continue;
    if (c[k].inf > 0.5) {
      inf_mass += flow[k];
    } else {
      total += flow[k] * c[k].fin;
    }
  }
  plan.cost = inf_mass > 1e-12 ? ExtReal::pos_inf() : ExtReal(total);
  plan.flow = std::move(flow);
  plan.row_potential.resize(R);
  plan.col_potential.resize(C);
  for (std::size_t i = 0; i < R; ++i) plan.row_potential[i] = u[i].fin;
  for (std::size_t j = 0; j < C; ++j) plan.col_potential[j] = v[j].fin;
  return plan;
}

}  // namespace sanov
