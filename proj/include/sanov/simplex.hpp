#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sanov {

/// Euclidean projection of `v` onto the probability simplex, in place.
void project_to_simplex(std::span<double> v);

struct MinNormResult {
  std::vector<double> weights;  // convex weights over the generators
  std::vector<double> point;    // sum_j weights[j] * generators[j]
  double distance = 0.0;        // || point - target ||
};

/// Closest point of conv(generators) to `target` (Wolfe's minimum-norm-point
/// algorithm). All generators and the target share one dimension.
MinNormResult closest_hull_point(std::span<const std::vector<double>> generators, std::span<const double> target);

/// Calls `visit` with every grid point (c_1, ..., c_m) / resolution of the simplex.
void for_each_simplex_grid(std::size_t m, int resolution, const std::function<void(std::span<const double>)>& visit);

/// Maximizes a function on the simplex by pairwise mass transfers with
/// shrinking steps (compass search restricted to the simplex). Returns the
/// best value and updates `x` in place. Suitable for nonsmooth concave objectives.
double simplex_compass_ascent(const std::function<double(std::span<const double>)>& objective, std::vector<double>& x,
                              double initial_step = 1e-2, double min_step = 1e-12, int max_evals = 200000);

}  // namespace sanov
