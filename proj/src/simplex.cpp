#include "sanov/simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "sanov/errors.hpp"

namespace sanov {

void project_to_simplex(std::span<double> v) {
  const std::size_t n = v.size();
  if (n == 0) return;
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cumsum += u[i];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(x - theta, 0.0);
}

MinNormResult closest_hull_point(std::span<const std::vector<double>> generators, std::span<const double> target) {
  const std::size_t k = generators.size();
  if (k == 0) throw InputError("closest_hull_point: no generators");
  const std::size_t d = target.size();
  Eigen::MatrixXd P(d, k);
  for (std::size_t j = 0; j < k; ++j) {
    if (generators[j].size() != d) throw InputError("closest_hull_point: dimension mismatch");
    for (std::size_t i = 0; i < d; ++i) P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = generators[j][i] - target[i];
  }

  constexpr double kZ1 = 1e-14;  // optimality
  constexpr double kZ2 = 1e-12;  // positivity of affine weights
  const double scale = std::max(1.0, P.colwise().squaredNorm().maxCoeff());

  Eigen::Index j0 = 0;
  P.colwise().squaredNorm().minCoeff(&j0);
  std::vector<Eigen::Index> S{j0};
  std::vector<double> w{1.0};
  Eigen::VectorXd x = P.col(j0);

  auto rebuild_x = [&]() {
    x.setZero(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < S.size(); ++i) x += w[i] * P.col(S[i]);
  };

  for (int major = 0; major < 1000; ++major) {
    const Eigen::VectorXd dots = P.transpose() * x;
    Eigen::Index j = 0;
    dots.minCoeff(&j);
    if (x.squaredNorm() - dots(j) <= kZ1 * scale) break;
    if (std::find(S.begin(), S.end(), j) != S.end()) break;
    S.push_back(j);
    w.push_back(0.0);

    for (int minor = 0; minor < 1000; ++minor) {
      const auto s = static_cast<Eigen::Index>(S.size());
      Eigen::MatrixXd PS(static_cast<Eigen::Index>(d), s);
      for (Eigen::Index i = 0; i < s; ++i) PS.col(i) = P.col(S[static_cast<std::size_t>(i)]);
      // Affine minimizer: (G + 11^T) v ∝ 1, normalized to sum one.
      Eigen::MatrixXd G = PS.transpose() * PS + Eigen::MatrixXd::Ones(s, s);
      Eigen::VectorXd v = G.ldlt().solve(Eigen::VectorXd::Ones(s));
      v /= v.sum();
      if (v.minCoeff() > kZ2) {
        for (Eigen::Index i = 0; i < s; ++i) w[static_cast<std::size_t>(i)] = v(i);
        rebuild_x();
        break;
      }
      double theta = 1.0;
      for (Eigen::Index i = 0; i < s; ++i) {
        const double wi = w[static_cast<std::size_t>(i)];
        if (v(i) <= kZ2 && wi - v(i) > 0.0) theta = std::min(theta, wi / (wi - v(i)));
      }
      std::vector<Eigen::Index> S2;
      std::vector<double> w2;
      for (Eigen::Index i = 0; i < s; ++i) {
        const double wi = (1.0 - theta) * w[static_cast<std::size_t>(i)] + theta * v(i);
        if (wi > kZ2) {
          S2.push_back(S[static_cast<std::size_t>(i)]);
          w2.push_back(wi);
        }
      }
      if (S2.empty()) {  // numerical corner: keep the best single point
        S2.push_back(S.back());
        w2.push_back(1.0);
      }
      const double total = std::accumulate(w2.begin(), w2.end(), 0.0);
      for (double& wi : w2) wi /= total;
      S = std::move(S2);
      w = std::move(w2);
      rebuild_x();
    }
  }

  MinNormResult out;
  out.weights.assign(k, 0.0);
  for (std::size_t i = 0; i < S.size(); ++i) out.weights[static_cast<std::size_t>(S[i])] += w[i];
  out.point.assign(d, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < d; ++i) out.point[i] += out.weights[j] * generators[j][i];
  }
  double dist2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) dist2 += (out.point[i] - target[i]) * (out.point[i] - target[i]);
  out.distance = std::sqrt(dist2);
  return out;
}

void for_each_simplex_grid(std::size_t m, int resolution, const std::function<void(std::span<const double>)>& visit) {
  if (m == 0 || resolution < 1) throw InputError("for_each_simplex_grid: need m >= 1 and resolution >= 1");
  std::vector<int> c(m, 0);
  std::vector<double> x(m, 0.0);
  const double inv = 1.0 / resolution;
  auto rec = [&](auto&& self, std::size_t pos, int remaining) -> void {
    if (pos + 1 == m) {
      c[pos] = remaining;
      for (std::size_t i = 0; i < m; ++i) x[i] = c[i] * inv;
      visit(x);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      c[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  rec(rec, 0, resolution);
}

double simplex_compass_ascent(const std::function<double(std::span<const double>)>& objective, std::vector<double>& x,
                              double initial_step, double min_step, int max_evals) {
  const std::size_t m = x.size();
  double best = objective(x);
  int evals = 1;
  double h = initial_step;
  std::vector<double> y(m);
  while (h >= min_step && evals < max_evals) {
    bool improved = false;
    for (std::size_t i = 0; i < m && evals < max_evals; ++i) {
      for (std::size_t j = 0; j < m && evals < max_evals; ++j) {
        if (i == j || x[j] <= 0.0) continue;
        const double t = std::min(h, x[j]);
        y = x;
        y[i] += t;
        y[j] -= t;
        const double fy = objective(y);
        ++evals;
        if (fy > best) {
          best = fy;
          x = y;
          improved = true;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return best;
}

}  // namespace sanov
