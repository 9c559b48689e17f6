#include "sanov/space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace sanov {

// ---------------------------------------------------------------------------
// FiniteSpace / Dist

FiniteSpace::FiniteSpace(std::size_t size) {
  if (size == 0) throw InputError("FiniteSpace: size must be >= 1");
  std::vector<std::string> labels(size);
  for (std::size_t i = 0; i < size; ++i) labels[i] = std::to_string(i);
  labels_ = std::make_shared<const std::vector<std::string>>(std::move(labels));
}

FiniteSpace::FiniteSpace(std::vector<std::string> labels) {
  if (labels.empty()) throw InputError("FiniteSpace: size must be >= 1");
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size()) throw InputError("FiniteSpace: labels must be distinct");
  labels_ = std::make_shared<const std::vector<std::string>>(std::move(labels));
}

std::optional<std::size_t> FiniteSpace::index_of(std::string_view label) const {
  const auto& l = *labels_;
  auto it = std::find(l.begin(), l.end(), label);
  if (it == l.end()) return std::nullopt;
  return static_cast<std::size_t>(it - l.begin());
}

namespace {

void normalize_in_place(std::vector<double>& w, const char* what) {
  double sum = 0.0;
  for (double& x : w) {
    if (!std::isfinite(x)) throw InputError(std::string(what) + ": weights must be finite");
    if (x < 0.0) {
      // tolerate signed zeros and rounding dust from upstream arithmetic
      if (x < -1e-15) throw InputError(std::string(what) + ": negative weight");
      x = 0.0;
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kNormalizeTol) {
    throw InputError(std::string(what) + ": weights sum to " + std::to_string(sum) + ", expected 1");
  }
  for (double& x : w) x /= sum;
}

}  // namespace

Dist::Dist(FiniteSpace space, std::vector<double> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
  if (weights_.size() != space_.size()) throw InputError("Dist: weight count does not match space size");
  normalize_in_place(weights_, "Dist");
}

Dist Dist::uniform(const FiniteSpace& space) {
  return Dist(space, std::vector<double>(space.size(), 1.0 / static_cast<double>(space.size())));
}

Dist Dist::point_mass(const FiniteSpace& space, std::size_t i) {
  if (i >= space.size()) throw InputError("point_mass: index out of range");
  std::vector<double> w(space.size(), 0.0);
  w[i] = 1.0;
  return Dist(space, std::move(w));
}

bool Dist::absolutely_continuous_wrt(const Dist& other) const {
  if (other.size() != size()) throw InputError("absolute continuity: space mismatch");
  for (std::size_t i = 0; i < size(); ++i) {
    if (weights_[i] > 0.0 && other.weights_[i] == 0.0) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Tensors

std::size_t dense_size(std::size_t m, int n) {
  if (n < 0) throw InputError("dense_size: negative horizon");
  std::size_t s = 1;
  for (int k = 0; k < n; ++k) {
    if (s > kDenseCap / m) {
      throw CapacityError("dense tensor of size " + std::to_string(m) + "^" + std::to_string(n) +
                          " exceeds the 2^24 cap; use the symmetric (type-class) path");
    }
    s *= m;
  }
  return s;
}

std::size_t encode_index(std::span<const std::size_t> x, std::size_t m) {
  std::size_t idx = 0;
  for (std::size_t xi : x) {
    if (xi >= m) throw InputError("index " + std::to_string(xi) + " out of range for space of size " + std::to_string(m));
    idx = idx * m + xi;
  }
  return idx;
}

std::vector<std::size_t> decode_index(std::size_t index, std::size_t m, int n) {
  std::vector<std::size_t> x(static_cast<std::size_t>(n));
  for (int k = n - 1; k >= 0; --k) {
    x[static_cast<std::size_t>(k)] = index % m;
    index /= m;
  }
  return x;
}

ProductDist::ProductDist(FiniteSpace base, int n, std::vector<double> tensor)
    : base_(std::move(base)), n_(n), tensor_(std::move(tensor)) {
  if (n < 1) throw InputError("ProductDist: n must be >= 1");
  if (tensor_.size() != dense_size(base_.size(), n)) throw InputError("ProductDist: tensor has wrong size");
  normalize_in_place(tensor_, "ProductDist");
}

ProductDist ProductDist::iid(const Dist& mu, int n) {
  const std::size_t m = mu.size();
  std::vector<double> t(dense_size(m, n), 1.0);
  for (std::size_t idx = 0; idx < t.size(); ++idx) {
    std::size_t r = idx;
    double p = 1.0;
    for (int k = 0; k < n; ++k) {
      p *= mu[r % m];
      r /= m;
    }
    t[idx] = p;
  }
  return ProductDist(mu.space(), n, std::move(t));
}

Kernel::Kernel(int stage, FiniteSpace space, std::vector<double> rows)
    : stage_(stage), space_(std::move(space)), rows_(std::move(rows)) {
  if (stage < 2) throw InputError("Kernel: stage must be >= 2");
  const std::size_t m = space_.size();
  if (rows_.size() != dense_size(m, stage - 1) * m) throw InputError("Kernel: wrong number of rows");
  for (std::size_t p = 0; p < rows_.size() / m; ++p) {
    std::vector<double> r(rows_.begin() + static_cast<std::ptrdiff_t>(p * m),
                          rows_.begin() + static_cast<std::ptrdiff_t>((p + 1) * m));
    normalize_in_place(r, "Kernel row");
    std::copy(r.begin(), r.end(), rows_.begin() + static_cast<std::ptrdiff_t>(p * m));
  }
}

Kernel Kernel::constant(int stage, const Dist& row) {
  const std::size_t prefixes = dense_size(row.size(), stage - 1);
  std::vector<double> rows;
  rows.reserve(prefixes * row.size());
  for (std::size_t p = 0; p < prefixes; ++p) rows.insert(rows.end(), row.weights().begin(), row.weights().end());
  return Kernel(stage, row.space(), std::move(rows));
}

Dist Kernel::at(std::size_t prefix) const {
  auto r = row(prefix);
  return Dist(space_, std::vector<double>(r.begin(), r.end()));
}

std::vector<std::vector<double>> prefix_marginals(const ProductDist& nu) {
  const std::size_t m = nu.base_space().size();
  const int n = nu.n();
  std::vector<std::vector<double>> levels(static_cast<std::size_t>(n) + 1);
  levels[static_cast<std::size_t>(n)].assign(nu.tensor().begin(), nu.tensor().end());
  for (int k = n; k >= 1; --k) {
    const auto& hi = levels[static_cast<std::size_t>(k)];
    auto& lo = levels[static_cast<std::size_t>(k - 1)];
    lo.assign(hi.size() / m, 0.0);
    for (std::size_t p = 0; p < lo.size(); ++p) {
      double s = 0.0;
      for (std::size_t y = 0; y < m; ++y) s += hi[p * m + y];
      lo[p] = s;
    }
  }
  return levels;
}

Disintegration disintegrate(const ProductDist& nu) {
  const std::size_t m = nu.base_space().size();
  const auto levels = prefix_marginals(nu);
  Dist first(nu.base_space(), levels[1]);
  std::vector<Kernel> kernels;
  for (int k = 2; k <= nu.n(); ++k) {
    const auto& joint = levels[static_cast<std::size_t>(k)];
    const auto& prefix = levels[static_cast<std::size_t>(k - 1)];
    std::vector<double> rows(joint.size());
    for (std::size_t p = 0; p < prefix.size(); ++p) {
      for (std::size_t y = 0; y < m; ++y) {
        rows[p * m + y] = prefix[p] > 0.0 ? joint[p * m + y] / prefix[p] : 1.0 / static_cast<double>(m);
      }
    }
    kernels.emplace_back(k, nu.base_space(), std::move(rows));
  }
  return {std::move(first), std::move(kernels)};
}

ProductDist compose(const Dist& first, std::span<const Kernel> kernels) {
  const std::size_t m = first.size();
  std::vector<double> t(first.weights().begin(), first.weights().end());
  int n = 1;
  for (const Kernel& K : kernels) {
    if (K.stage() != n + 1) throw InputError("compose: kernels must be given for stages 2..n in order");
    if (!(K.space() == first.space())) throw InputError("compose: kernel space mismatch");
    std::vector<double> next(t.size() * m);
    for (std::size_t p = 0; p < t.size(); ++p) {
      auto row = K.row(p);
      for (std::size_t y = 0; y < m; ++y) next[p * m + y] = t[p] * row[y];
    }
    t = std::move(next);
    ++n;
  }
  return ProductDist(first.space(), n, std::move(t));
}

Dist empirical_measure(const FiniteSpace& space, std::span<const std::size_t> x) {
  if (x.empty()) throw InputError("empirical_measure: empty sample");
  std::vector<double> w(space.size(), 0.0);
  for (std::size_t xi : x) {
    if (xi >= space.size()) throw InputError("empirical_measure: index " + std::to_string(xi) + " out of range");
    w[xi] += 1.0;
  }
  for (double& v : w) v /= static_cast<double>(x.size());
  return Dist(space, std::move(w));
}

// ---------------------------------------------------------------------------
// Type classes

std::uint64_t CompositionIndex::count_compositions(int t, std::size_t r) {
  if (r == 0) return t == 0 ? 1 : 0;
  // C(t + r - 1, r - 1) computed incrementally; exact while it fits.
  std::uint64_t c = 1;
  for (std::size_t i = 1; i < r; ++i) {
    c = c * (static_cast<std::uint64_t>(t) + i) / i;
  }
  return c;
}

CompositionIndex::CompositionIndex(int total, std::size_t m) : total_(total), m_(m) {
  if (total < 0 || m == 0) throw InputError("CompositionIndex: need total >= 0 and m >= 1");
  table_.assign(m + 1, std::vector<std::uint64_t>(static_cast<std::size_t>(total) + 1, 0));
  for (std::size_t r = 0; r <= m; ++r) {
    for (int t = 0; t <= total; ++t) table_[r][static_cast<std::size_t>(t)] = count_compositions(t, r);
  }
  const std::uint64_t cnt = table_[m][static_cast<std::size_t>(total)];
  if (cnt * m > kDenseCap * 4) throw CapacityError("too many type classes for n=" + std::to_string(total));
  count_ = static_cast<std::size_t>(cnt);
  flat_.reserve(count_ * m);

  std::vector<int> c(m, 0);
  // Depth-first enumeration, first coordinate descending.
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int remaining) {
    if (pos + 1 == m) {
      c[pos] = remaining;
      flat_.insert(flat_.end(), c.begin(), c.end());
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      c[pos] = v;
      rec(pos + 1, remaining - v);
    }
  };
  rec(0, total);
}

std::size_t CompositionIndex::rank(std::span<const int> counts) const {
  if (counts.size() != m_) throw InputError("CompositionIndex::rank: wrong number of parts");
  std::size_t r = 0;
  int remaining = total_;
  for (std::size_t pos = 0; pos + 1 < m_; ++pos) {
    const int c = counts[pos];
    if (c < 0 || c > remaining) throw InputError("CompositionIndex::rank: counts do not sum to total");
    const std::size_t parts_left = m_ - pos - 1;
    // compositions whose value at `pos` exceeds c come first
    for (int v = remaining; v > c; --v) r += static_cast<std::size_t>(table_[parts_left][static_cast<std::size_t>(remaining - v)]);
    remaining -= c;
  }
  if (counts[m_ - 1] != remaining) throw InputError("CompositionIndex::rank: counts do not sum to total");
  return r;
}

double log_multinomial(std::span<const int> counts) {
  int n = 0;
  double s = 0.0;
  for (int c : counts) {
    n += c;
    s -= std::lgamma(static_cast<double>(c) + 1.0);
  }
  return s + std::lgamma(static_cast<double>(n) + 1.0);
}

namespace {

// Multinomial as a product of binomials in long double; relative error ~ n * eps_ld.
long double multinomial_ld(std::span<const int> counts) {
  long double result = 1.0L;
  int remaining = 0;
  for (int c : counts) remaining += c;
  for (int c : counts) {
    // C(remaining, c)
    long double b = 1.0L;
    const int k = std::min(c, remaining - c);
    for (int i = 1; i <= k; ++i) b = b * static_cast<long double>(remaining - k + i) / static_cast<long double>(i);
    result *= b;
    remaining -= c;
  }
  return result;
}

}  // namespace

std::vector<TypeClass> type_classes(int n, std::size_t m) {
  if (n < 1 || m < 1) throw InputError("type_classes: need n >= 1 and m >= 1");
  CompositionIndex idx(n, m);
  std::vector<TypeClass> out;
  out.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    auto c = idx.counts(r);
    TypeClass tc;
    tc.counts.assign(c.begin(), c.end());
    tc.multiplicity = static_cast<double>(multinomial_ld(c));
    tc.log_multiplicity = std::isfinite(tc.multiplicity) && tc.multiplicity > 0 ? std::log(tc.multiplicity)
                                                                                : log_multinomial(c);
    out.push_back(std::move(tc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// RealFieldN

RealFieldN::RealFieldN(Kind kind, FiniteSpace space, int n, std::vector<ExtReal> values)
    : kind_(kind), space_(std::move(space)), n_(n), values_(std::move(values)) {}

RealFieldN RealFieldN::dense(FiniteSpace space, int n, std::vector<ExtReal> values) {
  if (n < 1) throw InputError("RealFieldN: n must be >= 1");
  if (values.size() != dense_size(space.size(), n)) throw InputError("RealFieldN::dense: wrong number of values");
  return RealFieldN(Kind::Dense, std::move(space), n, std::move(values));
}

RealFieldN RealFieldN::symmetric(FiniteSpace space, int n, std::vector<ExtReal> per_class) {
  if (n < 1) throw InputError("RealFieldN: n must be >= 1");
  auto idx = std::make_shared<const CompositionIndex>(n, space.size());
  if (per_class.size() != idx->size()) throw InputError("RealFieldN::symmetric: one value per type class required");
  RealFieldN f(Kind::Symmetric, std::move(space), n, std::move(per_class));
  f.index_ = std::move(idx);
  return f;
}

RealFieldN RealFieldN::from_empirical(FiniteSpace space, int n,
                                      const std::function<ExtReal(std::span<const double>)>& F) {
  CompositionIndex idx(n, space.size());
  std::vector<ExtReal> vals(idx.size());
  std::vector<double> nu(space.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    auto c = idx.counts(r);
    for (std::size_t i = 0; i < c.size(); ++i) nu[i] = static_cast<double>(c[i]) / n;
    vals[r] = weighted(static_cast<double>(n), F(nu));
  }
  return symmetric(std::move(space), n, std::move(vals));
}

ExtReal RealFieldN::at(std::span<const std::size_t> x) const {
  if (x.size() != static_cast<std::size_t>(n_)) throw InputError("RealFieldN::at: wrong arity");
  if (is_dense()) return values_[encode_index(x, space_.size())];
  std::vector<int> c(space_.size(), 0);
  for (std::size_t xi : x) {
    if (xi >= space_.size()) throw InputError("RealFieldN::at: index out of range");
    ++c[xi];
  }
  return values_[index_->rank(c)];
}

ExtReal RealFieldN::at_counts(std::span<const int> counts) const {
  if (is_dense()) throw InputError("RealFieldN::at_counts: field is dense");
  return values_[index_->rank(counts)];
}

RealFieldN RealFieldN::to_dense() const {
  if (is_dense()) return *this;
  const std::size_t m = space_.size();
  const std::size_t total = dense_size(m, n_);
  std::vector<ExtReal> vals(total);
  std::vector<int> c(m);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::fill(c.begin(), c.end(), 0);
    std::size_t r = idx;
    for (int k = 0; k < n_; ++k) {
      ++c[r % m];
      r /= m;
    }
    vals[idx] = values_[index_->rank(c)];
  }
  return dense(space_, n_, std::move(vals));
}

std::optional<RealFieldN> RealFieldN::to_symmetric(double tol) const {
  if (!is_dense()) return *this;
  const std::size_t m = space_.size();
  auto idx = std::make_shared<const CompositionIndex>(n_, m);
  std::vector<ExtReal> per(idx->size());
  std::vector<char> seen(idx->size(), 0);
  std::vector<int> c(m);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    std::fill(c.begin(), c.end(), 0);
    std::size_t r = i;
    for (int k = 0; k < n_; ++k) {
      ++c[r % m];
      r /= m;
    }
    const std::size_t rk = idx->rank(c);
    if (!seen[rk]) {
      per[rk] = values_[i];
      seen[rk] = 1;
      continue;
    }
    const ExtReal a = per[rk];
    const ExtReal b = values_[i];
    if (a.is_finite() && b.is_finite()) {
      if (std::abs(a.value() - b.value()) > tol * (1.0 + std::abs(a.value()))) return std::nullopt;
    } else if (!(a == b)) {
      return std::nullopt;
    }
  }
  RealFieldN f(Kind::Symmetric, space_, n_, std::move(per));
  f.index_ = std::move(idx);
  return f;
}

}  // namespace sanov
