#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sanov/ext_real.hpp"

namespace sanov {

/// Largest number of entries a dense tensor over E^n may have.
inline constexpr std::size_t kDenseCap = std::size_t{1} << 24;

/// Tolerance within which input weights are renormalized instead of rejected.
inline constexpr double kNormalizeTol = 1e-9;

/// A finite state space E = {0, ..., m-1} with display labels.
/// Copies share the label storage.
class FiniteSpace {
 public:
  explicit FiniteSpace(std::size_t size);
  explicit FiniteSpace(std::vector<std::string> labels);

  std::size_t size() const { return labels_->size(); }
  const std::vector<std::string>& labels() const { return *labels_; }
  std::optional<std::size_t> index_of(std::string_view label) const;

  friend bool operator==(const FiniteSpace& a, const FiniteSpace& b) {
    return a.labels_ == b.labels_ || *a.labels_ == *b.labels_;
  }

 private:
  std::shared_ptr<const std::vector<std::string>> labels_;
};

/// Probability vector on a finite space.
class Dist {
 public:
  /// Validates nonnegativity; renormalizes when the sum is within kNormalizeTol of one.
  Dist(FiniteSpace space, std::vector<double> weights);

  static Dist uniform(const FiniteSpace& space);
  static Dist point_mass(const FiniteSpace& space, std::size_t i);

  const FiniteSpace& space() const { return space_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }

  /// True when every atom charged by *this is charged by `other`.
  bool absolutely_continuous_wrt(const Dist& other) const;

 private:
  FiniteSpace space_;
  std::vector<double> weights_;
};

/// m^n, throwing CapacityError above kDenseCap.
std::size_t dense_size(std::size_t m, int n);

/// Row-major multi-index helpers for E^n: x_1 is the most significant digit, so
/// the m entries sharing a prefix (x_1..x_{n-1}) are contiguous.
std::size_t encode_index(std::span<const std::size_t> x, std::size_t m);
std::vector<std::size_t> decode_index(std::size_t index, std::size_t m, int n);

/// Probability tensor on E^n.
class ProductDist {
 public:
  ProductDist(FiniteSpace base, int n, std::vector<double> tensor);

  /// mu^n.
  static ProductDist iid(const Dist& mu, int n);

  int n() const { return n_; }
  const FiniteSpace& base_space() const { return base_; }
  std::span<const double> tensor() const { return tensor_; }
  double at(std::span<const std::size_t> x) const { return tensor_[encode_index(x, base_.size())]; }

 private:
  FiniteSpace base_;
  int n_;
  std::vector<double> tensor_;
};

/// Conditional law nu_{k-1,k}: a Dist for every prefix in E^{k-1}, stored as rows.
class Kernel {
 public:
  Kernel(int stage, FiniteSpace space, std::vector<double> rows);

  /// The kernel mapping every prefix to the same `row`.
  static Kernel constant(int stage, const Dist& row);

  int stage() const { return stage_; }
  const FiniteSpace& space() const { return space_; }
  std::size_t num_prefixes() const { return rows_.size() / space_.size(); }
  std::span<const double> row(std::size_t prefix) const {
    return std::span<const double>(rows_).subspan(prefix * space_.size(), space_.size());
  }
  Dist at(std::size_t prefix) const;

 private:
  int stage_;
  FiniteSpace space_;
  std::vector<double> rows_;
};

struct Disintegration {
  Dist first;                   // nu_{0,1}
  std::vector<Kernel> kernels;  // nu_{k-1,k}, k = 2..n
};

/// Marginal masses of all prefixes: level k (0..n) holds m^k entries.
std::vector<std::vector<double>> prefix_marginals(const ProductDist& nu);

/// First marginal and conditional kernels. Zero-probability prefixes map to the uniform law.
Disintegration disintegrate(const ProductDist& nu);

/// Rebuilds the joint law from its first marginal and kernels.
ProductDist compose(const Dist& first, std::span<const Kernel> kernels);

/// Empirical measure (1/n) sum delta_{x_i}.
Dist empirical_measure(const FiniteSpace& space, std::span<const std::size_t> x);

/// Compositions of `total` into m nonnegative parts, ordered with the first
/// coordinate descending (then recursively on the remainder).
class CompositionIndex {
 public:
  CompositionIndex(int total, std::size_t m);

  int total() const { return total_; }
  std::size_t parts() const { return m_; }
  std::size_t size() const { return count_; }
  std::span<const int> counts(std::size_t rank) const {
    return std::span<const int>(flat_).subspan(rank * m_, m_);
  }
  std::size_t rank(std::span<const int> counts) const;

  /// Number of compositions of t into r parts.
  static std::uint64_t count_compositions(int t, std::size_t r);

 private:
  int total_;
  std::size_t m_;
  std::size_t count_;
  std::vector<int> flat_;
  std::vector<std::vector<std::uint64_t>> table_;  // table_[r][t] = compositions of t into r parts
};

struct TypeClass {
  std::vector<int> counts;
  double multiplicity;      // multinomial coefficient (floating point)
  double log_multiplicity;  // exact-ish log for large n
};

/// All occupancy vectors of n samples over m states with their multiplicities.
std::vector<TypeClass> type_classes(int n, std::size_t m);

/// log of the multinomial coefficient n! / prod c_i!.
double log_multinomial(std::span<const int> counts);

/// Real-valued function on E^n stored densely or by type class.
class RealFieldN {
 public:
  enum class Kind { Dense, Symmetric };

  static RealFieldN dense(FiniteSpace space, int n, std::vector<ExtReal> values);
  /// One value per composition of n, in CompositionIndex order.
  static RealFieldN symmetric(FiniteSpace space, int n, std::vector<ExtReal> per_class);
  /// n F(L_n) as a symmetric field.
  static RealFieldN from_empirical(FiniteSpace space, int n,
                                   const std::function<ExtReal(std::span<const double>)>& F);

  Kind kind() const { return kind_; }
  bool is_dense() const { return kind_ == Kind::Dense; }
  int n() const { return n_; }
  const FiniteSpace& space() const { return space_; }
  std::span<const ExtReal> values() const { return values_; }

  ExtReal at(std::span<const std::size_t> x) const;
  ExtReal at_counts(std::span<const int> counts) const;

  RealFieldN to_dense() const;
  /// Symmetric form if the dense values are permutation invariant within `tol`.
  std::optional<RealFieldN> to_symmetric(double tol = 1e-12) const;

 private:
  RealFieldN(Kind kind, FiniteSpace space, int n, std::vector<ExtReal> values);
  Kind kind_;
  FiniteSpace space_;
  int n_;
  std::vector<ExtReal> values_;
  std::shared_ptr<const CompositionIndex> index_;
};

}  // namespace sanov
