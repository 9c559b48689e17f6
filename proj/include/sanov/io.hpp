#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sanov/alpha.hpp"
#include "sanov/cramer.hpp"
#include "sanov/dp.hpp"
#include "sanov/errors.hpp"
#include "sanov/mc.hpp"
#include "sanov/rho.hpp"

namespace sanov::io {

using nlohmann::json;

/// A config error located by a JSON pointer.
class ConfigError : public InputError {
 public:
  ConfigError(const std::string& pointer, const std::string& what)
      : InputError(pointer + ": " + what), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

/// Strict reader over a JSON object: every key must be consumed before finish().
class Reader {
 public:
  Reader(const json& j, std::string pointer);

  const std::string& pointer() const { return pointer_; }
  std::string child(std::string_view key) const { return pointer_ + "/" + std::string(key); }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key);
  Reader object(const std::string& key);
  double number(const std::string& key);
  double number_or(const std::string& key, double fallback);
  ExtReal ext(const std::string& key);
  int integer(const std::string& key);
  int integer_or(const std::string& key, int fallback);
  std::uint64_t u64_or(const std::string& key, std::uint64_t fallback);
  bool boolean_or(const std::string& key, bool fallback);
  std::string string(const std::string& key);
  std::vector<double> numbers(const std::string& key);
  std::vector<ExtReal> ext_numbers(const std::string& key);
  std::vector<int> integers(const std::string& key);

  /// Throws ConfigError naming the first key that was never read.
  void finish() const;

 private:
  const json& j_;
  std::string pointer_;
  std::set<std::string> seen_;
};

double as_number(const json& j, const std::string& pointer);
ExtReal as_ext(const json& j, const std::string& pointer);

FiniteSpace parse_space(const json& j, const std::string& pointer);
/// A probability vector, or the string "uniform".
Dist parse_dist(const FiniteSpace& space, const json& j, const std::string& pointer);
LossFn parse_loss(Reader r);
AlphaSpec parse_spec(Reader r, const FiniteSpace& space);
/// m x m matrix of numbers or "inf" strings, row-major.
std::vector<ExtReal> parse_cost(const json& j, std::size_t m, const std::string& pointer);
SimplexFn parse_simplex_fn(Reader r, std::size_t m);
SampleLaw parse_law(Reader r);
/// An explicit list, or {"lo", "hi", "points"}.
std::vector<double> parse_grid(const json& j, const std::string& pointer);
SaaLoss parse_saa_loss(Reader r);
GrowthFn parse_growth(Reader r);

/// Numbers stay numbers; infinities become "inf" / "-inf".
json to_json(ExtReal x);
json to_json(const Dist& d);
json to_json(const RhoResult& r);
json to_json(const SanovRun& run);
json to_json(const SuperhedgeCert& cert);
json to_json(const TailEstimate& e);
json to_json(const RateFit& f);
json to_json(const MannKendall& mk);

/// Shortest round-trip decimal form.
std::string format_number(double x);
std::string format_number(ExtReal x);

/// CSV with a header row; cells are preformatted.
std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);
/// Columns n, r, p_hat, lo, hi, bound.
std::string tail_csv(const std::vector<TailEstimate>& estimates, const std::vector<double>& bounds);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t h);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace sanov::io
