#include "sanov/ext_real.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace sanov {

std::string ExtReal::to_string() const {
  if (is_pos_inf()) return "inf";
  if (is_neg_inf()) return "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v_;
  return os.str();
}

ExtReal integrate(std::span<const ExtReal> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw InputError("integrate: size mismatch");
  // Accumulate the finite part separately so a single +inf/-inf short-circuits.
  bool has_pos = false;
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] == 0.0) continue;
    if (values[i].is_neg_inf()) return ExtReal::neg_inf();
    if (values[i].is_pos_inf()) {
      has_pos = true;
      continue;
    }
    acc += weights[i] * values[i].value();
  }
  return has_pos ? ExtReal::pos_inf() : ExtReal(acc);
}

ExtReal parse_ext_real(const std::string& text) {
  std::string t;
  t.reserve(text.size());
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (t == "inf" || t == "+inf" || t == "infinity" || t == "+infinity") return ExtReal::pos_inf();
  if (t == "-inf" || t == "-infinity") return ExtReal::neg_inf();
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || std::isnan(v)) {
    throw InputError("not a number: '" + text + "'");
  }
  return ExtReal(v);
}

}  // namespace sanov
