#include "sanov/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sanov::io {
namespace {

std::string kind_of(const json& j) {
  switch (j.type()) {
    case json::value_t::object: return "an object";
    case json::value_t::array: return "an array";
    case json::value_t::string: return "a string";
    case json::value_t::boolean: return "a boolean";
    case json::value_t::null: return "null";
    default: return "a number";
  }
}

const json& require_array(const json& j, const std::string& pointer) {
  if (!j.is_array()) throw ConfigError(pointer, "expected an array, got " + kind_of(j));
  return j;
}

std::vector<double> number_list(const json& j, const std::string& pointer) {
  std::vector<double> out;
  const auto& arr = require_array(j, pointer);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_number(arr[i], pointer + "/" + std::to_string(i)));
  return out;
}

std::vector<Dist> dist_list(const FiniteSpace& space, const json& j, const std::string& pointer) {
  std::vector<Dist> out;
  const auto& arr = require_array(j, pointer);
  if (arr.empty()) throw ConfigError(pointer, "needs at least one distribution");
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(parse_dist(space, arr[i], pointer + "/" + std::to_string(i)));
  return out;
}

// Rewraps library validation errors with the location of the offending value.
template <class F>
auto located(const std::string& pointer, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    throw ConfigError(pointer, e.what());
  }
}

}  // namespace

Reader::Reader(const json& j, std::string pointer) : j_(j), pointer_(std::move(pointer)) {
  if (!j_.is_object()) throw ConfigError(pointer_.empty() ? "/" : pointer_, "expected an object, got " + kind_of(j_));
}

const json& Reader::at(const std::string& key) {
  if (!j_.contains(key)) throw ConfigError(child(key), "missing required key");
  seen_.insert(key);
  return j_.at(key);
}

Reader Reader::object(const std::string& key) { return Reader(at(key), child(key)); }

double Reader::number(const std::string& key) { return as_number(at(key), child(key)); }

double Reader::number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

ExtReal Reader::ext(const std::string& key) { return as_ext(at(key), child(key)); }

int Reader::integer(const std::string& key) {
  const json& v = at(key);
  if (!v.is_number_integer()) throw ConfigError(child(key), "expected an integer, got " + kind_of(v));
  const auto x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw ConfigError(child(key), "integer out of range");
  return static_cast<int>(x);
}

int Reader::integer_or(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

std::uint64_t Reader::u64_or(const std::string& key, std::uint64_t fallback) {
  if (!has(key)) return fallback;
  const json& v = at(key);
  if (!v.is_number_unsigned()) throw ConfigError(child(key), "expected a nonnegative integer, got " + kind_of(v));
  return v.get<std::uint64_t>();
}

bool Reader::boolean_or(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const json& v = at(key);
  if (!v.is_boolean()) throw ConfigError(child(key), "expected a boolean, got " + kind_of(v));
  return v.get<bool>();
}

std::string Reader::string(const std::string& key) {
  const json& v = at(key);
  if (!v.is_string()) throw ConfigError(child(key), "expected a string, got " + kind_of(v));
  return v.get<std::string>();
}

std::vector<double> Reader::numbers(const std::string& key) { return number_list(at(key), child(key)); }

std::vector<ExtReal> Reader::ext_numbers(const std::string& key) {
  std::vector<ExtReal> out;
  const auto& arr = require_array(at(key), child(key));
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_ext(arr[i], child(key) + "/" + std::to_string(i)));
  return out;
}

std::vector<int> Reader::integers(const std::string& key) {
  std::vector<int> out;
  const auto& arr = require_array(at(key), child(key));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number_integer())
      throw ConfigError(child(key) + "/" + std::to_string(i), "expected an integer, got " + kind_of(arr[i]));
    out.push_back(arr[i].get<int>());
  }
  return out;
}

void Reader::finish() const {
  for (auto it = j_.begin(); it != j_.end(); ++it)
    if (!seen_.count(it.key())) throw ConfigError(child(it.key()), "unknown key");
}

double as_number(const json& j, const std::string& pointer) {
  if (!j.is_number()) throw ConfigError(pointer, "expected a number, got " + kind_of(j));
  return j.get<double>();
}

ExtReal as_ext(const json& j, const std::string& pointer) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    try {
      const ExtReal x = parse_ext_real(s);
      if (x.is_finite()) throw ConfigError(pointer, "numbers must not be quoted (only \"inf\" and \"-inf\")");
      return x;
    } catch (const ConfigError&) {
      throw;
    } catch (const InputError&) {
      throw ConfigError(pointer, "expected a number or \"inf\", got \"" + s + "\"");
    }
  }
  return as_number(j, pointer);
}

FiniteSpace parse_space(const json& j, const std::string& pointer) {
  if (j.is_number_integer()) {
    const auto m = j.get<long long>();
    if (m < 1 || m > 64) throw ConfigError(pointer, "space size must be in [1, 64]");
    return FiniteSpace(static_cast<std::size_t>(m));
  }
  std::vector<std::string> labels;
  const auto& arr = require_array(j, pointer);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) throw ConfigError(pointer + "/" + std::to_string(i), "labels must be strings");
    labels.push_back(arr[i].get<std::string>());
  }
  return located(pointer, [&] { return FiniteSpace(std::move(labels)); });
}

Dist parse_dist(const FiniteSpace& space, const json& j, const std::string& pointer) {
  if (j.is_string() && j.get<std::string>() == "uniform") return Dist::uniform(space);
  auto w = number_list(j, pointer);
  if (w.size() != space.size())
    throw ConfigError(pointer, "expected " + std::to_string(space.size()) + " weights, got " + std::to_string(w.size()));
  return located(pointer, [&] { return Dist(space, std::move(w)); });
}

LossFn parse_loss(Reader r) {
  const auto kind = r.string("kind");
  LossFn loss = LossFn::exp();
  if (kind == "exp") {
    loss = LossFn::exp();
  } else if (kind == "power_plus") {
    const double q = r.number("q");
    loss = located(r.child("q"), [&] { return LossFn::power_plus(q); });
  } else if (kind == "piecewise_linear") {
    auto xs = r.numbers("x");
    auto ys = r.numbers("y");
    const double left = r.number("left_limit");
    loss = located(r.pointer(), [&] { return LossFn::piecewise_linear(std::move(xs), std::move(ys), left); });
  } else {
    throw ConfigError(r.child("kind"), "unknown loss '" + kind + "' (expected exp, power_plus or piecewise_linear)");
  }
  r.finish();
  return loss;
}

std::vector<ExtReal> parse_cost(const json& j, std::size_t m, const std::string& pointer) {
  const auto& rows = require_array(j, pointer);
  if (rows.size() != m) throw ConfigError(pointer, "expected " + std::to_string(m) + " rows");
  std::vector<ExtReal> cost;
  for (std::size_t x = 0; x < m; ++x) {
    const std::string rp = pointer + "/" + std::to_string(x);
    const auto& row = require_array(rows[x], rp);
    if (row.size() != m) throw ConfigError(rp, "expected " + std::to_string(m) + " entries");
    for (std::size_t y = 0; y < m; ++y) cost.push_back(as_ext(row[y], rp + "/" + std::to_string(y)));
  }
  return cost;
}

AlphaSpec parse_spec(Reader r, const FiniteSpace& space) {
  const auto kind = r.string("kind");
  auto spec = [&]() -> AlphaSpec {
    if (kind == "relative_entropy") return AlphaSpec::relative_entropy(parse_dist(space, r.at("mu"), r.child("mu")));
    if (kind == "lp_entropy") {
      auto mu = parse_dist(space, r.at("mu"), r.child("mu"));
      const double p = r.number("p");
      return located(r.child("p"), [&] { return AlphaSpec::lp_entropy(std::move(mu), p); });
    }
    if (kind == "shortfall") {
      auto mu = parse_dist(space, r.at("mu"), r.child("mu"));
      return AlphaSpec::shortfall(std::move(mu), parse_loss(r.object("loss")));
    }
    if (kind == "robust") return AlphaSpec::robust(dist_list(space, r.at("generators"), r.child("generators")));
    if (kind == "set_indicator")
      return AlphaSpec::set_indicator(dist_list(space, r.at("generators"), r.child("generators")));
    if (kind == "transport") {
      auto mu = parse_dist(space, r.at("mu"), r.child("mu"));
      auto cost = parse_cost(r.at("cost"), space.size(), r.child("cost"));
      return located(r.child("cost"), [&] { return AlphaSpec::transport(std::move(mu), std::move(cost)); });
    }
    throw ConfigError(r.child("kind"), "unknown spec '" + kind +
                                           "' (expected relative_entropy, lp_entropy, shortfall, robust, "
                                           "set_indicator or transport)");
  }();
  r.finish();
  return spec;
}

SimplexFn parse_simplex_fn(Reader r, std::size_t m) {
  const auto kind = r.string("kind");
  SimplexFn F;
  if (kind == "linear") {
    const auto w = r.numbers("weights");
    if (w.size() != m) throw ConfigError(r.child("weights"), "expected " + std::to_string(m) + " weights");
    F = [w](std::span<const double> nu) {
      double s = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * nu[i];
      return s;
    };
  } else if (kind == "quadratic") {
    const auto c = r.numbers("center");
    if (c.size() != m) throw ConfigError(r.child("center"), "expected " + std::to_string(m) + " entries");
    const double scale = r.number_or("scale", 1.0);
    F = [c, scale](std::span<const double> nu) {
      double s = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) s += (nu[i] - c[i]) * (nu[i] - c[i]);
      return -scale * s;
    };
  } else if (kind == "coordinate_quadratic") {
    const int coord = r.integer("coord");
    if (coord < 0 || static_cast<std::size_t>(coord) >= m) throw ConfigError(r.child("coord"), "coordinate out of range");
    const double c = r.number("center");
    const double scale = r.number_or("scale", 1.0);
    F = [coord, c, scale](std::span<const double> nu) { return -scale * (nu[coord] - c) * (nu[coord] - c); };
  } else if (kind == "constant") {
    const double v = r.number("value");
    F = [v](std::span<const double>) { return v; };
  } else {
    throw ConfigError(r.child("kind"),
                      "unknown F '" + kind + "' (expected linear, quadratic, coordinate_quadratic or constant)");
  }
  r.finish();
  return F;
}

SampleLaw parse_law(Reader r) {
  const auto kind = r.string("kind");
  auto law = [&]() -> SampleLaw {
    if (kind == "pareto") {
      const double a = r.number("a");
      if (r.has("shift")) {
        const double shift = r.number("shift");
        return located(r.pointer(), [&] { return SampleLaw::pareto(a, shift); });
      }
      const bool centered = r.boolean_or("centered", true);
      return located(r.pointer(), [&] { return centered ? SampleLaw::pareto_centered(a) : SampleLaw::pareto(a, 0.0); });
    }
    if (kind == "student_t") {
      const double df = r.number("df");
      return located(r.pointer(), [&] { return SampleLaw::student_t(df); });
    }
    if (kind == "lognormal") {
      const double sigma = r.number("sigma");
      const bool centered = r.boolean_or("centered", true);
      return located(r.pointer(), [&] { return SampleLaw::lognormal(sigma, centered); });
    }
    if (kind == "finite_support" || kind == "empirical") {
      const std::string key = kind == "empirical" ? "samples" : "points";
      const auto& arr = require_array(r.at(key), r.child(key));
      std::vector<std::vector<double>> pts;
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = r.child(key) + "/" + std::to_string(i);
        pts.push_back(arr[i].is_array() ? number_list(arr[i], p) : std::vector<double>{as_number(arr[i], p)});
      }
      if (kind == "empirical") return located(r.pointer(), [&] { return SampleLaw::empirical(std::move(pts)); });
      auto probs = r.numbers("probs");
      return located(r.pointer(), [&] { return SampleLaw::finite_support(std::move(pts), std::move(probs)); });
    }
    throw ConfigError(r.child("kind"), "unknown law '" + kind +
                                           "' (expected pareto, student_t, lognormal, finite_support or empirical)");
  }();
  r.finish();
  return law;
}

std::vector<double> parse_grid(const json& j, const std::string& pointer) {
  if (j.is_array()) {
    auto g = number_list(j, pointer);
    if (g.empty()) throw ConfigError(pointer, "grid must not be empty");
    return g;
  }
  Reader r(j, pointer);
  const double lo = r.number("lo");
  const double hi = r.number("hi");
  const int points = r.integer("points");
  r.finish();
  if (points < 1) throw ConfigError(r.child("points"), "must be positive");
  if (!(hi >= lo)) throw ConfigError(r.child("hi"), "must be >= lo");
  std::vector<double> g;
  for (int i = 0; i < points; ++i) g.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
  return g;
}

SaaLoss parse_saa_loss(Reader r) {
  const auto kind = r.string("kind");
  SaaLoss loss;
  if (kind == "huber") {
    const double delta = r.number("delta");
    loss = located(r.child("delta"), [&] { return huber_loss(delta); });
  } else if (kind == "quadratic") {
    loss = quadratic_loss();
  } else if (kind == "absolute") {
    loss = absolute_loss();
  } else {
    throw ConfigError(r.child("kind"), "unknown loss '" + kind + "' (expected huber, quadratic or absolute)");
  }
  r.finish();
  return loss;
}

GrowthFn parse_growth(Reader r) {
  const auto kind = r.string("kind");
  if (kind != "quadratic") throw ConfigError(r.child("kind"), "unknown growth function '" + kind + "' (expected quadratic)");
  const double c = r.number("c");
  r.finish();
  return located(r.child("c"), [&] { return quadratic_growth(c); });
}

json to_json(ExtReal x) {
  if (x.is_pos_inf()) return "inf";
  if (x.is_neg_inf()) return "-inf";
  return x.value();
}

json to_json(const Dist& d) { return json(std::vector<double>(d.weights().begin(), d.weights().end())); }

json to_json(const RhoResult& r) {
  json j{{"value", to_json(r.value)}, {"method", to_string(r.method)}, {"certified", r.certified}};
  j["maximizer"] = r.maximizer ? to_json(*r.maximizer) : json(nullptr);
  j["closed_form"] = r.closed_form ? to_json(*r.closed_form) : json(nullptr);
  return j;
}

json to_json(const SanovRun& run) {
  json pts = json::array();
  for (const auto& p : run.points) pts.push_back({{"n", p.n}, {"v_n", p.v_n}, {"gap", p.gap}});
  json j{{"spec", run.spec}, {"points", pts}, {"target", run.target}, {"target_argmax", run.target_argmax}};
  j["coupling_target"] = run.coupling_target ? json(*run.coupling_target) : json(nullptr);
  return j;
}

json to_json(const SuperhedgeCert& c) {
  json j{{"y", c.y}, {"Y", c.Y}, {"residual", c.residual}, {"slice_rho", c.slice_rho}, {"ok", c.ok}};
  j["slice_loss"] = c.slice_loss ? json(*c.slice_loss) : json(nullptr);
  return j;
}

json to_json(const TailEstimate& e) {
  return {{"n", e.n}, {"r", e.r}, {"replications", e.replications}, {"hits", e.hits},
          {"p_hat", e.p_hat}, {"lo", e.lo}, {"hi", e.hi}};
}

json to_json(const RateFit& f) {
  json j{{"status", f.status == RateFit::Status::Ok ? "ok" : "inconclusive"}, {"points", f.points}};
  if (f.status == RateFit::Status::Ok) {
    j["slope"] = f.slope;
    j["intercept"] = f.intercept;
    j["se"] = f.se;
    j["upper95"] = f.upper95();
  }
  return j;
}

json to_json(const MannKendall& mk) {
  return {{"s", mk.s}, {"variance", mk.variance}, {"z", mk.z}, {"p_upward", mk.p_upward}};
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_number(ExtReal x) { return format_number(x.value()); }

std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

std::string tail_csv(const std::vector<TailEstimate>& estimates, const std::vector<double>& bounds) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const auto& e = estimates[i];
    rows.push_back({std::to_string(e.n), format_number(e.r), format_number(e.p_hat), format_number(e.lo),
                    format_number(e.hi), i < bounds.size() ? format_number(bounds[i]) : ""});
  }
  return to_csv({"n", "r", "p_hat", "lo", "hi", "bound"}, rows);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << contents;
  if (!out) throw InputError("failed writing " + path);
}

}  // namespace sanov::io
