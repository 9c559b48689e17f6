// sanov: command line front end for the sanov library.
//
// Exit codes: 0 ok, 2 config or usage error, 3 numeric failure, 4 inconclusive statistics.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <boost/version.hpp>
#include <Eigen/Core>

#include "CLI11.hpp"
#include "sanov/io.hpp"

using namespace sanov;
using sanov::io::json;
using sanov::io::Reader;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kConfig = 2, kNumeric = 3, kInconclusive = 4 };

int log_level() {
  const char* env = std::getenv("SANOV_DUAL_LOG");
  if (!env) return 0;
  const std::string s(env);
  if (s == "debug" || s == "2") return 2;
  if (s == "info" || s == "1") return 1;
  return 0;
}

void log(int level, const std::string& msg) {
  if (level <= log_level()) std::cerr << "[sanov] " << msg << "\n";
}

struct Options {
  std::string config;
  std::string out = "sanov_out";
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

// Everything a command produces; files are written next to the manifest.
struct Outcome {
  json report;
  std::map<std::string, std::string> files;
  int exit_code = kOk;
};

struct Loaded {
  std::string text;
  json root;
};

Loaded load_config(const std::string& path) {
  Loaded l;
  l.text = io::read_file(path);
  try {
    l.root = json::parse(l.text);
  } catch (const json::parse_error& e) {
    throw io::ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  return l;
}

std::uint64_t take_seed(Reader& r, const Options& opt) {
  const std::uint64_t from_config = r.u64_or("seed", 0);
  return opt.seed.value_or(from_config);
}

std::vector<ExtReal> field_values(Reader& r, const std::string& key, std::size_t expected) {
  auto f = r.ext_numbers(key);
  if (f.size() != expected)
    throw io::ConfigError(r.child(key), "expected " + std::to_string(expected) + " values, got " + std::to_string(f.size()));
  return f;
}

Outcome cmd_rho(Reader r, const Options&) {
  const FiniteSpace space = io::parse_space(r.at("space"), r.child("space"));
  const AlphaSpec spec = io::parse_spec(r.object("spec"), space);
  const auto f = field_values(r, "f", space.size());
  const std::string method = r.has("method") ? r.string("method") : "closed_form";
  r.finish();
  Outcome out;
  RhoResult res;
  if (method == "closed_form") {
    res = rho_evaluate(f, spec);
  } else if (method == "generic") {
    res = rho_generic(f, spec);
    if (!res.certified) out.exit_code = kNumeric;
  } else {
    throw io::ConfigError(r.child("method"), "unknown method '" + method + "' (expected closed_form or generic)");
  }
  out.report = {{"command", "rho"}, {"spec", spec.name()}, {"result", io::to_json(res)}};
  return out;
}

Outcome cmd_sanov(Reader r, const Options& opt) {
  const FiniteSpace space = io::parse_space(r.at("space"), r.child("space"));
  const AlphaSpec spec = io::parse_spec(r.object("spec"), space);
  const SimplexFn F = io::parse_simplex_fn(r.object("F"), space.size());
  const auto schedule = r.integers("schedule");
  SanovOptions so;
  so.grid_resolution = r.integer_or("grid_resolution", 0);
  so.threads = opt.threads;
  r.finish();
  SanovRun run;
  if (spec.kind() == AlphaSpec::Kind::Transport) {
    const auto& t = spec.as<TransportSpec>();
    run = transport_longrun(F, t.mu, t.cost, schedule, so);
  } else {
    run = sanov_limit(F, spec, schedule, so);
  }
  Outcome out;
  out.report = {{"command", "sanov"}, {"run", io::to_json(run)}};
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : run.points)
    rows.push_back({std::to_string(p.n), io::format_number(p.v_n), io::format_number(p.gap), io::format_number(run.target)});
  out.files["sanov.csv"] = io::to_csv({"n", "v_n", "gap", "target"}, rows);
  return out;
}

std::vector<std::vector<double>> points_or_grid(Reader& r, const std::string& key, std::size_t dim) {
  std::vector<std::vector<double>> pts;
  const json& j = r.at(key);
  if (dim == 1) {
    for (double x : io::parse_grid(j, r.child(key))) pts.push_back({x});
    return pts;
  }
  if (!j.is_array()) throw io::ConfigError(r.child(key), "expected an array of points");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = r.child(key) + "/" + std::to_string(i);
    if (!j[i].is_array() || j[i].size() != dim)
      throw io::ConfigError(p, "expected a point with " + std::to_string(dim) + " coordinates");
    std::vector<double> v;
    for (std::size_t c = 0; c < dim; ++c) v.push_back(io::as_number(j[i][c], p + "/" + std::to_string(c)));
    pts.push_back(std::move(v));
  }
  return pts;
}

std::string point_cell(const std::vector<double>& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? " " : "") + io::format_number(x[i]);
  return s;
}

Outcome cmd_cramer(Reader r, const Options&) {
  const SampleLaw law = io::parse_law(r.object("law"));
  const double q = r.number("q");
  law.check_admissible(q);
  const auto duals = points_or_grid(r, "x_star", law.dim());
  const auto primals = points_or_grid(r, "x", law.dim());
  std::optional<double> radius;
  if (r.has("r")) radius = r.number("r");
  std::vector<int> ns;
  if (r.has("n")) ns = r.integers("n");
  r.finish();

  Outcome out;
  const double mq = moment_mq(law, q);
  std::vector<std::vector<std::string>> lrows, srows;
  for (const auto& y : duals) {
    const ExtReal v = lambda(y, law, q);
    lrows.push_back({point_cell(y), io::format_number(v)});
  }
  for (const auto& x : primals) {
    const auto res = lambda_star(x, law, q);
    double nx = 0.0;
    for (double c : x) nx += c * c;
    srows.push_back({point_cell(x), io::format_number(res.value), io::format_number(-1.0 + std::sqrt(nx) / mq)});
  }
  out.files["lambda.csv"] = io::to_csv({"x_star", "lambda"}, lrows);
  out.files["lambda_star.csv"] = io::to_csv({"x", "lambda_star", "minorant"}, srows);
  out.report = {{"command", "cramer"}, {"law", law.name()}, {"q", q}, {"M_q", mq}};
  if (radius) {
    json bounds = json::array();
    for (int n : ns) bounds.push_back({{"n", n}, {"bound", deviation_bound(*radius, mq, q, n)}});
    out.report["r"] = *radius;
    out.report["deviation_bound"] = bounds;
  }
  return out;
}

Outcome tail_iid(Reader& r, const Options& opt) {
  const SampleLaw law = io::parse_law(r.object("law"));
  const double q = r.number("q");
  const double mq = moment_mq(law, q);
  double radius = 0.0;
  if (r.has("r") == r.has("r_above_mq"))
    throw io::ConfigError(r.pointer(), "exactly one of 'r' and 'r_above_mq' is required");
  radius = r.has("r") ? r.number("r") : mq + r.number("r_above_mq");
  const auto schedule = r.integers("schedule");
  std::vector<int> rate_schedule = schedule;
  if (r.has("rate_schedule")) rate_schedule = r.integers("rate_schedule");
  const std::uint64_t R = r.u64_or("replications", 0);
  const double ratio_limit = r.number_or("bound_ratio", 1.2);
  const std::uint64_t seed = take_seed(r, opt);
  r.finish();
  if (R < kMinReplications) throw InconclusiveError("replications must be at least " + std::to_string(kMinReplications));

  const Sampler sampler(law);
  const double scale = std::pow(mq / (radius - mq), q);
  std::vector<TailEstimate> est;
  std::vector<double> bounds;
  json checks = json::array();
  bool within = true;
  std::uint64_t offset = 0;
  for (int n : schedule) {
    log(1, "tailbound n = " + std::to_string(n));
    est.push_back(estimate_tail(sampler, n, radius, R, seed, opt.threads, offset));
    offset += R;
    bounds.push_back(deviation_bound(radius, mq, q, n));
    const double scaled = est.back().p_hat * std::pow(n, q - 1.0);
    const bool ok = scaled <= ratio_limit * scale;
    within = within && ok;
    checks.push_back({{"n", n}, {"scaled", scaled}, {"limit", ratio_limit * scale}, {"ok", ok}});
  }
  std::vector<TailEstimate> rate_est;
  for (int n : rate_schedule) {
    auto it = std::find_if(est.begin(), est.end(), [n](const TailEstimate& e) { return e.n == n; });
    if (it != est.end()) {
      rate_est.push_back(*it);
    } else {
      rate_est.push_back(estimate_tail(sampler, n, radius, R, seed, opt.threads, offset));
      offset += R;
    }
  }
  const RateFit fit = rate_fit(rate_est);
  Outcome out;
  json e = json::array(), re = json::array();
  for (const auto& x : est) e.push_back(io::to_json(x));
  for (const auto& x : rate_est) re.push_back(io::to_json(x));
  const double target = 1.0 - q + 0.25;
  out.report = {{"command", "tailbound"}, {"kind", "iid"}, {"law", law.name()}, {"q", q}, {"M_q", mq},
                {"r", radius}, {"estimates", e}, {"bound_checks", checks}, {"bound_ok", within},
                {"rate_estimates", re}, {"rate", io::to_json(fit)}, {"rate_target", target}};
  if (fit.status == RateFit::Status::Ok) out.report["rate_ok"] = fit.upper95() <= target;
  out.files["tail.csv"] = io::tail_csv(est, bounds);
  std::vector<double> rate_bounds;
  for (const auto& x : rate_est) rate_bounds.push_back(deviation_bound(radius, mq, q, x.n));
  out.files["rate.csv"] = io::tail_csv(rate_est, rate_bounds);
  if (fit.status != RateFit::Status::Ok) out.exit_code = kInconclusive;
  return out;
}

Outcome tail_martingale(Reader& r, const Options& opt) {
  const IncrementFamily family = [&] {
    const auto s = r.string("family");
    try {
      return increment_family_from_string(s);
    } catch (const InputError& e) {
      throw io::ConfigError(r.child("family"), e.what());
    }
  }();
  const double radius = r.number("r");
  const auto schedule = r.integers("schedule");
  const std::uint64_t R = r.u64_or("replications", 0);
  const double slack = r.number_or("slack", 0.1);
  const std::uint64_t seed = take_seed(r, opt);
  r.finish();
  const auto rep = azuma_experiment(family, schedule, radius, R, seed, opt.threads, slack);
  Outcome out;
  json pts = json::array();
  std::vector<std::vector<std::string>> rows;
  bool all = true;
  for (const auto& p : rep.points) {
    pts.push_back({{"estimate", io::to_json(p.estimate)}, {"log_rate", io::to_json(p.log_rate)}, {"bound", p.bound},
                   {"ok", p.ok}});
    all = all && p.ok;
    const auto& e = p.estimate;
    rows.push_back({std::to_string(e.n), io::format_number(e.r), io::format_number(e.p_hat), io::format_number(e.lo),
                    io::format_number(e.hi), io::format_number(p.bound), io::format_number(p.log_rate)});
  }
  out.report = {{"command", "tailbound"}, {"kind", "martingale"}, {"family", to_string(family)}, {"r", radius},
                {"slack", slack}, {"phi_star", io::to_json(increment_phi_star(family, radius))}, {"points", pts},
                {"ok", all}};
  out.files["azuma.csv"] = io::to_csv({"n", "r", "p_hat", "lo", "hi", "bound", "log_rate"}, rows);
  return out;
}

Outcome cmd_tailbound(Reader r, const Options& opt) {
  const std::string kind = r.has("kind") ? r.string("kind") : "iid";
  if (kind == "iid") return tail_iid(r, opt);
  if (kind == "martingale") return tail_martingale(r, opt);
  throw io::ConfigError(r.child("kind"), "unknown kind '" + kind + "' (expected iid or martingale)");
}

Outcome cmd_saa(Reader r, const Options& opt) {
  SaaInstance inst{io::parse_grid(r.at("grid"), r.child("grid")), io::parse_saa_loss(r.object("loss")),
                   io::parse_law(r.object("law")), r.number("eps"), r.number_or("q", 2.0)};
  const auto schedule = r.integers("schedule");
  const std::uint64_t R = r.u64_or("replications", 0);
  std::optional<GrowthFn> growth;
  if (r.has("growth")) growth = io::parse_growth(r.object("growth"));
  std::vector<int> argmin_schedule = schedule;
  if (r.has("argmin_schedule")) argmin_schedule = r.integers("argmin_schedule");
  const int exact_n = r.integer_or("exact_check_n", 0);
  const std::uint64_t seed = take_seed(r, opt);
  r.finish();
  try {
    validate(inst);
  } catch (const InputError& e) {
    throw io::ConfigError(r.pointer().empty() ? "/" : r.pointer(), e.what());
  }

  Outcome out;
  const auto rep = saa_run(inst, schedule, R, seed, opt.threads);
  json e = json::array();
  for (const auto& x : rep.estimates) e.push_back(io::to_json(x));
  out.report = {{"command", "saa"}, {"loss", inst.loss.name}, {"law", inst.law.name()}, {"eps", inst.eps},
                {"q", inst.q}, {"V_mu", rep.v_mu}, {"estimates", e}, {"scaled", rep.scaled},
                {"rate", io::to_json(rep.rate)}};
  if (rep.scaled.size() >= 3) {
    out.report["trend"] = io::to_json(rep.trend);
    out.report["bounded"] = rep.trend.p_upward > 0.05;
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t j = 0; j < rep.estimates.size(); ++j) {
    const auto& x = rep.estimates[j];
    rows.push_back({std::to_string(x.n), io::format_number(x.r), io::format_number(x.p_hat), io::format_number(x.lo),
                    io::format_number(x.hi), io::format_number(rep.scaled[j])});
  }
  out.files["saa.csv"] = io::to_csv({"n", "eps", "p_hat", "lo", "hi", "scaled"}, rows);

  if (exact_n > 0) {
    const double exact = saa_exact_exceedance(inst, exact_n);
    // a fresh run at exact_n on streams past those used above
    const auto mc = saa_run(inst, {exact_n}, R, seed ^ 0x5a5a5a5a5a5a5a5aull, opt.threads).estimates.front();
    const double se = std::sqrt(std::max(exact * (1.0 - exact), 1e-12) / static_cast<double>(R));
    out.report["exact_check"] = {{"n", exact_n}, {"exact", exact}, {"p_hat", mc.p_hat}, {"se", se},
                                 {"ok", std::abs(mc.p_hat - exact) <= 3.0 * se}};
  }
  if (growth) {
    const auto ar = argmin_tracking(inst, *growth, argmin_schedule, R, seed + 1, opt.threads);
    json ae = json::array();
    for (const auto& x : ar.estimates) ae.push_back(io::to_json(x));
    out.report["argmin"] = {{"growth", growth->name}, {"x_hat", ar.x_hat}, {"estimates", ae}, {"rate", io::to_json(ar.rate)},
                            {"rate_target", 1.0 - inst.q + 0.25}};
    if (ar.rate.status == RateFit::Status::Ok) out.report["argmin"]["rate_ok"] = ar.rate.upper95() <= 1.0 - inst.q + 0.25;
    std::vector<double> none;
    out.files["argmin.csv"] = io::tail_csv(ar.estimates, none);
  }
  return out;
}

Outcome cmd_superhedge(Reader r, const Options&) {
  const FiniteSpace space = io::parse_space(r.at("space"), r.child("space"));
  const AlphaSpec spec = io::parse_spec(r.object("spec"), space);
  const int n = r.integer("n");
  if (n < 1) throw io::ConfigError(r.child("n"), "must be positive");
  const auto f = field_values(r, "f", dense_size(space.size(), n));
  r.finish();
  const auto cert = superhedge(RealFieldN::dense(space, n, f), spec);
  Outcome out;
  out.report = {{"command", "superhedge"}, {"spec", spec.name()}, {"n", n}, {"certificate", io::to_json(cert)}};
  if (!cert.ok) out.exit_code = kNumeric;
  return out;
}

Outcome cmd_transport(Reader r, const Options& opt) {
  const FiniteSpace space = io::parse_space(r.at("space"), r.child("space"));
  const Dist mu = io::parse_dist(space, r.at("mu"), r.child("mu"));
  auto cost = io::parse_cost(r.at("cost"), space.size(), r.child("cost"));
  const auto f = field_values(r, "f", space.size());
  int n = 0;
  std::vector<ExtReal> fn;
  if (r.has("n")) {
    n = r.integer("n");
    if (n < 1) throw io::ConfigError(r.child("n"), "must be positive");
    fn = field_values(r, "f_n", dense_size(space.size(), n));
  }
  r.finish();
  const AlphaSpec spec = AlphaSpec::transport(mu, cost);
  Outcome out;
  const auto res = rho_evaluate(f, spec);
  out.report = {{"command", "transport"}, {"rho", io::to_json(res)}};
  if (res.maximizer) out.report["alpha_at_maximizer"] = io::to_json(transport_alpha(*res.maximizer, mu, cost));
  if (n > 0) {
    const RealFieldN field = RealFieldN::dense(space, n, fn);
    const ExtReal control = control_value_transport(field, mu, cost);
    const ExtReal dp = rho_n_dense(field, spec, false, opt.threads).value;
    out.report["control_value"] = io::to_json(control);
    out.report["rho_n"] = io::to_json(dp);
    if (control.is_finite() && dp.is_finite()) out.report["difference"] = std::abs(control.value() - dp.value());
  }
  return out;
}

json manifest(const std::string& command, const Loaded& cfg, const Options& opt, const Outcome& out) {
  json files = json::object();
  files["report.json"] = io::hex64(io::fnv1a(out.report.dump(2) + "\n"));
  for (const auto& [name, body] : out.files) files[name] = io::hex64(io::fnv1a(body));
  json m{{"command", command},
         {"config_hash", io::hex64(io::fnv1a(cfg.text))},
         {"outputs", files},
         {"versions",
          {{"sanov", kVersion},
           {"boost", BOOST_LIB_VERSION},
           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION)},
           {"compiler", __VERSION__}}}};
  m["seed"] = opt.seed ? json(*opt.seed) : (cfg.root.contains("seed") ? cfg.root["seed"] : json(0));
  return m;
}

using Command = Outcome (*)(Reader, const Options&);

int run(const std::string& name, Command cmd, const Options& opt) {
  const Loaded cfg = load_config(opt.config);
  log(1, name + ": config " + opt.config + " (" + io::hex64(io::fnv1a(cfg.text)) + ")");
  Outcome out = cmd(Reader(cfg.root, ""), opt);
  std::filesystem::create_directories(opt.out);
  const std::filesystem::path dir(opt.out);
  io::write_file((dir / "report.json").string(), out.report.dump(2) + "\n");
  for (const auto& [file, body] : out.files) io::write_file((dir / file).string(), body);
  io::write_file((dir / "manifest.json").string(), manifest(name, cfg, opt, out).dump(2) + "\n");
  std::cout << out.report.dump(2) << "\n";
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual representations of large deviation rates on finite spaces"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Options opt;
  std::optional<double> mq, radius, q, n;
  std::map<CLI::App*, std::pair<std::string, Command>> commands;

  auto add = [&](const std::string& name, const std::string& help, Command cmd, bool config_required = true) {
    auto* sub = app.add_subcommand(name, help);
    auto* c = sub->add_option("--config", opt.config, "JSON config file")->check(CLI::ExistingFile);
    if (config_required) c->required();
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "base seed (overrides the config)");
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
    commands[sub] = {name, cmd};
    return sub;
  };
  add("rho", "evaluate rho(f) for one spec", cmd_rho);
  add("sanov", "v_n = (1/n) rho_n(n F(L_n)) over a schedule and its variational limit", cmd_sanov);
  auto* cramer = add("cramer", "Lambda, Lambda*, M_q and the explicit deviation bound", cmd_cramer, false);
  cramer->add_option("--Mq", mq, "moment constant M_q (bound only)");
  cramer->add_option("--r", radius, "deviation level r > M_q (bound only)");
  cramer->add_option("--q", q, "exponent q > 1 (bound only)");
  cramer->add_option("--n", n, "sample size (bound only)");
  add("tailbound", "Monte Carlo tail probabilities against the polynomial and martingale bounds", cmd_tailbound);
  add("saa", "sample average approximation exceedance rates", cmd_saa);
  add("superhedge", "superhedging decomposition certificate", cmd_superhedge);
  add("transport", "transport rho and the control problem", cmd_transport);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    for (const auto& [sub, entry] : commands) {
      if (!sub->parsed()) continue;
      if (sub == cramer && opt.config.empty()) {
        if (!mq || !radius || !q || !n) {
          std::cerr << "error: cramer needs --config, or all of --Mq --r --q --n\n";
          return kConfig;
        }
        std::cout << io::format_number(deviation_bound(*radius, *mq, *q, *n)) << "\n";
        return kOk;
      }
      return run(entry.first, entry.second, opt);
    }
  } catch (const InconclusiveError& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return kInconclusive;
  } catch (const io::ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return kConfig;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  }
  return kConfig;
}
