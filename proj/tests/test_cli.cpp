#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "sanov/io.hpp"

using namespace sanov;
using sanov::io::json;

namespace {

struct Run {
  int code;
  std::string output;  // stdout and stderr
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(SANOV_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string config(const std::string& name) { return std::string(SANOV_CONFIG_DIR) + "/" + name; }

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("sanov_cli_test_" + std::to_string(::getpid())) / name;
  std::filesystem::remove_all(p);
  return p;
}

json report(const std::filesystem::path& dir) { return json::parse(io::read_file((dir / "report.json").string())); }

std::string write_config(const std::string& name, const std::string& body) {
  const auto p = scratch("configs") / name;
  std::filesystem::create_directories(p.parent_path());
  io::write_file(p.string(), body);
  return p.string();
}

}  // namespace

TEST_CASE("rho: entropy of zero") {
  const auto out = scratch("rho0");
  const auto r = cli("rho --config " + config("rho_entropy_zero.json") + " --out " + out.string());
  CHECK(r.code == 0);
  CHECK(report(out)["result"]["value"] == json(0.0));
}

TEST_CASE("rho: shortfall report matches the library byte for byte") {
  const auto out = scratch("rho_sf");
  REQUIRE(cli("rho --config " + config("rho_shortfall.json") + " --out " + out.string()).code == 0);
  const FiniteSpace space(std::vector<std::string>{"low", "mid", "high"});
  const auto spec = AlphaSpec::shortfall(Dist(space, {0.5, 0.3, 0.2}), LossFn::power_plus(2.0));
  const std::vector<ExtReal> f{-1.0, 0.25, 2.0};
  const json expected{{"command", "rho"}, {"spec", "shortfall"}, {"result", io::to_json(rho_evaluate(f, spec))}};
  CHECK(io::read_file((out / "report.json").string()) == expected.dump(2) + "\n");
}

TEST_CASE("malformed configs exit 2 naming the key") {
  const auto bad_key = write_config("bad_key.json", R"({"space": 2, "spec": {"kind": "relative_entropy", "mu": "uniform"}, "f": [0, 0], "fx": 1})");
  auto r = cli("rho --config " + bad_key + " --out " + scratch("bad1").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("/fx") != std::string::npos);

  const auto bad_type = write_config("bad_type.json", R"({"space": 2, "spec": {"kind": "lp_entropy", "mu": [0.5, "x"], "p": 2}, "f": [0, 0]})");
  r = cli("rho --config " + bad_type + " --out " + scratch("bad2").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("/spec/mu/1") != std::string::npos);

  const auto bad_json = write_config("bad_json.json", R"({"space": 2,)");
  CHECK(cli("rho --config " + bad_json + " --out " + scratch("bad3").string()).code == 2);
  CHECK(cli("rho --out " + scratch("bad4").string()).code == 2);
  CHECK(cli("nosuch").code == 2);
}

TEST_CASE("cramer: bound from flags") {
  const auto r = cli("cramer --Mq 1 --r 2 --q 2 --n 100");
  CHECK(r.code == 0);
  CHECK(r.output == "0.01\n");
  CHECK(cli("cramer --Mq 1 --r 0.5 --q 2 --n 100").code == 2);
  CHECK(cli("cramer --Mq 1 --r 2").code == 2);
}

TEST_CASE("tailbound: too few replications is inconclusive") {
  CHECK(cli("tailbound --config " + config("tailbound_small.json") + " --out " + scratch("tb").string()).code == 4);
}

TEST_CASE("superhedge certificate") {
  const auto out = scratch("sh");
  CHECK(cli("superhedge --config " + config("superhedge.json") + " --out " + out.string()).code == 0);
  const auto cert = report(out)["certificate"];
  CHECK(cert["residual"].get<double>() <= 1e-8);
  CHECK(cert["ok"] == json(true));
  const auto manifest = json::parse(io::read_file((out / "manifest.json").string()));
  CHECK(manifest["config_hash"] == json(io::hex64(io::fnv1a(io::read_file(config("superhedge.json"))))));
}

TEST_CASE("sanov: linear F has zero gap, set indicator is monotone") {
  auto out = scratch("lin");
  REQUIRE(cli("sanov --config " + config("sanov_linear.json") + " --out " + out.string()).code == 0);
  for (const auto& p : report(out)["run"]["points"]) CHECK(std::abs(p["gap"].get<double>()) <= 1e-12);

  out = scratch("si");
  REQUIRE(cli("sanov --config " + config("sanov_set_indicator.json") + " --out " + out.string()).code == 0);
  double prev = -1e300;
  for (const auto& p : report(out)["run"]["points"]) {
    CHECK(p["v_n"].get<double>() >= prev);
    prev = p["v_n"].get<double>();
  }
  CHECK(io::read_file((out / "sanov.csv").string()).rfind("n,v_n,gap,target\n", 0) == 0);
}

TEST_CASE("seed flag overrides the config and changes Monte Carlo output") {
  const auto a = scratch("seed_a");
  const auto b = scratch("seed_b");
  REQUIRE(cli("tailbound --config " + config("azuma_scripted.json") + " --out " + a.string() + " --seed 1").code == 0);
  REQUIRE(cli("tailbound --config " + config("azuma_scripted.json") + " --out " + b.string() + " --seed 2").code == 0);
  CHECK(io::read_file((a / "azuma.csv").string()) != io::read_file((b / "azuma.csv").string()));
  CHECK(json::parse(io::read_file((a / "manifest.json").string()))["seed"] == json(1));
}
