#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sanov/io.hpp"

namespace py = pybind11;
using namespace sanov;

namespace {

Dist make_dist(const std::vector<double>& w) { return Dist(FiniteSpace(w.size()), w); }

std::vector<ExtReal> ext(const std::vector<double>& v) { return {v.begin(), v.end()}; }

std::vector<Dist> make_dists(const std::vector<std::vector<double>>& ws) {
  if (ws.empty()) throw InputError("at least one generator is required");
  const FiniteSpace s(ws.front().size());
  std::vector<Dist> out;
  for (const auto& w : ws) out.emplace_back(s, w);
  return out;
}

std::vector<double> weights(const Dist& d) { return {d.weights().begin(), d.weights().end()}; }

py::dict tail_dict(const TailEstimate& e) {
  py::dict d;
  d["n"] = e.n;
  d["r"] = e.r;
  d["replications"] = e.replications;
  d["hits"] = e.hits;
  d["p_hat"] = e.p_hat;
  d["lo"] = e.lo;
  d["hi"] = e.hi;
  return d;
}

// Re-uses the loaded space of a spec so tensors built from Python lists line up with it.
RealFieldN dense_field(const AlphaSpec& spec, int n, const std::vector<double>& f) {
  return RealFieldN::dense(spec.space(), n, ext(f));
}

}  // namespace

PYBIND11_MODULE(_sanov, m) {
  m.doc() = "Dual representations of large deviation rates on finite spaces";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<InconclusiveError>(m, "InconclusiveError", PyExc_RuntimeError);

  py::class_<AlphaSpec>(m, "AlphaSpec")
      .def_property_readonly("name", &AlphaSpec::name)
      .def_property_readonly("size", [](const AlphaSpec& s) { return s.space().size(); })
      .def("__repr__", [](const AlphaSpec& s) { return "<AlphaSpec " + s.name() + " on " + std::to_string(s.space().size()) + " atoms>"; });

  m.def("relative_entropy_spec", [](const std::vector<double>& mu) { return AlphaSpec::relative_entropy(make_dist(mu)); },
        py::arg("mu"));
  m.def("lp_entropy_spec", [](const std::vector<double>& mu, double p) { return AlphaSpec::lp_entropy(make_dist(mu), p); },
        py::arg("mu"), py::arg("p"));
  m.def(
      "shortfall_spec",
      [](const std::vector<double>& mu, const std::string& loss, double q) {
        if (loss == "exp") return AlphaSpec::shortfall(make_dist(mu), LossFn::exp());
        if (loss == "power_plus") return AlphaSpec::shortfall(make_dist(mu), LossFn::power_plus(q));
        throw InputError("loss must be 'exp' or 'power_plus'");
      },
      py::arg("mu"), py::arg("loss") = "exp", py::arg("q") = 2.0);
  m.def("robust_spec", [](const std::vector<std::vector<double>>& g) { return AlphaSpec::robust(make_dists(g)); },
        py::arg("generators"));
  m.def("set_indicator_spec", [](const std::vector<std::vector<double>>& g) { return AlphaSpec::set_indicator(make_dists(g)); },
        py::arg("generators"));
  m.def(
      "transport_spec",
      [](const std::vector<double>& mu, const std::vector<std::vector<double>>& cost) {
        std::vector<ExtReal> c;
        for (const auto& row : cost) {
          if (row.size() != mu.size()) throw InputError("cost must be square with the size of mu");
          c.insert(c.end(), row.begin(), row.end());
        }
        if (cost.size() != mu.size()) throw InputError("cost must be square with the size of mu");
        return AlphaSpec::transport(make_dist(mu), std::move(c));
      },
      py::arg("mu"), py::arg("cost"));

  m.def("rho", [](const std::vector<double>& f, const AlphaSpec& spec) { return rho(ext(f), spec).value(); },
        py::arg("f"), py::arg("spec"));
  m.def(
      "rho_argmax",
      [](const std::vector<double>& f, const AlphaSpec& spec) -> std::optional<std::vector<double>> {
        const auto nu = rho_argmax(ext(f), spec);
        if (!nu) return std::nullopt;
        return weights(*nu);
      },
      py::arg("f"), py::arg("spec"));
  m.def(
      "alpha",
      [](const std::vector<double>& nu, const AlphaSpec& spec) {
        return alpha(Dist(spec.space(), nu), spec).value();
      },
      py::arg("nu"), py::arg("spec"));
  m.def(
      "alpha_n",
      [](const std::vector<double>& tensor, int n, const AlphaSpec& spec) {
        return alpha_n(ProductDist(spec.space(), n, tensor), spec).value();
      },
      py::arg("nu"), py::arg("n"), py::arg("spec"), "alpha_n of a joint law on E^n given as a row-major tensor");
  m.def(
      "rho_n",
      [](const std::vector<double>& f, int n, const AlphaSpec& spec, int threads) {
        return rho_n_dense(dense_field(spec, n, f), spec, false, threads).value.value();
      },
      py::arg("f"), py::arg("n"), py::arg("spec"), py::arg("threads") = 1,
      "rho_n by the backward recursion; f is a row-major tensor on E^n");
  m.def(
      "superhedge",
      [](const std::vector<double>& f, int n, const AlphaSpec& spec) {
        const auto c = superhedge(dense_field(spec, n, f), spec);
        py::dict d;
        d["y"] = c.y;
        d["Y"] = c.Y;
        d["residual"] = c.residual;
        d["slice_rho"] = c.slice_rho;
        d["ok"] = c.ok;
        return d;
      },
      py::arg("f"), py::arg("n"), py::arg("spec"));
  m.def(
      "sanov_limit",
      [](const std::function<double(std::vector<double>)>& F, const AlphaSpec& spec, const std::vector<int>& schedule,
         int grid_resolution) {
        const SimplexFn fn = [&F](std::span<const double> nu) { return F(std::vector<double>(nu.begin(), nu.end())); };
        SanovOptions opt;
        opt.grid_resolution = grid_resolution;
        const SanovRun run = spec.kind() == AlphaSpec::Kind::Transport
                                 ? transport_longrun(fn, spec.as<TransportSpec>().mu, spec.as<TransportSpec>().cost,
                                                     schedule, opt)
                                 : sanov_limit(fn, spec, schedule, opt);
        py::list pts;
        for (const auto& p : run.points) {
          py::dict d;
          d["n"] = p.n;
          d["v_n"] = p.v_n;
          d["gap"] = p.gap;
          pts.append(d);
        }
        py::dict d;
        d["points"] = pts;
        d["target"] = run.target;
        d["target_argmax"] = run.target_argmax;
        d["coupling_target"] = run.coupling_target ? py::cast(*run.coupling_target) : py::none();
        return d;
      },
      py::arg("F"), py::arg("spec"), py::arg("schedule"), py::arg("grid_resolution") = 0);

  py::class_<SampleLaw>(m, "SampleLaw")
      .def_static("pareto", &SampleLaw::pareto, py::arg("a"), py::arg("shift") = 0.0)
      .def_static("pareto_centered", &SampleLaw::pareto_centered, py::arg("a"))
      .def_static("student_t", &SampleLaw::student_t, py::arg("df"))
      .def_static("lognormal", &SampleLaw::lognormal, py::arg("sigma"), py::arg("centered") = true)
      .def_static("finite_support", &SampleLaw::finite_support, py::arg("points"), py::arg("probs"))
      .def_static("empirical", &SampleLaw::empirical, py::arg("samples"))
      .def_property_readonly("dim", &SampleLaw::dim)
      .def("mean", &SampleLaw::mean, py::arg("coord") = 0)
      .def("__repr__", &SampleLaw::name);

  m.def(
      "cramer_lambda", [](const std::vector<double>& x_star, const SampleLaw& law, double q) {
        return lambda(x_star, law, q).value();
      },
      py::arg("x_star"), py::arg("law"), py::arg("q"));
  m.def(
      "cramer_lambda_star",
      [](const std::vector<double>& x, const SampleLaw& law, double q) {
        const auto r = lambda_star(x, law, q);
        return py::make_tuple(r.value.value(), r.argmax);
      },
      py::arg("x"), py::arg("law"), py::arg("q"));
  m.def("moment_mq", &moment_mq, py::arg("law"), py::arg("q"));
  m.def("deviation_bound", &deviation_bound, py::arg("r"), py::arg("mq"), py::arg("q"), py::arg("n"));

  m.def(
      "estimate_tail",
      [](const SampleLaw& law, int n, double r, std::uint64_t R, std::uint64_t seed, int threads) {
        return tail_dict(estimate_tail(Sampler(law), n, r, R, seed, threads));
      },
      py::arg("law"), py::arg("n"), py::arg("r"), py::arg("replications"), py::arg("seed") = 0, py::arg("threads") = 1);
  m.def(
      "rate_fit",
      [](const std::vector<double>& ns, const std::vector<double>& ps, std::optional<std::vector<double>> w) {
        if (ns.size() != ps.size() || (w && w->size() != ns.size())) throw InputError("rate_fit: lengths differ");
        std::vector<RatePoint> pts;
        for (std::size_t i = 0; i < ns.size(); ++i) pts.push_back({ns[i], ps[i], w ? (*w)[i] : 1.0});
        const auto f = rate_fit(pts);
        py::dict d;
        d["ok"] = f.status == RateFit::Status::Ok;
        d["slope"] = f.slope;
        d["se"] = f.se;
        d["upper95"] = f.upper95();
        d["points"] = f.points;
        return d;
      },
      py::arg("n"), py::arg("p"), py::arg("weights") = py::none());
  m.def(
      "azuma_experiment",
      [](const std::string& family, const std::vector<int>& schedule, double r, std::uint64_t R, std::uint64_t seed,
         double slack) {
        const auto rep = azuma_experiment(increment_family_from_string(family), schedule, r, R, seed, 1, slack);
        py::list out;
        for (const auto& p : rep.points) {
          py::dict d = tail_dict(p.estimate);
          d["log_rate"] = p.log_rate.value();
          d["bound"] = p.bound;
          d["ok"] = p.ok;
          out.append(d);
        }
        return out;
      },
      py::arg("family"), py::arg("schedule"), py::arg("r"), py::arg("replications"), py::arg("seed") = 0,
      py::arg("slack") = 0.1);
}
