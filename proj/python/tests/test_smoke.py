import math

import pytest

import sanov_dual as sd


MU = [0.5, 0.3, 0.2]


def test_entropic_rho_is_log_mean_exp():
    f = [1.0, -0.5, 2.0]
    expected = math.log(sum(w * math.exp(x) for w, x in zip(MU, f)))
    assert sd.rho(f, sd.relative_entropy_spec(MU)) == pytest.approx(expected, abs=1e-12)


def test_rho_of_constant_is_constant():
    for spec in (sd.relative_entropy_spec(MU), sd.shortfall_spec(MU, "power_plus", 2.0),
                 sd.robust_spec([MU, [0.2, 0.3, 0.5]])):
        assert sd.rho([0.7, 0.7, 0.7], spec) == pytest.approx(0.7, abs=1e-9)


def test_argmax_attains_duality():
    spec = sd.relative_entropy_spec(MU)
    f = [0.3, -1.0, 1.5]
    nu = sd.rho_argmax(f, spec)
    lhs = sum(a * b for a, b in zip(nu, f)) - sd.alpha(nu, spec)
    assert lhs == pytest.approx(sd.rho(f, spec), abs=1e-9)


def test_alpha_n_of_product_is_additive():
    spec = sd.relative_entropy_spec(MU)
    nu = [0.2, 0.2, 0.6]
    tensor = [a * b for a in nu for b in nu]
    assert sd.alpha_n(tensor, 2, spec) == pytest.approx(2 * sd.alpha(nu, spec), abs=1e-10)


def test_rho_n_additive_field_and_superhedge():
    spec = sd.relative_entropy_spec(MU)
    g = [0.1, -0.4, 0.9]
    f = [a + b for a in g for b in g]
    value = sd.rho_n(f, 2, spec)
    assert value == pytest.approx(2 * sd.rho(g, spec), abs=1e-10)
    cert = sd.superhedge(f, 2, spec)
    assert cert["ok"]
    assert cert["y"] == pytest.approx(value, abs=1e-10)


def test_sanov_limit_approaches_target():
    spec = sd.relative_entropy_spec([0.5, 0.5])
    run = sd.sanov_limit(lambda nu: nu[0], spec, [4, 16])
    gaps = [abs(p["gap"]) for p in run["points"]]
    assert gaps[-1] <= gaps[0] + 1e-12
    assert run["target"] == pytest.approx(math.log(0.5 * math.e + 0.5), abs=1e-6)


def test_invalid_input_raises_value_error():
    with pytest.raises(ValueError):
        sd.relative_entropy_spec([0.5, -0.5, 1.0])
    with pytest.raises(ValueError):
        sd.shortfall_spec(MU, "nope")


def test_cramer_pieces():
    law = sd.SampleLaw.pareto_centered(4.5)
    assert law.mean() == pytest.approx(0.0, abs=1e-12)
    assert sd.cramer_lambda([0.0], law, 2.0) == pytest.approx(0.0, abs=1e-8)
    mq = sd.moment_mq(law, 2.0)
    assert sd.deviation_bound(mq + 1.0, mq, 2.0, 100.0) == pytest.approx(mq ** 2 / 100.0, rel=1e-12)
    value, argmax = sd.cramer_lambda_star([0.0], law, 2.0)
    assert value == pytest.approx(0.0, abs=1e-6)
    assert len(argmax) == 1


def test_tail_estimate_and_fit():
    law = sd.SampleLaw.pareto_centered(2.5)
    est = sd.estimate_tail(law, 10, 1.0, 2000, seed=5)
    assert 0.0 <= est["lo"] <= est["p_hat"] <= est["hi"] <= 1.0
    assert est == sd.estimate_tail(law, 10, 1.0, 2000, seed=5)
    fit = sd.rate_fit([10, 100, 1000], [1e-1, 1e-2, 1e-3])
    assert fit["ok"]
    assert fit["slope"] == pytest.approx(-1.0, abs=1e-10)
    with pytest.raises(RuntimeError):
        sd.estimate_tail(law, 10, 1.0, 10)


def test_azuma_rademacher_within_bound():
    pts = sd.azuma_experiment("rademacher", [20, 40], 0.5, 5000, seed=7)
    assert all(p["ok"] for p in pts)
