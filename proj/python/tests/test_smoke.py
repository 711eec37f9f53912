import json
import math

import numpy as np
import pytest

import mjpapprox as mj

GOMPERTZ_S = [[-0.78, 0.57], [0.91, -1.81]]
ALPHA = [0.42, 0.58]


def exponential_model(rate=1.0):
    return mj.Model([1.0], [[-rate]])


def test_mat_exp_matches_scalar_exponential():
    out = mj.mat_exp(np.array([[-2.0]]), 0.7)
    assert out[0, 0] == pytest.approx(math.exp(-1.4), rel=1e-13)


def test_constant_transition_is_matrix_exponential():
    g = np.array([[-1.0, 0.6, 0.4], [0.2, -0.5, 0.3], [0.5, 0.5, -1.0]])
    model = mj.Model([1.0, 0.0, 0.0], g)
    qs = mj.QSequence(model, 4.0)
    res = mj.transition_series(qs, 0.3, 1.7)
    assert np.max(np.abs(res.P - mj.mat_exp(g, 1.4))) < 1e-10
    assert res.truncation_defect < 1e-11


def test_exponential_mixture_density():
    model = exponential_model()
    mix = mj.iph_weights(model, mj.QSequence(model, 100.0), 100000, 1e-16)
    ts = [0.0, 0.5, 1.0, 2.0]
    assert np.allclose(mix.pdf(ts), np.exp(-np.array(ts)), atol=1e-12)
    assert mix.mean() == pytest.approx(1.0, rel=1e-10)
    again = mj.ErlangMixture.from_json(mix.to_json())
    assert again.weights == mix.weights


def test_gompertz_json_model_and_cdf():
    text = json.dumps(
        {"p": 2, "alpha": ALPHA, "S": GOMPERTZ_S, "family": "gompertz", "beta": 1.0, "cap": 11.0}
    )
    model = mj.Model.from_json(text)
    mix = mj.iph_weights(model, mj.QSequence(model, 20.0), 40)
    ts = np.linspace(0.0, 6.0, 3001)
    pdf = np.array(mix.pdf(list(ts)))
    cdf = np.array(mix.cdf(list(ts)))
    assert np.all(np.diff(cdf) >= -1e-15)
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    assert trapezoid(pdf, ts) == pytest.approx(1.0 - mix.defect, abs=1e-5)


def test_ruin_closed_form():
    model = exponential_model()
    psi, defect = mj.ruin_curve(model, mj.QSequence(model, 100.0), 2500, 2.0, 1.0, [0.0, 1.0, 2.0])
    assert defect < 1e-8
    assert np.allclose(psi, 0.5 * np.exp(-np.array([0.0, 1.0, 2.0]) / 2.0), atol=1e-6)


def test_mph_single_margin_matches_univariate():
    model = mj.Model(ALPHA, GOMPERTZ_S, family="gompertz", cap=11.0)
    qs = mj.QSequence(model, 20.0)
    prof = mj.alpha_recursion(ALPHA, qs, 40)
    mix = mj.iph_weights(model, qs, 40, 0.0)
    ts = [0.1, 0.5, 1.0]
    values, excluded = mj.mph_density([ts], prof, np.ones((2, 1)))
    assert excluded == 0.0
    assert np.allclose(values, mix.pdf(ts), atol=1e-12)
    assert prof.rho_total + prof.defect == pytest.approx(1.0, abs=1e-14)


def test_simulation_is_deterministic():
    model = exponential_model()
    r = np.ones((1, 1))
    a = mj.mph_simulate(model, [1.0], r, 100, seed=5)
    b = mj.mph_simulate(model, [1.0], r, 100, seed=5)
    assert a == b


def test_errors_are_translated():
    with pytest.raises(ValueError):
        mj.Model([0.5, 0.5], [[-1.0]])
    with pytest.raises(ValueError):
        mj.Model.from_json("{not json")
    model = mj.Model([1.0], [[-10.0]])
    with pytest.raises(ArithmeticError):
        mj.QSequence(model, 2.0)[1]
