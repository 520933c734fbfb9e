import math

import numpy as np
import pytest
from scipy import special

from entire_approx import weights as W
from entire_approx.errors import ParameterError


def test_constant_is_one():
    # class 1 weight is identically 1
    assert W.eval_weight(W.constant(), 7.3) == 1.0


def test_exp_power_at_zero():
    assert W.eval_weight(W.exp_power(0.5), 0.0) == 1.0


def test_polynomial_direct_value():
    # (1 + |3|)^2
    assert W.eval_weight(W.polynomial(1.0, 2), 3.0) == 16.0
    assert W.eval_weight(W.polynomial(1.0, 2), -3.0) == 16.0


@pytest.mark.parametrize("t", [0.0, 0.7, 4.0, 19.5])
def test_exp_power_formula(t):
    assert W.eval_weight(W.exp_power(0.5), t) == pytest.approx(math.exp(math.sqrt(t)), rel=1e-14)


def test_factorial_series_is_exponential():
    # sum t^n / n! = e^t
    t = np.linspace(0.0, 20.0, 401)
    w = W.power_series({"rule": "factorial"})
    got = W.eval_weight(w, t)
    np.testing.assert_allclose(got, np.exp(t), rtol=1e-10, atol=0)


def test_factorial_power_series_is_bessel():
    # sum t^n / (n!)^2 = I_0(2 sqrt t)
    w = W.power_series({"rule": "factorial_power", "s": 2})
    for t in (0.5, 3.0, 12.0, 20.0):
        assert W.eval_weight(w, t) == pytest.approx(special.i0(2 * math.sqrt(t)), rel=1e-12)


def test_list_power_series():
    w = W.power_series({"rule": "list", "values": [1.0, 1.0, 2.0]})
    assert W.eval_weight(w, 2.0) == pytest.approx(1 + 2 + 4 / 2, rel=1e-14)


def test_entire_modulus_matches_truncated_product():
    # C * prod sqrt(1 + t^2 / t_k^2), t_k = k^2; oracle: 10^6 factors plus the
    # first term of the log1p tail expansion
    w = W.entire_modulus({"rule": "power", "a": 1.0, "q": 2.0}, C=2.0)
    t = 3.0
    k = np.arange(1, 10**6 + 1, dtype=float)
    log_head = 0.5 * np.sum(np.log1p(t**2 / k**4))
    tail = 0.5 * t**2 * (1.0 / 3.0) * (10**6) ** -3
    ref = 2.0 * math.exp(log_head + tail)
    assert W.eval_weight(w, t) == pytest.approx(ref, rel=1e-12)


def test_entire_modulus_finite_list():
    w = W.entire_modulus({"rule": "list", "values": [1.0, 2.0]}, C=1.0)
    ref = math.sqrt(1 + 9.0) * math.sqrt(1 + 9.0 / 4)
    assert W.eval_weight(w, 3.0) == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize(
    "kind, params",
    [
        ("exp_power", {"beta": 1.5}),
        ("exp_power", {"beta": 0.0}),
        ("polynomial", {"M": 0.5, "k": 1}),
        ("polynomial", {"M": 1.0, "k": 1.5}),
        ("entire_modulus", {"t_seq": {"rule": "list", "values": [2.0, 1.0]}}),
        ("entire_modulus", {"t_seq": {"rule": "power", "a": 1.0, "q": 1.0}}),
        ("power_series", {"m_seq": {"rule": "nope"}}),
        ("gaussian", {}),
    ],
)
def test_invalid_parameters_rejected(kind, params):
    with pytest.raises(ParameterError):
        W.WeightSpec(kind, params)


def test_record_roundtrip():
    w = W.exp_power(0.5)
    rec = w.to_record()
    assert rec == {"class": "exp_power", "params": {"beta": 0.5}}
    assert W.WeightSpec.from_record(rec) == w


@pytest.mark.parametrize(
    "w",
    [W.constant(), W.polynomial(1.0, 2), W.exp_power(0.5),
     W.power_series({"rule": "factorial_power", "s": 2})],
    ids=["constant", "polynomial", "exp_power", "factorial_power"],
)
def test_admissible_classes(w):
    rep = W.check_admissibility(w, T_max=20, n_samples=200)
    assert rep.admissible, rep.notes
    assert rep.geq_one and rep.even and rep.monotone and rep.submultiplicative
    assert rep.log_integrable and rep.log_summable and rep.conditions_agree


def test_exp_abs_fails_condition_four():
    # int ln(e^t) / (1 + t^2) = 1/2 ln(1 + T^2) keeps growing under doubling
    rep = W.check_admissibility(W.exp_power(1.0, force=True))
    assert rep.submultiplicative and rep.monotone
    assert not rep.log_integrable and not rep.log_summable
    assert not rep.admissible
    T, last = rep.integral_partials[-1]
    assert last == pytest.approx(0.5 * math.log1p(T**2), rel=1e-3)


def test_factorial_series_fails_condition_four():
    rep = W.check_admissibility(W.power_series({"rule": "factorial"}))
    assert not rep.log_integrable


def test_entire_modulus_submultiplicativity_depends_on_C():
    # C = 1 is not submultiplicative near the origin scale of t_1; C = 2 is
    t_seq = {"rule": "power", "a": 1.0, "q": 2.0}
    bad = W.check_admissibility(W.entire_modulus(t_seq, C=1.0))
    good = W.check_admissibility(W.entire_modulus(t_seq, C=2.0))
    assert not bad.submultiplicative and bad.worst_submult_excess > 0.1
    assert good.admissible


def test_check_admissibility_bounds():
    with pytest.raises(ParameterError):
        W.check_admissibility(W.constant(), T_max=5)
    with pytest.raises(ParameterError):
        W.check_admissibility(W.constant(), n_samples=10)
