import math
import warnings

import numpy as np
import pytest

from entire_approx.bandlimit import (
    BandlimitedFunction,
    MultiplierSpec,
    analyze,
    commutation_check,
    derivative,
    differentiate,
    estimate_type,
    kernel_norm_bound,
    max_type,
    multiplier_to_csv,
    multiplier_values,
    project,
    synthesize,
)
from entire_approx.builders import eigenfunction, random_bandlimited, smooth_random
from entire_approx.errors import ParameterError, ResolutionError
from entire_approx.function_space import Domain, GridFunction, norm


def test_synthesize_zero(circle):
    b = BandlimitedFunction(circle, np.zeros(circle.N), 3.0)
    assert np.all(synthesize(b).values == 0)


def test_synthesize_basis(circle):
    x = synthesize(BandlimitedFunction.from_modes(circle, {5: 1.0}))
    np.testing.assert_allclose(x.values, np.exp(5j * circle.t), atol=1e-13)


def test_synthesize_linear(circle):
    a = BandlimitedFunction.from_modes(circle, {2: 1.0})
    b = BandlimitedFunction.from_modes(circle, {-7: 0.5j})
    np.testing.assert_allclose(synthesize(a + b).values,
                               synthesize(a).values + synthesize(b).values, atol=1e-14)
    assert (a + b).sigma == 7


def test_line_basis_frequency():
    d = Domain.line(8.0, 128)
    x = synthesize(BandlimitedFunction.from_modes(d, {3: 1.0}))
    np.testing.assert_allclose(x.values, np.exp(1j * 3 * math.pi / 8 * d.t), atol=1e-13)


def test_support_exactly_zero_outside_band(circle):
    c = np.zeros(circle.N, complex)
    c[9] = 1e-30
    with pytest.raises(ParameterError):
        BandlimitedFunction(circle, c, 8.0)
    b = BandlimitedFunction.from_coefficients(circle, np.ones(circle.N), 8.0)
    assert b.band_edge() == 8.0


def test_unrepresentable_type(circle):
    assert max_type(circle) == circle.N / 2 - 1
    with pytest.raises(ResolutionError):
        BandlimitedFunction(circle, np.zeros(circle.N), circle.N / 2)


def test_analyze_detects_tight_edge(circle):
    x = GridFunction.from_callable(circle, lambda t: np.cos(3 * t) + 0.1 * np.sin(11 * t))
    b = analyze(x)
    assert b.tight and b.sigma == 11


def test_differentiate_eigen(circle):
    b = BandlimitedFunction.from_modes(circle, {5: 1.0})
    db = differentiate(b, 1)
    np.testing.assert_allclose(synthesize(db).values, 5j * synthesize(b).values, atol=1e-11)
    assert norm(synthesize(db)) == pytest.approx(5 * norm(synthesize(b)), rel=1e-13)


def test_differentiate_composition(circle, rng):
    b = random_bandlimited(circle, 20, rng)
    np.testing.assert_allclose(differentiate(b, 2).coeffs,
                               differentiate(differentiate(b, 1), 1).coeffs, rtol=1e-12)


def test_differentiate_order_bounds(circle):
    b = BandlimitedFunction.from_modes(circle, {1: 1.0})
    for n in (0, 21, 1.5):
        with pytest.raises(ParameterError):
            differentiate(b, n)


def test_cos_sup_norm_bernstein_equality():
    d = Domain.periodic(4096)
    for s in (1, 8, 64):
        x = GridFunction.from_callable(d, lambda t: np.cos(s * t))
        assert norm(derivative(x), np.inf) / norm(x, np.inf) == pytest.approx(s, rel=1e-6)


def test_derivative_of_smooth_function(circle):
    x = GridFunction.from_callable(circle, lambda t: np.exp(np.sin(t)))
    ref = np.cos(circle.t) * np.exp(np.sin(circle.t))
    np.testing.assert_allclose(derivative(x).values, ref, atol=1e-11)


def test_estimate_type_degree_five(circle, rng):
    c = {m: rng.standard_normal() for m in range(-5, 6)}
    b = BandlimitedFunction.from_modes(circle, c)
    assert estimate_type(b, 2) == pytest.approx(5.0, abs=1e-6)


def test_estimate_type_dominant_frequency(circle):
    b = BandlimitedFunction.from_modes(circle, {3: 1.0, 7: 1.0})
    assert estimate_type(b) == pytest.approx(7.0, abs=1e-6)


def test_estimate_type_zero(circle):
    assert estimate_type(BandlimitedFunction(circle, np.zeros(circle.N), 0.0)) == 0.0


def test_membership_constant_does_not_grow(circle, rng):
    # ||A^n b|| <= c sigma^n ||b|| with c independent of n
    b = random_bandlimited(circle, 12, rng)
    x = synthesize(b)
    cs = [norm(synthesize(differentiate(b, n))) / (12**n * norm(x)) for n in range(1, 13)]
    assert max(cs) <= 1 + 1e-12
    assert cs[-1] <= cs[0] * (1 + 1e-12)


def test_multiplier_profile_contract():
    m = MultiplierSpec(2.0)
    xi = np.linspace(-8, 8, 1601)
    v = m.profile(xi)
    assert np.all(v[np.abs(xi) <= 2] == 1) and np.all(v[np.abs(xi) >= 6] == 0)
    assert np.all((v >= 0) & (v <= 1))
    np.testing.assert_array_equal(v, m.profile(-xi))
    s = MultiplierSpec(2.0, "smooth_bump").profile(xi)
    assert np.all(s[np.abs(xi) <= 2] == 1) and np.all(s[np.abs(xi) >= 6] == 0)


def test_periodic_multiplier_integer_contract(circle):
    m = MultiplierSpec(2.5)
    v = multiplier_values(m, circle)
    assert np.all(v[np.abs(circle.xi) <= 2] == 1)
    assert np.all(v[np.abs(circle.xi) >= 8] == 0)


@pytest.mark.parametrize("bad", [dict(alpha=0), dict(alpha=1, stop=1), dict(alpha=1, transition="x")])
def test_multiplier_validation(bad):
    with pytest.raises(ParameterError):
        MultiplierSpec(**bad)


def test_project_identity_on_band(circle):
    x = GridFunction.from_callable(circle, lambda t: np.sin(5 * t))
    y = synthesize(project(x, MultiplierSpec(5.0)))
    assert norm(y - x) / norm(x) <= 1e-14


def test_project_kills_high_frequency(circle):
    x = eigenfunction(circle, 10)
    y = synthesize(project(x, MultiplierSpec(3.0, stop=9.0)))
    assert norm(y) <= 1e-14


def test_project_idempotent_outside_transition(circle, rng):
    # m^2 = m wherever the spectrum of x lives (pass band and stop band only)
    m = MultiplierSpec(8.0)
    c = np.where((np.abs(circle.xi) <= 8) | (np.abs(circle.xi) >= 24),
                 rng.standard_normal(circle.N), 0)
    x = synthesize(BandlimitedFunction.from_coefficients(circle, c, max_type(circle)))
    once = synthesize(project(x, m))
    twice = synthesize(project(once, m))
    np.testing.assert_allclose(twice.values, once.values, atol=1e-12)


def test_project_not_idempotent_in_transition(circle):
    # documents why idempotence is only asserted outside the transition band
    x = eigenfunction(circle, 12)
    m = MultiplierSpec(8.0)
    once = synthesize(project(x, m))
    twice = synthesize(project(once, m))
    assert norm(twice - once) > 0.1 * norm(once)


def test_projection_bounded_by_kernel_norm(line, rng):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = MultiplierSpec(1.0)
        C = kernel_norm_bound(m, line)
    for _ in range(5):
        x = smooth_random(line, rng)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            px = synthesize(project(x, m))
        assert norm(px) <= C * norm(x) * (1 + 1e-12)


def test_alpha_snaps_on_line(line):
    with pytest.warns(UserWarning, match="snapped"):
        b = project(smooth_random(line, np.random.default_rng(1)), MultiplierSpec(1.0))
    k = b.sigma / 3 / line.dxi
    assert k == pytest.approx(round(k), abs=1e-9)


def test_commutation(circle, rng):
    assert commutation_check(eigenfunction(circle, 2), MultiplierSpec(3.0)) <= 1e-15
    for _ in range(5):
        x = smooth_random(circle, rng)
        assert commutation_check(x, MultiplierSpec(4.0)) <= 1e-10


def test_multiplier_csv(tmp_path, circle):
    path = tmp_path / "m.csv"
    multiplier_to_csv(MultiplierSpec(2.0), circle, path)
    rows = path.read_text().splitlines()
    assert rows[0] == "xi,mhat" and len(rows) == circle.N + 1
    xi, v = np.loadtxt(path, delimiter=",", skiprows=1).T
    assert np.all(np.diff(xi) > 0)
    np.testing.assert_array_equal(v, MultiplierSpec(2.0).profile(xi))
