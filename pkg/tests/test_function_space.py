import math

import numpy as np
import pytest

from entire_approx.builders import eigenfunction, gaussian_packet, random_bandlimited
from entire_approx.bandlimit import synthesize
from entire_approx.errors import ParameterError, RangeError
from entire_approx.function_space import (
    Domain,
    GridFunction,
    check_truncation,
    finite_difference,
    finite_difference_by_shifts,
    group_norm_bound,
    modulus_curve,
    modulus_of_continuity,
    norm,
    shift,
)
from entire_approx.weights import constant, exp_power


def test_grids():
    d = Domain.periodic(64)
    np.testing.assert_allclose(d.t, 2 * np.pi * np.arange(64) / 64)
    ln = Domain.line(2.0, 64)
    np.testing.assert_allclose(ln.t, -2.0 + 4.0 * np.arange(64) / 64)
    assert ln.dxi == pytest.approx(math.pi / 2.0)


@pytest.mark.parametrize("N", [32, 100, 1000])
def test_bad_grid_size(N):
    with pytest.raises(ParameterError):
        Domain.periodic(N)


def test_periodic_domain_has_no_weight():
    with pytest.raises(ParameterError):
        Domain("periodic", 64, None, exp_power(0.5))


def test_non_finite_values_rejected(circle):
    v = np.zeros(circle.N)
    v[3] = np.nan
    with pytest.raises(ParameterError):
        GridFunction(circle, v)


def test_norm_sin(circle):
    x = GridFunction.from_callable(circle, np.sin)
    assert norm(x, 2) == pytest.approx(math.sqrt(math.pi), rel=1e-12)


@pytest.mark.parametrize("p", [1, 2, 3.5, np.inf])
def test_norm_zero(circle, p):
    assert norm(GridFunction(circle, np.zeros(circle.N)), p) == 0.0


def test_norm_constant_on_line():
    d = Domain.line(1.0, 64)
    assert norm(GridFunction(d, np.ones(64)), 1) == pytest.approx(2.0, rel=1e-14)


def test_norm_rejects_p_below_one(circle):
    with pytest.raises(ParameterError):
        norm(GridFunction(circle, np.ones(circle.N)), 0.5)


def test_weighted_sup_norm(line):
    x = gaussian_packet(line, 0.0, 4.0)
    ref = np.max(np.abs(x.values) * np.exp(np.sqrt(np.abs(line.t))))
    assert norm(x, np.inf) == pytest.approx(ref, rel=1e-14)


def test_parseval(circle, rng):
    x = GridFunction(circle, rng.standard_normal(circle.N) + 1j * rng.standard_normal(circle.N))
    c = x.coefficients()
    assert norm(x, 2) ** 2 == pytest.approx(2 * math.pi * np.sum(np.abs(c) ** 2), rel=1e-10)


def test_shift_identity_and_eigen(circle):
    x = eigenfunction(circle, 3)
    assert shift(x, 0.0) is x
    tau = 0.37
    np.testing.assert_allclose(shift(x, tau).values, np.exp(3j * tau) * x.values, atol=1e-12)


def test_shift_group_inverse(circle, rng):
    x = synthesize(random_bandlimited(circle, 40, rng))
    back = shift(shift(x, 0.3), -0.3)
    np.testing.assert_allclose(back.values, x.values, atol=1e-12)


def test_shift_is_translation(circle):
    # x(t + tau) for a smooth periodic function
    x = GridFunction.from_callable(circle, lambda t: np.exp(np.cos(t)))
    got = shift(x, 0.25)
    np.testing.assert_allclose(got.values, np.exp(np.cos(circle.t + 0.25)), atol=1e-12)


def test_line_shift_range(line):
    x = gaussian_packet(line, 0.0, 4.0)
    shift(x, line.L / 4)
    with pytest.raises(RangeError):
        shift(x, line.L / 4 + 1e-9)


def test_finite_difference_order_zero_and_h_zero(circle, rng):
    x = synthesize(random_bandlimited(circle, 10, rng))
    assert finite_difference(x, 0.4, 0) is x
    assert np.max(np.abs(finite_difference(x, 0.0, 1).values)) == 0.0


def test_finite_difference_eigen(circle):
    x = eigenfunction(circle, 1)
    h = 0.2
    np.testing.assert_allclose(finite_difference(x, h, 2).values,
                               (np.exp(1j * h) - 1) ** 2 * x.values, atol=1e-13)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_finite_difference_matches_binomial_shifts(circle, rng, k):
    x = synthesize(random_bandlimited(circle, 30, rng))
    a = finite_difference(x, 0.11, k).values
    b = finite_difference_by_shifts(x, 0.11, k).values
    np.testing.assert_allclose(a, b, atol=1e-11)


def test_finite_difference_recursion(circle, rng):
    x = synthesize(random_bandlimited(circle, 30, rng))
    h = 0.07
    lhs = finite_difference(x, h, 3).values
    rhs = finite_difference(shift(x, h) - x, h, 2).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_finite_difference_order_limit(circle):
    x = eigenfunction(circle, 1)
    with pytest.raises(ParameterError):
        finite_difference(x, 0.1, 9)
    with pytest.raises(ParameterError):
        finite_difference(x, 0.1, -1)


def test_modulus_zero_at_zero(circle):
    assert modulus_of_continuity(eigenfunction(circle, 4), 0.0) == 0.0


@pytest.mark.parametrize("m", [1, 3, 7, 20])
def test_modulus_eigen_closed_form(circle, m):
    x = eigenfunction(circle, m)
    nx = norm(x)
    for t in np.linspace(0.01, math.pi / m, 7):
        ref = 2 * abs(math.sin(m * t / 2)) * nx
        assert modulus_of_continuity(x, t, 1, 2) == pytest.approx(ref, rel=1e-8)


def test_modulus_curve_monotone(circle, rng):
    x = synthesize(random_bandlimited(circle, 50, rng))
    t = np.linspace(0.001, 1.0, 40)[::-1]
    w = modulus_curve(x, t, 2, 2, 16)
    order = np.argsort(t)
    assert np.all(np.diff(w[order]) >= 0)


def test_modulus_crude_bound(line, rng):
    x = synthesize(random_bandlimited(line, 4.0, rng))
    t, k = 3.0, 2
    bound = (group_norm_bound(line, t) + 1) ** k * norm(x)
    assert modulus_of_continuity(x, t, k) <= bound * (1 + 1e-8)


def test_group_norm_bound_values():
    assert group_norm_bound(Domain.periodic(64), 123.0) == 1.0
    assert group_norm_bound(Domain.line(10.0, 64, constant()), 5.0) == 1.0
    d = Domain.line(10.0, 64, exp_power(0.5))
    assert group_norm_bound(d, 4.0) == pytest.approx(math.exp(2.0), rel=1e-14)


def test_weighted_shift_operator_norm(line, rng):
    taus = np.linspace(0, line.L / 8, 9)
    for _ in range(5):
        x = synthesize(random_bandlimited(line, 2.0, rng))
        nx = norm(x)
        for tau in taus:
            assert norm(shift(x, tau)) / nx <= group_norm_bound(line, tau) * (1 + 1e-8)


def test_truncation_validator(line):
    check_truncation(gaussian_packet(line, 0.0, 4.0))
    with pytest.raises(ParameterError, match="decay"):
        check_truncation(gaussian_packet(line, 0.0, 60.0))


def test_csv_roundtrip(tmp_path, line):
    x = gaussian_packet(line, 1.0, 3.0, 0.5)
    path = tmp_path / "x.csv"
    x.to_csv(path)
    y = GridFunction.from_csv(path)
    assert y.domain == line
    np.testing.assert_array_equal(y.values, x.values)
