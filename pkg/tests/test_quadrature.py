import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from libs.quadrature import (
    ZERO,
    QuadratureError,
    QuadratureResult,
    gamma_tail,
    integrate,
    integrate_log_singular,
    integrate_segments,
    integrate_to_infinity,
    set_default_tolerances,
    QUADRATURE_SETTINGS,
)


def test_integrate_polynomial():
    result = integrate(lambda x: x * x, 0.0, 1.0)
    assert result.value == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert result.error_estimate < 1e-10
    assert result.evaluations > 0


def test_integrate_jump_with_points():
    result = integrate(lambda x: 1.0 if x <= 1.0 else 3.0, 0.0, 2.0, points=[1.0])
    assert result.value == pytest.approx(4.0, abs=1e-10)


def test_integrate_empty_and_reversed():
    assert integrate(math.exp, 2.0, 2.0) == ZERO
    with pytest.raises(ValueError):
        integrate(math.exp, 2.0, 1.0)
    with pytest.raises(ValueError):
        integrate(math.exp, 0.0, math.inf)


def test_integrate_reports_partial_result():
    with pytest.raises(QuadratureError) as e:
        integrate(lambda x: math.sin(1000.0 * x), 0.0, 100.0, max_subdivisions=5)
    assert isinstance(e.value.partial, QuadratureResult)
    assert isinstance(e.value, ArithmeticError)


def test_result_addition():
    total = QuadratureResult(1.0, 1e-3, 10) + QuadratureResult(2.0, 2e-3, 5)
    assert total == QuadratureResult(3.0, 3e-3, 15)


def test_integrate_to_infinity_exponential():
    result = integrate_to_infinity(lambda x: math.exp(-x), 0.0, lambda u: math.exp(-u))
    assert result.value == pytest.approx(1.0, abs=1e-9)
    assert result.error_estimate <= 2.0 * max(QUADRATURE_SETTINGS.abs_tol, QUADRATURE_SETTINGS.rel_tol * result.value)


def test_gamma_tail():
    assert gamma_tail(0.0, 1.0, 2.0) == pytest.approx(math.exp(-2.0))
    assert gamma_tail(1.0, 1.0, 0.0) == pytest.approx(1.0)
    assert gamma_tail(1.0, 0.5, 0.0) == pytest.approx(4.0)


@pytest.mark.parametrize(
    "t, weight, beta, expected",
    [
        (1.0, lambda u: 1.0, 0.0, 2.0),
        (4.0, lambda u: 1.0, 0.0, 4.0),
        (1.0, lambda u: u, 1.0, 6.0),
    ],
)
def test_integrate_log_singular(t, weight, beta, expected):
    result = integrate_log_singular(lambda s: 1.0, t, 2.0, weight, beta)
    assert result.value == pytest.approx(expected, rel=1e-9)


def test_integrate_segments_cumulative():
    cumulative, error = integrate_segments(lambda x: x * x, [0.0, 1.0, 2.0, 3.0])
    np.testing.assert_allclose(cumulative, [0.0, 1.0 / 3.0, 8.0 / 3.0, 9.0], rtol=1e-12)
    assert error < 1e-9


def test_integrate_segments_rejects_unsorted():
    with pytest.raises(ValueError):
        integrate_segments(np.exp, [1.0, 0.0])


def test_integrate_segments_non_convergence():
    with pytest.raises(QuadratureError) as e:
        integrate_segments(lambda x: np.sin(1000.0 * x), [0.0, 1.0], max_subdivisions=3)
    assert isinstance(e.value.partial, QuadratureResult)


def test_integrate_segments_jump_on_an_edge_is_exact():
    jump = 0.123456789
    cumulative, error = integrate_segments(lambda x: np.sign(x - jump), [0.0, jump, 1.0])
    np.testing.assert_allclose(cumulative, [0.0, -jump, 1.0 - 2.0 * jump], rtol=1e-13, atol=1e-15)
    assert error < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=-20.0, max_value=20.0), min_size=2, max_size=8))
def test_integrate_segments_matches_antiderivative(points):
    edges = np.sort(np.asarray(points))
    cumulative, _ = integrate_segments(np.cos, edges)
    np.testing.assert_allclose(cumulative, np.sin(edges) - np.sin(edges[0]), atol=1e-9)


def test_set_default_tolerances():
    set_default_tolerances(abs_tol=1e-6)
    assert QUADRATURE_SETTINGS.abs_tol == 1e-6
    with pytest.raises(ValueError):
        set_default_tolerances(rel_tol=0.0)
