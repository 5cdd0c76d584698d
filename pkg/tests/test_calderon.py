import math

import numpy as np
import pytest

from admissible import AdmissibleFunction
from calderon import (
    Ak_bound,
    Ak_norm,
    KernelSpec,
    KernelSpecError,
    OperatorProfile,
    P_op,
    Q_op,
    R_double_star,
    R_op,
    R_weak_norm,
    c_phi,
    dilation_check,
    kernel_cumulative,
    kernel_eval,
    operator_profile,
    profile_and_rearrange,
)
from libs.quadrature import integrate
from rearrangement import DecreasingStep, StepFunction, double_star

INDICATOR = DecreasingStep((1.0,), (1.0,))
IDENTITY = AdmissibleFunction.power(1.0)
PLAIN = KernelSpec(2.0, 4.0)
WEIGHTED = KernelSpec(2.0, 4.0, IDENTITY)
CLASSICAL = KernelSpec(1.0, math.inf)


def test_kernel_spec_validation():
    with pytest.raises(KernelSpecError):
        KernelSpec(0.5, 4.0)
    with pytest.raises(KernelSpecError):
        KernelSpec(2.0, 2.0)
    with pytest.raises(KernelSpecError):
        KernelSpec(2.0, 4.0, delta=1)
    with pytest.raises(KernelSpecError):
        KernelSpec(1.0, 4.0, delta=2)
    assert KernelSpec(1.0, math.inf, delta=1).p1_infinite


def test_p_of_indicator():
    assert P_op(PLAIN, INDICATOR, 1.0) == pytest.approx(2.0, rel=1e-12)
    assert P_op(PLAIN, INDICATOR, 0.5) == pytest.approx(2.0, rel=1e-12)
    assert P_op(WEIGHTED, INDICATOR, 1.0) == pytest.approx(6.0, rel=1e-10)
    # beyond the support P decays like t^(-1/p0)
    assert P_op(PLAIN, INDICATOR, 4.0) == pytest.approx(1.0, rel=1e-12)


def test_q_of_indicator():
    assert Q_op(PLAIN, INDICATOR, 0.5) == pytest.approx(4.0 * (2.0**0.25 - 1.0), rel=1e-12)
    assert Q_op(PLAIN, INDICATOR, 1.0) == 0.0
    assert Q_op(CLASSICAL, INDICATOR, 0.5) == pytest.approx(math.log(2.0), rel=1e-12)


def test_r_of_indicator():
    assert R_op(PLAIN, INDICATOR, 0.5) == pytest.approx(2.75683, abs=1e-5)
    values = R_op(PLAIN, INDICATOR, np.array([[0.5, 1.0], [2.0, 4.0]]))
    assert values.shape == (2, 2)
    assert values[0, 1] == pytest.approx(2.0)


def test_operators_reject_nonpositive_t():
    with pytest.raises(ValueError):
        R_op(PLAIN, INDICATOR, 0.0)


def test_classical_operator_on_indicator():
    # P is the average, Q the integral of f(s)/s over (t, inf)
    t = 0.25
    assert P_op(CLASSICAL, INDICATOR, t) == pytest.approx(1.0, rel=1e-12)
    assert R_op(CLASSICAL, INDICATOR, t) == pytest.approx(1.0 + math.log(4.0), rel=1e-12)
    assert P_op(CLASSICAL, INDICATOR, 4.0) == pytest.approx(0.25, rel=1e-12)


def test_operators_on_hyperbolic_input():
    fss = double_star(INDICATOR)
    # Q of f** at t = 1 is the integral of r^(-7/4) over (1, inf)
    assert Q_op(PLAIN, fss, 1.0) == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert R_op(PLAIN, fss, 1.0) == pytest.approx(10.0 / 3.0, rel=1e-12)


def test_p_matches_quadrature_for_log_weight():
    spec = KernelSpec(1.5, 4.0, AdmissibleFunction(gamma=1.0, log_exponents=(1.0,)))
    f = StepFunction((0.5, 2.0), (3.0, 1.0))
    t = 3.0

    def integrand(s):
        u = 1.0 - math.log(s / t)
        return float(spec.weight(u)) * float(f(s)) * s ** (1.0 / 1.5 - 1.0)

    expected = t ** (-1.0 / 1.5) * integrate(integrand, 0.0, 2.0, points=[0.5]).value
    assert P_op(spec, f, t) == pytest.approx(expected, rel=1e-7)


def test_r_double_star_anchor():
    assert R_double_star(PLAIN, INDICATOR, 1.0) == pytest.approx(10.0 / 3.0, abs=1e-8)


def test_r_double_star_matches_r_of_average():
    fstar = DecreasingStep((0.5, 1.0, 3.0), (4.0, 2.0, 1.0))
    ts = np.array([0.1, 0.5, 2.0, 10.0])
    left = R_double_star(WEIGHTED, fstar, ts)
    right = R_op(WEIGHTED, double_star(fstar), ts)
    np.testing.assert_allclose(left, right, rtol=1e-6)


def test_kernel_values():
    assert kernel_eval(CLASSICAL, 2.0, 1.0) == pytest.approx(0.5)
    assert kernel_eval(KernelSpec(1.0, math.inf, delta=1), 2.0, 1.0) == pytest.approx(0.5 * (1.0 + math.log(2.0)))
    assert kernel_eval(PLAIN, 1.0, 16.0) == pytest.approx(2.0 / 16.0)
    with pytest.raises(ValueError):
        kernel_eval(PLAIN, 0.0, 1.0)


def test_kernel_cumulative():
    assert kernel_cumulative(PLAIN, 1.0, 1.0) == pytest.approx(2.0, rel=1e-12)
    assert kernel_cumulative(PLAIN, 0.5, 8.0) == pytest.approx(6.0, rel=1e-12)
    assert kernel_cumulative(PLAIN, 1.0, 0.0) == 0.0
    values = kernel_cumulative(PLAIN, np.array([1.0, 2.0]), 16.0)
    np.testing.assert_allclose(values, [6.0, 2.0 + 4.0 * (8.0**0.25 - 1.0)])
    with pytest.raises(ValueError):
        kernel_cumulative(PLAIN, -1.0, 1.0)


def test_kernel_cumulative_matches_kernel_quadrature():
    t, s = 2.0, 5.0

    def k(r):
        return kernel_eval(WEIGHTED, t, r)

    expected = integrate(k, 0.0, s, points=[t]).value
    assert kernel_cumulative(WEIGHTED, t, s) == pytest.approx(expected, rel=1e-7)


@pytest.mark.parametrize(
    "spec, expected",
    [(WEIGHTED, 6.0), (PLAIN, 2.0), (KernelSpec(1.0, 4.0), 1.0), (KernelSpec(1.0, 4.0, IDENTITY, delta=1), 5.0)],
)
def test_c_phi(spec, expected):
    assert c_phi(spec) == pytest.approx(expected, rel=1e-8)


def test_ak_norm_and_bound():
    assert Ak_norm(PLAIN, 4.0) == pytest.approx(4.0, abs=1e-3)
    assert Ak_bound(PLAIN, 4.0) == pytest.approx(8.0)
    assert Ak_bound(CLASSICAL, 2.0) == math.inf
    with pytest.raises(ValueError):
        Ak_norm(PLAIN, 2.0)
    with pytest.raises(ValueError):
        Ak_bound(PLAIN, 5.0)


def test_ak_norm_below_bound_for_weighted_kernel():
    assert Ak_norm(WEIGHTED, 3.0) <= Ak_bound(WEIGHTED, 3.0)


@pytest.mark.parametrize(
    "phi", [AdmissibleFunction.one(), IDENTITY, AdmissibleFunction(1.0, (1.0,))], ids=lambda phi: phi.label
)
@pytest.mark.parametrize("p0, p1", [(1.5, 4.0), (2.0, 4.0), (3.0, 4.0), (1.5, 8.0), (2.0, 8.0), (3.0, 8.0)])
@pytest.mark.parametrize("where", [0.5, 1.0])
def test_ak_norm_below_bound_on_config_grid(phi, p0, p1, where):
    spec = KernelSpec(p0, p1, phi)
    p = p0 + where * (p1 - p0)
    assert Ak_norm(spec, p) <= Ak_bound(spec, p)


def test_r_weak_norm_of_indicator():
    assert R_weak_norm(PLAIN, INDICATOR, 4.0) == pytest.approx(4.0, rel=1e-9)
    assert R_weak_norm(PLAIN, DecreasingStep(), 4.0) == 0.0


def test_dilation():
    f = StepFunction((1.0,), (1.0,))
    dilated, shifted = dilation_check(PLAIN, f, 2.0, 0.25)
    assert dilated == pytest.approx(shifted, rel=1e-12)
    assert dilated == pytest.approx(2.75683, abs=1e-5)
    with pytest.raises(ValueError):
        dilation_check(PLAIN, f, 0.0, 1.0)


def test_operator_profile():
    f = StepFunction((1.0, 2.0), (1.0, 3.0))
    profile = operator_profile(PLAIN, f, grid=[0.5, 1.0, 2.0, 4.0], input_id="up")
    assert profile.grid == (0.5, 1.0, 2.0, 4.0)
    assert profile.values[0] == pytest.approx(float(R_op(PLAIN, f, 0.5)))
    assert profile.as_step()(0.75) == pytest.approx(profile.values[1])
    with pytest.raises(ValueError):
        OperatorProfile((1.0, 0.5), (1.0, 1.0), PLAIN)


def test_profile_of_decreasing_input_matches_r():
    grid = np.geomspace(1e-3, 1e3, 601)
    rearranged = profile_and_rearrange(PLAIN, INDICATOR, grid)
    np.testing.assert_allclose(rearranged(grid), R_op(PLAIN, INDICATOR, grid), rtol=1e-12)
    assert profile_and_rearrange(PLAIN, StepFunction(), grid) == DecreasingStep()
