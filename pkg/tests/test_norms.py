import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from admissible import AdmissibleFunction
from norms import (
    LorentzParams,
    lexp_norm,
    llogl_log3_norm,
    llogl_norm,
    lorentz_norm,
    lorentz_norm_from_distribution,
    mphi_norm,
    philog_norm,
    weak_lorentz_norm,
    weak_lorentz_norm_from_distribution,
)
from rearrangement import DecreasingStep, SimpleFunction, double_star, rearrange

INDICATOR = DecreasingStep((1.0,), (1.0,))
TWO_STEPS = SimpleFunction(((1.0, 3.0), (2.0, 1.0)))

atoms_strategy = st.lists(
    st.tuples(st.floats(min_value=1e-3, max_value=10.0), st.floats(min_value=1e-2, max_value=1e2)),
    min_size=1,
    max_size=16,
)


def test_lorentz_norm_of_indicator():
    assert lorentz_norm(DecreasingStep((4.0,), (1.0,)), LorentzParams(2.0, 1.0)) == pytest.approx(4.0)
    assert lorentz_norm(INDICATOR, LorentzParams(4.0, 1.0)) == pytest.approx(4.0)


def test_weak_lorentz_norm_of_two_steps():
    fstar = rearrange(TWO_STEPS)
    assert fstar == DecreasingStep((1.0, 4.0), (2.0, 1.0))
    assert weak_lorentz_norm(fstar, 2.0) == pytest.approx(2.0)
    assert lorentz_norm(fstar, LorentzParams(2.0, math.inf)) == pytest.approx(2.0)
    assert weak_lorentz_norm_from_distribution(TWO_STEPS, 2.0) == pytest.approx(2.0)


def test_lorentz_params_validation():
    with pytest.raises(ValueError):
        LorentzParams(0.5)
    with pytest.raises(ValueError):
        LorentzParams(2.0, 0.0)


@settings(max_examples=100, deadline=None)
@given(atoms=atoms_strategy, p=st.floats(min_value=1.0, max_value=8.0), q=st.sampled_from([1.0, 2.0, 0.5]))
def test_distribution_form_agrees(atoms, p, q):
    f = SimpleFunction(tuple(atoms))
    params = LorentzParams(p, q)
    assert lorentz_norm_from_distribution(f, params) == pytest.approx(lorentz_norm(rearrange(f), params), rel=1e-9)


def test_llogl_norm_anchors():
    assert llogl_norm(INDICATOR, 1.0) == pytest.approx(2.0, rel=1e-10)
    assert llogl_norm(DecreasingStep((math.e,), (1.0,)), 1.0) == pytest.approx(math.e + 1.0, rel=1e-10)
    # alpha = 0 is the L^1 norm
    assert llogl_norm(DecreasingStep((0.5, 3.0), (2.0, 1.0)), 0.0) == pytest.approx(3.5, rel=1e-10)


def test_llogl_log3_norm_of_indicator_exceeds_llogl():
    value = llogl_log3_norm(INDICATOR)
    assert math.isfinite(value)
    assert value > llogl_norm(INDICATOR, 1.0)


def test_philog_norm_anchor():
    assert philog_norm(INDICATOR, 2.0, AdmissibleFunction.power(1.0)) == pytest.approx(6.0, rel=1e-10)
    # phi = 1 gives the L^(p,1) norm
    fstar = DecreasingStep((0.25, 4.0), (3.0, 1.0))
    assert philog_norm(fstar, 2.0, AdmissibleFunction.one()) == pytest.approx(
        lorentz_norm(fstar, LorentzParams(2.0, 1.0)), rel=1e-10
    )


def test_zero_function_norms():
    zero = DecreasingStep()
    assert lorentz_norm(zero, LorentzParams(2.0)) == 0.0
    assert weak_lorentz_norm(zero, 2.0) == 0.0
    assert llogl_norm(zero, 1.0) == 0.0
    assert philog_norm(zero, 2.0, AdmissibleFunction.power(1.0)) == 0.0


def test_mphi_and_lexp_of_indicator():
    fss = double_star(INDICATOR)
    assert mphi_norm(fss) == pytest.approx(1.0)
    assert lexp_norm(fss) == pytest.approx(1.0)


def test_mphi_norm_takes_largest_end_value():
    # f** = 2 on (0, 2], 4/t beyond: t f**(t) / (1 + log t) peaks at t = 2
    fss = double_star(DecreasingStep((2.0,), (2.0,)))
    assert mphi_norm(fss) == pytest.approx(4.0 / (1.0 + math.log(2.0)))
