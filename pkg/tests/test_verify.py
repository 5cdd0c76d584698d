import math

import numpy as np
import pytest

from admissible import AdmissibleFunction
from calderon import KernelSpec, R_op
from rearrangement import DecreasingStep, SimpleFunction
from verify import (
    SUITES,
    FunctionCase,
    SuiteContext,
    VerificationError,
    VerificationReport,
    dyadic_family,
    merge_reports,
    staircase_family,
    verify_char_lower_bound,
    verify_converse,
    verify_corollary,
    verify_dilation,
    verify_fitted_stability,
    verify_forward,
    verify_gh_formulas,
    verify_lemma_identity,
    verify_lemma_infimum,
    verify_pg_qg_bounds,
    verify_remark_llogl,
    verify_remark_p0_1,
    verify_zygmund_recovery,
)

IDENTITY = AdmissibleFunction.power(1.0)
PLAIN = KernelSpec(2.0, 4.0)
WEIGHTED = KernelSpec(2.0, 4.0, IDENTITY)
LOG_WEIGHTED = KernelSpec(1.5, 4.0, AdmissibleFunction(1.0, (1.0,)))
ATOMS = SimpleFunction(((3.0, 0.5), (1.0, 1.0), (2.0, 0.25)))
SMALL_FAMILY = dyadic_family()[2:5] + [FunctionCase("atoms", ATOMS)]


def test_suite_registry():
    assert set(SUITES) == {
        "char-bound",
        "gh",
        "pgqg",
        "forward",
        "converse",
        "corollary",
        "remark",
        "remark-llogl",
        "zygmund",
        "lemma-identity",
        "lemma-infimum",
        "dilation",
        "stability",
    }
    assert not SUITES["gh"].needs_spec
    assert SUITES["forward"].needs_spec


def test_report_passed_follows_ratio():
    assert VerificationReport(suite="x", worst_ratio=1.0, threshold=2.0).passed
    assert not VerificationReport(suite="x", worst_ratio=3.0, threshold=2.0, passed=True).passed


def test_merge_reports_keeps_worst():
    low = VerificationReport(suite="x", worst_ratio=0.5, threshold=1.0)
    high = VerificationReport(suite="x", worst_ratio=2.0, threshold=1.0)
    merged = merge_reports([low, high], note="both")
    assert merged.worst_ratio == 2.0
    assert not merged.passed
    assert merged.details == {"note": "both", "parts": [0.5, 2.0]}


def test_char_lower_bound_anchor():
    indicator = DecreasingStep((1.0,), (1.0,))
    lhs = 2.0**-0.5 * (2.0 * (1.0 + math.log(2.0)) + 4.0)
    rhs = 2.0 * (1.0 + math.log(2.0)) * 2.0**-0.5
    assert R_op(WEIGHTED, indicator, 2.0) == pytest.approx(5.2229, abs=1e-3)
    assert R_op(WEIGHTED, indicator, 2.0) == pytest.approx(lhs, rel=1e-10)
    report = verify_char_lower_bound(WEIGHTED, 1.0, [2.0])
    assert report.worst_ratio == pytest.approx(rhs / lhs, rel=1e-10)
    assert rhs == pytest.approx(2.3945, abs=1e-3)
    assert report.passed


@pytest.mark.parametrize("spec", [PLAIN, WEIGHTED, KernelSpec(1.5, 8.0, AdmissibleFunction(1.0, (1.0,)))])
@pytest.mark.parametrize("m", [0.1, 1.0, 10.0])
def test_char_lower_bound_on_default_grid(spec, m):
    assert verify_char_lower_bound(spec, m).passed


def test_char_lower_bound_preconditions():
    with pytest.raises(VerificationError):
        verify_char_lower_bound(KernelSpec(1.0, 4.0), 1.0)
    with pytest.raises(VerificationError):
        verify_char_lower_bound(KernelSpec(2.0, math.inf), 1.0)


def test_gh_formulas():
    report = verify_gh_formulas(ATOMS, [0.1, 0.5, 0.75, 1.0, 2.0])
    assert report.passed
    assert report.details["reconstruction_error"] <= 1e-12


def test_pg_qg_bounds():
    report = verify_pg_qg_bounds(WEIGHTED, ATOMS)
    assert report.passed
    assert set(report.details) == {"pg", "qg", "average_chain", "average_below_p"}


@pytest.mark.parametrize("spec", [PLAIN, WEIGHTED, LOG_WEIGHTED], ids=lambda spec: spec.label)
def test_pg_qg_bounds_on_staircases(spec):
    for case in staircase_family(3, seed=21, max_pieces=10):
        assert verify_pg_qg_bounds(spec, case.f, function_id=case.id).passed, case.id


def test_forward_on_staircases():
    family = staircase_family(2, seed=3, max_pieces=8)
    report = verify_forward(PLAIN, family)
    assert report.passed
    assert report.details["fitted_constant"] == pytest.approx(report.worst_ratio)


def test_forward_on_decreasing_input_has_ratio_one():
    report = verify_forward(PLAIN, [FunctionCase("indicator", SimpleFunction.indicator(1.0))])
    assert report.worst_ratio == pytest.approx(1.0, rel=1e-9)


def test_forward_preconditions():
    with pytest.raises(VerificationError):
        verify_forward(KernelSpec(1.0, 4.0), SMALL_FAMILY)


def test_converse():
    report = verify_converse(PLAIN, 4.0, SMALL_FAMILY)
    assert report.passed
    assert report.details["Ak"] == pytest.approx(4.0, abs=1e-3)
    assert report.details["Ak_bound"] == pytest.approx(8.0)


def test_corollary_constants():
    report = verify_corollary(WEIGHTED, volume=1.0, family=SMALL_FAMILY)
    assert report.details["C_phi"] == pytest.approx(6.0, rel=1e-8)
    assert report.details["second_bound"] == pytest.approx(5.0, rel=1e-8)
    assert report.details["first_bound"] == 1.0
    assert report.passed


def test_corollary_preconditions():
    with pytest.raises(VerificationError):
        verify_corollary(PLAIN)
    with pytest.raises(VerificationError):
        verify_corollary(KernelSpec(1.0, 4.0, IDENTITY, delta=1))


def test_remark_p0_1():
    report = verify_remark_p0_1(IDENTITY, 4.0, SMALL_FAMILY)
    assert report.passed
    assert report.spec["delta"] == 1


def test_remark_llogl():
    report = verify_remark_llogl(1.0, 4.0, SMALL_FAMILY)
    assert report.threshold == pytest.approx(2.0)
    assert report.passed


def test_zygmund_recovery():
    report = verify_zygmund_recovery(SMALL_FAMILY)
    assert report.passed
    # S chi_(0,1](t) = 1 + log(1/t) on (0, 1)
    assert report.details["per_function"]["indicator-2^-1"] <= 1.0 + 1e-9


def test_lemma_identity():
    report = verify_lemma_identity(PLAIN, [FunctionCase("indicator", SimpleFunction.indicator(1.0))], [1.0])
    assert report.worst_ratio <= 1e-7
    assert verify_lemma_identity(WEIGHTED, SMALL_FAMILY).passed


def test_lemma_identity_for_log_weight():
    report = verify_lemma_identity(LOG_WEIGHTED, staircase_family(2, seed=9, max_pieces=6))
    assert report.passed
    assert report.params["t_points"] == 100


def test_lemma_infimum():
    report = verify_lemma_infimum(samples=200, seed=5)
    assert report.passed
    assert report.params == {"samples": 200, "seed": 5}
    assert report.details["search_worst_ratio"] >= report.worst_ratio * (1.0 - 1e-12)
    assert report.details["search_above_bound"] >= 0


def test_dilation():
    assert verify_dilation(WEIGHTED, samples=5, seed=1).passed


def test_seeded_runs_are_deterministic():
    assert staircase_family(3, seed=7) == staircase_family(3, seed=7)
    assert staircase_family(3, seed=7) != staircase_family(3, seed=8)
    first = verify_dilation(PLAIN, samples=4, seed=2)
    second = verify_dilation(PLAIN, samples=4, seed=2)
    assert first.model_dump() == second.model_dump()


def test_staircase_ids_and_values():
    family = staircase_family(2, seed=4, min_pieces=4, max_pieces=6)
    assert [case.id for case in family] == ["staircase-4-0", "staircase-4-1"]
    for case in family:
        assert all(0 < value <= 10.0 for value, _ in case.f.atoms)
        assert all(1e-2 * (1 - 1e-12) <= mass <= 1e2 * (1 + 1e-12) for _, mass in case.f.atoms)


def test_suite_run_through_context():
    ctx = SuiteContext(spec=PLAIN, family=SMALL_FAMILY, m_values=(1.0,), samples=3)
    assert SUITES["char-bound"].run(ctx).details["m_values"] == [1.0]
    assert SUITES["dilation"].run(ctx).params["samples"] == 3
    gh = SUITES["gh"].run(SuiteContext(family=SMALL_FAMILY, t_points=20))
    assert gh.passed
    assert len(gh.details["parts"]) == len(SMALL_FAMILY)


def test_report_serializes_infinite_ratio():
    report = VerificationReport(suite="x", worst_ratio=math.inf, threshold=1.0)
    assert not report.passed
    assert "Infinity" in report.model_dump_json()
    assert np.isinf(report.worst_ratio)


def test_grid_size_reaches_the_fitted_suites():
    family = staircase_family(2, seed=6, max_pieces=8)
    coarse = verify_forward(PLAIN, family, t_points=400)
    fine = verify_forward(PLAIN, family, t_points=800)
    assert coarse.params["t_points"] == 400
    assert fine.params["t_points"] == 800
    ctx = SuiteContext(spec=PLAIN, family=family, t_points=800)
    assert SUITES["forward"].run(ctx).params["t_points"] == 800
    assert SUITES["zygmund"].run(ctx).params["t_points"] == 800
    assert SUITES["remark"].run(ctx).params["t_points"] == 800
    assert SUITES["lemma-identity"].run(SuiteContext(spec=PLAIN, family=SMALL_FAMILY)).params["t_points"] == 100


@pytest.mark.parametrize("suite", ["forward", "remark", "zygmund"])
def test_fitted_constants_are_stable(suite):
    runs = {
        "forward": lambda family, points: verify_forward(PLAIN, family, t_points=points),
        "remark": lambda family, points: verify_remark_p0_1(IDENTITY, 4.0, family, t_points=points),
        "zygmund": lambda family, points: verify_zygmund_recovery(family, t_points=points),
    }
    families = [staircase_family(3, seed=11, max_pieces=8), staircase_family(3, seed=12, max_pieces=8)]
    report = verify_fitted_stability(suite, runs[suite], families, (400, 800))
    assert report.passed
    assert report.worst_ratio < 2.0
    assert len(report.details["fitted_constants"]) == 4
    assert report.params == {"suite": suite, "families": 2, "t_points": [400, 800]}


def test_stability_spread_of_a_vanishing_constant_is_infinite():
    def run(family, points):
        ratio = 0.0 if points == 400 else 1.0
        return VerificationReport(suite="x", worst_ratio=ratio, threshold=2.0, details={"fitted_constant": ratio})

    report = verify_fitted_stability("x", run, [dyadic_family()[:1]], (400, 800))
    assert math.isinf(report.worst_ratio)
    assert not report.passed


def test_stability_suite_through_context():
    ctx = SuiteContext(spec=PLAIN, family_count=2, seed=3, t_points=200)
    report = SUITES["stability"].run(ctx)
    assert report.passed
    assert report.details["suites"] == ["forward", "remark", "zygmund"]
    assert set(report.details["per_suite"]) == {"forward", "remark", "zygmund"}
    # no forward bound at p0 = 1
    classical = SUITES["stability"].run(SuiteContext(spec=KernelSpec(1.0, 4.0), family_count=2, t_points=200))
    assert classical.details["suites"] == ["remark", "zygmund"]
