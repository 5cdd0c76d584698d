"""Subcommands of xlab. Each returns the process exit status and the text to emit."""

import csv
import io
import json
import logging
import math
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from admissible.base import phi_check
from calderon.base import P_op, Q_op, R_op
from cli.config import ConfigError, RunConfig, dump_config
from libs.utils import log_grid, ordered_map, str_shortening
from norms.base import (
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
from rearrangement.operations import double_star, rearrange
from verify import DEFAULT_T_POINTS, SUITES, SuiteContext, VerificationReport

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

CommandResult = Tuple[int, str]


def format_number(value: float) -> str:
    """Shortest round-trip text of a float, integral values without the trailing '.0'."""
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def to_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def cmd_check_phi(config: RunConfig) -> CommandResult:
    """Normalization, log-concavity, envelope and submultiplicativity checks of the configured phi."""
    phi = config.phi.build()
    report = phi_check(phi, log_grid(1.0, config.phi_grid_max, config.grid.t_points or DEFAULT_T_POINTS))
    logger.info(f"check-phi {phi.label}: passed={report.passed}, degenerate={report.degenerate}")
    status = EXIT_OK if report.passed else EXIT_FAILED
    if config.output.format == "csv":
        rows = [
            ("normalization", report.normalization, report.normalization_error),
            ("log_concavity", report.log_concavity, report.log_concavity_margin),
            ("envelope", report.envelope, report.envelope_margin),
            ("submultiplicative", report.submultiplicative, report.submultiplicative_margin),
        ]
        return status, to_csv(("check", "passed", "margin"), rows)
    return status, to_json({**report.model_dump(mode="json"), "passed": report.passed})


def cmd_rearrange(config: RunConfig) -> CommandResult:
    """f* and f** of the configured function literal."""
    fstar = rearrange(config.function.as_simple())
    if config.output.format == "csv":
        return EXIT_OK, to_csv(("breakpoint", "value"), zip(fstar.breakpoints, fstar.values))
    fss = double_star(fstar)
    bounds = ["inf" if math.isinf(b) else b for b in fss.bounds]
    return EXIT_OK, to_json(
        {
            "breakpoints": list(fstar.breakpoints),
            "values": list(fstar.values),
            "total_mass": fstar.support_end,
            "double_star": {"bounds": bounds, "a": list(fss.a), "b": list(fss.b)},
        }
    )


def _norm_value(config: RunConfig) -> Dict[str, float]:
    norm = config.norm
    f = config.function.as_simple()
    fstar = rearrange(f)
    if norm.kind == "lorentz":
        params = LorentzParams(norm.p, norm.q)
        return {"value": lorentz_norm(fstar, params), "from_distribution": lorentz_norm_from_distribution(f, params)}
    if norm.kind == "weak-lorentz":
        return {
            "value": weak_lorentz_norm(fstar, norm.p),
            "from_distribution": weak_lorentz_norm_from_distribution(f, norm.p),
        }
    if norm.kind == "llogl":
        return {"value": llogl_norm(fstar, norm.alpha)}
    if norm.kind == "llogl-log3":
        return {"value": llogl_log3_norm(fstar)}
    if norm.kind == "philog":
        return {"value": philog_norm(fstar, norm.p, norm.phi.build())}
    if norm.kind == "mphi":
        return {"value": mphi_norm(double_star(fstar))}
    return {"value": lexp_norm(double_star(fstar))}


def cmd_norm(config: RunConfig) -> CommandResult:
    """One rearrangement-invariant norm of the configured function literal."""
    values = _norm_value(config)
    logger.info(f"norm {config.norm.kind}: {values}")
    if config.output.format == "csv":
        return EXIT_OK, to_csv(("norm", "value"), [(config.norm.kind, values["value"])])
    return EXIT_OK, to_json({"norm": config.norm.model_dump(mode="json"), **values})


def apply_grid(config: RunConfig) -> np.ndarray:
    """Explicit t values, or a log grid around the support of the function widened by t_span_decades."""
    if config.grid.t_values:
        return np.unique(np.asarray(config.grid.t_values, dtype=float))
    g = config.function.as_step()
    span = 10.0**config.grid.t_span_decades
    lo, hi = (g.breakpoints[0], g.support_end) if not g.is_zero else (1.0, 1.0)
    return log_grid(lo / span, hi * span, config.grid.t_points or DEFAULT_T_POINTS)


def cmd_apply(config: RunConfig) -> CommandResult:
    """Table of (t, P f, Q f, R f) for the first configured spec."""
    if len(config.specs) > 1:
        logger.warning(f"apply uses the first of {len(config.specs)} specs")
    spec = config.specs[0].build()
    g = config.function.as_step()
    ts = apply_grid(config)
    p, q, r = (np.asarray(op(spec, g, ts), dtype=float) for op in (P_op, Q_op, R_op))
    rows = [(float(t), float(a), float(b), float(c)) for t, a, b, c in zip(ts, p, q, r)]
    if config.output.format == "csv":
        return EXIT_OK, to_csv(("t", "P", "Q", "R"), rows)
    return EXIT_OK, to_json(
        {"spec": config.specs[0].model_dump(mode="json"), "rows": [dict(zip("tPQR", row)) for row in rows]}
    )


def suite_contexts(config: RunConfig) -> List[SuiteContext]:
    """One context per spec, or a single spec-free one when the suite needs no kernel."""
    suite = SUITES[config.suite]
    family = config.family.build()
    common = dict(
        family=family,
        family_count=config.family.count,
        t_values=tuple(config.grid.t_values) if config.grid.t_values else None,
        t_points=config.grid.t_points,
        t_span_decades=config.grid.t_span_decades,
        p=config.verify.p,
        m_values=tuple(config.verify.m_values),
        volume=config.verify.volume,
        alpha=config.verify.alpha,
        samples=config.verify.samples,
        seed=config.family.seed,
    )
    if not suite.needs_spec:
        return [SuiteContext(**common)]
    return [SuiteContext(spec=spec.build(), **common) for spec in config.specs]


def cmd_verify(config: RunConfig) -> CommandResult:
    """Run the configured suite for every spec; exit 0 iff every report passed."""
    if config.suite not in SUITES:
        raise ConfigError(f"unknown suite '{config.suite}', expected one of {sorted(SUITES)}")
    suite = SUITES[config.suite]
    logger.info(f"verify {suite.name}: {str_shortening(dump_config(config))}")
    reports: List[VerificationReport] = ordered_map(suite.run, suite_contexts(config))
    passed = all(report.passed for report in reports)
    for report in reports:
        logger.info(f"{report.suite} {report.spec}: worst ratio {report.worst_ratio:.6g} <= {report.threshold:g}")
    status = EXIT_OK if passed else EXIT_FAILED
    if config.output.format == "csv":
        rows = [
            (r.suite, json.dumps(r.spec, sort_keys=True), float(r.worst_ratio), float(r.threshold), r.passed)
            for r in reports
        ]
        return status, to_csv(("suite", "spec", "worst_ratio", "threshold", "passed"), rows)
    return status, to_json(
        {
            "suite": suite.name,
            "config": config.model_dump(mode="json"),
            "reports": [report.model_dump(mode="json") for report in reports],
            "passed": passed,
        }
    )


COMMANDS = {
    "check-phi": cmd_check_phi,
    "rearrange": cmd_rearrange,
    "norm": cmd_norm,
    "apply": cmd_apply,
    "verify": cmd_verify,
}
