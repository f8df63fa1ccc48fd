import math

import numpy as np
import pytest

from delaybvp.exprlang import ExprDomainError
from delaybvp.problem import (HALF, ProblemSpec, check_refined_conditions,
                              is_case1, q_norms, validate)

PI = math.pi


def spec_of(q_l="0", q_r="0", d_l="0", d_r="0", alpha=HALF, beta=HALF, delta=1.0):
    return ProblemSpec.from_strings(q_l, q_r, d_l, d_r, alpha, beta, delta)


def test_zero_delay_passes_everything(null_spec):
    report = validate(null_spec)
    assert report.passed
    assert {c.name for c in report.checks} >= {
        "coupling_nonzero", "delay_nonnegative_left", "delayed_argument_left",
        "delayed_argument_right", "q_limit_left", "q_limit_right"}


def test_excessive_delay_fails_left_constraint():
    report = validate(spec_of(d_l="2*x"))
    bad = {c.name: c for c in report.checks}["delayed_argument_left"]
    assert not bad.passed
    assert not report.passed
    assert bad.worst_x is not None and bad.worst_x > 0.0


def test_delayed_reference_spec_passes(delayed_spec):
    assert validate(delayed_spec).passed


def test_delayed_reference_constraints_brute_force():
    # independent oracle: direct formulas minimized over a 10^4-point grid
    d_left = lambda x: 0.5 * x * (PI / 2 - x)
    d_right = lambda x: (x - PI / 2) * (PI - x) * 0.25
    xl = np.linspace(0.0, PI / 2, 10_000, endpoint=False)
    xr = np.linspace(PI / 2, PI, 10_001)[1:]
    assert d_left(xl).min() >= 0.0
    assert d_right(xr).min() >= 0.0
    assert (xl - d_left(xl)).min() >= 0.0
    assert (xr - d_right(xr)).min() >= PI / 2
    assert d_left(0.0) == 0.0
    assert d_right(PI / 2 + 1e-12) == pytest.approx(0.0, abs=1e-11)


def test_coupling_must_be_nonzero():
    with pytest.raises(ValueError):
        spec_of(delta=0.0)


def test_validate_min_grid():
    with pytest.raises(ValueError):
        validate(spec_of(), grid_points=8)


def test_validate_is_deterministic(delayed_spec):
    assert validate(delayed_spec) == validate(delayed_spec)


def test_malformed_expression_surfaces_as_expr_error():
    bad = spec_of(q_l="log(1 - x)")  # log of negative approaching pi/2
    with pytest.raises(ExprDomainError):
        validate(bad)


# --- refined conditions -----------------------------------------------------


def test_zero_delay_satisfies_condition_b(null_spec):
    report = check_refined_conditions(null_spec)
    by_name = {c.name: c for c in report.checks}
    assert by_name["delay_slope_left"].passed
    assert by_name["delay_zero_at_origin"].passed
    assert by_name["delay_zero_at_interface"].passed
    assert report.case1


def test_delayed_slope_peaks_at_origin(delayed_spec):
    # Delta_left'(x) = pi/4 - x: maximal slope pi/4 ~ 0.785 at x = 0
    report = check_refined_conditions(delayed_spec)
    slope = {c.name: c for c in report.checks}["delay_slope_left"]
    assert slope.passed
    assert slope.worst_x == pytest.approx(0.0, abs=1e-3)
    assert report.passed


def test_steep_delay_fails_condition_b():
    report = check_refined_conditions(spec_of(d_l="1.2*x"))
    slope = {c.name: c for c in report.checks}["delay_slope_left"]
    assert not slope.passed


def test_alpha_zero_clears_case1_flag():
    report = check_refined_conditions(spec_of(alpha=0.0))
    assert not report.case1
    assert not is_case1(spec_of(alpha=0.0))
    assert is_case1(spec_of(alpha=PI / 4, beta=PI / 3))


# --- q norms ----------------------------------------------------------------


def test_q_norms_zero(null_spec):
    norms = q_norms(null_spec)
    assert norms.q1 == 0.0 and norms.q2 == 0.0


def test_q_norms_unit(constq_spec):
    norms = q_norms(constq_spec)
    assert norms.q1 == pytest.approx(PI / 2, rel=1e-12)
    assert norms.q2 == pytest.approx(PI / 2, rel=1e-12)


def test_q_norms_sine_closed_form():
    # integral of sin over [0, pi/2] = 1 - cos(pi/2) = 1
    norms = q_norms(spec_of(q_l="sin(x)", q_r="0"))
    assert norms.q1 == pytest.approx(1.0, rel=1e-10)
    assert norms.q2 == 0.0


def test_q_norms_scale_linearly():
    base = q_norms(spec_of(q_l="sin(x)", q_r="cos(x)"))
    scaled = q_norms(spec_of(q_l="3.5*sin(x)", q_r="3.5*cos(x)"))
    assert scaled.q1 == pytest.approx(3.5 * base.q1, rel=1e-12)
    assert scaled.q2 == pytest.approx(3.5 * base.q2, rel=1e-12)
