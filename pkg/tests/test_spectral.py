import math

import numpy as np
import pytest

from delaybvp.problem import Case1RequiredError, HALF, ProblemSpec
from delaybvp.spectral import (ZeroOrManyError, char_fn, char_fn_picard,
                               char_fn_samples, localize_near_n,
                               localize_range, scan_roots,
                               simplicity_certificate)

PI = math.pi


def spec_of(q_l="0", q_r="0", d_l="0", d_r="0", alpha=HALF, beta=HALF, delta=1.0):
    return ProblemSpec.from_strings(q_l, q_r, d_l, d_r, alpha, beta, delta)


def closed_form_F(s, beta):
    """q = 0, alpha = pi/2, delta = 1 characteristic function."""
    return (s ** (-2.0 / 3.0) * math.cos(s * PI) * math.cos(beta)
            - s ** (1.0 / 3.0) * math.sin(s * PI) * math.sin(beta))


def bisect_closed_form(f, lo, hi, tol=1e-13):
    f_lo = f(lo)
    assert f_lo * f(hi) < 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f_lo * f(mid) <= 0:
            hi = mid
        else:
            lo, f_lo = mid, f(mid)
    return 0.5 * (lo + hi)


def test_char_fn_near_integer_roots(null_spec):
    for n in (1, 2, 5):
        assert abs(char_fn(null_spec, float(n * n)).F) < 1e-8


def test_char_fn_closed_form_value(null_spec):
    sample = char_fn(null_spec, 2.25)
    assert sample.method == "shooting"
    assert sample.F == pytest.approx(1.5 ** (1.0 / 3.0), abs=1e-9)


def test_char_fn_beta_quarter_matches_closed_form():
    spec = spec_of(beta=PI / 4)
    for s in (0.8, 1.3, 2.6):
        got = char_fn(spec, s * s).F
        assert got == pytest.approx(closed_form_F(s, PI / 4), abs=1e-9)


def test_scan_finds_first_five_integer_roots(null_spec):
    pairs = scan_roots(null_spec, 0.5, 5.5, samples=500)
    assert [p.index for p in pairs] == [0, 1, 2, 3, 4]
    for k, p in enumerate(pairs, start=1):
        assert abs(p.s - k) < 1e-8
        assert p.lam == p.s * p.s


def test_scan_below_first_root_is_empty(null_spec):
    assert scan_roots(null_spec, 0.2, 0.8, samples=80) == []


def test_scan_roots_satisfy_residual_contract(constq_spec):
    pairs = scan_roots(constq_spec, 0.5, 3.5, samples=350, steps=1024)
    assert pairs
    for p in pairs:
        assert abs(p.F_residual) < 1e-8
        assert abs(char_fn(constq_spec, p.lam, steps=1024).F) < 1e-8


def test_localize_exact_integers(null_spec):
    pair = localize_near_n(null_spec, 10)
    assert pair.index == 10
    assert abs(pair.s - 10.0) < 1e-9


def test_localize_beta_quarter_against_scalar_oracle():
    # independent oracle: root of the closed form near s = 20
    spec = spec_of(beta=PI / 4)
    oracle = bisect_closed_form(lambda s: closed_form_F(s, PI / 4), 19.5, 20.5)
    assert oracle == pytest.approx(20.0 + 1.0 / (20.0 * PI), abs=5e-5)
    pair = localize_near_n(spec, 20)
    assert pair.s == pytest.approx(oracle, abs=1e-7)


def test_localize_window_membership(delayed_pairs):
    for p in delayed_pairs:
        assert p.index - 0.5 < p.s < p.index + 0.5


def test_localize_requires_case1():
    with pytest.raises(Case1RequiredError):
        localize_near_n(spec_of(alpha=0.0), 5)


def test_zero_or_many_below_asymptotic_regime():
    # a strong potential pushes the lowest eigenvalue far from s = 1: the
    # unit window around n = 1 holds no sign change
    rough = spec_of(q_l="25", q_r="25")
    with pytest.raises(ZeroOrManyError) as err:
        localize_near_n(rough, 1, steps=1024)
    assert err.value.n == 1


def test_counting_thirty_windows(null_spec):
    pairs = scan_roots(null_spec, 0.5, 30.5, refine_tol=1e-9, steps=1024)
    assert len(pairs) == 30
    for k, p in enumerate(pairs, start=1):
        assert abs(p.s - k) < 1e-5


def test_method_agreement_shooting_vs_picard(constq_spec, delayed_spec):
    for spec in (constq_spec, delayed_spec):
        for s in (6.0, 12.0):
            f_shoot = char_fn(spec, s * s).F
            f_picard = char_fn_picard(spec, s * s).F
            assert abs(f_shoot - f_picard) < 1e-6


def test_simplicity_certificate_closed_form(null_spec):
    pair = localize_near_n(null_spec, 5)
    cert = simplicity_certificate(null_spec, pair)
    # d/d lambda of -s^(1/3) sin(s pi) at s = 5 is 5^(1/3) pi / 10
    oracle = 5.0 ** (1.0 / 3.0) * PI / 10.0
    assert cert.dF_dlambda == pytest.approx(oracle, abs=1e-4)
    assert cert.passed and cert.reliable


def test_simplicity_large_h_unreliable(null_spec):
    pair = localize_near_n(null_spec, 5)
    cert = simplicity_certificate(null_spec, pair, h=2.0)
    assert not cert.reliable


def test_char_fn_samples_vectorized(null_spec):
    ss = np.array([1.0, 1.5, 2.0])
    F = char_fn_samples(null_spec, ss)
    assert abs(F[0]) < 1e-8 and abs(F[2]) < 1e-8
    assert F[1] == pytest.approx(1.5 ** (1.0 / 3.0), abs=1e-9)


def test_positive_s_required(null_spec):
    with pytest.raises(ValueError):
        char_fn_samples(null_spec, [-1.0])
    with pytest.raises(ValueError):
        scan_roots(null_spec, 0.0, 2.0)
