"""Characteristic function and eigenvalue location.

An eigenvalue is a positive root of

    F(lambda) = w(pi, lambda) cos(beta) + w'(pi, lambda) sin(beta)

where w is the shooting solution that already satisfies the boundary
condition at 0 and both transmission conditions.  Roots are searched in the
variable s = sqrt(lambda) because they are asymptotically equispaced there
(s_n ~ n), so uniform s-grids sample F efficiently.

Two locators are provided: a general scan over an s-range for the low end of
the spectrum (no completeness claim there), and a per-index localization
that finds the unique root in the unit window around each integer n, which
is the regime the asymptotic theory guarantees.  Refinement keeps a
sign-change bracket throughout (subdividing it with several probe points per
round, which degenerates to plain bisection with one probe); brackets for
distinct roots are refined in lock-step so each round costs a single batched
sweep of the integrator.

All eigenvalues of the problem are simple; numerically that shows up as a
transversal crossing of F, which ``simplicity_certificate`` checks through a
central difference of dF/dlambda against the refinement residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dde_solver, picard
from .problem import Case1RequiredError, ProblemSpec, is_case1

__all__ = [
    "CharacteristicSample",
    "Eigenpair",
    "SimplicityCertificate",
    "ZeroOrManyError",
    "char_fn",
    "char_fn_picard",
    "char_fn_samples",
    "scan_roots",
    "localize_near_n",
    "localize_range",
    "simplicity_certificate",
    "simplicity_certificates",
]

DEFAULT_REFINE_TOL = 1e-10
# probe points per refinement round; 1 recovers plain bisection
DEFAULT_PROBES = 31
LOCALIZE_SUBGRID = 64
SCAN_SAMPLES_PER_UNIT = 100


class ZeroOrManyError(RuntimeError):
    """The localization window held no single sign change (the index is
    below the asymptotic regime; fall back to a scan)."""

    def __init__(self, n: int, count: int):
        self.n = n
        self.count = count
        super().__init__(
            f"window [{n - 0.5}, {n + 0.5}] contains {count} sign changes, expected 1")


@dataclass(frozen=True)
class CharacteristicSample:
    lam: float
    F: float
    method: str  # "shooting" or "picard"


@dataclass(frozen=True)
class Eigenpair:
    """A located eigenvalue with its eigenfunction segments.

    ``index`` is the window integer for localized roots and the ordinal
    within the returned set for scanned roots.  ``lam == s * s`` exactly as
    stored.  The eigenfunction is the raw shooting solution (it satisfies
    the boundary condition at 0 by construction and the one at pi to the
    refinement residual).
    """

    index: int
    s: float
    lam: float
    left: dde_solver.SolutionSegment
    right: dde_solver.SolutionSegment
    F_residual: float


@dataclass(frozen=True)
class SimplicityCertificate:
    dF_dlambda: float
    residual: float
    threshold: float
    h: float
    passed: bool
    reliable: bool


def _assemble_F(spec: ProblemSpec, w_pi, wp_pi):
    return w_pi * math.cos(spec.beta) + wp_pi * math.sin(spec.beta)


def char_fn(spec: ProblemSpec, lam: float, steps: int = dde_solver.DEFAULT_STEPS) -> CharacteristicSample:
    """Characteristic value F(lambda) from a fresh shooting solution."""
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    w, wp = dde_solver.shoot_endpoints(spec, [lam], steps)
    return CharacteristicSample(lam=float(lam), F=float(_assemble_F(spec, w[0], wp[0])),
                                method="shooting")


def char_fn_picard(spec: ProblemSpec, lam: float,
                   grid_points: int = picard.DEFAULT_GRID,
                   max_iters: int = picard.DEFAULT_MAX_ITERS,
                   tol: float = picard.DEFAULT_TOL) -> CharacteristicSample:
    """F(lambda) assembled from the fixed-point oracle segments."""
    w1 = picard.picard_w1(spec, lam, grid_points, max_iters, tol)
    w2 = picard.picard_w2(spec, lam, w1, grid_points, max_iters, tol)
    F = _assemble_F(spec, w2.values[-1], w2.derivs[-1])
    return CharacteristicSample(lam=float(lam), F=float(F), method="picard")


def char_fn_samples(spec: ProblemSpec, s_values, steps: int = dde_solver.DEFAULT_STEPS) -> np.ndarray:
    """F(s^2) on a batch of s values (one chunked sweep per segment)."""
    s_values = np.asarray(s_values, dtype=float)
    if np.any(s_values <= 0.0):
        raise ValueError("s must be positive")
    w, wp = dde_solver.shoot_endpoints(spec, s_values * s_values, steps)
    return _assemble_F(spec, w, wp)


def _refine_brackets(spec: ProblemSpec, lo, hi, f_lo, refine_tol: float,
                     steps: int, probes: int = DEFAULT_PROBES):
    """Shrink sign-change brackets [lo_i, hi_i] in s to width < refine_tol.

    Every round evaluates ``probes`` interior points of all brackets in one
    batched sweep and keeps the first subinterval with a sign change, so the
    width shrinks by (probes + 1) per round while the bracket invariant is
    preserved exactly as in bisection.
    """
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    f_lo = np.asarray(f_lo, dtype=float).copy()
    m = lo.shape[0]
    if m == 0:
        return lo, hi
    frac = np.arange(1, probes + 1) / (probes + 1.0)
    while np.max(hi - lo) >= refine_tol:
        grid = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
        F = char_fn_samples(spec, grid.ravel(), steps).reshape(m, probes)
        sign_lo = f_lo <= 0.0
        # first probe with a sign different from the left end, per bracket
        flips = (F <= 0.0) != sign_lo[:, None]
        any_flip = flips.any(axis=1)
        first = np.where(any_flip, flips.argmax(axis=1), probes - 1)
        idx = np.arange(m)
        new_hi = np.where(any_flip, grid[idx, first], hi)
        left_of = first - 1
        new_lo = np.where(any_flip & (left_of >= 0), grid[idx, np.maximum(left_of, 0)], lo)
        new_f_lo = np.where(any_flip & (left_of >= 0), F[idx, np.maximum(left_of, 0)], f_lo)
        # no flip among the probes: the change sits in the last subinterval
        new_lo = np.where(~any_flip, grid[idx, probes - 1], new_lo)
        new_f_lo = np.where(~any_flip, F[idx, probes - 1], new_f_lo)
        lo, hi, f_lo = new_lo, new_hi, new_f_lo
    return lo, hi


def _pairs_from_roots(spec: ProblemSpec, s_roots, indices, steps: int) -> list[Eigenpair]:
    lams = [s * s for s in s_roots]
    shots = dde_solver.shoot_many(spec, lams, steps)
    pairs = []
    for idx, s, shot in zip(indices, s_roots, shots):
        F = _assemble_F(spec, shot.right.values[-1], shot.right.derivs[-1])
        pairs.append(Eigenpair(index=int(idx), s=float(s), lam=float(s * s),
                               left=shot.left, right=shot.right,
                               F_residual=float(F)))
    return pairs


def scan_roots(spec: ProblemSpec, s_min: float, s_max: float,
               samples: int | None = None, refine_tol: float = DEFAULT_REFINE_TOL,
               steps: int = dde_solver.DEFAULT_STEPS) -> list[Eigenpair]:
    """Locate eigenvalues by s-scan over [s_min, s_max].

    Samples F(s^2) uniformly (default 100 samples per unit of s, matching
    the ~unit spacing of roots), refines every sign change, and returns the
    eigenpairs ordered by s with ordinal indices.  Roots of even multiplicity
    produce no sign change and are not found; an empty list is a valid
    outcome.
    """
    if not (0.0 < s_min < s_max):
        raise ValueError("need 0 < s_min < s_max")
    if samples is None:
        samples = int(math.ceil((s_max - s_min) * SCAN_SAMPLES_PER_UNIT)) + 1
    if samples < 2:
        raise ValueError("need at least 2 samples")
    grid = np.linspace(s_min, s_max, samples)
    F = char_fn_samples(spec, grid, steps)
    flips = np.nonzero(np.sign(F[:-1]) * np.sign(F[1:]) < 0)[0]
    lo, hi = _refine_brackets(spec, grid[flips], grid[flips + 1], F[flips],
                              refine_tol, steps)
    roots = 0.5 * (lo + hi)
    return _pairs_from_roots(spec, roots, range(len(roots)), steps)


def _window_brackets(spec: ProblemSpec, n_values, steps: int):
    """One sign-change bracket per unit window around each integer n.

    Raises ZeroOrManyError for the first window whose subgrid does not show
    exactly one sign change.
    """
    n_values = [int(n) for n in n_values]
    grid = np.concatenate([np.linspace(n - 0.5, n + 0.5, LOCALIZE_SUBGRID)
                           for n in n_values])
    F = char_fn_samples(spec, grid, steps).reshape(len(n_values), LOCALIZE_SUBGRID)
    grid = grid.reshape(len(n_values), LOCALIZE_SUBGRID)
    lo = np.empty(len(n_values))
    hi = np.empty(len(n_values))
    f_lo = np.empty(len(n_values))
    for k, n in enumerate(n_values):
        row = F[k]
        flips = np.nonzero(np.sign(row[:-1]) * np.sign(row[1:]) < 0)[0]
        if flips.shape[0] != 1:
            raise ZeroOrManyError(n, int(flips.shape[0]))
        j = int(flips[0])
        lo[k] = grid[k, j]
        hi[k] = grid[k, j + 1]
        f_lo[k] = row[j]
    return lo, hi, f_lo


def localize_range(spec: ProblemSpec, n_values, refine_tol: float = DEFAULT_REFINE_TOL,
                   steps: int = dde_solver.DEFAULT_STEPS) -> list[Eigenpair]:
    """Localized eigenpairs for every integer index in ``n_values``.

    Windows for distinct n are independent; they are batched here purely for
    speed and the results are ordered by index.
    """
    if not is_case1(spec):
        raise Case1RequiredError(
            "localization near n needs sin(alpha) != 0 and sin(beta) != 0")
    n_values = sorted(int(n) for n in n_values)
    if any(n < 1 for n in n_values):
        raise ValueError("indices must be positive integers")
    lo, hi, f_lo = _window_brackets(spec, n_values, steps)
    lo, hi = _refine_brackets(spec, lo, hi, f_lo, refine_tol, steps)
    roots = 0.5 * (lo + hi)
    return _pairs_from_roots(spec, roots, n_values, steps)


def localize_near_n(spec: ProblemSpec, n: int, refine_tol: float = DEFAULT_REFINE_TOL,
                    steps: int = dde_solver.DEFAULT_STEPS) -> Eigenpair:
    """The unique eigenvalue in the unit s-window around the integer n."""
    return localize_range(spec, [n], refine_tol, steps)[0]


def simplicity_certificates(spec: ProblemSpec, pairs: list[Eigenpair], h: float = 1e-3,
                            steps: int = dde_solver.DEFAULT_STEPS) -> list[SimplicityCertificate]:
    """Transversality checks for a batch of eigenpairs (one shared sweep).

    dF/dlambda is estimated by a central difference with step h (in lambda);
    a certificate passes when the slope clears 10x the refinement residual
    over h, and is marked unreliable for h > 1.
    """
    if h <= 0.0:
        raise ValueError("h must be positive")
    if any(p.lam <= h for p in pairs):
        raise ValueError("h must be smaller than every eigenvalue")
    if not pairs:
        return []
    lams = np.array([[p.lam - h, p.lam + h] for p in pairs])
    F = char_fn_samples(spec, np.sqrt(lams.ravel()), steps).reshape(-1, 2)
    out = []
    for pair, (f_lo, f_hi) in zip(pairs, F):
        slope = float((f_hi - f_lo) / (2.0 * h))
        threshold = 10.0 * abs(pair.F_residual) / h
        out.append(SimplicityCertificate(
            dF_dlambda=slope, residual=pair.F_residual, threshold=threshold, h=h,
            passed=bool(abs(slope) > threshold), reliable=bool(h <= 1.0)))
    return out


def simplicity_certificate(spec: ProblemSpec, pair: Eigenpair, h: float = 1e-3,
                           steps: int = dde_solver.DEFAULT_STEPS) -> SimplicityCertificate:
    """Transversality check of the root crossing at one eigenvalue."""
    return simplicity_certificates(spec, [pair], h, steps)[0]
