"""Fixed-step integrator for the delayed equation with dense output.

The equation y'' = -q(x) y(x - Delta(x)) - lambda y is integrated on one
subinterval at a time with the classical fourth-order one-step scheme.  A
cubic Hermite interpolant per step provides the C1 dense output required by
the retarded term: the delayed argument never exceeds the current x, so the
value is read from the part of the segment already built.  When the delayed
argument lands inside the step currently being computed (Delta smaller than
the step size), the cubic extrapolant of the last completed step is used;
on the very first step a Taylor extrapolant from the initial data stands in.

Because the grid is fixed, every coefficient sample and every delayed-lookup
stencil is independent of lambda.  They are computed once per problem and
reused, and the integration itself runs vectorized over a whole batch of
lambda values at once -- eigenvalue scans and bracket refinements pay for
one sweep per round instead of one per lambda.

Only lambda > 0 is addressed; the transmission scaling uses the real cube
root of lambda, computed as exp(log(lambda)/3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exprlang import Expr
from .problem import HALF, ProblemSpec

__all__ = [
    "SolutionSegment",
    "ShootingResult",
    "NonFiniteStateError",
    "DelayRangeError",
    "integrate_segment",
    "shoot",
    "shoot_many",
    "shoot_endpoints",
    "lam_cbrt",
]

DEFAULT_STEPS = 4096
# batch width per sweep; bounds transient memory at ~70 MB for default steps
DEFAULT_CHUNK = 1024

_MODE_HERMITE = 1
_MODE_CURRENT = 0
_MODE_TAYLOR = 2


class NonFiniteStateError(RuntimeError):
    """Integration state overflowed to a non-finite value."""


class DelayRangeError(ValueError):
    """A delayed argument left the admissible range [a, x]."""


def lam_cbrt(lam):
    """Real cube root of a positive spectral parameter."""
    return np.exp(np.log(lam) / 3.0)


@dataclass(frozen=True)
class SolutionSegment:
    """Dense-output solution of one subinterval at a fixed lambda.

    Stores node values of y, y' and y''; evaluation between nodes is cubic
    Hermite in each channel (y from (values, derivs), y' from
    (derivs, second_derivs)), so both are C1 on [a, b] and reproduce the
    stored node data exactly.
    """

    a: float
    b: float
    lam: float
    nodes: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    second_derivs: np.ndarray

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.a - 1e-12) or np.any(x > self.b + 1e-12):
            raise ValueError(f"evaluation outside [{self.a}, {self.b}]")
        n = self.nodes.shape[0] - 1
        h = (self.b - self.a) / n
        j = np.clip(np.floor((x - self.a) / h).astype(np.int64), 0, n - 1)
        # snap to the upper node when x matches it bit-exactly
        snap = x == self.nodes[np.minimum(j + 1, n)]
        j = np.where(snap, np.minimum(j + 1, n - 1), j)
        theta = (x - self.nodes[j]) / h
        theta = np.where(snap & (j == n - 1), 1.0, theta)
        theta = np.where(snap & (j < n - 1), 0.0, theta)
        return j, theta, h

    def _hermite(self, x, f, df):
        j, t, h = self._locate(x)
        t2 = t * t
        t3 = t2 * t
        out = ((2.0 * t3 - 3.0 * t2 + 1.0) * f[j]
               + (-2.0 * t3 + 3.0 * t2) * f[j + 1]
               + h * ((t3 - 2.0 * t2 + t) * df[j] + (t3 - t2) * df[j + 1]))
        return float(out) if out.ndim == 0 else out

    def eval(self, x):
        """Value of the solution at x (scalar or array)."""
        return self._hermite(x, self.values, self.derivs)

    def eval_deriv(self, x):
        """Derivative of the solution at x (scalar or array)."""
        return self._hermite(x, self.derivs, self.second_derivs)


@dataclass(frozen=True)
class ShootingResult:
    """The two matched segments built from the initial conditions at 0 and
    the transmission mapping at pi/2."""

    left: SolutionSegment
    right: SolutionSegment
    lam: float


class _StageTable:
    """Delayed-lookup stencils for one family of stage times.

    Each stage belongs to a context step i (rows 0..i of the solution arrays
    are known when it fires).  mode 0 reads the current state, mode 1 applies
    a precomputed cubic Hermite stencil (possibly the extrapolating one of
    the previous step), mode 2 is the first-step Taylor fallback.
    """

    def __init__(self, xi, ctx, a, h, nodes, n_steps):
        x_ctx = a + ctx * h
        if np.any(xi < a - 1e-12):
            k = int(np.argmin(xi))
            raise DelayRangeError(
                f"delayed argument {xi[k]:.12g} below segment start {a:.12g}")
        # fp tidy-up only; the non-negative-delay check has already run
        xi = np.minimum(np.maximum(xi, a), x_ctx + h)
        inside = xi > x_ctx + 1e-14
        mode = np.full(xi.shape, _MODE_HERMITE, dtype=np.uint8)
        mode[~inside & (x_ctx - xi <= 1e-14)] = _MODE_CURRENT
        mode[inside & (ctx == 0)] = _MODE_TAYLOR

        t_idx = (xi - a) / h
        j = np.floor(t_idx).astype(np.int64)
        j = np.minimum(np.maximum(j, 0), n_steps - 1)
        j = np.where(inside, np.maximum(ctx - 1, 0), j)
        theta = t_idx - j
        t2 = theta * theta
        t3 = t2 * theta
        self.mode = mode.tolist()
        self.j = j.tolist()
        self.w00 = (2.0 * t3 - 3.0 * t2 + 1.0).tolist()
        self.w01 = (-2.0 * t3 + 3.0 * t2).tolist()
        self.w10 = (h * (t3 - 2.0 * t2 + theta)).tolist()
        self.w11 = (h * (t3 - t2)).tolist()
        self.d = (xi - a).tolist()
        self.any_taylor = bool(np.any(mode == _MODE_TAYLOR))

    def value(self, k, Y, V, current, taylor):
        m = self.mode[k]
        if m == _MODE_HERMITE:
            j = self.j[k]
            return (self.w00[k] * Y[j] + self.w01[k] * Y[j + 1]
                    + self.w10[k] * V[j] + self.w11[k] * V[j + 1])
        if m == _MODE_CURRENT:
            return current
        y0, v0, a0 = taylor
        d = self.d[k]
        return y0 + d * v0 + (0.5 * d * d) * a0


class _SegmentTables:
    """All lambda-independent data for integrating one subinterval."""

    def __init__(self, q_expr: Expr, delta_expr: Expr, a: float, b: float, steps: int):
        if steps < 2:
            raise ValueError("need at least 2 steps per segment")
        self.a = float(a)
        self.b = float(b)
        self.steps = int(steps)
        self.h = (self.b - self.a) / self.steps
        self.nodes = np.linspace(self.a, self.b, self.steps + 1)
        t_half = self.nodes[:-1] + 0.5 * self.h

        q_node = np.asarray(q_expr.eval(self.nodes), dtype=float)
        q_half = np.asarray(q_expr.eval(t_half), dtype=float)
        self.negq_node = (-q_node).tolist()
        self.negq_half = (-q_half).tolist()
        self.q_zero = bool(np.all(q_node == 0.0) and np.all(q_half == 0.0))

        d_node = np.asarray(delta_expr.eval(self.nodes), dtype=float)
        d_half = np.asarray(delta_expr.eval(t_half), dtype=float)
        if np.any(d_node < -1e-12) or np.any(d_half < -1e-12):
            raise DelayRangeError("negative retardation encountered")

        ctx_node = np.arange(self.steps + 1)
        ctx_step = np.arange(self.steps)
        self.node_tab = _StageTable(self.nodes - d_node, ctx_node,
                                    self.a, self.h, self.nodes, self.steps)
        self.half_tab = _StageTable(t_half - d_half, ctx_step,
                                    self.a, self.h, self.nodes, self.steps)
        self.end_tab = _StageTable(self.nodes[1:] - d_node[1:], ctx_step,
                                   self.a, self.h, self.nodes, self.steps)

    def sweep(self, lam: np.ndarray, y0: np.ndarray, v0: np.ndarray,
              keep_second: bool = False):
        """Integrate the batch; returns (Y, V, A) arrays of shape
        (steps+1, m).  A is None unless keep_second.  Overflow is allowed to
        propagate silently here; callers run the finiteness check."""
        with np.errstate(over="ignore", invalid="ignore"):
            return self._sweep(lam, y0, v0, keep_second)

    def _sweep(self, lam: np.ndarray, y0: np.ndarray, v0: np.ndarray,
               keep_second: bool):
        z = np.asarray(lam, dtype=float)
        m = z.shape[0]
        n = self.steps
        h = self.h
        h2 = h * h

        p_c = 1.0 - 0.5 * h2 * z + (h2 * h2 / 24.0) * z * z
        q_c = h * (1.0 - (h2 / 6.0) * z)
        s_c = -z * q_c
        r1 = h2 / 6.0 - (h2 * h2 / 24.0) * z
        r2 = h2 / 3.0
        t1 = (h / 6.0) * (1.0 - 0.5 * h2 * z)
        t2 = 2.0 * h / 3.0 - (h2 * h / 12.0) * z
        t3 = h / 6.0

        Y = np.zeros((n + 1, m))
        V = np.zeros((n + 1, m))
        A = np.zeros((n + 1, m)) if keep_second else None
        Y[0] = y0
        V[0] = v0

        if self.q_zero:
            for i in range(n):
                y = Y[i]
                v = V[i]
                Y[i + 1] = p_c * y + q_c * v
                V[i + 1] = s_c * y + p_c * v
            if keep_second:
                A[:] = -z * Y
            return Y, V, A

        negq_node = self.negq_node
        negq_half = self.negq_half
        node_tab = self.node_tab
        half_tab = self.half_tab
        end_tab = self.end_tab
        taylor = None
        a_row = None
        for i in range(n):
            y = Y[i]
            v = V[i]
            g1 = negq_node[i] * node_tab.value(i, Y, V, y, taylor)
            if i == 0:
                a_row = g1 - z * y
                taylor = (y, v, a_row)
            if keep_second:
                A[i] = g1 - z * y
            gh = negq_half[i] * half_tab.value(i, Y, V, y, taylor)
            ge = negq_node[i + 1] * end_tab.value(i, Y, V, y, taylor)
            Y[i + 1] = p_c * y + q_c * v + r1 * g1 + r2 * gh
            V[i + 1] = s_c * y + p_c * v + t1 * g1 + t2 * gh + t3 * ge
        if keep_second:
            g_last = negq_node[n] * node_tab.value(n, Y, V, Y[n], taylor)
            A[n] = g_last - z * Y[n]
        return Y, V, A


@lru_cache(maxsize=32)
def _tables(q_expr: Expr, delta_expr: Expr, a: float, b: float, steps: int) -> _SegmentTables:
    return _SegmentTables(q_expr, delta_expr, a, b, steps)


def _left_tables(spec: ProblemSpec, steps: int) -> _SegmentTables:
    return _tables(spec.q_left, spec.retard_left, 0.0, HALF, steps)


def _right_tables(spec: ProblemSpec, steps: int) -> _SegmentTables:
    return _tables(spec.q_right, spec.retard_right, HALF, math.pi, steps)


def _check_finite(Y: np.ndarray, V: np.ndarray, tables: _SegmentTables, lam) -> None:
    ok = np.isfinite(Y).all() and np.isfinite(V).all()
    if ok:
        return
    rows = np.isfinite(Y).all(axis=1) & np.isfinite(V).all(axis=1)
    first_bad = int(np.argmin(rows))
    x_bad = tables.nodes[first_bad]
    raise NonFiniteStateError(
        f"state became non-finite near x = {x_bad:.6g} (lambda = {lam})")


def _segment_from_columns(tables: _SegmentTables, lam: float, Y, V, A, col: int) -> SolutionSegment:
    return SolutionSegment(
        a=tables.a, b=tables.b, lam=float(lam), nodes=tables.nodes,
        values=np.ascontiguousarray(Y[:, col]),
        derivs=np.ascontiguousarray(V[:, col]),
        second_derivs=np.ascontiguousarray(A[:, col]),
    )


def integrate_segment(spec: ProblemSpec, lam: float, interval, y0: float, dy0: float,
                      history: SolutionSegment | None = None,
                      steps: int = DEFAULT_STEPS) -> SolutionSegment:
    """Integrate one subinterval with given initial data at its left end.

    ``interval`` must lie within [0, pi/2] or within [pi/2, pi]; the matching
    coefficient expressions of the problem are used.  ``history`` is accepted
    for the degenerate left-endpoint lookup x - Delta(x) = a, which the
    scheme resolves from the initial data itself, so it is never consulted.
    """
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError("interval must have positive length")
    if b <= HALF + 1e-12:
        tabs = _tables(spec.q_left, spec.retard_left, a, b, steps)
    elif a >= HALF - 1e-12:
        tabs = _tables(spec.q_right, spec.retard_right, a, b, steps)
    else:
        raise ValueError("interval must not straddle the interface point pi/2")
    lam_arr = np.array([float(lam)])
    Y, V, A = tabs.sweep(lam_arr, np.array([float(y0)]), np.array([float(dy0)]),
                         keep_second=True)
    _check_finite(Y, V, tabs, lam)
    return _segment_from_columns(tabs, lam, Y, V, A, 0)


def shoot_many(spec: ProblemSpec, lams, steps_per_segment: int = DEFAULT_STEPS,
               chunk: int = DEFAULT_CHUNK) -> list[ShootingResult]:
    """Shooting solutions for a batch of positive lambda values.

    The left segment starts from y(0) = sin(alpha), y'(0) = -cos(alpha); the
    right segment continues from the transmission mapping
    y(pi/2+) = lambda^(-1/3) delta^(-1) y(pi/2-) (and likewise for y').
    """
    lams = np.asarray(lams, dtype=float)
    if np.any(lams <= 0.0):
        raise ValueError("lambda must be positive")
    lt = _left_tables(spec, steps_per_segment)
    rt = _right_tables(spec, steps_per_segment)
    out: list[ShootingResult] = []
    sin_a = math.sin(spec.alpha)
    cos_a = math.cos(spec.alpha)
    for start in range(0, lams.shape[0], chunk):
        z = lams[start:start + chunk]
        m = z.shape[0]
        Yl, Vl, Al = lt.sweep(z, np.full(m, sin_a), np.full(m, -cos_a),
                              keep_second=True)
        _check_finite(Yl, Vl, lt, z)
        scale = 1.0 / (lam_cbrt(z) * spec.coupling)
        Yr, Vr, Ar = rt.sweep(z, scale * Yl[-1], scale * Vl[-1], keep_second=True)
        _check_finite(Yr, Vr, rt, z)
        for k in range(m):
            out.append(ShootingResult(
                left=_segment_from_columns(lt, z[k], Yl, Vl, Al, k),
                right=_segment_from_columns(rt, z[k], Yr, Vr, Ar, k),
                lam=float(z[k]),
            ))
    return out


def shoot(spec: ProblemSpec, lam: float, steps_per_segment: int = DEFAULT_STEPS) -> ShootingResult:
    """Shooting solution at a single positive lambda."""
    return shoot_many(spec, [lam], steps_per_segment)[0]


def shoot_endpoints(spec: ProblemSpec, lams, steps_per_segment: int = DEFAULT_STEPS,
                    chunk: int = DEFAULT_CHUNK):
    """Values (w(pi), w'(pi)) of the shooting solution for a lambda batch.

    Skips segment construction entirely; this is the fast path behind
    characteristic-function scans.
    """
    lams = np.asarray(lams, dtype=float)
    if np.any(lams <= 0.0):
        raise ValueError("lambda must be positive")
    lt = _left_tables(spec, steps_per_segment)
    rt = _right_tables(spec, steps_per_segment)
    w = np.empty(lams.shape[0])
    wp = np.empty(lams.shape[0])
    sin_a = math.sin(spec.alpha)
    cos_a = math.cos(spec.alpha)
    for start in range(0, lams.shape[0], chunk):
        z = lams[start:start + chunk]
        m = z.shape[0]
        Yl, Vl, _ = lt.sweep(z, np.full(m, sin_a), np.full(m, -cos_a))
        _check_finite(Yl, Vl, lt, z)
        scale = 1.0 / (lam_cbrt(z) * spec.coupling)
        Yr, Vr, _ = rt.sweep(z, scale * Yl[-1], scale * Vl[-1])
        _check_finite(Yr, Vr, rt, z)
        w[start:start + m] = Yr[-1]
        wp[start:start + m] = Vr[-1]
    return w, wp
