"""Composite-Simpson quadrature on uniform grids.

Both the plain rule and a cumulative variant are provided; the cumulative
variant returns the running integral at every grid node, which the Volterra
iteration and the eigenfunction correction integrals need.  Odd-indexed
nodes are handled with the one-sided three-point rule so the cumulative
result stays fourth-order accurate everywhere.
"""

from __future__ import annotations

import numpy as np

__all__ = ["simpson", "cumulative_simpson", "odd_point_count"]


def odd_point_count(n: int) -> int:
    """Round a requested point count up to the next odd value >= 3."""
    n = max(int(n), 3)
    return n if n % 2 == 1 else n + 1


def simpson(y: np.ndarray, h: float) -> float:
    """Integrate uniformly sampled values with the composite Simpson rule.

    Requires an odd number of samples (even number of intervals).
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] % 2 == 0:
        raise ValueError("composite Simpson needs an odd sample count")
    return float((h / 3.0) * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum()))


def cumulative_simpson(y: np.ndarray, h: float) -> np.ndarray:
    """Running integral of uniformly sampled values, fourth order.

    Even nodes accumulate standard Simpson pairs; each odd node adds the
    integral of the local quadratic over its trailing subinterval
    (coefficients 5/12, 8/12, -1/12).  Works for any sample count >= 3.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if n < 3:
        raise ValueError("need at least 3 samples")
    out = np.empty(n, dtype=float)
    out[0] = 0.0
    # pairs: integral over [x_{2k}, x_{2k+2}]
    n_pairs = (n - 1) // 2
    pair = (h / 3.0) * (y[0:2 * n_pairs:2] + 4.0 * y[1:2 * n_pairs + 1:2] + y[2:2 * n_pairs + 2:2])
    out[2:2 * n_pairs + 2:2] = np.cumsum(pair)
    # odd nodes: quadratic through (i-1, i, i+1) integrated over [x_i, x_{i+1}]
    # shifted so the increment is added to out at the even node before it
    k = np.arange(1, n, 2)
    interior = k[k + 1 < n]
    inc = np.empty(k.shape[0], dtype=float)
    inc[: interior.shape[0]] = (h / 12.0) * (
        5.0 * y[interior - 1] + 8.0 * y[interior] - y[interior + 1]
    )
    if k[-1] + 1 >= n:
        # trailing odd node: quadratic through the last three samples
        inc[-1] = (h / 12.0) * (-y[n - 3] + 8.0 * y[n - 2] + 5.0 * y[n - 1])
    out[k] = out[k - 1] + inc
    return out
