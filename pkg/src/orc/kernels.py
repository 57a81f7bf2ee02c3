"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Everything here is called millions of times by the separation and
optimization experiments: exact-body membership tests, the membership
bisection that evaluates the height function, and the central-cut
ellipsoid update.  The compiled path is selected at import time; set
the environment variable ORC_NO_NUMBA=1 to force the numpy fallback
(benchmarks/bench_kernels.py compares the two).

Reference bodies are encoded for the kernels as a tuple
(code, M, v, s):

    code 0  ball       v = center, s = radius
    code 1  box        v = center, s = l-infinity radius
    code 2  simplex    s = scale           (x >= 0, sum x <= s)
    code 3  h-polytope M = facet normals (unit rows), v = offsets
    code 4  ellipsoid  M = inverse shape matrix, v = center

All inside tests are closed (non-strict <=).
"""

from __future__ import annotations

import math
import os

import numpy as np

BALL, BOX, SIMPLEX, HPOLY, ELLIPSOID = 0, 1, 2, 3, 4

_EMPTY_M = np.zeros((0, 0))
_EMPTY_V = np.zeros(0)


# ---------------------------------------------------------------------------
# pure-numpy implementations

def inside_py(code: int, p: np.ndarray, M: np.ndarray, v: np.ndarray, s: float) -> bool:
    if code == BALL:
        q = p - v
        return bool(q @ q <= s * s)
    if code == BOX:
        return bool(np.max(np.abs(p - v)) <= s)
    if code == SIMPLEX:
        return bool(np.min(p) >= 0.0 and np.sum(p) <= s)
    if code == HPOLY:
        return bool(np.all(M @ p <= v))
    if code == ELLIPSOID:
        q = p - v
        return bool(q @ (M @ q) <= 1.0)
    raise ValueError(f"unknown body code {code}")


def bisect_py(code: int, d: np.ndarray, x: np.ndarray, M: np.ndarray,
              v: np.ndarray, s: float, hi: float, iters: int) -> float:
    """Largest alpha with d + alpha*x inside the body, by bisection.

    Precondition: d is inside and d + hi*x is outside.  Runs a fixed
    `iters` rounds, shrinking the bracket by half each time.
    """
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if inside_py(code, d + mid * x, M, v, s):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ellipsoid_cut_py(center: np.ndarray, P: np.ndarray,
                     g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Central cut of {y: (y-c)^T P^-1 (y-c) <= 1} by {<g, y-c> <= 0}.

    The classical minimum-volume update, then dilated so the volume
    ratio is exactly exp(-1/(2(n+1))) (containment is preserved; the
    dilation only grows the ellipsoid).  n == 1 degenerates to interval
    bisection with the same calibrated ratio.
    """
    n = center.size
    target = math.exp(-1.0 / (2.0 * (n + 1)))
    if n == 1:
        w = math.sqrt(P[0, 0])
        sign = 1.0 if g[0] > 0.0 else -1.0
        new_center = center - sign * (w / 2.0) * np.ones(1)
        new_w = w * target
        return new_center, np.array([[new_w * new_w]])
    Pg = P @ g
    # near-flat directions can round the quadratic form negative; the
    # clamp makes such cuts act as (harmless) near-no-ops instead
    q = max(float(g @ Pg), 1e-16 * float(np.trace(P)))
    denom = math.sqrt(q)
    b = Pg / denom
    new_center = center - b / (n + 1.0)
    P_new = (n * n / (n * n - 1.0)) * (P - (2.0 / (n + 1.0)) * np.outer(b, b))
    # dilate the minimum-volume ellipsoid up to the calibrated ratio
    ratio_min = (n / (n + 1.0)) * (n * n / (n * n - 1.0)) ** ((n - 1) / 2.0)
    scale = (target / ratio_min) ** (2.0 / n)
    P_new = P_new * scale
    P_new = 0.5 * (P_new + P_new.T)
    return new_center, P_new


# ---------------------------------------------------------------------------
# numba implementations (same contracts, explicit loops)

def _inside_loop(code, p, M, v, s):
    n = p.shape[0]
    if code == 0:
        acc = 0.0
        for j in range(n):
            q = p[j] - v[j]
            acc += q * q
        return acc <= s * s
    if code == 1:
        m = 0.0
        for j in range(n):
            a = abs(p[j] - v[j])
            if a > m:
                m = a
        return m <= s
    if code == 2:
        tot = 0.0
        for j in range(n):
            if p[j] < 0.0:
                return False
            tot += p[j]
        return tot <= s
    if code == 3:
        for i in range(M.shape[0]):
            acc = 0.0
            for j in range(n):
                acc += M[i, j] * p[j]
            if acc > v[i]:
                return False
        return True
    # ellipsoid
    acc = 0.0
    for i in range(n):
        row = 0.0
        for j in range(n):
            row += M[i, j] * (p[j] - v[j])
        acc += row * (p[i] - v[i])
    return acc <= 1.0


def _bisect_loop(code, d, x, M, v, s, hi, iters):
    n = d.shape[0]
    p = np.empty(n)
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        for j in range(n):
            p[j] = d[j] + mid * x[j]
        if _inside_loop(code, p, M, v, s):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


NUMBA_ENABLED = os.environ.get("ORC_NO_NUMBA", "").lower() not in ("1", "true", "yes")

if NUMBA_ENABLED:
    try:
        from numba import njit

        # rebind the global so the jitted bisect resolves the jitted inside
        _inside_loop = njit(cache=True)(_inside_loop)
        inside_nb = _inside_loop
        bisect_nb = njit(cache=True)(_bisect_loop)
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    inside = inside_nb
    bisect_alpha = bisect_nb
else:
    inside = inside_py
    bisect_alpha = bisect_py

ellipsoid_cut_kernel = ellipsoid_cut_py
