"""Bracketed scalar root finding used by the construction solvers.

The construction equations all come with proven sign brackets, so the
workhorse is plain bisection driven to a tight bracket, finished with a few
Newton steps (finite-difference derivative unless an analytic one is given).
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


def bisect_newton(
    f: Callable[[float], float],
    a: float,
    b: float,
    fa: Optional[float] = None,
    fb: Optional[float] = None,
    bracket_tol: float = 1e-13,
    newton_steps: int = 3,
    df: Optional[Callable[[float], float]] = None,
) -> float:
    """Bisection to |b - a| <= bracket_tol, then Newton polish.

    Newton iterates are rejected if they leave the original bracket; the
    bisection midpoint is then kept, so the result never escapes [a, b].
    """
    lo, hi = float(a), float(b)
    flo = f(lo) if fa is None else fa
    fhi = f(hi) if fb is None else fb
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(f"no sign change on [{a}, {b}] (f: {flo:.3e}, {fhi:.3e})")
    a0, b0 = lo, hi
    scale = max(abs(lo), abs(hi), 1.0)
    while hi - lo > bracket_tol * scale:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    x = 0.5 * (lo + hi)
    h = max(1e-7 * scale, 1e-12)
    for _ in range(newton_steps):
        fx = f(x)
        dfx = df(x) if df is not None else (f(x + h) - f(x - h)) / (2.0 * h)
        if dfx == 0.0 or not np.isfinite(dfx):
            break
        step = fx / dfx
        x_new = x - step
        if not (min(a0, b0) <= x_new <= max(a0, b0)) or not np.isfinite(x_new):
            break
        x = x_new
    return x


def scan_brackets(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                  n: int = 4096):
    """Sign scan of f on n+1 uniform points; returns bracket pairs."""
    xs = np.linspace(a, b, n + 1)
    vals = f(xs)
    s = np.sign(vals)
    out = []
    for k in range(n):
        if s[k] == 0.0:
            out.append((xs[k], xs[k]))
        elif s[k] * s[k + 1] < 0:
            out.append((xs[k], xs[k + 1]))
    return out
