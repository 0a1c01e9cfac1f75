"""Cross-tie critical point on the periodic rectangle.

On the quarter cell (0,T) x (0,H) with theta = 0 on the top and right
edges and walls along x = 0 and y = 0, three families of circular-arc
characteristics assemble a critical point once the half-period satisfies
the tangency relation

    (L/H) (sqrt((L/H)^2 + 4 Tt^2) - L/H) = 8 Tt^3 (1 - Tt^2)/(Tt^2+1)^2,

which makes the terminal characteristics of families I and III meet
tangentially at the (T, 0) vortex.  The energy per unit length depends on
L/H only; compared against the one-dimensional minimum it is lower exactly
on an interval (L0, L1) ~ (1.27, 2.14).

Family conventions (arcs marched along u^perp, stored v = physical
divergence, negative throughout the quarter cell):

  I   point-seeded at the (T,0) vortex, angle 2 atan((T-s)/H), curvature
      -1/R(s) with R(s) = (T-s)/2 + H^2/(2(T-s)); arcs end on the top edge.
  III seeded on the bottom wall at angle pi/2 - asin(w)/2 per
      sin(2 theta) = w = (-1 + sqrt(1+2 lambda))/lambda, lambda = 2 s^2/L^2,
      curvature -w/L; arcs end on the left wall.
  II  seeded tangentially on family I's terminal arc (theta continuous,
      v jumps), terminal angle the root of
      (1 - cos(alpha s)) sin(2 beta) - L alpha (cos beta - cos(alpha s)) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .characteristics import CharacteristicFamily, PiecewiseCriticalField
from .core import EnergyBreakdown, JumpSegment, Params
from .energy import eval_E0_piecewise, wall_energy
from .rect1d import min_energy_1d

SQRT2M1 = math.sqrt(2.0) - 1.0


# --- the period equation -----------------------------------------------------

def period_equation_residual(t_tilde, l_over_h: float):
    t = np.asarray(t_tilde, dtype=float)
    lh = l_over_h
    return lh * (np.sqrt(lh * lh + 4.0 * t * t) - lh) \
        - 8.0 * t ** 3 * (1.0 - t * t) / (t * t + 1.0) ** 2


def solve_Ttilde(l_over_h: float) -> float:
    """Scaled half-period T/H solving the tangency relation.

    The root lies in (sqrt(2)-1, 1) for every positive L/H; Brent plus a
    Newton polish leaves the residual at roundoff.
    """
    if l_over_h <= 0:
        raise ValueError("L/H > 0 required")
    lo, hi = SQRT2M1 + 1e-14, 1.0 - 1e-14
    f = lambda t: float(period_equation_residual(t, l_over_h))
    t = brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16)
    for _ in range(3):
        h = 1e-7
        d = (f(t + h) - f(t - h)) / (2 * h)
        if d == 0:
            break
        t_new = t - f(t) / d
        if lo < t_new < hi:
            t = t_new
    return t


def ttilde_closed_form_check(t_tilde: float, l_over_h: float) -> float:
    """|L/T - 2/sqrt(Lambda)| for the solved half-period, with
    zeta = 2x(x^2-1)/(x^2+1)^2, Lambda = (1-2 zeta)/zeta^2, x = H/T."""
    x = 1.0 / t_tilde
    zeta = 2.0 * x * (x * x - 1.0) / (x * x + 1.0) ** 2
    lam = (1.0 - 2.0 * zeta) / (zeta * zeta)
    return abs(l_over_h / t_tilde - 2.0 / math.sqrt(lam))


# --- region III seed relations ------------------------------------------------

def _w_of_lambda(lam):
    lam = np.asarray(lam, dtype=float)
    small = lam < 1e-8
    safe = np.where(small, 1.0, lam)
    w = (-1.0 + np.sqrt(1.0 + 2.0 * safe)) / safe
    series = 1.0 - 0.5 * lam + 0.5 * lam * lam
    return np.where(small, series, w)


def region3_seed_angle(s, L: float):
    """theta at the bottom wall: pi/2 - asin(w)/2 in (pi/4, pi/2)."""
    s = np.asarray(s, dtype=float)
    w = _w_of_lambda(2.0 * s * s / (L * L))
    return 0.5 * math.pi - 0.5 * np.arcsin(np.clip(w, -1.0, 1.0))


def region3_v(s, L: float):
    s = np.asarray(s, dtype=float)
    return -_w_of_lambda(2.0 * s * s / (L * L)) / L


# --- region II terminal angle ---------------------------------------------------

def region2_theta_star(s2, alpha: float, L: float):
    """Root of (1-cos(alpha s)) sin(2 beta) - L alpha (cos beta - cos(alpha s))
    on (0, beta*); vectorized bisection + Newton."""
    s2 = np.asarray(s2, dtype=float)
    shape = s2.shape
    s = np.atleast_1d(s2).astype(float)
    # stable forms: 1 - cos x = 2 sin^2(x/2);
    # cos b - cos a = -2 sin((b+a)/2) sin((b-a)/2)
    half = 0.5 * alpha * s
    c = 2.0 * np.sin(half) ** 2
    k = L * alpha

    def f(beta):
        return c * np.sin(2.0 * beta) \
            + 2.0 * k * np.sin(0.5 * (beta + alpha * s)) \
            * np.sin(0.5 * (beta - alpha * s))

    def df(beta):
        return 2.0 * c * np.cos(2.0 * beta) + k * np.sin(beta)

    sin_bstar = np.where(c > 0.5 * k, 0.5 * k / np.maximum(c, 1e-300), 1.0)
    beta_star = np.arcsin(np.clip(sin_bstar, 0.0, 1.0))
    lo = np.zeros_like(s)
    hi = beta_star
    flo = f(lo)
    degenerate = s <= 0.0
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        take_lo = np.sign(fm) == np.sign(flo)
        lo = np.where(take_lo, mid, lo)
        flo = np.where(take_lo, fm, flo)
        hi = np.where(take_lo, hi, mid)
    beta = 0.5 * (lo + hi)
    for _ in range(3):
        d = df(beta)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f(beta) / d
        bn = beta - step
        good = np.isfinite(bn) & (bn > 0.0) & (bn <= beta_star)
        beta = np.where(good, bn, beta)
    beta = np.where(degenerate, 0.0, beta)
    if shape == ():
        return float(beta[0])
    return beta.reshape(shape)


@dataclass
class CrossTieSolution:
    L: float
    H: float
    L_over_H: float
    T_tilde: float
    T: float
    alpha: float
    t1_star: float
    region1: CharacteristicFamily
    region2: CharacteristicFamily
    region3: CharacteristicFamily
    wall_left: JumpSegment
    wall_bottom: JumpSegment
    field: PiecewiseCriticalField

    @property
    def tangency_mismatch(self) -> float:
        """Angle gap at (T, 0) between the terminal arcs of families I and
        III (what the period equation enforces)."""
        theta_e = self.alpha * self.t1_star
        theta_b = float(region3_seed_angle(self.T, self.L))
        return abs(theta_e - theta_b)

    def wall_residual(self, n: int = 512) -> float:
        """sup |L v + sin 2 theta| over both walls' construction traces."""
        s3 = np.linspace(0.0, self.T, n)
        th = region3_seed_angle(s3, self.L)
        v = region3_v(s3, self.L)
        r_b = np.abs(self.L * v + np.sin(2.0 * th)).max()
        s2 = np.linspace(1e-9, self.t1_star, n)
        th2 = region2_theta_star(s2, self.alpha, self.L)
        v2 = -np.sin(2.0 * th2) / self.L
        r_l2 = np.abs(self.L * v2 + np.sin(2.0 * th2)).max()
        th3s = 0.5 * math.pi - th  # arrival angle on the left wall
        r_l3 = np.abs(self.L * v + np.sin(2.0 * th3s)).max()
        return float(max(r_b, r_l2, r_l3))


def build_crosstie(L: float, H: float) -> CrossTieSolution:
    """Assemble the three families and both walls on the quarter cell."""
    if L <= 0 or H <= 0:
        raise ValueError("L, H > 0 required")
    lh = L / H
    t_tilde = solve_Ttilde(lh)
    T = H * t_tilde
    alpha = 2.0 * T / (T * T + H * H)
    t1_star = 2.0 * math.atan2(T, H) / alpha

    # region I: point seed at the vortex (T, 0)
    def seed1(s):
        s = np.asarray(s, dtype=float)
        d = T - s
        theta0 = 2.0 * np.arctan2(d, H)
        v0 = -2.0 * d / (d * d + H * H)
        return (np.full_like(s, T), np.zeros_like(s), theta0, v0)

    def t_star1(s):
        s = np.asarray(s, dtype=float)
        d = T - s
        theta0 = 2.0 * np.arctan2(d, H)
        with np.errstate(divide="ignore", invalid="ignore"):
            R = 0.5 * d + H * H / (2.0 * np.where(d > 0, d, 1.0))
        return np.where(d > 1e-300, R * theta0, H)

    fam1 = CharacteristicFamily(seed=seed1, s_range=(0.0, T), t_star=t_star1,
                                label="crosstie region I")

    # region III: bottom wall to left wall
    def seed3(s):
        s = np.asarray(s, dtype=float)
        return (s, np.zeros_like(s), region3_seed_angle(s, L), region3_v(s, L))

    def t_star3(s):
        # pi/2 - 2 theta_b = -acos(w), v = -w/L: t* = L acos(w)/w
        s = np.asarray(s, dtype=float)
        w = _w_of_lambda(2.0 * s * s / (L * L))
        return L * np.arccos(np.clip(w, -1.0, 1.0)) / w

    fam3 = CharacteristicFamily(seed=seed3, s_range=(0.0, T), t_star=t_star3,
                                label="crosstie region III")

    # region II: seeded on Gamma (family I's terminal arc)
    def seed2(s):
        s = np.asarray(s, dtype=float)
        x0 = (1.0 - np.cos(alpha * s)) / alpha
        y0 = H - np.sin(alpha * s) / alpha
        th0 = alpha * s
        th_star = region2_theta_star(s, alpha, L)
        v = -np.sin(2.0 * th_star) / L
        return (x0, y0, th0, v)

    def t_star2(s):
        s = np.asarray(s, dtype=float)
        th_star = region2_theta_star(s, alpha, L)
        v = -np.sin(2.0 * th_star) / L
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (th_star - alpha * s) / np.where(v != 0.0, v, 1.0)
        # s -> 0: theta* ~ alpha s (1 - s/L), v ~ -2 alpha s / L: t* -> s/2
        return np.where(v != 0.0, t, 0.5 * s)

    fam2 = CharacteristicFamily(seed=seed2, s_range=(0.0, t1_star),
                                t_star=t_star2, label="crosstie region II")

    # --- walls -----------------------------------------------------------
    n_w = 1024
    # bottom wall y = 0, x in (0, T): trace angle theta_b(x)
    xs = np.linspace(0.0, T, n_w)
    thb = region3_seed_angle(xs, L)
    v3 = region3_v(xs, L)
    theta_b_of_x = PchipInterpolator(xs, thb)
    v3_of_x = PchipInterpolator(xs, v3)

    def bot_plus(arc):
        th = theta_b_of_x(np.asarray(arc, dtype=float))
        return np.stack([np.cos(th), np.sin(th)], axis=-1)

    def bot_minus(arc):
        th = theta_b_of_x(np.asarray(arc, dtype=float))
        return np.stack([-np.cos(th), np.sin(th)], axis=-1)

    wall_bottom = JumpSegment(
        polyline=np.stack([xs, np.zeros_like(xs)], axis=-1),
        normals=np.tile([0.0, -1.0], (n_w, 1)),
        trace_plus=np.stack([np.cos(thb), np.sin(thb)], axis=-1),
        trace_minus=np.stack([-np.cos(thb), np.sin(thb)], axis=-1),
        div_plus=v3, div_minus=-v3,
        trace_fns=(bot_plus, bot_minus),
        div_fns=(lambda s: v3_of_x(np.asarray(s, float)),
                 lambda s: -v3_of_x(np.asarray(s, float))))

    # left wall x = 0, y in (0, H): arrivals of III (y < T) and II (y > T).
    # Stable arrival heights: region III collapses to
    # y3 = sqrt(2) L sin(acos(w)/2)/w; region II uses the half-angle product
    # form of sin(theta*) - sin(alpha s) to avoid cancellation near y = H.
    s3 = np.linspace(0.0, T, n_w // 2 + 1)
    w3 = _w_of_lambda(2.0 * s3 * s3 / (L * L))
    th3b = region3_seed_angle(s3, L)
    th3s = 0.5 * math.pi - th3b
    v3a = region3_v(s3, L)
    y3 = math.sqrt(2.0) * L * np.sin(0.5 * np.arccos(np.clip(w3, -1, 1))) / w3
    s2 = np.linspace(1e-9 * T, t1_star, n_w // 2 + 1)
    th2s = region2_theta_star(s2, alpha, L)
    v2a = -np.sin(2.0 * th2s) / L
    y0_2 = H - np.sin(alpha * s2) / alpha
    diff = 2.0 * np.cos(0.5 * (th2s + alpha * s2)) * np.sin(0.5 * (th2s - alpha * s2))
    with np.errstate(divide="ignore", invalid="ignore"):
        y2 = y0_2 + np.where(v2a != 0.0,
                             diff / np.where(v2a != 0, v2a, 1.0), 0.0)
    yw = np.concatenate([y3, y2])
    thw = np.concatenate([th3s, th2s])
    vw = np.concatenate([v3a, v2a])
    order = np.argsort(yw)
    yw, thw, vw = yw[order], thw[order], vw[order]
    keep = np.concatenate([[True], np.diff(yw) > 1e-14 * H])
    yw, thw, vw = yw[keep], thw[keep], vw[keep]
    theta_of_y = PchipInterpolator(yw, thw)
    v_of_y = PchipInterpolator(yw, vw)

    def left_plus(arc):
        th = theta_of_y(np.asarray(arc, dtype=float))
        return np.stack([np.cos(th), np.sin(th)], axis=-1)

    def left_minus(arc):
        th = theta_of_y(np.asarray(arc, dtype=float))
        return np.stack([np.cos(th), -np.sin(th)], axis=-1)

    wall_left = JumpSegment(
        polyline=np.stack([np.zeros_like(yw), yw], axis=-1),
        normals=np.tile([-1.0, 0.0], (len(yw), 1)),
        trace_plus=np.stack([np.cos(thw), np.sin(thw)], axis=-1),
        trace_minus=np.stack([np.cos(thw), -np.sin(thw)], axis=-1),
        div_plus=vw, div_minus=-vw,
        trace_fns=(left_plus, left_minus),
        div_fns=(lambda s: v_of_y(np.asarray(s, float)),
                 lambda s: -v_of_y(np.asarray(s, float))))

    field = PiecewiseCriticalField(
        families=[fam1, fam2, fam3], jumps=[wall_left, wall_bottom],
        domain=f"period cell (0,{2*T})x(-{H},{H})",
        symmetry_copies=4, wall_multiplier=2.0)

    sol = CrossTieSolution(L=L, H=H, L_over_H=lh, T_tilde=t_tilde, T=T,
                           alpha=alpha, t1_star=t1_star,
                           region1=fam1, region2=fam2, region3=fam3,
                           wall_left=wall_left, wall_bottom=wall_bottom,
                           field=field)

    if sol.tangency_mismatch > 1e-9:
        raise RuntimeError(f"tangency mismatch {sol.tangency_mismatch:.3e} "
                           "(period equation violated)")
    res = sol.wall_residual()
    if res > 1e-8:
        raise RuntimeError(f"wall residual {res:.3e} exceeds 1e-8")
    # terminal region III characteristic must arrive at (0, T)
    if abs(float(y3[-1]) - T) > 1e-8 * max(T, 1.0):
        raise RuntimeError(f"terminal arrival y = {y3[-1]} != T = {T}")
    return sol


def crosstie_energy_per_length(sol: CrossTieSolution, s_panels: int = 128,
                               t_panels: int = 128, order: int = 4,
                               wall_order: int = 8) -> float:
    """(1/2T) E0 over one period cell (function of L/H only)."""
    eb = eval_E0_piecewise(sol.field, Params(L=sol.L, H=sol.H, T=sol.T),
                           s_panels=s_panels, t_panels=t_panels, order=order,
                           wall_order=wall_order)
    return eb.total / (2.0 * sol.T)


def crosstie_energy_breakdown(sol: CrossTieSolution, **kw) -> EnergyBreakdown:
    return eval_E0_piecewise(sol.field, Params(L=sol.L, H=sol.H, T=sol.T), **kw)


def find_crossing(H: float = 1.0, l_lo: float = 0.5, l_hi: float = 3.0,
                  step: float = 0.01, s_panels: int = 128, t_panels: int = 128,
                  order: int = 4, refine_tol: float = 1e-6,
                  sweep_hook=None) -> Tuple[Optional[float], Optional[float]]:
    """Sign changes of (cross-tie energy per length) - (1D minimum).

    Scans L/H on a uniform grid, bisects each sign change to refine_tol,
    and returns (L0, L1); either may be None when no crossing shows up in
    the window.  sweep_hook(l, e2d, e1d) is called per sample for CSV dumps.
    """
    def gap(lh: float) -> float:
        sol = build_crosstie(lh * H, H)
        e2 = crosstie_energy_per_length(sol, s_panels, t_panels, order)
        e1 = min_energy_1d(lh, 1.0, 0.0)
        if sweep_hook is not None:
            sweep_hook(lh, e2, e1)
        return e2 - e1

    n = int(round((l_hi - l_lo) / step))
    grid = [l_lo + k * step for k in range(n + 1)]
    vals = [gap(l) for l in grid]
    crossings = []
    for k in range(n):
        if vals[k] == 0.0:
            crossings.append(grid[k])
        elif (vals[k] < 0) != (vals[k + 1] < 0):
            lo, hi = grid[k], grid[k + 1]
            flo = vals[k]
            while hi - lo > refine_tol:
                mid = 0.5 * (lo + hi)
                fm = gap(mid)
                if (fm < 0) == (flo < 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            crossings.append(0.5 * (lo + hi))
    L0 = crossings[0] if crossings else None
    L1 = crossings[1] if len(crossings) > 1 else None
    return L0, L1


# --- pointwise evaluation on the period cell ----------------------------------

def _quarter_eval_batch(sol: CrossTieSolution, x, y):
    """(theta, v) arrays for points in the closed quarter cell."""
    L, H, T, alpha, t1 = sol.L, sol.H, sol.T, sol.alpha, sol.t1_star
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    theta = np.full(x.shape, np.nan)
    v = np.full(x.shape, np.nan)

    # Points within a hair of Gamma get the Gamma angle directly: theta is
    # continuous across it and the circle-root solves of region II degrade
    # exactly there (grazing double roots).  The v assignment on the sliver
    # is the region-I side of the admissible jump.
    sliver = 1e-4 * max(T, H)
    dist = np.hypot(x - 1.0 / alpha, y - H)
    near_gamma = np.abs(dist - 1.0 / alpha) <= sliver
    if near_gamma.any():
        g = 1.0 / alpha
        theta[near_gamma] = np.arctan2((H - y[near_gamma]) / g,
                                       (1.0 / alpha - x[near_gamma]) / g)
        v[near_gamma] = -alpha

    # region I: inside the Gamma circle |p - (1/alpha, H)| <= 1/alpha
    mI = (dist <= 1.0 / alpha) & ~near_gamma
    if mI.any():
        xi, yi = x[mI], y[mI]

        def residI(s):
            d = T - s
            R = 0.5 * d + H * H / (2.0 * np.maximum(d, 1e-300))
            cx = 0.5 * (T + s) + H * H / (2.0 * np.maximum(d, 1e-300))
            return (xi - cx) ** 2 + (yi - H) ** 2 - R * R

        lo = np.zeros_like(xi)
        hi = np.full_like(xi, T * (1.0 - 1e-12))
        flo = residI(lo)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fm = residI(mid)
            take = np.sign(fm) == np.sign(flo)
            lo = np.where(take, mid, lo)
            flo = np.where(take, fm, flo)
            hi = np.where(take, hi, mid)
        s1 = 0.5 * (lo + hi)
        d = T - s1
        vv = -2.0 * d / (d * d + H * H)
        g = -1.0 / np.where(vv != 0, vv, -1e-300)
        cx = 0.5 * (T + s1) + H * H / (2.0 * np.maximum(d, 1e-300))
        theta[mI] = np.arctan2((H - yi) / g, (cx - xi) / g)
        v[mI] = vv

    rem = ~mI & ~near_gamma
    if rem.any():
        thbT = float(region3_seed_angle(T, L))
        v3T = float(region3_v(T, L))
        c3x = T - math.cos(thbT) / v3T
        c3y = -math.sin(thbT) / v3T
        R3 = 1.0 / abs(v3T)
        xr, yr = x[rem], y[rem]
        m3 = (xr - c3x) ** 2 + (yr - c3y) ** 2 >= R3 * R3
        th_r = np.full(xr.shape, np.nan)
        v_r = np.full(xr.shape, np.nan)
        if m3.any():
            x3, y3 = xr[m3], yr[m3]

            def resid3(s):
                thb = region3_seed_angle(s, L)
                v3 = region3_v(s, L)
                cx = s - np.cos(thb) / v3
                cy = -np.sin(thb) / v3
                return (x3 - cx) ** 2 + (y3 - cy) ** 2 - 1.0 / (v3 * v3)

            lo = np.full_like(x3, 1e-9 * T)
            hi = np.full_like(x3, T)
            flo = resid3(lo)
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = resid3(mid)
                take = np.sign(fm) == np.sign(flo)
                lo = np.where(take, mid, lo)
                flo = np.where(take, fm, flo)
                hi = np.where(take, hi, mid)
            s3 = 0.5 * (lo + hi)
            thb = region3_seed_angle(s3, L)
            v3 = region3_v(s3, L)
            g = -1.0 / v3
            cx = s3 - np.cos(thb) / v3
            cy = -np.sin(thb) / v3
            th_r[m3] = np.arctan2((cy - y3) / g, (cx - x3) / g)
            v_r[m3] = v3
        m2 = ~m3
        if m2.any():
            x2, y2 = xr[m2], yr[m2]

            def resid2(s):
                th2 = region2_theta_star(s, alpha, L)
                v2 = -np.sin(2.0 * th2) / L
                v2 = np.where(v2 != 0, v2, -1e-300)
                x0 = (1.0 - np.cos(alpha * s)) / alpha
                y0 = H - np.sin(alpha * s) / alpha
                cx = x0 - np.cos(alpha * s) / v2
                cy = y0 - np.sin(alpha * s) / v2
                return (x2 - cx) ** 2 + (y2 - cy) ** 2 - 1.0 / (v2 * v2)

            # the tangentially seeded circles can pass a point twice; keep
            # the root whose recovered arc parameter lies in [0, t*]
            from .disc import _bracketed_arc_solve_both

            def recover(s):
                th2 = region2_theta_star(s, alpha, L)
                v2 = -np.sin(2.0 * th2) / L
                v2 = np.where(v2 != 0, v2, -1e-300)
                g = -1.0 / v2
                x0 = (1.0 - np.cos(alpha * s)) / alpha
                y0 = H - np.sin(alpha * s) / alpha
                cx = x0 - np.cos(alpha * s) / v2
                cy = y0 - np.sin(alpha * s) / v2
                th = np.arctan2((cy - y2) / g, (cx - x2) / g)
                t = (th - alpha * s) / v2
                ts = (th2 - alpha * s) / v2
                return th, v2, t, ts

            s_a, s_b = _bracketed_arc_solve_both(resid2, 1e-7 * t1,
                                                 t1 * (1 - 1e-9),
                                                 geometric=True)
            th_a, v_a, t_a, ts_a = recover(np.nan_to_num(s_a))
            th_b, v_b, t_b, ts_b = recover(np.nan_to_num(s_b))
            # reject the degenerate corner root (clamped v) outright: its
            # recovered arc parameter is meaningless
            ok_a = np.isfinite(s_a) & (np.abs(v_a) > 1e-10) \
                & (t_a >= -1e-9) & (t_a <= ts_a * (1 + 1e-9) + 1e-12)
            ok_b = np.isfinite(s_b) & (np.abs(v_b) > 1e-10) \
                & (t_b >= -1e-9) & (t_b <= ts_b * (1 + 1e-9) + 1e-12)
            pick_b = ~ok_a & ok_b
            th_r[m2] = np.where(pick_b, th_b, th_a)
            v_r[m2] = np.where(pick_b, v_b, v_a)
        theta[rem] = th_r
        v[rem] = v_r
    if np.any(~np.isfinite(theta)):
        bad = np.nonzero(~np.isfinite(theta))
        raise ValueError(f"{len(bad[0])} quarter-cell points not covered "
                         f"(first: {x[bad][0]}, {y[bad][0]})")
    return theta, v


def crosstie_field_sample(sol: CrossTieSolution, x, y):
    """Vectorized (u1, u2, v) on the period cell via quarter-cell
    reflections: u1 flips across y = 0, u2 flips across x = T (both flip
    the divergence sign); x is reduced modulo the period 2T."""
    T, H = sol.T, sol.H
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = x.shape
    x = np.mod(x.ravel(), 2.0 * T)
    y = y.ravel().copy()
    f1 = np.where(y < 0, -1.0, 1.0)
    y = np.abs(y)
    f2 = np.where(x > T, -1.0, 1.0)
    x = np.where(x > T, 2.0 * T - x, x)
    theta, v = _quarter_eval_batch(sol, x, np.minimum(y, H))
    u1 = np.cos(theta) * f1
    u2 = np.sin(theta) * f2
    v = v * f1 * f2
    return u1.reshape(shape), u2.reshape(shape), v.reshape(shape)


# --- the explicit divergence-free cross-tie map ------------------------------

def remark_crosstie_map(x, y):
    """Periodic piecewise map: six angular sectors on the strip |x| < 1/2,
    extended 1-periodically in x; divergence-free with cubic-cost walls."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xr = x - np.round(x)  # reduce to [-1/2, 1/2)
    theta = np.mod(np.arctan2(y, xr), 2.0 * np.pi)
    r = np.hypot(xr, y)
    s2 = 1.0 / math.sqrt(2.0)
    u1 = np.empty_like(theta)
    u2 = np.empty_like(theta)
    with np.errstate(invalid="ignore", divide="ignore"):
        st = np.where(r > 0, y / np.maximum(r, 1e-300), 0.0)
        ct = np.where(r > 0, xr / np.maximum(r, 1e-300), 1.0)
    conds = [
        theta <= 0.25 * np.pi,
        (theta > 0.25 * np.pi) & (theta <= 0.75 * np.pi),
        (theta > 0.75 * np.pi) & (theta <= np.pi),
        (theta > np.pi) & (theta <= 1.25 * np.pi),
        (theta > 1.25 * np.pi) & (theta <= 1.75 * np.pi),
        theta > 1.75 * np.pi,
    ]
    vals1 = [s2, st, s2, -s2, st, -s2]
    vals2 = [-s2, -ct, s2, s2, -ct, -s2]
    u1 = np.select(conds, vals1)
    u2 = np.select(conds, vals2)
    return u1, u2


def remark_crosstie_field(y_split: float = 8.0, n_tail: int = 256) -> PiecewiseCriticalField:
    """Jump segments of the explicit map on one period (tails truncated at
    |y| = y_split; the remainder is analytic, see remark_tail_integral)."""
    s2 = 1.0 / math.sqrt(2.0)
    segs = []
    # horizontal wall y = 0, |x| < 1/2 (trace pairs differ per half)
    xs = np.linspace(-0.5, 0.5, 257)
    above = np.where(xs[:, None] >= 0, [[s2, -s2]], [[s2, s2]])
    below = np.where(xs[:, None] >= 0, [[-s2, -s2]], [[-s2, s2]])

    def h_plus(arc):
        xx = np.asarray(arc, dtype=float) - 0.5
        return np.where(xx[..., None] >= 0, [s2, -s2], [s2, s2])

    def h_minus(arc):
        xx = np.asarray(arc, dtype=float) - 0.5
        return np.where(xx[..., None] >= 0, [-s2, -s2], [-s2, s2])

    segs.append(JumpSegment(
        polyline=np.stack([xs, np.zeros_like(xs)], axis=-1),
        normals=np.tile([0.0, 1.0], (len(xs), 1)),
        trace_plus=above, trace_minus=below,
        trace_fns=(h_plus, h_minus)))
    # vertical wall x = 1/2, |y| < 1/2
    ys = np.linspace(-0.5, 0.5, 257)
    left = np.where(ys[:, None] >= 0, [[s2, -s2]], [[-s2, -s2]])
    right = np.where(ys[:, None] >= 0, [[s2, s2]], [[-s2, s2]])

    def v_plus(arc):
        yy = np.asarray(arc, dtype=float) - 0.5
        return np.where(yy[..., None] >= 0, [s2, -s2], [-s2, -s2])

    def v_minus(arc):
        yy = np.asarray(arc, dtype=float) - 0.5
        return np.where(yy[..., None] >= 0, [s2, s2], [-s2, s2])

    segs.append(JumpSegment(
        polyline=np.stack([np.full_like(ys, 0.5), ys], axis=-1),
        normals=np.tile([1.0, 0.0], (len(ys), 1)),
        trace_plus=left, trace_minus=right,
        trace_fns=(v_plus, v_minus)))
    # tails x = 1/2, 1/2 < |y| < y_split
    for sgn in (+1.0, -1.0):
        yy = sgn * np.linspace(0.5, y_split, n_tail)

        def t_plus(arc, sgn=sgn):
            y_ = sgn * (0.5 + np.asarray(arc, dtype=float))
            th = np.arctan2(y_, 0.5)
            return np.stack([np.sin(th), -np.cos(th)], axis=-1)

        def t_minus(arc, sgn=sgn):
            y_ = sgn * (0.5 + np.asarray(arc, dtype=float))
            th = np.arctan2(y_, -0.5)
            return np.stack([np.sin(th), -np.cos(th)], axis=-1)

        th_l = np.arctan2(yy, 0.5)
        th_r = np.arctan2(yy, -0.5)
        segs.append(JumpSegment(
            polyline=np.stack([np.full_like(yy, 0.5), yy], axis=-1),
            normals=np.tile([1.0, 0.0], (len(yy), 1)),
            trace_plus=np.stack([np.sin(th_l), -np.cos(th_l)], axis=-1),
            trace_minus=np.stack([np.sin(th_r), -np.cos(th_r)], axis=-1),
            trace_fns=(t_plus, t_minus)))
    return PiecewiseCriticalField(families=[], jumps=segs,
                                  domain="strip |x|<1/2, one period")


def remark_tail_integral(Y: float) -> float:
    """int_Y^inf (1 + 4 y^2)^(-3/2) dy = (1/2)(1 - 2Y/sqrt(1+4Y^2))."""
    return 0.5 * (1.0 - 2.0 * Y / math.sqrt(1.0 + 4.0 * Y * Y))


def remark_crosstie_energy(y_split: float = 8.0, wall_order: int = 8) -> float:
    """E0 per period of the explicit map: quadrature on the truncated walls
    plus the analytic tail beyond |y| = y_split (two tails)."""
    field = remark_crosstie_field(y_split=y_split)
    eb = eval_E0_piecewise(field, Params(), wall_order=wall_order)
    tail = 2.0 * (4.0 / 3.0) * remark_tail_integral(y_split)
    return eb.total + tail
