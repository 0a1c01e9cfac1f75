"""Energy evaluation.

Three evaluators live here:

* eval_E_eps: the eps-level energy of a sampled field on a rectangle or
  polar grid (gradient, potential and divergence terms), via the discrete
  quadratic forms in `stencils`.  The gradient-flow right-hand side is the
  exact gradient of this discrete energy.
* eval_E0_piecewise: the limiting wall-energy functional on an assembled
  piecewise critical field.  Bulk divergence is integrated per family in
  characteristic coordinates, sum over s-t panels of v0(s)^2 |J|; walls are
  cubic-jump line integrals over the stored jump segments.
* eval_E0_1d / eval_E_eps_1d: the y-only energies on the rectangle.

Wall cost appears in two equivalent forms, |u+ - u-|^3 / 6 and
(4/3) (1 - (u.nu)^2)^(3/2); both are exposed for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import stencils
from .characteristics import (CharacteristicFamily, NoConvergence,
                              PiecewiseCriticalField, check_foliation,
                              family_jacobian)
from .core import (POLAR, RECTANGLE, EnergyBreakdown, Field2D, JumpSegment,
                   Params)
from .quadrature import composite_nodes, gauss_legendre

TRACE_UNIT_TOL = 1e-8
TRACE_NORMAL_TOL = 1e-8


@dataclass(frozen=True)
class WallIntegrand:
    """The two equivalent per-point wall cost forms."""

    jump_cube: float     # |u+ - u-|^3 / 6
    normal_form: float   # (4/3) (1 - (u.nu)^2)^(3/2)

    @classmethod
    def from_traces(cls, trace_plus, trace_minus, normal) -> "WallIntegrand":
        up = np.asarray(trace_plus, dtype=float)
        um = np.asarray(trace_minus, dtype=float)
        nu = np.asarray(normal, dtype=float)
        jump = up - um
        jc = float(np.linalg.norm(jump) ** 3) / 6.0
        un = float(np.dot(up, nu))
        nf = (4.0 / 3.0) * max(1.0 - un * un, 0.0) ** 1.5
        return cls(jump_cube=jc, normal_form=nf)


def wall_cost_density(trace_plus, trace_minus, normal=None) -> float:
    """(1/6) |u+ - u-|^3 for a pair of unit traces.

    When a normal is supplied, the traces must share their normal component
    to within 1e-8 (the admissibility condition for jump sets).
    """
    up = np.asarray(trace_plus, dtype=float)
    um = np.asarray(trace_minus, dtype=float)
    for name, v in (("trace_plus", up), ("trace_minus", um)):
        if abs(np.linalg.norm(v) - 1.0) > TRACE_UNIT_TOL:
            raise ValueError(f"{name} is not a unit vector")
    if normal is not None:
        nu = np.asarray(normal, dtype=float)
        mismatch = abs(float(np.dot(up - um, nu)))
        if mismatch > TRACE_NORMAL_TOL:
            raise ValueError(
                f"normal components of the traces differ by {mismatch:.3e}"
            )
    return float(np.linalg.norm(up - um) ** 3) / 6.0


# --- wall line integrals ----------------------------------------------------

def _segment_quadrature(seg: JumpSegment, order: int):
    """Gauss-Legendre nodes along the polyline with traces at the nodes.

    Returns (weights, u_plus, u_minus) with weights carrying the arclength
    measure.  Traces come from seg.trace_fns when available (exact), else
    from renormalized linear interpolation of the vertex traces.
    """
    gl_x, gl_w = gauss_legendre(order)
    seg_len = seg.segment_lengths
    arc0 = seg.arclengths[:-1]
    # nodes per segment: lam in (0, 1)
    lam = 0.5 * (gl_x + 1.0)
    w = 0.5 * gl_w
    lam_full = lam[None, :]
    weights = (seg_len[:, None] * w[None, :]).ravel()
    arcs = (arc0[:, None] + seg_len[:, None] * lam_full).ravel()
    if seg.trace_fns is not None:
        fp, fm = seg.trace_fns
        up = np.asarray(fp(arcs), dtype=float)
        um = np.asarray(fm(arcs), dtype=float)
    else:
        tp, tm = seg.trace_plus, seg.trace_minus
        up = (tp[:-1, None, :] * (1 - lam_full[..., None])
              + tp[1:, None, :] * lam_full[..., None]).reshape(-1, 2)
        um = (tm[:-1, None, :] * (1 - lam_full[..., None])
              + tm[1:, None, :] * lam_full[..., None]).reshape(-1, 2)
        up /= np.linalg.norm(up, axis=1, keepdims=True)
        um /= np.linalg.norm(um, axis=1, keepdims=True)
    return weights, up, um


def wall_energy(seg: JumpSegment, order: int = 8) -> float:
    """Line integral of (1/6)|u+ - u-|^3 over one jump segment."""
    weights, up, um = _segment_quadrature(seg, order)
    jump = np.linalg.norm(up - um, axis=1)
    return float(np.dot(weights, jump ** 3)) / 6.0


# --- E0 on piecewise critical fields ---------------------------------------

def _family_jacobian_grid(family: CharacteristicFamily, s_nodes, T, ds=None):
    """|J| on the (s_nodes x tau) grid with seeds evaluated once per s-node
    (the seed solves dominate the cost for root-defined families)."""
    from .characteristics import arc_xy
    s_lo, s_hi = family.s_range
    if ds is None:
        ds = 1e-6 * max(s_hi - s_lo, 1.0)
    sp = np.minimum(s_nodes + ds, s_hi)
    sm = np.maximum(s_nodes - ds, s_lo)
    col = lambda a: np.asarray(a, dtype=float)[:, None]
    x0, y0, th0, v0 = (col(a) for a in family.seed(s_nodes))
    xp0, yp0, thp0, vp0 = (col(a) for a in family.seed(sp))
    xm0, ym0, thm0, vm0 = (col(a) for a in family.seed(sm))
    _, _, theta = arc_xy(x0, y0, th0, v0, T)
    xp, yp, _ = arc_xy(xp0, yp0, thp0, vp0, T)
    xm, ym, _ = arc_xy(xm0, ym0, thm0, vm0, T)
    denom = (sp - sm)[:, None]
    x_s = (xp - xm) / denom
    y_s = (yp - ym) / denom
    J = x_s * np.cos(theta) + y_s * np.sin(theta)
    return J, np.broadcast_to(v0, J.shape)


def family_bulk_integral(family: CharacteristicFamily, s_panels: int = 64,
                         t_panels: int = 64, order: int = 8) -> float:
    """integral of v0(s)^2 |J(s,t)| over the family's (s, t) region.

    t is mapped panel-wise onto [0, t_star(s)] per s-node, so the panel
    layout follows the region.
    """
    s_lo, s_hi = family.s_range
    s_nodes, s_w = composite_nodes(s_lo, s_hi, s_panels, order)
    tau_nodes, tau_w = composite_nodes(0.0, 1.0, t_panels, order)
    ts = np.maximum(np.asarray(family.t_star(s_nodes), dtype=float), 0.0)[:, None]
    T = tau_nodes[None, :] * ts
    J, V = _family_jacobian_grid(family, s_nodes, T)
    integrand = (V ** 2) * np.abs(J) * ts
    return float(s_w @ integrand @ tau_w)


def family_area(family: CharacteristicFamily, s_panels: int = 64,
                t_panels: int = 64, order: int = 8) -> float:
    """integral of |J| -- the area covered by the family (foliation check)."""
    s_lo, s_hi = family.s_range
    s_nodes, s_w = composite_nodes(s_lo, s_hi, s_panels, order)
    tau_nodes, tau_w = composite_nodes(0.0, 1.0, t_panels, order)
    ts = np.maximum(np.asarray(family.t_star(s_nodes), dtype=float), 0.0)[:, None]
    T = tau_nodes[None, :] * ts
    J, _ = _family_jacobian_grid(family, s_nodes, T)
    return float(s_w @ (np.abs(J) * ts) @ tau_w)


class FoliationError(RuntimeError):
    pass


def eval_E0_piecewise(field: PiecewiseCriticalField, params: Params,
                      s_panels: int = 64, t_panels: int = 64, order: int = 8,
                      wall_order: int = 8,
                      verify_foliation: bool = False) -> EnergyBreakdown:
    """Limiting energy of an assembled critical field.

    bulk = (L/2) * symmetry_copies * sum_f integral v0^2 |J|
    walls = wall_multiplier * cubic jump integrals (interior), plus the
    boundary term for segments flagged boundary (trace_minus = g there).
    """
    if verify_foliation:
        for fam in field.families:
            rep = check_foliation(fam, ns=12, nt=12)
            if not rep.sign_consistent or rep.crossings:
                raise FoliationError(
                    f"family {fam.label!r}: sign_consistent={rep.sign_consistent}, "
                    f"crossings={rep.crossings}"
                )
    bulk = 0.0
    for fam in field.families:
        bulk += family_bulk_integral(fam, s_panels, t_panels, order)
    bulk *= 0.5 * params.L * field.symmetry_copies

    wall_int = 0.0
    wall_bdy = 0.0
    for seg in field.jumps:
        seg.validate()
        w = wall_energy(seg, order=wall_order) * field.wall_multiplier
        if seg.boundary:
            wall_bdy += w
        else:
            wall_int += w
    return EnergyBreakdown(bulk_div=bulk, wall_interior=wall_int,
                           wall_boundary=wall_bdy)


# --- eps-level energy on grids ----------------------------------------------

def eval_E_eps(field: Field2D, params: Params, bc=None) -> EnergyBreakdown:
    """Discrete eps-level energy on the field's grid.

    grad = (eps/2) int |grad u|^2, potential = 1/(2 eps) int (|u|^2-1)^2,
    bulk = (L/2) int (div u)^2; second-order stencils, trapezoid weights,
    metric-aware on polar grids.  When a boundary-condition descriptor is
    given its Dirichlet rows are checked against the field.
    """
    g = field.grid
    u = field.values
    if bc is not None:
        bc.check(field)
    if g.kind == RECTANGLE:
        hx, hy = g.spacing
        W = stencils.rect_node_weights(g.n1, g.n2, hx, hy, g.periodic_x)
        qk = stencils.rect_grad_form(u, hx, hy, g.periodic_x)
        qd = stencils.rect_div_form(u, hx, hy, g.periodic_x)
    else:
        rs, ts = g.axes()
        if rs[0] <= 0.0:
            raise ValueError("polar energy evaluation needs r_in > 0")
        dr, dt = g.spacing
        W = stencils.polar_node_weights(rs, dr, dt)
        qk = stencils.polar_grad_form(u, rs, dr, dt)
        qd = stencils.polar_div_form(u, rs, ts, dr, dt)
    mod2 = u[..., 0] ** 2 + u[..., 1] ** 2
    pot = float(np.sum(W * (mod2 - 1.0) ** 2))
    return EnergyBreakdown(
        grad_term=0.5 * params.eps * qk,
        potential_term=pot / (2.0 * params.eps),
        bulk_div=0.5 * params.L * qd,
    )


# --- one-dimensional energies ------------------------------------------------

@dataclass
class GridProfile1D:
    """y-sampled competitor (u1, u2) on [-H, H]."""

    ys: np.ndarray
    values: np.ndarray  # (n, 2)

    def __post_init__(self):
        self.ys = np.asarray(self.ys, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.ys.shape[0], 2):
            raise ValueError("values must be (n, 2)")


BC_TOL_1D = 1e-12


def eval_E_eps_1d(profile: GridProfile1D, params: Params) -> EnergyBreakdown:
    """Trapezoid-rule eps-level energy of a sampled 1D profile.

    The profile must satisfy the Dirichlet data (+-sqrt(1-a^2), a) at +-H
    to within 1e-12.
    """
    ys, u = profile.ys, profile.values
    a = params.a
    s = math.sqrt(1.0 - a * a)
    bc_err = max(
        abs(u[0, 0] + s), abs(u[0, 1] - a),
        abs(u[-1, 0] - s), abs(u[-1, 1] - a),
        abs(ys[0] + params.H), abs(ys[-1] - params.H),
    )
    if bc_err > BC_TOL_1D:
        raise ValueError(f"boundary data violated by {bc_err:.3e}")
    dy = np.diff(ys)
    du = np.diff(u, axis=0)
    # midpoint rule on derivative terms (second order, like the 2D forms)
    grad = float(np.sum((du[:, 0] ** 2 + du[:, 1] ** 2) / dy))
    div = float(np.sum(du[:, 1] ** 2 / dy))
    mod2 = u[:, 0] ** 2 + u[:, 1] ** 2
    wtrap = np.zeros_like(ys)
    wtrap[:-1] += 0.5 * dy
    wtrap[1:] += 0.5 * dy
    pot = float(np.sum(wtrap * (mod2 - 1.0) ** 2))
    return EnergyBreakdown(
        grad_term=0.5 * params.eps * grad,
        potential_term=pot / (2.0 * params.eps),
        bulk_div=0.5 * params.L * div,
    )


def eval_E0_1d(profile, params: Params) -> EnergyBreakdown:
    """Exact limiting energy of a piecewise-linear-u2 profile.

    `profile` is a rect1d.OneDProfile: breakpoints with u2 values, a sign
    pattern for u1 = sign * sqrt(1 - u2^2), and the u1 jump locations.
    Segment integrals of (u2')^2 are closed-form; walls contribute
    (4/3)(1 - u2(y_j)^2)^(3/2); the two boundary terms use the stored sign
    pattern at +-H.
    """
    ys = np.asarray(profile.y_breaks, dtype=float)
    u2 = np.asarray(profile.u2_vals, dtype=float)
    if np.any(np.abs(u2) > 1.0 + 1e-10):
        raise ValueError("|u2| > 1 (unit constraint violated)")
    a = params.a
    if abs(u2[0] - a) > 1e-10 or abs(u2[-1] - a) > 1e-10:
        raise ValueError("u2(+-H) must equal a")
    dy = np.diff(ys)
    du2 = np.diff(u2)
    bulk = 0.5 * params.L * float(np.sum(du2 ** 2 / dy))

    wall = 0.0
    for yj in profile.jumps:
        u2j = float(np.interp(yj, ys, u2))
        wall += (4.0 / 3.0) * max(1.0 - u2j * u2j, 0.0) ** 1.5

    s = math.sqrt(1.0 - a * a)
    u1_left = profile.sign_pattern[0] * math.sqrt(max(1.0 - u2[0] ** 2, 0.0))
    u1_right = profile.sign_pattern[-1] * math.sqrt(max(1.0 - u2[-1] ** 2, 0.0))
    bdy = (abs(u1_left + s) ** 3 + abs(u1_right - s) ** 3) / 6.0
    return EnergyBreakdown(bulk_div=bulk, wall_interior=wall, wall_boundary=bdy)


# --- criticality residuals ----------------------------------------------------

@dataclass
class CriticalityReport:
    """Sup-norm residuals of the free-boundary criticality conditions.

    bulk_transport : u^perp . grad(div u) on family interiors
    wall_balance   : | L |[div u]| - 4 sqrt(1-(u.nu)^2) |u.nu| | on interior
                     jumps (orientation-free form of the natural condition)
    boundary_balance : same with the boundary datum on boundary jumps
    wall_stationarity : jump-set stationarity combining the divergence
                     traces, their tangential derivative, and the curvature
    """

    bulk_transport: Optional[float] = None
    wall_balance: Optional[float] = None
    boundary_balance: Optional[float] = None
    wall_stationarity: Optional[float] = None


def _seg_geometry(seg: JumpSegment):
    """Tangents (vertex-centred) and signed curvature for the residuals.

    kappa is calibrated so that a circular wall of radius rho with the
    stored normal pointing inward has kappa = -1/rho.
    """
    p = seg.polyline
    s = seg.arclengths
    tau = np.gradient(p, s, axis=0)
    tau /= np.linalg.norm(tau, axis=1, keepdims=True)
    dtau = np.gradient(tau, s, axis=0)
    kappa = -np.einsum("ik,ik->i", dtau, seg.normals)
    return tau, kappa


def criticality_residuals(field: PiecewiseCriticalField, params: Params,
                          ns: int = 12, nt: int = 12,
                          fd_step: float = 1e-6) -> CriticalityReport:
    rep = CriticalityReport()

    # bulk transport residual via central differences of the divergence
    worst = None
    for fam in field.families:
        s_lo, s_hi = fam.s_range
        ss = np.linspace(s_lo + 0.05 * (s_hi - s_lo), s_hi - 0.05 * (s_hi - s_lo), ns)
        for s in ss:
            ts = float(fam.t_star(s))
            if ts <= 0:
                continue
            for tau_ in np.linspace(0.15, 0.85, nt):
                x, y, theta, vc = fam.point(s, tau_ * ts)
                h = fd_step
                try:
                    vxp = field.eval(x + h, y)[2]
                    vxm = field.eval(x - h, y)[2]
                    vyp = field.eval(x, y + h)[2]
                    vym = field.eval(x, y - h)[2]
                except (NoConvergence, ValueError):
                    continue
                # skip stencils straddling an admissible divergence jump
                # (jumps are O(1); smooth variation over h is far smaller)
                lim = 0.05 * (1.0 + abs(float(vc)))
                if max(abs(vxp - vc), abs(vxm - vc),
                       abs(vyp - vc), abs(vym - vc)) > lim:
                    continue
                res = abs(-math.sin(theta) * (vxp - vxm) / (2 * h)
                          + math.cos(theta) * (vyp - vym) / (2 * h))
                worst = res if worst is None else max(worst, res)
    rep.bulk_transport = worst

    # wall residuals
    wb = None
    bb = None
    ws = None
    for seg in field.jumps:
        if seg.div_plus is None and seg.div_fns is None and not seg.boundary:
            continue
        arcs = seg.arclengths
        if seg.div_fns is not None:
            dplus = np.asarray(seg.div_fns[0](arcs), dtype=float)
            dminus = np.asarray(seg.div_fns[1](arcs), dtype=float)
        elif seg.div_plus is not None:
            dplus = seg.div_plus
            dminus = seg.div_minus
        else:
            dplus = dminus = None
        # sqrt(1-(u.nu)^2) = |u.tau| for unit traces: no cancellation when
        # the jump degenerates (u.nu -> +-1)
        tau_n = np.stack([-seg.normals[:, 1], seg.normals[:, 0]], axis=-1)
        un = np.einsum("ik,ik->i", seg.trace_plus, seg.normals)
        root = np.abs(np.einsum("ik,ik->i", seg.trace_plus, tau_n))
        if seg.boundary:
            gn = np.einsum("ik,ik->i", seg.trace_minus, seg.normals)
            groot = np.abs(np.einsum("ik,ik->i", seg.trace_minus, tau_n))
            dv = dplus if dplus is not None else np.zeros_like(gn)
            res = np.abs(params.L * np.abs(dv) - 4.0 * groot * np.abs(gn))
            m = float(res.max())
            bb = m if bb is None else max(bb, m)
            continue
        res = np.abs(params.L * np.abs(dplus - dminus) - 4.0 * root * np.abs(un))
        m = float(res.max())
        wb = m if wb is None else max(wb, m)

        # stationarity of the jump set itself
        tau, kappa = _seg_geometry(seg)
        tsum = dplus + dminus
        dsum = np.gradient(tsum, arcs)
        tj = np.einsum("ik,ik->i", seg.trace_plus - seg.trace_minus, tau)
        lhs = dplus ** 2 - dminus ** 2 + dsum * tj
        rhs = (8.0 * kappa / (3.0 * params.L)) * root * (1.0 + 2.0 * un ** 2)
        # one-sided endpoint tangents pollute the curvature two vertices in
        inner = slice(2, -2) if len(arcs) > 4 else slice(None)
        m = float(np.abs(lhs - rhs)[inner].max())
        ws = m if ws is None else max(ws, m)
    rep.wall_balance = wb
    rep.boundary_balance = bb
    rep.wall_stationarity = ws
    return rep
