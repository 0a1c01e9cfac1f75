"""L2 gradient flow of the eps-level energy.

The right-hand side is the exact negative gradient of the discrete energy
in `energy.eval_E_eps` (mass-lumped trapezoid inner product), so the
finite-difference directional-derivative identity holds to roundoff at any
resolution.  Time stepping is linearly implicit: the stiff linear terms
(vector Laplacian and divergence penalty) are treated implicitly, the
pointwise reaction term explicitly, with the step halved whenever the
energy fails to decrease.

The implicit system (W + dt(eps K + L D)) u = rhs is symmetric positive
definite, constant while dt is unchanged, and solved by preconditioned
conjugate gradients to 1e-10.  The preferred preconditioner is a sparse LU
factorization of the full system (factored once per dt, so CG converges
immediately); when memory does not allow it, the exact inverse of the
pure-Laplacian part (W + dt eps K) -- FFT along the periodic direction and
a batched Thomas solve across it -- is used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import stencils
from .contours import marching_squares
from .core import POLAR, RECTANGLE, EnergyBreakdown, Field2D, Grid2D, Params
from .energy import eval_E_eps

BC_CHECK_TOL = 1e-10


@dataclass
class BCSpec:
    """Dirichlet rows plus periodicity of the underlying grid.

    rectangle: top/bottom rows fixed (callables of x); x must be periodic.
    polar: outer radial row fixed (callable of theta); the inner row is
    free (natural condition) unless a callable is given.
    """

    kind: str
    bottom: Optional[Callable] = None
    top: Optional[Callable] = None
    outer: Optional[Callable] = None
    inner: Optional[Callable] = None

    def dirichlet_mask(self, grid: Grid2D) -> np.ndarray:
        m = np.zeros(grid.shape, dtype=bool)
        if self.kind == RECTANGLE:
            if self.bottom is not None:
                m[:, 0] = True
            if self.top is not None:
                m[:, -1] = True
        else:
            if self.inner is not None:
                m[0, :] = True
            if self.outer is not None:
                m[-1, :] = True
        return m

    def boundary_values(self, grid: Grid2D) -> np.ndarray:
        """Field-shaped array with the Dirichlet data (zero elsewhere)."""
        out = np.zeros((*grid.shape, 2))
        a1, a2 = grid.axes()
        if self.kind == RECTANGLE:
            if self.bottom is not None:
                vals = np.asarray(self.bottom(a1), dtype=float)
                out[:, 0, :] = vals if vals.ndim == 2 else np.broadcast_to(vals, (grid.n1, 2))
            if self.top is not None:
                vals = np.asarray(self.top(a1), dtype=float)
                out[:, -1, :] = vals if vals.ndim == 2 else np.broadcast_to(vals, (grid.n1, 2))
        else:
            if self.inner is not None:
                vals = np.asarray(self.inner(a2), dtype=float)
                out[0, :, :] = vals if vals.ndim == 2 else np.broadcast_to(vals, (grid.n2, 2))
            if self.outer is not None:
                vals = np.asarray(self.outer(a2), dtype=float)
                out[-1, :, :] = vals if vals.ndim == 2 else np.broadcast_to(vals, (grid.n2, 2))
        return out

    def impose(self, field: Field2D) -> None:
        mask = self.dirichlet_mask(field.grid)
        field.values[mask] = self.boundary_values(field.grid)[mask]

    def check(self, field: Field2D) -> None:
        mask = self.dirichlet_mask(field.grid)
        err = np.abs(field.values[mask]
                     - self.boundary_values(field.grid)[mask])
        if err.size and err.max() > BC_CHECK_TOL:
            raise ValueError(f"Dirichlet rows violated by {err.max():.3e}")


def rect_bc(a: float) -> BCSpec:
    """u(x, -H) = (-sqrt(1-a^2), a), u(x, +H) = (+sqrt(1-a^2), a)."""
    s = math.sqrt(1.0 - a * a)

    def bottom(xs):
        return np.broadcast_to([-s, a], (len(np.atleast_1d(xs)), 2))

    def top(xs):
        return np.broadcast_to([s, a], (len(np.atleast_1d(xs)), 2))

    return BCSpec(kind=RECTANGLE, bottom=bottom, top=top)


def disc_bc(kind: str, R: float) -> BCSpec:
    """Outer data on the disc of radius R: tangential, hedgehog, or the
    degree -1 data (x/R, -y/R); inner cutoff row is free."""
    if kind == "tangential":
        f = lambda th: np.stack([-np.sin(th), np.cos(th)], axis=-1)
    elif kind == "hedgehog":
        f = lambda th: np.stack([np.cos(th), np.sin(th)], axis=-1)
    elif kind == "degminusone":
        f = lambda th: np.stack([np.cos(th), -np.sin(th)], axis=-1)
    else:
        raise ValueError(f"unknown disc data {kind!r}")
    return BCSpec(kind=POLAR, outer=f)


def annulus_bc() -> BCSpec:
    """Mismatch data: -e_theta at r = 1, +e_theta at r = R."""
    et = lambda th: np.stack([-np.sin(th), np.cos(th)], axis=-1)
    return BCSpec(kind=POLAR, inner=lambda th: -et(th), outer=et)


# --- operators ----------------------------------------------------------------

class _Operators:
    """Grid-bound stencil closures for the flow."""

    def __init__(self, grid: Grid2D, bc: BCSpec):
        self.grid = grid
        self.bc = bc
        self.mask = bc.dirichlet_mask(grid)
        if grid.kind == RECTANGLE:
            if not grid.periodic_x:
                raise ValueError("the flow's rectangle solver requires periodic x")
            hx, hy = grid.spacing
            self.W = stencils.rect_node_weights(grid.n1, grid.n2, hx, hy, True)
            self.K = lambda u: stencils.rect_grad_op(u, hx, hy, True)
            self.D = lambda u: stencils.rect_div_op(u, hx, hy, True)
        else:
            rs, ts = grid.axes()
            if rs[0] <= 0:
                raise ValueError("polar flow needs r_in > 0")
            dr, dt = grid.spacing
            self.rs, self.ts = rs, ts
            self.W = stencils.polar_node_weights(rs, dr, dt)
            self.K = lambda u: stencils.polar_grad_op(u, rs, dr, dt)
            self.D = lambda u: stencils.polar_div_op(u, rs, ts, dr, dt)

    def reaction(self, u: np.ndarray, eps: float) -> np.ndarray:
        mod2 = u[..., 0] ** 2 + u[..., 1] ** 2
        return (2.0 / eps) * (mod2 - 1.0)[..., None] * u

    def assemble_sparse(self):
        """Sparse K and D matching the stencil operators exactly, in the
        node-major component-minor flat ordering."""
        g = self.grid
        n1, n2 = g.shape
        N = n1 * n2 * 2

        def nid(i, j, c):
            return 2 * (i * n2 + j) + c

        I, J = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
        rows, cols, vals = [], [], []
        if g.kind == RECTANGLE:
            hx, hy = g.spacing
            wy = np.ones(n2)
            wy[0] = wy[-1] = 0.5
            cx = np.broadcast_to(((hy / hx) * wy)[None, :], (n1, n2))
            for c in range(2):
                a = nid(I, J, c).ravel()
                b = nid((I + 1) % n1, J, c).ravel()
                ce = cx.ravel()
                rows += [a, a, b, b]
                cols += [a, b, b, a]
                vals += [ce, -ce, ce, -ce]
                a = nid(I[:, :-1], J[:, :-1], c).ravel()
                b = nid(I[:, :-1], J[:, :-1] + 1, c).ravel()
                ce = np.full(a.shape, hx / hy)
                rows += [a, a, b, b]
                cols += [a, b, b, a]
                vals += [ce, -ce, ce, -ce]
            n_cells = n1 * (n2 - 1)
            Ic, Jc = np.meshgrid(np.arange(n1), np.arange(n2 - 1), indexing="ij")
            cellid = np.arange(n_cells).reshape(n1, n2 - 1)
            gr, gc, gv = [], [], []
            one = np.ones(n_cells)
            for (di, dj, sx, sy) in [(0, 0, -1, -1), (1, 0, 1, -1),
                                     (0, 1, -1, 1), (1, 1, 1, 1)]:
                ii = (Ic + di) % n1
                jj = Jc + dj
                gr += [cellid.ravel(), cellid.ravel()]
                gc += [nid(ii, jj, 0).ravel(), nid(ii, jj, 1).ravel()]
                gv += [one * (sx / (2 * hx)), one * (sy / (2 * hy))]
            m_c = np.full(n_cells, hx * hy)
        else:
            rs, ts = self.rs, self.ts
            dr, dt_ = g.spacing
            r_mid = 0.5 * (rs[:-1] + rs[1:])
            wr = np.ones(n1)
            wr[0] = wr[-1] = 0.5
            for c in range(2):
                a = nid(I[:-1], J[:-1], c).ravel()
                b = nid(I[:-1] + 1, J[:-1], c).ravel()
                ce = np.broadcast_to((r_mid * dt_ / dr)[:, None], (n1 - 1, n2)).ravel()
                rows += [a, a, b, b]
                cols += [a, b, b, a]
                vals += [ce, -ce, ce, -ce]
                a = nid(I, J, c).ravel()
                b = nid(I, (J + 1) % n2, c).ravel()
                ce = np.broadcast_to((wr * dr / (rs * dt_))[:, None], (n1, n2)).ravel()
                rows += [a, a, b, b]
                cols += [a, b, b, a]
                vals += [ce, -ce, ce, -ce]
            n_cells = (n1 - 1) * n2
            Ic, Jc = np.meshgrid(np.arange(n1 - 1), np.arange(n2), indexing="ij")
            cellid = np.arange(n_cells).reshape(n1 - 1, n2)
            tc = np.broadcast_to((ts[None, :] + 0.5 * dt_), (n1 - 1, n2))
            ct, st = np.cos(tc), np.sin(tc)
            rc = np.broadcast_to(r_mid[:, None], (n1 - 1, n2))
            gr, gc, gv = [], [], []
            for (di, dj, sr, st_) in [(0, 0, -1, -1), (1, 0, 1, -1),
                                      (0, 1, -1, 1), (1, 1, 1, 1)]:
                jj = (Jc + dj) % n2
                gr += [cellid.ravel(), cellid.ravel()]
                gc += [nid(Ic + di, jj, 0).ravel(), nid(Ic + di, jj, 1).ravel()]
                gv += [(ct * sr / (2 * dr) - st * st_ / (2 * dt_ * rc)).ravel(),
                       (st * sr / (2 * dr) + ct * st_ / (2 * dt_ * rc)).ravel()]
            m_c = (rc * dr * dt_).ravel()
        K = sp.coo_matrix((np.concatenate(vals),
                           (np.concatenate(rows), np.concatenate(cols))),
                          shape=(N, N)).tocsr()
        G = sp.coo_matrix((np.concatenate(gv),
                           (np.concatenate(gr), np.concatenate(gc))),
                          shape=(len(m_c), N)).tocsr()
        D = (G.T @ sp.diags(m_c) @ G).tocsr()
        return K, D


def rhs(field: Field2D, params: Params, bc: BCSpec,
        ops: Optional[_Operators] = None) -> Field2D:
    """Negative discrete L2 gradient of the eps-level energy (zero on
    Dirichlet rows)."""
    if ops is None:
        ops = _Operators(field.grid, bc)
    u = field.values
    r = -(params.eps * ops.K(u) + params.L * ops.D(u)) / ops.W[..., None] \
        - ops.reaction(u, params.eps)
    r[ops.mask] = 0.0
    return Field2D(field.grid, r)


# --- preconditioner: exact solve of (W + c K) ----------------------------------

class _LaplacianSolver:
    """FFT along the periodic axis + batched Thomas across it."""

    def __init__(self, ops: _Operators, c: float):
        g = ops.grid
        self.ops = ops
        self.c = c
        if g.kind == RECTANGLE:
            hx, hy = g.spacing
            n1, n2 = g.shape
            k = np.arange(n1 // 2 + 1)
            lam = 2.0 - 2.0 * np.cos(2.0 * np.pi * k / n1)
            cx = hy / hx          # interior-row x-edge coefficient
            cy = hx / hy
            jj = np.arange(1, n2 - 1)
            W_int = hx * hy
            diag = W_int + c * (cx * lam[None, :] + 2.0 * cy)
            diag = np.broadcast_to(diag, (len(jj), len(k))).copy()
            lower = np.full((len(jj) - 1, len(k)), -c * cy)
            self.rows = jj
            self.axis = 0  # FFT over axis 0 (x), solve along axis 1 (y)
            self._prep(diag, lower)
        else:
            rs, ts = ops.rs, ops.ts
            dr, dt = g.spacing
            n1, n2 = g.shape
            m = np.arange(n2 // 2 + 1)
            lam = 2.0 - 2.0 * np.cos(2.0 * np.pi * m / n2)
            wr = np.ones(n1)
            wr[0] = wr[-1] = 0.5
            ct = wr * dr / (rs * dt)
            cr = 0.5 * (rs[:-1] + rs[1:]) * dt / dr  # edge i..i+1
            W = (dr * dt) * rs * wr
            rows = np.arange(n1)
            free = ~ops.mask[:, 0]
            rows = rows[free]
            self.rows = rows
            diag = np.empty((len(rows), len(m)))
            lower = np.zeros((max(len(rows) - 1, 0), len(m)))
            for a, i in enumerate(rows):
                d = W[i] + c * ct[i] * lam
                if i > 0:
                    d = d + c * cr[i - 1]
                if i < n1 - 1:
                    d = d + c * cr[i]
                diag[a] = d
                if a + 1 < len(rows) and rows[a + 1] == i + 1:
                    lower[a] = -c * cr[i]
            self.axis = 1  # FFT over axis 1 (theta), solve along axis 0 (r)
            self._prep(diag, lower)

    def _prep(self, diag, lower):
        # precompute the LU sweep of the symmetric tridiagonal batch
        n = diag.shape[0]
        w = np.empty_like(diag)
        fac = np.empty_like(lower) if n > 1 else np.zeros((0, diag.shape[1]))
        w[0] = diag[0]
        for a in range(1, n):
            fac[a - 1] = lower[a - 1] / w[a - 1]
            w[a] = diag[a] - fac[a - 1] * lower[a - 1]
        self._w = w
        self._fac = fac
        self._lower = lower

    def _thomas(self, B):
        # B: (rows, modes) complex; solve tridiag per mode
        n = B.shape[0]
        y = B.copy()
        for a in range(1, n):
            y[a] -= self._fac[a - 1] * y[a - 1]
        x = y
        x[n - 1] = y[n - 1] / self._w[n - 1]
        for a in range(n - 2, -1, -1):
            x[a] = (y[a] - self._lower[a] * x[a + 1]) / self._w[a]
        return x

    def solve(self, r: np.ndarray) -> np.ndarray:
        """(W + c K)^-1 r on free rows (r zero on Dirichlet rows)."""
        g = self.ops.grid
        out = np.zeros_like(r)
        for comp in (0, 1):
            rc = r[..., comp]
            if g.kind == RECTANGLE:
                spec = np.fft.rfft(rc[:, self.rows], axis=0)   # (kx, rows)
                sol = self._thomas(spec.T).T
                out[:, self.rows, comp] = np.fft.irfft(sol, n=g.n1, axis=0)
            else:
                spec = np.fft.rfft(rc[self.rows, :], axis=1)   # (rows, m)
                sol = self._thomas(spec)
                out[self.rows, :, comp] = np.fft.irfft(sol, n=g.n2, axis=1)
        return out


def _cg(matvec, b, precond, tol=1e-10, max_iter=500):
    x = np.zeros_like(b)
    r = b.copy()
    z = precond(r)
    p = z.copy()
    rz = float(np.sum(r * z))
    bnorm = math.sqrt(float(np.sum(b * b))) or 1.0
    for it in range(max_iter):
        Ap = matvec(p)
        alpha = rz / float(np.sum(p * Ap))
        x += alpha * p
        r -= alpha * Ap
        if math.sqrt(float(np.sum(r * r))) <= tol * bnorm:
            return x, it + 1
        z = precond(r)
        rz_new = float(np.sum(r * z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, max_iter


# --- the flow -------------------------------------------------------------------

@dataclass
class FlowState:
    field: Field2D
    bc: BCSpec
    time: float = 0.0
    dt: float = 0.0
    energy_trace: List[Tuple[float, EnergyBreakdown]] = dc_field(default_factory=list)
    converged: bool = False
    stop_reason: str = ""


class FlowSolver:
    """Holds the operators and preconditioner for repeated steps.

    preconditioner: "lu" factorizes the full implicit matrix once per dt
    (CG converges immediately), "laplacian" uses the FFT/Thomas inverse of
    the pure-Laplacian part, "auto" tries lu and falls back on MemoryError.
    """

    def __init__(self, grid: Grid2D, params: Params, bc: BCSpec,
                 dt: Optional[float] = None, cg_tol: float = 1e-10,
                 preconditioner: str = "auto"):
        self.params = params
        self.bc = bc
        self.ops = _Operators(grid, bc)
        self.dt = dt if dt is not None else params.eps / 4.0
        self.cg_tol = cg_tol
        self.preconditioner = preconditioner
        self._precond_cache = {}
        self._sparse_KD = None
        self.uD = bc.boundary_values(grid)
        self.mask = self.ops.mask

    def _precond(self, dt: float):
        if dt in self._precond_cache:
            return self._precond_cache[dt]
        made = None
        if self.preconditioner in ("lu", "auto"):
            try:
                if self._sparse_KD is None:
                    self._sparse_KD = self.ops.assemble_sparse()
                K, D = self._sparse_KD
                g = self.ops.grid
                n1, n2 = g.shape
                Wfull = np.broadcast_to(self.ops.W, (n1, n2))
                A = sp.diags(np.repeat(Wfull.ravel(), 2)) \
                    + dt * self.params.eps * K + dt * self.params.L * D
                fixed = np.repeat(self.mask.ravel(), 2)
                keep = sp.diags(np.where(fixed, 0.0, 1.0))
                A = keep @ A @ keep + sp.diags(np.where(fixed, 1.0, 0.0))
                lu = splu(A.tocsc())
                shape = (*g.shape, 2)

                def solve(r, lu=lu, shape=shape):
                    return lu.solve(r.ravel()).reshape(shape)

                made = solve
            except MemoryError:
                if self.preconditioner == "lu":
                    raise
                made = None
        if made is None:
            lap = _LaplacianSolver(self.ops, dt * self.params.eps)
            made = lap.solve
        self._precond_cache[dt] = made
        if len(self._precond_cache) > 3:
            self._precond_cache.pop(next(iter(self._precond_cache)))
        return made

    def _apply_A(self, w: np.ndarray, dt: float) -> np.ndarray:
        z = self.ops.W[..., None] * w \
            + dt * (self.params.eps * self.ops.K(w) + self.params.L * self.ops.D(w))
        z[self.mask] = 0.0
        return z

    def implicit_solve(self, u_expl: np.ndarray, dt: float) -> Tuple[np.ndarray, int]:
        """Solve (W + dt(eps K + L D)) u = W u_expl with Dirichlet rows."""
        b = self.ops.W[..., None] * u_expl
        # affine shift for Dirichlet data
        aD = self.ops.W[..., None] * self.uD \
            + dt * (self.params.eps * self.ops.K(self.uD)
                    + self.params.L * self.ops.D(self.uD))
        b = b - aD
        b[self.mask] = 0.0
        w, iters = _cg(lambda v: self._apply_A(v, dt), b, self._precond(dt),
                       tol=self.cg_tol)
        u = w + self.uD
        return u, iters

    def step(self, state: FlowState, max_halvings: int = 40) -> FlowState:
        """One accepted IMEX step (dt halved until the energy decreases)."""
        u = state.field.values
        if not state.energy_trace:
            e0 = eval_E_eps(state.field, self.params)
            state.energy_trace.append((state.time, e0))
        E_old = state.energy_trace[-1][1].total
        dt = state.dt or self.dt
        for _ in range(max_halvings):
            u_expl = u - dt * self.ops.reaction(u, self.params.eps)
            u_new, _ = self.implicit_solve(u_expl, dt)
            new_field = Field2D(state.field.grid, u_new)
            eb = eval_E_eps(new_field, self.params)
            if eb.total <= E_old + 1e-12 * max(1.0, abs(E_old)):
                state.field = new_field
                state.time += dt
                state.dt = dt
                state.energy_trace.append((state.time, eb))
                return state
            dt *= 0.5
            if dt < 1e-12 * self.params.eps:
                raise RuntimeError("dt underflow: the configuration diverges")
        raise RuntimeError("energy would not decrease after halvings")

    def run_to_equilibrium(self, init: Field2D, tol: float = 1e-4,
                           max_time: float = 50.0,
                           max_steps: int = 200000,
                           callback=None) -> FlowState:
        """Advance until ||rhs||_inf < tol or the energy decrease per unit
        time drops below tol^2; flagged unconverged at max_time."""
        fld = init.copy()
        self.bc.impose(fld)
        state = FlowState(field=fld, bc=self.bc, dt=self.dt)
        state.energy_trace.append((0.0, eval_E_eps(fld, self.params)))
        for k in range(max_steps):
            E_prev = state.energy_trace[-1][1].total
            self.step(state)
            E_new = state.energy_trace[-1][1].total
            if callback is not None:
                callback(state)
            rate = (E_prev - E_new) / state.dt
            if rate < tol * tol:
                r = rhs(state.field, self.params, self.bc, self.ops)
                if np.abs(r.values).max() < tol:
                    state.converged = True
                    state.stop_reason = "gradient below tolerance"
                    return state
                if rate < 1e-4 * tol * tol:
                    state.converged = True
                    state.stop_reason = "energy stationary"
                    return state
            if state.time >= max_time:
                state.stop_reason = "max_time reached"
                return state
        state.stop_reason = "max_steps reached"
        return state


def random_unit_field(grid: Grid2D, bc: BCSpec, seed: int = 0) -> Field2D:
    """Unit vectors with i.i.d. uniform angles; Dirichlet rows overwritten."""
    rng = np.random.default_rng(seed)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=grid.shape)
    f = Field2D(grid, np.stack([np.cos(phi), np.sin(phi)], axis=-1))
    bc.impose(f)
    return f


def divergence_field(field: Field2D) -> np.ndarray:
    """Nodal divergence by central differences (one-sided at edges),
    metric-aware on polar grids."""
    g = field.grid
    u = field.values
    if g.kind == RECTANGLE:
        hx, hy = g.spacing
        if g.periodic_x:
            du1dx = (np.roll(u[..., 0], -1, axis=0)
                     - np.roll(u[..., 0], 1, axis=0)) / (2 * hx)
        else:
            du1dx = np.gradient(u[..., 0], hx, axis=0)
        du2dy = np.gradient(u[..., 1], hy, axis=1)
        return du1dx + du2dy
    rs, ts = g.axes()
    dr, dt = g.spacing
    dr1 = np.gradient(u[..., 0], dr, axis=0)
    dr2 = np.gradient(u[..., 1], dr, axis=0)
    dt1 = (np.roll(u[..., 0], -1, axis=1) - np.roll(u[..., 0], 1, axis=1)) / (2 * dt)
    dt2 = (np.roll(u[..., 1], -1, axis=1) - np.roll(u[..., 1], 1, axis=1)) / (2 * dt)
    cos_t = np.cos(ts)[None, :]
    sin_t = np.sin(ts)[None, :]
    r = rs[:, None]
    return cos_t * dr1 + sin_t * dr2 + (-sin_t * dt1 + cos_t * dt2) / r


def angle_field(field: Field2D) -> np.ndarray:
    return np.arctan2(field.values[..., 1], field.values[..., 0])


def diagnostics(field: Field2D, div_levels=None, angle_levels=None) -> dict:
    """Nodal divergence and angle plus marching-squares level curves."""
    div = divergence_field(field)
    ang = angle_field(field)
    X, Y = field.grid.nodes_xy()
    out = {"divergence_field": div, "angle_field": ang,
           "div_contours": {}, "angle_contours": {}}
    for lv in (div_levels if div_levels is not None else []):
        out["div_contours"][lv] = marching_squares(div, X, Y, lv)
    for lv in (angle_levels if angle_levels is not None else []):
        out["angle_contours"][lv] = marching_squares(ang, X, Y, lv)
    return out
