import math

import numpy as np
import pytest

from nematic_walls.core import Field2D, Params, make_grid, sample_analytic
from nematic_walls.energy import eval_E_eps
from nematic_walls.gradflow import (BCSpec, FlowSolver, FlowState,
                                    _LaplacianSolver, _Operators, annulus_bc,
                                    angle_field, disc_bc, divergence_field,
                                    random_unit_field, rect_bc, rhs)


def fd_gradient_check(grid, bc, params, seed=0):
    rng = np.random.default_rng(seed)
    f = random_unit_field(grid, bc, seed=seed)
    ops = _Operators(grid, bc)
    r = rhs(f, params, bc, ops)
    w = rng.normal(size=f.values.shape)
    w[ops.mask] = 0.0
    t = 1e-6
    ep = eval_E_eps(Field2D(grid, f.values + t * w), params).total
    em = eval_E_eps(Field2D(grid, f.values - t * w), params).total
    dE = (ep - em) / (2 * t)
    inner = float(np.sum(ops.W[..., None] * r.values * w))
    return abs(dE + inner) / max(abs(dE), 1e-300)


class TestDiscreteGradient:
    def test_rectangle(self):
        g = make_grid("rectangle", (-0.5, 0.5, -0.5, 0.5), 24, 24, periodic_x=True)
        err = fd_gradient_check(g, rect_bc(0.0), Params(L=0.5, eps=0.05, H=0.5, T=0.5))
        assert err < 1e-5

    def test_polar(self):
        g = make_grid("polar", (0.01, 0.6), 24, 48)
        err = fd_gradient_check(g, disc_bc("degminusone", 0.6),
                                Params(L=0.5, eps=0.05, R=0.6))
        assert err < 1e-5

    def test_annulus(self):
        g = make_grid("polar", (1.0, 2.0), 16, 32)
        err = fd_gradient_check(g, annulus_bc(), Params(L=1.0, eps=0.05, R=2.0))
        assert err < 1e-5

    def test_constant_unit_field_interior_rhs_zero(self):
        g = make_grid("rectangle", (-1, 1, -1, 1), 8, 8, periodic_x=True)
        bc = BCSpec(kind="rectangle",
                    bottom=lambda xs: np.broadcast_to([1.0, 0.0], (len(xs), 2)),
                    top=lambda xs: np.broadcast_to([1.0, 0.0], (len(xs), 2)))
        f = sample_analytic(g, lambda X, Y: (np.ones_like(X), np.zeros_like(Y)))
        r = rhs(f, Params(L=1.0, eps=0.05), bc)
        assert np.abs(r.values).max() == 0.0

    def test_divergence_perturbation_linearization(self):
        # rhs of (1,0) + tau * grad(phi) aligns with L grad div to O(tau)
        g = make_grid("rectangle", (-1, 1, -1, 1), 48, 48, periodic_x=True)
        bc = BCSpec(kind="rectangle",
                    bottom=lambda xs: np.broadcast_to([1.0, 0.0], (len(xs), 2)),
                    top=lambda xs: np.broadcast_to([1.0, 0.0], (len(xs), 2)))
        X, Y = g.nodes_xy()
        tau = 1e-7
        # compactly supported bump perturbation
        bump = np.exp(-8 * (X ** 2 + Y ** 2))
        wx = -16 * X * bump
        wy = -16 * Y * bump
        p = Params(L=0.7, eps=0.05)
        base = np.stack([np.ones_like(X), np.zeros_like(X)], axis=-1)
        pert = base.copy()
        pert[..., 0] += tau * wx
        pert[..., 1] += tau * wy
        r0 = rhs(Field2D(g, base), p, bc).values
        r1 = rhs(Field2D(g, pert), p, bc).values
        dr = (r1 - r0) / tau
        # the L grad(div) part dominates; the eps-Laplacian and the
        # reaction linearization -(4/eps)(u.w)u complete the derivative
        ops = _Operators(g, bc)
        w = np.stack([wx, wy], axis=-1)
        lin = -(p.L * ops.D(w) + p.eps * ops.K(w)) / ops.W[..., None]
        lin[..., 0] += -(4.0 / p.eps) * w[..., 0]
        mask = ops.mask
        dr[mask] = 0
        lin[mask] = 0
        div_part = np.abs(p.L * ops.D(w) / ops.W[..., None]).max()
        assert div_part > 0.2 * np.abs(lin).max()
        assert np.abs(dr - lin).max() / np.abs(lin).max() < 1e-5


class TestImplicitSolver:
    @pytest.mark.parametrize("kind", ["rect", "polar"])
    def test_laplacian_preconditioner_exact(self, kind):
        if kind == "rect":
            g = make_grid("rectangle", (-0.5, 0.5, -0.5, 0.5), 16, 12, periodic_x=True)
            bc = rect_bc(0.2)
        else:
            g = make_grid("polar", (0.01, 0.6), 12, 16)
            bc = disc_bc("tangential", 0.6)
        ops = _Operators(g, bc)
        solver = _LaplacianSolver(ops, 0.037)
        rng = np.random.default_rng(0)
        r = rng.normal(size=(*g.shape, 2))
        r[ops.mask] = 0.0
        x = solver.solve(r)
        back = ops.W[..., None] * x + 0.037 * ops.K(x)
        back[ops.mask] = 0.0
        assert np.abs(back - r).max() < 1e-12 * np.abs(r).max() * 100

    def test_sparse_assembly_matches_stencils(self):
        for g, bc in [
            (make_grid("rectangle", (-0.4, 0.6, -0.5, 0.5), 12, 10, periodic_x=True),
             rect_bc(0.1)),
            (make_grid("polar", (0.5, 1.5), 10, 14), annulus_bc()),
        ]:
            ops = _Operators(g, bc)
            K, D = ops.assemble_sparse()
            rng = np.random.default_rng(1)
            u = rng.normal(size=(*g.shape, 2))
            assert np.abs((K @ u.ravel()).reshape(u.shape) - ops.K(u)).max() < 1e-12
            assert np.abs((D @ u.ravel()).reshape(u.shape) - ops.D(u)).max() < 1e-12


class TestStepping:
    def test_equilibrium_input_fixed(self):
        g = make_grid("rectangle", (-1, 1, -1, 1), 12, 12, periodic_x=True)
        bc = BCSpec(kind="rectangle",
                    bottom=lambda xs: np.broadcast_to([1.0, 0.0], (len(xs), 2)),
                    top=lambda xs: np.broadcast_to([1.0, 0.0], (len(xs), 2)))
        p = Params(L=0.5, eps=0.05)
        f = sample_analytic(g, lambda X, Y: (np.ones_like(X), np.zeros_like(Y)))
        solver = FlowSolver(g, p, bc)
        st = FlowState(field=f.copy(), bc=bc, dt=solver.dt)
        solver.step(st)
        assert np.abs(st.field.values - f.values).max() < 1e-9

    def test_energy_monotone_and_bc_fixed(self):
        g = make_grid("rectangle", (-0.5, 0.5, -0.5, 0.5), 24, 32, periodic_x=True)
        p = Params(L=0.5, eps=0.01, H=0.5, T=0.5)
        bc = rect_bc(0.0)
        solver = FlowSolver(g, p, bc)
        f0 = random_unit_field(g, bc, seed=0)
        st = FlowState(field=f0, bc=bc, dt=solver.dt)
        for _ in range(1000):
            solver.step(st)
        totals = [eb.total for _, eb in st.energy_trace]
        assert all(b <= a + 1e-12 * max(1, abs(a))
                   for a, b in zip(totals, totals[1:]))
        mask = bc.dirichlet_mask(g)
        assert np.array_equal(st.field.values[mask], bc.boundary_values(g)[mask])

    def test_bc_check_raises(self):
        g = make_grid("rectangle", (-0.5, 0.5, -0.5, 0.5), 8, 8, periodic_x=True)
        bc = rect_bc(0.0)
        f = random_unit_field(g, bc, seed=1)
        f.values[3, 0] = (0.3, 0.4)
        with pytest.raises(ValueError, match="Dirichlet"):
            bc.check(f)


class TestDiagnostics:
    def test_divergence_hedgehog(self):
        g = make_grid("polar", (0.1, 0.8), 256, 512)

        def f(X, Y):
            r = np.hypot(X, Y)
            q = np.sqrt(np.maximum(1 - r ** 2, 0.0))
            return X + q * (-Y / r), Y + q * (X / r)

        fld = sample_analytic(g, f)
        div = divergence_field(fld)
        rs, _ = g.axes()
        mask = (rs > 0.15) & (rs < 0.6)
        assert np.abs(div[mask, :] - 2).max() < 1e-3

    def test_divergence_e_theta_zero(self):
        g = make_grid("polar", (0.5, 1.5), 64, 128)
        fld = sample_analytic(g, lambda X, Y: (-Y / np.hypot(X, Y),
                                               X / np.hypot(X, Y)))
        div = divergence_field(fld)
        assert np.abs(div[1:-1, :]).max() < 1e-4

    def test_angle_field(self):
        g = make_grid("rectangle", (-1, 1, -1, 1), 4, 4)
        fld = sample_analytic(g, lambda X, Y: (np.zeros_like(X), np.ones_like(Y)))
        assert np.allclose(angle_field(fld), math.pi / 2, atol=0)


def test_marching_squares_circle():
    from nematic_walls.contours import marching_squares
    n = 200
    xs = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    F = X ** 2 + Y ** 2
    polys = marching_squares(F, X, Y, 0.25)
    assert len(polys) >= 1
    pts = np.vstack(polys)
    r = np.hypot(pts[:, 0], pts[:, 1])
    assert np.abs(r - 0.5).max() < 2e-3
