import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nematic_walls.core import Field2D, Params, make_grid, sample_analytic
from nematic_walls.disc import hedgehog_solution
from nematic_walls.energy import (GridProfile1D, WallIntegrand,
                                  criticality_residuals, eval_E0_1d,
                                  eval_E0_piecewise, eval_E_eps, eval_E_eps_1d,
                                  wall_cost_density)
from nematic_walls.rect1d import OneDProfile, recovery_profile_1d


class TestWallCostDensity:
    def test_antipodal(self):
        assert wall_cost_density((1, 0), (-1, 0)) == pytest.approx(4 / 3, abs=0)

    def test_right_angle_example(self):
        # the jump (1,-1) must be tangential, so the admissible normal for
        # this trace pair is (1,1)/sqrt(2); the value (1/6) sqrt(2)^3 is
        # normal-independent
        nu = (1 / math.sqrt(2), 1 / math.sqrt(2))
        val = wall_cost_density((1, 0), (0, 1), nu)
        assert val == pytest.approx(math.sqrt(2) / 3, abs=1e-14)

    def test_equal_traces(self):
        assert wall_cost_density((0, 1), (0, 1)) == 0.0

    def test_normal_mismatch_rejected(self):
        with pytest.raises(ValueError, match="normal"):
            wall_cost_density((1, 0), (0, 1), (1, 0))

    def test_nonunit_rejected(self):
        with pytest.raises(ValueError, match="unit"):
            wall_cost_density((1.1, 0), (-1, 0))


@settings(max_examples=200, deadline=None)
@given(phi=st.floats(0, 2 * math.pi), c=st.floats(-0.999, 0.999),
       sgn=st.sampled_from([-1.0, 1.0]))
def test_wall_form_equivalence(phi, c, sgn):
    """(1/6)|u+ - u-|^3 equals (4/3)(1-(u.nu)^2)^(3/2) for every admissible
    trace pair (random rotations of the normal, random normal component)."""
    nu = np.array([math.cos(phi), math.sin(phi)])
    tau = np.array([-nu[1], nu[0]])
    tcomp = sgn * math.sqrt(1 - c * c)
    up = c * nu + tcomp * tau
    um = c * nu - tcomp * tau
    wi = WallIntegrand.from_traces(up, um, nu)
    assert wi.jump_cube == pytest.approx(wi.normal_form, abs=1e-12)


class TestEvalEEps:
    def test_constant_field_zero(self):
        g = make_grid("rectangle", (-1, 1, -1, 1), 8, 8, periodic_x=True)
        f = sample_analytic(g, lambda X, Y: (np.ones_like(X), np.zeros_like(Y)))
        eb = eval_E_eps(f, Params(L=2.0, eps=0.1))
        assert eb.total == 0.0

    def test_e_theta_annulus_grad_term(self):
        # (eps/2) int |grad e_theta|^2 = eps pi ln R; potential and
        # divergence vanish identically
        R = 2.0
        p = Params(L=1.0, eps=0.01)
        errs = []
        for n in (32, 64):
            g = make_grid("polar", (1.0, R), n, 2 * n)
            f = sample_analytic(g, lambda X, Y: (-Y / np.hypot(X, Y),
                                                 X / np.hypot(X, Y)))
            eb = eval_E_eps(f, p)
            assert eb.potential_term < 1e-25
            assert eb.bulk_div < 1e-25
            errs.append(abs(eb.grad_term - p.eps * math.pi * math.log(R)))
        assert errs[1] < errs[0] / 3.5  # second order

    def test_tanh_wall_recovers_four_thirds(self):
        # pure wall profile extended in x: total per unit length = 4/3 + O(eps)
        eps = 2e-3
        H, T = 1.0, 0.05
        prof = recovery_profile_1d(eps, 1e-15 + 1e-16, H, 0.0, int(40 * H / eps), M=0.0)
        g = make_grid("rectangle", (-T, T, -H, H), 4, len(prof.ys) - 1,
                      periodic_x=True)
        vals = np.broadcast_to(prof.values[None, :, :], (*g.shape, 2)).copy()
        f = Field2D(g, vals)
        eb = eval_E_eps(f, Params(L=1e-15, eps=eps))
        per_len = eb.total / (2 * T)
        assert per_len == pytest.approx(4 / 3, rel=0.01)

    def test_grid_convergence_second_order(self):
        eps = 0.02
        p = Params(L=1.0, H=1.0, eps=eps)
        vals = []
        for n in (2000, 4000, 8000):
            prof = recovery_profile_1d(eps, 1.0, 1.0, 0.0, n)
            vals.append(eval_E_eps_1d(prof, p).total)
        # Richardson: consecutive differences shrink ~4x
        d1 = abs(vals[1] - vals[0])
        d2 = abs(vals[2] - vals[1])
        assert d2 < d1 / 2.5


class TestEval1D:
    def test_bc_violation_rejected(self):
        ys = np.linspace(-1, 1, 101)
        vals = np.stack([np.ones_like(ys), np.zeros_like(ys)], axis=-1)
        with pytest.raises(ValueError, match="boundary"):
            eval_E_eps_1d(GridProfile1D(ys, vals), Params(a=0.0, H=1.0))

    def test_minimizer_energy_exact(self):
        from nematic_walls.rect1d import min_energy_1d, minimizer_profile
        p = Params(L=1.0, H=1.0, a=0.0)
        prof = minimizer_profile(1.0, 1.0, 0.0)
        assert eval_E0_1d(prof, p).total == pytest.approx(11 / 12, abs=1e-14)

    def test_step_profile(self):
        prof = OneDProfile(y_breaks=np.array([-1.0, 0.0, 1.0]),
                           u2_vals=np.zeros(3),
                           sign_pattern=np.array([-1.0, 1.0]),
                           jumps=[0.0], M=0.0, a=0.0, H=1.0)
        eb = eval_E0_1d(prof, Params(L=3.0, H=1.0, a=0.0))
        assert eb.total == pytest.approx(4 / 3, abs=1e-15)

    def test_jump_free_reaches_one(self):
        # continuous profile through u2 = 1: energy (L/H)(1-a)^2
        a = 0.25
        prof = OneDProfile(y_breaks=np.array([-1.0, 0.0, 1.0]),
                           u2_vals=np.array([a, 1.0, a]),
                           sign_pattern=np.array([-1.0, 1.0]),
                           jumps=[], M=1.0, a=a, H=1.0)
        eb = eval_E0_1d(prof, Params(L=2.0, H=1.0, a=a))
        assert eb.total == pytest.approx(2.0 * (1 - a) ** 2, abs=1e-14)
        assert eb.wall_interior == 0.0


class TestE0Piecewise:
    def test_hedgehog_quadrature_order16(self):
        sol = hedgehog_solution(+1)
        for L in (0.5, 1.0, 2.0):
            eb = eval_E0_piecewise(sol, Params(L=L), s_panels=32, t_panels=32,
                                   order=16)
            assert abs(eb.total - 2 * math.pi * L) < 1e-8

    def test_panel_halving_reduces_error(self):
        sol = hedgehog_solution(+1)
        errs = []
        for panels in (4, 8):
            eb = eval_E0_piecewise(sol, Params(L=1.0), s_panels=panels,
                                   t_panels=panels, order=2)
            errs.append(abs(eb.total - 2 * math.pi))
        assert errs[1] < errs[0] / 4.0

    def test_nonnegative_terms(self):
        sol = hedgehog_solution(-1)
        eb = eval_E0_piecewise(sol, Params(L=1.0))
        for term in (eb.bulk_div, eb.wall_interior, eb.wall_boundary,
                     eb.grad_term, eb.potential_term):
            assert term >= 0.0


def test_criticality_hedgehog_clean():
    rep = criticality_residuals(hedgehog_solution(+1), Params(L=1.0))
    assert rep.bulk_transport == 0.0
    assert rep.wall_balance is None


def test_foliation_failure_raises():
    from nematic_walls.characteristics import CharacteristicFamily, PiecewiseCriticalField
    from nematic_walls.energy import FoliationError, eval_E0_piecewise

    def seed(s):
        s = np.asarray(s, dtype=float)
        z = np.zeros_like(s)
        return (s, z, z, -3.0 + 2.5 * s)

    crossing = CharacteristicFamily(
        seed=seed, s_range=(0.0, 1.0),
        t_star=lambda s: 1.5 * np.ones_like(np.asarray(s, dtype=float)))
    bad = PiecewiseCriticalField(families=[crossing], jumps=[])
    with pytest.raises(FoliationError):
        eval_E0_piecewise(bad, Params(L=1.0), verify_foliation=True)
