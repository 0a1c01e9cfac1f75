import math

import numpy as np
import pytest

from nematic_walls.core import (EnergyBreakdown, Field2D, JumpSegment, Params,
                                field_from_csv, field_to_csv, make_grid,
                                sample_analytic)


class TestParams:
    def test_defaults_valid(self):
        Params()

    @pytest.mark.parametrize("kw", [dict(L=0.0), dict(L=-1.0), dict(eps=0.0),
                                    dict(H=-0.1), dict(T=0.0), dict(R=0.0),
                                    dict(a=1.0), dict(a=-0.1)])
    def test_invariants_enforced(self, kw):
        with pytest.raises(ValueError):
            Params(**kw)


class TestMakeGrid:
    def test_rectangle_periodic_example(self):
        g = make_grid("rectangle", (-1, 1, -0.5, 0.5), 8, 4, periodic_x=True)
        assert g.shape == (8, 5)          # periodic x collapses the seam
        assert g.spacing == (0.25, 0.25)

    def test_polar_example(self):
        g = make_grid("polar", (0.01, 0.6), 16, 32)
        assert g.shape == (17, 32)
        assert g.spacing[1] == pytest.approx(2 * math.pi / 32, abs=0)

    def test_counts_too_small(self):
        with pytest.raises(ValueError, match="counts too small"):
            make_grid("rectangle", (-1, 1, -1, 1), 2, 8)

    def test_invalid_extents(self):
        with pytest.raises(ValueError, match="invalid extents"):
            make_grid("rectangle", (1, -1, -1, 1), 8, 8)
        with pytest.raises(ValueError, match="invalid extents"):
            make_grid("polar", (0.5, 0.2), 8, 8)

    def test_bit_exact_reproducibility(self):
        a = make_grid("rectangle", (-1.7, 2.3, -0.9, 1.1), 37, 23, True)
        b = make_grid("rectangle", (-1.7, 2.3, -0.9, 1.1), 37, 23, True)
        xa, ya = a.nodes_xy()
        xb, yb = b.nodes_xy()
        assert np.array_equal(xa, xb) and np.array_equal(ya, yb)


class TestSampleAnalytic:
    def test_constant(self):
        g = make_grid("rectangle", (-1, 1, -1, 1), 4, 4)
        f = sample_analytic(g, lambda X, Y: (np.ones_like(X), np.zeros_like(X)))
        assert np.all(f.values[..., 0] == 1.0)
        assert np.all(f.values[..., 1] == 0.0)

    def test_e_theta_on_polar(self):
        g = make_grid("polar", (0.5, 1.0), 4, 8)
        f = sample_analytic(g, lambda X, Y: (-Y / np.hypot(X, Y),
                                             X / np.hypot(X, Y)))
        rs, ts = g.axes()
        for j, th in enumerate(ts):
            assert f.values[0, j, 0] == pytest.approx(-math.sin(th), abs=1e-15)
            assert f.values[0, j, 1] == pytest.approx(math.cos(th), abs=1e-15)

    def test_hedgehog_at_boundary(self):
        # u = r e_r + sqrt(1-r^2) e_theta equals e_r at r = 1
        g = make_grid("polar", (0.25, 1.0), 4, 8)

        def f(X, Y):
            r = np.hypot(X, Y)
            q = np.sqrt(np.maximum(1 - r ** 2, 0.0))
            return X + q * (-Y / r), Y + q * (X / r)

        fld = sample_analytic(g, f)
        rs, ts = g.axes()
        for j, th in enumerate(ts):
            assert fld.values[-1, j, 0] == pytest.approx(math.cos(th), abs=1e-14)
            assert fld.values[-1, j, 1] == pytest.approx(math.sin(th), abs=1e-14)

    def test_nonfinite_rejected(self):
        g = make_grid("rectangle", (-1, 1, -1, 1), 4, 4)
        with pytest.raises(ValueError, match="finite"):
            sample_analytic(g, lambda X, Y: (1.0 / (X - X), Y))


class TestJumpSegment:
    def _valid(self):
        n = 5
        xs = np.linspace(0, 1, n)
        poly = np.stack([xs, np.zeros(n)], axis=-1)
        nu = np.tile([0.0, 1.0], (n, 1))
        up = np.tile([math.sqrt(0.5), math.sqrt(0.5)], (n, 1))
        um = np.tile([-math.sqrt(0.5), math.sqrt(0.5)], (n, 1))
        return poly, nu, up, um

    def test_valid_segment(self):
        poly, nu, up, um = self._valid()
        seg = JumpSegment(poly, nu, up, um)
        assert seg.length == pytest.approx(1.0)

    def test_nonunit_trace_rejected(self):
        poly, nu, up, um = self._valid()
        with pytest.raises(ValueError, match="unit"):
            JumpSegment(poly, nu, 1.1 * up, um)

    def test_normal_jump_rejected(self):
        poly, nu, up, um = self._valid()
        um = np.tile([0.0, -1.0], (poly.shape[0], 1))  # normal comp flips
        with pytest.raises(ValueError, match="normal"):
            JumpSegment(poly, nu, up, um)


class TestEnergyBreakdown:
    def test_total_is_exact_sum(self):
        eb = EnergyBreakdown(bulk_div=0.1, wall_interior=0.2,
                             wall_boundary=0.3, grad_term=0.4,
                             potential_term=0.5)
        assert eb.total == 0.1 + 0.2 + 0.3 + 0.4 + 0.5

    def test_as_dict_keys(self):
        d = EnergyBreakdown().as_dict(Params())
        assert set(d) == {"grad", "potential", "bulk_div", "wall_interior",
                          "wall_boundary", "total", "params"}


def test_field_csv_roundtrip(tmp_path):
    g = make_grid("polar", (0.5, 1.5), 6, 10)
    rng = np.random.default_rng(3)
    f = Field2D(g, rng.normal(size=(*g.shape, 2)))
    path = tmp_path / "f.csv"
    field_to_csv(f, path)
    header = path.read_text().splitlines()[0]
    assert header == "x,y,u1,u2"
    g2 = field_from_csv(g, path)
    assert np.allclose(g2.values, f.values, atol=0, rtol=1e-15)
