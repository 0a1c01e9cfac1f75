import json
import math
from pathlib import Path

import numpy as np
import pytest

from nematic_walls.cli import RunConfig, dispatch, main, validate


def test_rect1d_values(tmp_path):
    rc = main(["rect-1d", "--L", "1", "--H", "1", "--a", "0",
               "--out", str(tmp_path / "r")])
    assert rc == 0
    data = json.loads((tmp_path / "r" / "result.json").read_text())
    assert data["M"] == pytest.approx(math.sqrt(3) / 2, abs=1e-14)
    assert data["energy"] == pytest.approx(11 / 12, abs=1e-14)
    prof = (tmp_path / "r" / "profile.csv").read_text().splitlines()
    assert prof[0] == "y,u1,u2"


def test_hedgehog_energy_at_L2(tmp_path):
    rc = main(["disc-hedgehog", "--L", "2", "--nx", "16", "--ny", "32",
               "--out", str(tmp_path / "h")])
    assert rc == 0
    data = json.loads((tmp_path / "h" / "energy.json").read_text())
    assert data["closed_form"] == pytest.approx(4 * math.pi, abs=0)
    assert abs(data["total"] - 4 * math.pi) < 1e-8


def test_validate_rejections():
    assert any("a in [0,1)" in e for e in
               validate(RunConfig(subcommand="rect-1d", a=1.0)))
    assert any("eps" in e for e in
               validate(RunConfig(subcommand="gradflow", eps=-1, domain="rect")))
    assert any("H > 0" in e for e in
               validate(RunConfig(subcommand="crosstie", H=-1.0)))


def test_unknown_subcommand_exit_code():
    assert dispatch(RunConfig(subcommand="nope")) == 2


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["annulus", "--R", "2", "--L", "0.4",
                     "--out", str(out)]) == 0
    for name in ("annulus.json", "profiles.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_config_roundtrip(tmp_path):
    cfg = RunConfig(subcommand="rect-1d", L=1.5, H=2.0, a=0.25,
                    out=str(tmp_path / "x"))
    text = cfg.to_json()
    cfg2 = RunConfig.from_json(text)
    assert cfg2 == cfg
    # every run writes its resolved config next to its outputs
    assert dispatch(cfg) == 0
    saved = RunConfig.from_json((tmp_path / "x" / "config.json").read_text())
    assert saved == cfg


def test_energy_eval_roundtrip(tmp_path):
    out1 = tmp_path / "t"
    assert main(["disc-tangential", "--R", "1", "--nx", "24", "--ny", "48",
                 "--out", str(out1)]) == 0
    out2 = tmp_path / "e"
    rc = main(["energy-eval", "--field-csv", str(out1 / "field.csv"),
               "--domain", "disc", "--R", "1", "--nx", "24", "--ny", "48",
               "--L", "1", "--eps", "0.01", "--out", str(out2)])
    assert rc == 0
    data = json.loads((out2 / "energy.json").read_text())
    # e_theta: potential and divergence vanish; only the eps-gradient term
    assert data["potential"] < 1e-20
    assert data["bulk_div"] < 1e-20
    assert data["grad"] > 0


def test_crosstie_artifacts(tmp_path):
    out = tmp_path / "ct"
    assert main(["crosstie", "--L", "1", "--H", "1", "--nx", "32", "--ny", "48",
                 "--out", str(out)]) == 0
    data = json.loads((out / "energy.json").read_text())
    assert data["tangency_mismatch"] < 1e-9
    assert data["wall_residual"] < 1e-8
    assert (out / "field.csv").exists()
    assert (out / "divergence_contours.csv").exists()


def test_crosstie_sweep_csv(tmp_path):
    out = tmp_path / "sw"
    assert main(["crosstie-sweep", "--lmin", "1.15", "--lmax", "1.35",
                 "--step", "0.05", "--out", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "L_over_H,E_crosstie,E_1d,gap"
    assert len(lines) == 6
    cross = json.loads((out / "crossing.json").read_text())
    assert cross["L0"] is not None


def test_gradflow_small_run(tmp_path):
    out = tmp_path / "gf"
    rc = main(["gradflow", "--domain", "rect", "--L", "0.25", "--eps", "0.05",
               "--H", "0.5", "--T", "0.4", "--a", "0", "--nx", "24",
               "--ny", "32", "--tol", "0.05", "--max-time", "1.0",
               "--seed", "3", "--out", str(out)])
    assert rc == 0
    trace = (out / "energy_trace.csv").read_text().splitlines()
    assert trace[0] == "t,total,grad,potential,bulk_div"
    totals = [float(l.split(",")[1]) for l in trace[1:]]
    assert all(b <= a + 1e-10 for a, b in zip(totals, totals[1:]))


def test_rect1d_eps_ladder(tmp_path):
    out = tmp_path / "lad"
    rc = main(["rect-1d", "--L", "1.5", "--H", "1", "--a", "0",
               "--eps-ladder", "1e-2,5e-3", "--out", str(out)])
    assert rc == 0
    lines = (out / "eps_convergence.csv").read_text().splitlines()
    assert lines[0] == "eps,E_eps,E0,gap"
    gaps = [float(l.split(",")[3]) for l in lines[1:]]
    assert gaps[0] > gaps[1] > 0


def test_disc_deg_minus_one_artifacts(tmp_path):
    out = tmp_path / "deg"
    rc = main(["disc-deg-minus-one", "--R", "0.6", "--L", "0.5",
               "--nx", "24", "--ny", "48", "--out", str(out)])
    assert rc == 0
    data = json.loads((out / "energy.json").read_text())
    assert data["natural_bc_residual"] < 1e-8
    assert (out / "field.csv").exists()
    assert (out / "divergence_contours.csv").exists()
    assert (out / "angle_contours.csv").exists()


def test_gradflow_construction_seeded_disc(tmp_path):
    out = tmp_path / "gfd"
    rc = main(["gradflow", "--domain", "disc", "--bc", "degminusone",
               "--L", "0.5", "--eps", "0.05", "--R", "0.6", "--nx", "32",
               "--ny", "64", "--init", "construction", "--tol", "0.1",
               "--max-time", "0.2", "--out", str(out)])
    assert rc == 0
    flow = json.loads((out / "flow.json").read_text())
    assert flow["final_energy"] > 0
