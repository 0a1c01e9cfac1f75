"""Command-line entry point.

Every construction, evaluator, solver, and sweep is a subcommand writing
machine-readable artifacts (CSV/JSON, 17 significant digits) plus the
resolved run configuration, so identical configurations (including the
seed) reproduce bit-identical outputs.  Parallel sweep fan-out is capped
by the NEMATIC_WALLS_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import annulus as annulus_mod
from . import crosstie as crosstie_mod
from . import disc as disc_mod
from . import rect1d
from .contours import contours_to_csv
from .core import (POLAR, RECTANGLE, Field2D, Params, disc_inner_cutoff,
                   field_from_csv, field_to_csv, make_grid, sample_analytic)
from .energy import eval_E0_piecewise, eval_E_eps, eval_E_eps_1d

G17 = "{:.17g}".format


def _threads() -> int:
    env = os.environ.get("NEMATIC_WALLS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class RunConfig:
    """Flat, losslessly serializable run description."""

    subcommand: str
    L: float = 1.0
    eps: float = 1e-2
    H: float = 1.0
    T: float = 1.0
    R: float = 1.0
    a: float = 0.0
    nx: int = 64
    ny: int = 64
    dt: float = 0.0          # 0 -> eps/4
    tol: float = 1e-4
    max_time: float = 50.0
    seed: int = 0
    domain: str = ""
    bc: str = ""
    init: str = "random"
    lmin: float = 0.5
    lmax: float = 3.0
    step: float = 0.01
    eps_ladder: str = ""
    field_csv: str = ""
    out: str = "out"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))

    def params(self) -> Params:
        return Params(L=self.L, eps=self.eps, H=self.H, T=max(self.T, 1e-12) if self.T > 0 else 1.0,
                      R=self.R, a=self.a)


def validate(cfg: RunConfig) -> list:
    """Static range checks mirroring the type invariants; never runs
    solvers.  Returns the aggregated list of violations."""
    errors = []
    if cfg.L <= 0:
        errors.append("L > 0 violated")
    if cfg.eps <= 0:
        errors.append("eps > 0 violated")
    if cfg.subcommand in ("rect-1d", "crosstie", "gradflow") and cfg.H <= 0:
        errors.append("H > 0 violated")
    if not (0.0 <= cfg.a < 1.0):
        errors.append("a in [0,1) violated")
    if cfg.subcommand in ("disc-tangential", "disc-hedgehog",
                          "disc-deg-minus-one", "annulus") and cfg.R <= 0:
        errors.append("R > 0 violated")
    if cfg.subcommand == "annulus" and cfg.R <= 1.0:
        errors.append("annulus requires R > 1")
    if cfg.subcommand == "gradflow":
        if cfg.nx < 4 or cfg.ny < 4:
            errors.append("counts too small (nx, ny >= 4)")
        if cfg.domain not in ("rect", "disc", "annulus"):
            errors.append("domain must be rect|disc|annulus")
    if cfg.subcommand == "crosstie-sweep" and not (0 < cfg.lmin < cfg.lmax):
        errors.append("need 0 < lmin < lmax")
    return errors


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(cfg.to_json())
    return out


def _write_report(out: Path, name: str, breakdown, params: Params,
                  extra: Optional[dict] = None):
    data = breakdown.as_dict(params)
    if extra:
        data.update(extra)
    (out / name).write_text(json.dumps(data, indent=2, sort_keys=True,
                                       default=float))
    return data


# --- subcommand runners ---------------------------------------------------------

def run_disc_tangential(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    p = cfg.params()
    sol = disc_mod.tangential_solution(cfg.R)
    eb = eval_E0_piecewise(sol, p)
    _write_report(out, "energy.json", eb, p)
    grid = make_grid(POLAR, (disc_inner_cutoff(cfg.R), cfg.R), cfg.nx, cfg.ny)
    f = sample_analytic(grid, lambda X, Y: (-Y / np.hypot(X, Y), X / np.hypot(X, Y)))
    field_to_csv(f, out / "field.csv")
    return 0


def run_disc_hedgehog(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    p = cfg.params()
    sol = disc_mod.hedgehog_solution(+1)
    closed = disc_mod.hedgehog_energy(cfg.L)
    eb = eval_E0_piecewise(sol, p, s_panels=32, t_panels=32, order=16)
    _write_report(out, "energy.json", eb, p,
                  extra={"closed_form": closed,
                         "quadrature_error": abs(eb.total - closed)})
    grid = make_grid(POLAR, (disc_inner_cutoff(1.0), 1.0), cfg.nx, cfg.ny)
    f = sample_analytic(grid, lambda X, Y: (
        X + np.sqrt(np.maximum(1 - X**2 - Y**2, 0.0)) * (-Y / np.hypot(X, Y)),
        Y + np.sqrt(np.maximum(1 - X**2 - Y**2, 0.0)) * (X / np.hypot(X, Y))))
    field_to_csv(f, out / "field.csv")
    return 0


def run_disc_deg_minus_one(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    p = cfg.params()
    sol = disc_mod.build_deg_minus_one(cfg.R, cfg.L)
    eb = eval_E0_piecewise(sol.field, p, s_panels=48, t_panels=48)
    _write_report(out, "energy.json", eb, p,
                  extra={"natural_bc_residual": sol.natural_bc_residual(),
                         "s0": sol.s0})
    grid = make_grid(POLAR, (disc_inner_cutoff(cfg.R), cfg.R * (1 - 1e-12)),
                     cfg.nx, cfg.ny)
    X, Y = grid.nodes_xy()
    u1, u2, v = disc_mod.deg_minus_one_sample(sol, X, Y)
    f = Field2D(grid, np.stack([u1, u2], axis=-1))
    field_to_csv(f, out / "field.csv")
    theta = np.arctan2(u2, u1)
    from .contours import marching_squares
    div_levels = np.linspace(v.min(), v.max(), 11)[1:-1]
    ang_levels = np.linspace(-math.pi * 0.99, math.pi * 0.99, 13)
    contours_to_csv({lv: marching_squares(v, X, Y, lv) for lv in div_levels},
                    out / "divergence_contours.csv")
    contours_to_csv({lv: marching_squares(theta, X, Y, lv) for lv in ang_levels},
                    out / "angle_contours.csv")
    return 0


def run_annulus(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    p = cfg.params()
    sol = annulus_mod.solve_annulus(cfg.R, cfg.L)
    regime = "boundary" if sol.wall_at_boundary else "interior"
    data = {
        "rho": sol.rho, "a": sol.a, "energy": sol.energy.total,
        "regime": regime, "R": cfg.R, "L": cfg.L,
        "small_L_bound": annulus_mod.small_L_interior_bound(cfg.R),
        "nbc_residual": sol.nbc_residual, "jump_residual": sol.jump_residual,
    }
    (out / "annulus.json").write_text(json.dumps(data, indent=2, sort_keys=True))
    rs = np.linspace(1.0, cfg.R, 513)
    if sol.wall_at_boundary:
        pvals = np.zeros_like(rs)
        qvals = np.ones_like(rs)
        div = np.zeros_like(rs)
    else:
        pfun = annulus_mod.radial_p(sol.rho, sol.a, cfg.R)
        pvals = pfun(rs)
        qvals = np.where(rs <= sol.rho, -1.0, 1.0) * np.sqrt(
            np.maximum(1 - pvals ** 2, 0.0))
        c_in, c_out = annulus_mod.radial_div(sol.rho, sol.a, cfg.R)
        div = np.where(rs <= sol.rho, c_in, c_out)
    with open(out / "profiles.csv", "w") as fh:
        fh.write("r,p,q,div\n")
        for k in range(len(rs)):
            fh.write(f"{G17(rs[k])},{G17(pvals[k])},{G17(qvals[k])},{G17(div[k])}\n")
    return 0


def run_rect_1d(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    p = cfg.params()
    M = rect1d.solve_M(cfg.L, cfg.H, cfg.a)
    E0 = rect1d.min_energy_1d(cfg.L, cfg.H, cfg.a)
    prof = rect1d.minimizer_profile(cfg.L, cfg.H, cfg.a)
    (out / "result.json").write_text(json.dumps(
        {"M": M, "energy": E0, "L": cfg.L, "H": cfg.H, "a": cfg.a},
        indent=2, sort_keys=True))
    ys = np.linspace(-cfg.H, cfg.H, 1025)
    with open(out / "profile.csv", "w") as fh:
        fh.write("y,u1,u2\n")
        u1 = prof.u1(ys)
        u2 = prof.u2(ys)
        for k in range(len(ys)):
            fh.write(f"{G17(ys[k])},{G17(u1[k])},{G17(u2[k])}\n")
    if cfg.eps_ladder:
        ladder = [float(e) for e in cfg.eps_ladder.split(",")]
        rows = []
        for eps in ladder:
            n = max(int(40 * cfg.H / eps), 2001)
            rp = rect1d.recovery_profile_1d(eps, cfg.L, cfg.H, cfg.a, n)
            eb = eval_E_eps_1d(rp, p.with_(eps=eps))
            rows.append((eps, eb.total, E0, eb.total - E0))
        with open(out / "eps_convergence.csv", "w") as fh:
            fh.write("eps,E_eps,E0,gap\n")
            for r in rows:
                fh.write(",".join(G17(v) for v in r) + "\n")
    return 0


def run_crosstie(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    p = cfg.params()
    sol = crosstie_mod.build_crosstie(cfg.L, cfg.H)
    per_len = crosstie_mod.crosstie_energy_per_length(sol)
    eb = crosstie_mod.crosstie_energy_breakdown(sol)
    _write_report(out, "energy.json", eb, p.with_(T=sol.T), extra={
        "T_tilde": sol.T_tilde, "T": sol.T, "alpha": sol.alpha,
        "t1_star": sol.t1_star, "energy_per_length": per_len,
        "tangency_mismatch": sol.tangency_mismatch,
        "wall_residual": sol.wall_residual(),
    })
    grid = make_grid(RECTANGLE, (0.0, 2 * sol.T, -cfg.H, cfg.H),
                     cfg.nx, cfg.ny, periodic_x=True)
    X, Y = grid.nodes_xy()
    u1, u2, v = crosstie_mod.crosstie_field_sample(sol, X, Y)
    field_to_csv(Field2D(grid, np.stack([u1, u2], axis=-1)), out / "field.csv")
    from .contours import marching_squares
    theta = np.arctan2(u2, u1)
    div_levels = np.linspace(v.min(), v.max(), 11)[1:-1]
    contours_to_csv({lv: marching_squares(v, X, Y, lv) for lv in div_levels},
                    out / "divergence_contours.csv")
    ang_levels = np.linspace(-math.pi * 0.99, math.pi * 0.99, 13)
    contours_to_csv({lv: marching_squares(theta, X, Y, lv) for lv in ang_levels},
                    out / "angle_contours.csv")
    return 0


def run_crosstie_sweep(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    n = int(round((cfg.lmax - cfg.lmin) / cfg.step))
    grid = [cfg.lmin + k * cfg.step for k in range(n + 1)]

    def one(lh: float):
        sol = crosstie_mod.build_crosstie(lh * cfg.H, cfg.H)
        e2 = crosstie_mod.crosstie_energy_per_length(sol)
        e1 = rect1d.min_energy_1d(lh, 1.0, 0.0)
        return (lh, e2, e1, e2 - e1)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(one, grid))
    with open(out / "sweep.csv", "w") as fh:
        fh.write("L_over_H,E_crosstie,E_1d,gap\n")
        for r in rows:
            fh.write(",".join(G17(v) for v in r) + "\n")
    L0, L1 = crosstie_mod.find_crossing(H=cfg.H, l_lo=cfg.lmin, l_hi=cfg.lmax,
                                        step=cfg.step)
    (out / "crossing.json").write_text(json.dumps(
        {"L0": L0, "L1": L1, "step": cfg.step}, indent=2, sort_keys=True))
    return 0


def run_gradflow(cfg: RunConfig) -> int:
    from . import gradflow as gf
    out = _outdir(cfg)
    p = cfg.params()
    if cfg.domain == "rect":
        T = cfg.T if cfg.T > 0 else cfg.H * crosstie_mod.solve_Ttilde(cfg.L / cfg.H)
        grid = make_grid(RECTANGLE, (0.0, 2 * T, -cfg.H, cfg.H),
                         cfg.nx, cfg.ny, periodic_x=True)
        bc = gf.rect_bc(cfg.a)
        if cfg.init == "construction":
            sol = crosstie_mod.build_crosstie(cfg.L, cfg.H)
            X, Y = grid.nodes_xy()
            u1, u2, _ = crosstie_mod.crosstie_field_sample(sol, X, Y)
            init = Field2D(grid, np.stack([u1, u2], axis=-1))
        else:
            init = gf.random_unit_field(grid, bc, seed=cfg.seed)
    elif cfg.domain == "disc":
        grid = make_grid(POLAR, (disc_inner_cutoff(cfg.R), cfg.R), cfg.nx, cfg.ny)
        bc = gf.disc_bc(cfg.bc or "degminusone", cfg.R)
        if cfg.init == "construction":
            sol = disc_mod.build_deg_minus_one(cfg.R, cfg.L)
            X, Y = grid.nodes_xy()
            rcl = np.hypot(X, Y)
            scale = np.minimum(1.0, cfg.R * (1 - 1e-12) / rcl)
            u1, u2, _ = disc_mod.deg_minus_one_sample(sol, X * scale, Y * scale)
            init = Field2D(grid, np.stack([u1, u2], axis=-1))
        else:
            init = gf.random_unit_field(grid, bc, seed=cfg.seed)
    else:
        grid = make_grid(POLAR, (1.0, cfg.R), cfg.nx, cfg.ny)
        bc = gf.annulus_bc()
        init = gf.random_unit_field(grid, bc, seed=cfg.seed)

    solver = gf.FlowSolver(grid, p, bc, dt=cfg.dt if cfg.dt > 0 else None)
    state = solver.run_to_equilibrium(init, tol=cfg.tol, max_time=cfg.max_time)
    field_to_csv(state.field, out / "field.csv")
    with open(out / "energy_trace.csv", "w") as fh:
        fh.write("t,total,grad,potential,bulk_div\n")
        for (t, eb) in state.energy_trace:
            fh.write(f"{G17(t)},{G17(eb.total)},{G17(eb.grad_term)},"
                     f"{G17(eb.potential_term)},{G17(eb.bulk_div)}\n")
    diag = gf.diagnostics(state.field)
    X, Y = grid.nodes_xy()
    from .contours import marching_squares
    v = diag["divergence_field"]
    div_levels = np.linspace(v.min(), v.max(), 11)[1:-1]
    contours_to_csv({lv: marching_squares(v, X, Y, lv) for lv in div_levels},
                    out / "divergence_contours.csv")
    (out / "flow.json").write_text(json.dumps({
        "converged": state.converged, "stop_reason": state.stop_reason,
        "time": state.time, "dt": state.dt,
        "final_energy": state.energy_trace[-1][1].total,
    }, indent=2, sort_keys=True))
    return 0 if (state.converged or state.stop_reason) else 1


def run_energy_eval(cfg: RunConfig) -> int:
    out = _outdir(cfg)
    p = cfg.params()
    if cfg.domain == "rect":
        grid = make_grid(RECTANGLE, (0.0, 2 * cfg.T, -cfg.H, cfg.H),
                         cfg.nx, cfg.ny, periodic_x=True)
    elif cfg.domain == "disc":
        grid = make_grid(POLAR, (disc_inner_cutoff(cfg.R), cfg.R), cfg.nx, cfg.ny)
    else:
        grid = make_grid(POLAR, (1.0, cfg.R), cfg.nx, cfg.ny)
    f = field_from_csv(grid, cfg.field_csv)
    eb = eval_E_eps(f, p)
    _write_report(out, "energy.json", eb, p)
    return 0


_RUNNERS = {
    "disc-tangential": run_disc_tangential,
    "disc-hedgehog": run_disc_hedgehog,
    "disc-deg-minus-one": run_disc_deg_minus_one,
    "annulus": run_annulus,
    "rect-1d": run_rect_1d,
    "crosstie": run_crosstie,
    "crosstie-sweep": run_crosstie_sweep,
    "gradflow": run_gradflow,
    "energy-eval": run_energy_eval,
}


def dispatch(cfg: RunConfig) -> int:
    errors = validate(cfg)
    if errors:
        for e in errors:
            print(f"error: {e}", file=sys.stderr)
        return 2
    if cfg.subcommand not in _RUNNERS:
        print(f"error: unknown subcommand {cfg.subcommand!r}", file=sys.stderr)
        return 2
    try:
        return _RUNNERS[cfg.subcommand](cfg)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nematic-walls",
        description="Critical points, wall energies, and gradient flow for "
                    "the extreme-anisotropy film energy.")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def add(name, help_, flags):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", type=str, default="",
                        help="flat key-value JSON config (overrides flags)")
        sp.add_argument("--out", type=str, default=f"out-{name}")
        for flag, typ, default in flags:
            sp.add_argument(f"--{flag}", type=typ, default=default)
        return sp

    add("disc-tangential", "tangential data: zero-energy state",
        [("R", float, 1.0), ("nx", int, 64), ("ny", int, 128)])
    add("disc-hedgehog", "radial data: constant-divergence minimizer (2 pi L)",
        [("L", float, 1.0), ("nx", int, 64), ("ny", int, 128)])
    add("disc-deg-minus-one", "degree -1 data: three-family construction",
        [("R", float, 0.6), ("L", float, 0.5), ("nx", int, 96), ("ny", int, 192)])
    add("annulus", "radial-ansatz wall location and energy",
        [("R", float, 2.0), ("L", float, 0.5)])
    add("rect-1d", "one-dimensional minimizer and recovery ladder",
        [("L", float, 1.0), ("H", float, 1.0), ("a", float, 0.0),
         ("eps-ladder", str, "")])
    add("crosstie", "cross-tie critical point on the tangency-period cell",
        [("L", float, 1.0), ("H", float, 1.0), ("nx", int, 96), ("ny", int, 128)])
    add("crosstie-sweep", "energy-per-length sweep and 1D crossing interval",
        [("H", float, 1.0), ("lmin", float, 0.5), ("lmax", float, 3.0),
         ("step", float, 0.01)])
    add("gradflow", "eps-level gradient flow to equilibrium",
        [("domain", str, "rect"), ("bc", str, ""), ("L", float, 0.5),
         ("eps", float, 0.01), ("H", float, 0.5), ("T", float, 0.0),
         ("R", float, 0.6), ("a", float, 0.0), ("nx", int, 96),
         ("ny", int, 128), ("dt", float, 0.0), ("tol", float, 1e-3),
         ("max-time", float, 50.0), ("seed", int, 0), ("init", str, "random")])
    add("energy-eval", "evaluate the eps-level energy of a field snapshot",
        [("field-csv", str, ""), ("domain", str, "rect"), ("L", float, 1.0),
         ("eps", float, 0.01), ("H", float, 0.5), ("T", float, 0.5),
         ("R", float, 1.0), ("nx", int, 64), ("ny", int, 64)])
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kw = {k.replace("-", "_"): v for k, v in vars(args).items()
          if k not in ("config",) and v is not None}
    if getattr(args, "config", ""):
        cfg = RunConfig.from_json(Path(args.config).read_text())
        cfg.subcommand = args.subcommand
    else:
        cfg = RunConfig(**kw)
    return dispatch(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
