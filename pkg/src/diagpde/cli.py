"""Command-line entry point.

Runs are driven by one INI file; see ``demos/reduced_demo.ini`` for an annotated
example. Exit codes: 0 success, 2 config error, 3 verification failure,
4 materialization cap exceeded.
"""
from __future__ import annotations

import argparse
import configparser
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import becalc as bc
from . import costmodel as cm
from . import design as dz
from . import diagenc as de
from . import pdeops as po
from .linalg import MaterializationError, set_materialization_cap

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_CAP = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


SCHEMA: dict[str, dict[str, type]] = {
    "grid": {"n": str, "bc": str},
    "coefficient": {"profile": str, "K": int, "csv": str, "value": float, "quad_points": int},
    "evolution": {"t": float, "eps_hs": float},
    "design": {"m": str, "ranges": str},
    "region": {"x": str, "y": str, "cells": str, "component": int},
    "run": {"cap": int, "threads": int, "backend": str, "mode": str},
    "verify": {"n": int, "cases": int, "corrupt_alpha": bool},
    "cost": {"d": str, "K": str, "n": str},
}


@dataclass
class RunConfig:
    n: tuple[int, ...] = (3, 3)
    bc: tuple[tuple[str, str], ...] | None = None
    profile: str = "gaussian"
    K: int = 3
    csv: str | None = None
    value: float = 1.0
    quad_points: int | None = None
    t: float = 1.0
    eps_hs: float = 1e-6
    m: tuple[int, ...] = (3, 3)
    ranges: tuple[tuple[float, float], ...] = ((0.0, 1.0), (0.0, 1.0))
    region_x: tuple[float, float] = (0.0, 0.3)
    region_y: tuple[float, float] = (0.55, 0.9)
    cells: tuple[tuple[int, int], ...] | None = None
    component: int = 0
    cap: int = 2**14
    threads: int = 1
    backend: str = "dilation"
    mode: str = "both"
    verify_n: int = 2
    verify_cases: int = 40
    corrupt_alpha: bool = False
    cost_d: tuple[int, ...] = (1, 2)
    cost_K: tuple[int, ...] = (1, 2, 3, 4)
    cost_n: tuple[int, ...] = (2, 3, 4, 5)

    @property
    def grid(self) -> po.GridSpec:
        if self.bc is None:
            return po.GridSpec.wave_demo(self.n)
        return po.GridSpec(self.n, self.bc)


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(v) for v in s.replace(" ", "").split(",") if v)


def _pair(s: str) -> tuple[float, float]:
    a, b = s.split(":")
    return float(a), float(b)


def load_config(path: str | None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as e:
        raise ConfigError(f"cannot read config: {e}") from e
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        for key in cp[sec]:
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]")
    try:
        g = cp["grid"] if cp.has_section("grid") else {}
        if "n" in g:
            cfg.n = _ints(g["n"])
        if "bc" in g:
            sides = [s.strip() for s in g["bc"].split(",")]
            cfg.bc = tuple(tuple(s.split(":")) for s in sides)
        c = cp["coefficient"] if cp.has_section("coefficient") else {}
        cfg.profile = c.get("profile", cfg.profile)
        if cfg.profile not in ("gaussian", "constant", "csv"):
            raise ConfigError("profile must be gaussian, constant or csv")
        if "K" in c:
            cfg.K = int(c["K"])
        cfg.csv = c.get("csv", cfg.csv)
        if "value" in c:
            cfg.value = float(c["value"])
        if "quad_points" in c:
            cfg.quad_points = int(c["quad_points"])
        if cfg.profile == "csv" and not cfg.csv:
            raise ConfigError("profile = csv needs a csv path")
        e = cp["evolution"] if cp.has_section("evolution") else {}
        if "t" in e:
            cfg.t = float(e["t"])
        if "eps_hs" in e:
            cfg.eps_hs = float(e["eps_hs"])
        d = cp["design"] if cp.has_section("design") else {}
        if "m" in d:
            cfg.m = _ints(d["m"])
        if "ranges" in d:
            cfg.ranges = tuple(_pair(s) for s in d["ranges"].split(","))
        r = cp["region"] if cp.has_section("region") else {}
        if "x" in r:
            cfg.region_x = _pair(r["x"])
        if "y" in r:
            cfg.region_y = _pair(r["y"])
        if "cells" in r:
            cfg.cells = tuple(tuple(int(v) for v in p.split(",")) for p in r["cells"].split(";") if p.strip())
        if "component" in r:
            cfg.component = int(r["component"])
        u = cp["run"] if cp.has_section("run") else {}
        if "cap" in u:
            cfg.cap = int(u["cap"])
        if "threads" in u:
            cfg.threads = int(u["threads"])
        cfg.backend = u.get("backend", cfg.backend)
        cfg.mode = u.get("mode", cfg.mode)
        v = cp["verify"] if cp.has_section("verify") else None
        if v is not None:
            cfg.verify_n = v.getint("n", cfg.verify_n)
            cfg.verify_cases = v.getint("cases", cfg.verify_cases)
            cfg.corrupt_alpha = v.getboolean("corrupt_alpha", cfg.corrupt_alpha)
        k = cp["cost"] if cp.has_section("cost") else {}
        if "d" in k:
            cfg.cost_d = _ints(k["d"])
        if "K" in k:
            cfg.cost_K = _ints(k["K"])
        if "n" in k:
            cfg.cost_n = _ints(k["n"])
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"invalid value: {e}") from e
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if not cfg.n or any(v < 1 for v in cfg.n):
        raise ConfigError("grid.n needs positive per-axis qubit counts")
    if cfg.bc is not None:
        if len(cfg.bc) != len(cfg.n) or any(len(s) != 2 for s in cfg.bc):
            raise ConfigError("grid.bc needs one left:right pair per axis")
    if cfg.K < 0:
        raise ConfigError("coefficient.K must be >= 0")
    if cfg.t < 0 or cfg.eps_hs <= 0:
        raise ConfigError("evolution needs t >= 0 and eps_hs > 0")
    if len(cfg.m) != 2 or len(cfg.ranges) != 2 or any(v < 1 for v in cfg.m):
        raise ConfigError("design needs two parameters with m >= 1")
    if cfg.mode not in ("matrix", "blockenc", "both"):
        raise ConfigError("run.mode must be matrix, blockenc or both")
    if cfg.backend not in ("dilation", "shift_lcu", "auto"):
        raise ConfigError("run.backend must be dilation, shift_lcu or auto")
    if cfg.threads < 1 or cfg.cap < 1:
        raise ConfigError("run.threads and run.cap must be positive")


# --- shared builders -------------------------------------------------------------------

def _profile(cfg: RunConfig, centred: bool = True):
    if cfg.profile == "constant":
        v = cfg.value
        return lambda x, y: np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, v)
    return dz.gaussian_profile(None if centred else (0.0, 0.0))


def _series(cfg: RunConfig, centred: bool = True) -> de.FourierSeries:
    if cfg.profile == "csv":
        return de.read_fourier_csv(cfg.csv, dims=2)
    return de.fit_fourier(_profile(cfg, centred), (cfg.K, cfg.K), cfg.quad_points)


def _region(cfg: RunConfig, grid: po.GridSpec) -> dz.TargetRegion:
    if cfg.cells is not None:
        return dz.TargetRegion(cfg.cells, cfg.component)
    return dz.TargetRegion.rectangle(grid, cfg.region_x, cfg.region_y, cfg.component)


def _write(out: Path, name: str, text: str) -> Path:
    p = out / name
    with open(p, "w", newline="\n") as fh:
        fh.write(text)
    return p


fmt = dz.fmt


# --- subcommands ------------------------------------------------------------------------

def cmd_fit_fourier(cfg: RunConfig, out: Path, rng) -> int:
    s = _series(cfg)
    _write(out, "fourier.csv", de.fourier_to_csv(s))
    rep = ["quantity,value", f"K,{cfg.K}", f"terms,{s.coeffs.size}", f"l1,{fmt(s.l1)}",
           f"residual_fit,{fmt(s.residual)}"]
    if s.target is not None:
        xs = np.linspace(0.0, 1.0, 401)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        scan = float(np.max(np.abs(np.asarray(s.target(X, Y)) - s.grid_values(xs, xs))))
        rep.append(f"residual_scan,{fmt(scan)}")
    _write(out, "residual.csv", "\n".join(rep) + "\n")
    print(f"fitted {s.coeffs.size} coefficients, residual {s.residual:.6g}")
    return EXIT_OK


def _verify_cases(cfg: RunConfig, rng) -> list[tuple[str, bc.BlockEncoding]]:
    def rand_be(n, label):
        A = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
        return bc.dilation_be(A, label=label)

    def same_alpha(A):
        M = rng.normal(size=(4, 4))
        return bc.dilation_be(0.9 * float(A.alpha) * M / np.linalg.norm(M, 2), float(A.alpha), "B")

    cases = []
    for i in range(max(1, cfg.verify_cases // 7)):
        A, B = rand_be(2, "A"), rand_be(2, "B")
        cases += [
            (f"product[{i}]", bc.product(A, B)),
            (f"lcu[{i}]", bc.lcu(list(rng.normal(size=2)), [A, B])),
            (f"selector_offdiag[{i}]", bc.selector_offdiag(1 + i % 3, A, same_alpha(A), 2)),
            (f"selector_diag[{i}]", bc.selector_diag(i % 4, A, 2)),
            (f"controlled[{i}]", bc.controlled(A, 2)),
            (f"adjoint[{i}]", bc.adjoint(A)),
            (f"chebyshev[{i}]", bc.chebyshev(bc.dilation_be((lambda H: H + H.conj().T)(rng.normal(size=(4, 4)))), 1 + i % 4)),
        ]
    grid = po.GridSpec.wave_demo((cfg.verify_n, cfg.verify_n))
    c = de.diag_be_fourier(_series(cfg), grid.n, "U_c")
    cases.append(("fourier_diag", c))
    cases.append(("wave_generator", po.assemble_wave_A(c, grid, cfg.backend)))
    for mu in range(grid.d):
        for s in "+-":
            cases.append((f"D{s}[{mu}]", po.diff_be(mu, s, grid, "dilation")))
    if cfg.corrupt_alpha:
        name, U = cases[0]
        cases[0] = (name + "(corrupted)", U.replace(alpha=float(U.alpha) * 1.1))
    return cases


def cmd_verify_be(cfg: RunConfig, out: Path, rng) -> int:
    cases = _verify_cases(cfg, rng)

    def run(case):
        name, U = case
        dev = bc.verify(U, use_fast=False)
        tol = float(U.eps) + 1e-10
        return name, dev, float(U.eps), dev <= tol

    if cfg.threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            res = list(ex.map(run, cases))
    else:
        res = [run(c) for c in cases]
    lines = ["construction,deviation,eps,status"]
    for name, dev, eps, ok in res:
        lines.append(f"{name},{fmt(dev)},{fmt(eps)},{'pass' if ok else 'fail'}")
        print(f"{'PASS' if ok else 'FAIL'} {name} deviation {dev:.3e} eps {eps:.3e}")
    _write(out, "verify.csv", "\n".join(lines) + "\n")
    return EXIT_OK if all(r[3] for r in res) else EXIT_VERIFY


def _state_csv(state: np.ndarray, grid: po.GridSpec) -> str:
    nx, ny = 2 ** grid.n[0], 2 ** grid.n[1]
    xs, ys = grid.points(0), grid.points(1)
    norm = fmt(np.linalg.norm(state))
    lines = ["component,ix,iy,x,y,re,im,norm"]
    t = np.asarray(state).reshape(4, nx, ny)
    for c in range(4):
        for i in range(nx):
            for j in range(ny):
                v = t[c, i, j]
                lines.append(f"{c},{i},{j},{fmt(xs[i])},{fmt(ys[j])},{fmt(v.real)},{fmt(v.imag)},{norm}")
    return "\n".join(lines) + "\n"


def cmd_forward(cfg: RunConfig, out: Path, rng) -> int:
    grid = cfg.grid
    if grid.d != 2:
        raise ConfigError("forward runs the two-dimensional wave demo")
    fm = dz.ForwardModel(grid, cfg.K, cfg.t, cfg.eps_hs, cfg.backend, _profile(cfg))
    if cfg.profile == "csv":
        fm.series = _series(cfg)
    summary = [("t", cfg.t), ("alpha_A", fm.generator.alpha)]
    state = None
    if cfg.mode in ("matrix", "both"):
        exact = fm.run_matrix().amplitudes
        state = exact
    if cfg.mode in ("blockenc", "both"):
        t0 = time.perf_counter()
        be, prob = fm.run_blockenc()
        summary += [("R", fm.plan.R), ("alpha_for", fm.plan.alpha_for), ("success_prob", prob),
                    ("blockenc_seconds", time.perf_counter() - t0)]
        if state is not None:
            summary.append(("deviation_from_matrix", float(np.linalg.norm(be.amplitudes - state))))
        state = be.amplitudes
    w1 = dz.component_grid(state, grid).real
    ok, iy = dz.front_lag_in_middle(w1, grid)
    summary += [("norm", float(np.linalg.norm(state))), ("front_lag_middle", int(ok)), ("front_lag_row", iy)]
    _write(out, "state.csv", _state_csv(state, grid))
    _write(out, "forward_summary.csv",
           "quantity,value\n" + "".join(f"{k},{fmt(v)}\n" for k, v in summary))
    dz.write_pgm(out / "w1.pgm", dz.heatmap_xy(w1),
                 f"quantity Re w_1 at t={fmt(cfg.t)}\nrows y from 1 (top) to 0, columns x from 0 to 1")
    for k, v in summary:
        print(f"{k} = {v:.6g}" if isinstance(v, float) else f"{k} = {v}")
    return EXIT_OK


def _design_problem(cfg: RunConfig) -> dz.DesignProblem:
    grid = cfg.grid
    space = dz.DesignSpace(tuple(dz.DesignParam(nm, m, lo, hi) for nm, m, (lo, hi)
                                 in zip(("xi_x", "xi_y"), cfg.m, cfg.ranges)))
    return dz.DesignProblem(grid, space, _region(cfg, grid), cfg.K, cfg.t, cfg.eps_hs, cfg.backend,
                            series=_series(cfg, centred=False))


def cmd_landscape(cfg: RunConfig, out: Path, rng) -> int:
    pr = _design_problem(cfg)
    ls = dz.landscape(pr, cfg.mode, cfg.threads)
    _write(out, "landscape.csv", dz.landscape_csv(ls))
    shape = ls.shape
    note = "rows xi_y from high (top) to low, columns xi_x from low to high"
    if ls.F_matrix is not None:
        dz.write_pgm(out / "F_matrix.pgm", dz.heatmap_xy(ls.F_matrix.reshape(shape)), "quantity F matrix mode\n" + note)
    if ls.F_blockenc is not None:
        _write(out, "objective.csv", dz.objective_csv(ls))
        dz.write_pgm(out / "F_blockenc.pgm", dz.heatmap_xy(ls.F_blockenc.reshape(shape)),
                     "quantity F block-encoding mode\n" + note)
    if ls.F_matrix is not None and ls.F_blockenc is not None:
        dev = float(np.max(np.abs(ls.F_matrix - ls.F_blockenc)))
        same = ls.argmax("matrix") == ls.argmax("blockenc")
        print(f"max |F_blockenc - F_matrix| = {dev:.3e}; argmax agree: {same}")
    for which, arr in (("matrix", ls.F_matrix), ("blockenc", ls.F_blockenc)):
        if arr is not None:
            i = int(np.argmax(arr))
            print(f"argmax ({which}): xi = ({ls.cells[i][0]:.4f}, {ls.cells[i][1]:.4f}), F = {arr[i]:.6f}")
    return EXIT_OK


def cmd_cost_report(cfg: RunConfig, out: Path, rng) -> int:
    grid = po.GridSpec.periodic(cfg.n)
    d = grid.d
    s = de.fit_fourier(cm._sweep_function(d), (cfg.K,) * d, dims=d)

    def enc(label):
        return de.diag_be_fourier(s, grid.n, label)

    rows = []
    text = []
    R, Kp, Z, G = enc("U_rho"), enc("U_kappa"), enc("U_zeta"), enc("U_gamma")
    A2 = po.assemble_A2nd(po.CoefficientSet2nd(R, Kp, Z, G), grid, "auto")
    D = po.diff_be(0, "+", grid, po._backend_for(grid, 0, "auto"))
    Dm = cm.Meta(float(D.alpha), D.ancillas, float(D.eps), "D+")
    r2 = cm.predict_A2nd(cm.Meta.of(R), cm.Meta.of(Kp), cm.Meta.of(Z), cm.Meta.of(G), Dm, d).reconcile(A2)
    bp, bm = tuple(enc("U_b+") for _ in range(d)), tuple(enc("U_b-") for _ in range(d))
    A1 = po.assemble_A1st(po.CoefficientSet1st(Kp, bp, bm, G), grid, "auto")
    r1 = cm.predict_A1st(cm.Meta.of(Kp), cm.Meta.of(bp[0]), cm.Meta.of(G), Dm, d).reconcile(A1)
    for r in (r2, r1):
        rows += r.rows()
        text.append(f"{r.name}: predicted (alpha, a, eps) = ({r.predicted_triple[0]:.6g}, "
                    f"{r.predicted_triple[1]}, {r.predicted_triple[2]:.3e}); construction = "
                    f"({r.construction_triple[0]:.6g}, {r.construction_triple[1]}, {r.construction_triple[2]:.3e}); "
                    f"query counts match: {r.counts_match}")
        text += [f"  note: {n}" for n in r.notes]
    ok = r1.counts_match and r2.counts_match
    for kind in ("A2nd", "A1st"):
        fit = cm.gate_scaling_check(kind, cfg.cost_K, cfg.cost_n, cfg.cost_d)
        rows.append((f"{kind}.scaling_residual", fmt(0.10), fmt(fit.residual),
                     "relative residual of the three-term fit; predicted column is the tolerance"))
        for name, c in zip(("dK^d", "dn_logK", "n^2"), fit.coeffs):
            rows.append((f"{kind}.scaling_coeff[{name}]", "", fmt(c), "non-negative least squares"))
        text.append(f"{kind} gate scaling: coefficients {np.round(fit.coeffs, 3).tolist()}, "
                    f"relative residual {fit.residual:.3f} (tolerance 0.10, {'pass' if fit.ok else 'fail'})")
    wave = dz.ForwardModel(po.GridSpec.wave_demo((4, 4)), K=3, t=1.0, eps_hs=cfg.eps_hs)
    ledger = cm.forward_qubit_ledger(wave.generator, wave.grid, wave.c_be.ancillas, wave.plan.R)
    text.append("forward demo qubit ledger (reference, this construction):")
    for item, ref, ours in ledger:
        rows.append((f"qubits[{item}]", str(ref), str(ours), "reference ledger vs construction"))
        text.append(f"  {item:<30} {ref:>4} {ours:>4}")
    _write(out, "cost.csv", cm.cost_csv(rows))
    _write(out, "cost.txt", "\n".join(text) + "\n")
    print("\n".join(text))
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "fit-fourier": cmd_fit_fourier,
    "verify-be": cmd_verify_be,
    "forward": cmd_forward,
    "landscape": cmd_landscape,
    "cost-report": cmd_cost_report,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diagpde", description="Diagonal block-encoding PDE toolkit")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="INI run configuration")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, help="worker threads (overrides [run] threads)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized verification cases")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be positive")
            cfg.threads = args.threads
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    os.makedirs(out, exist_ok=True)
    prev = set_materialization_cap(cfg.cap)
    try:
        return COMMANDS[args.command](cfg, out, np.random.default_rng(args.seed))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except MaterializationError as e:
        print(f"materialization cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    finally:
        set_materialization_cap(prev)


if __name__ == "__main__":
    sys.exit(main())
