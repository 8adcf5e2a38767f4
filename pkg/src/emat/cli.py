"""Command-line front end: ``emat {verify,moduli,residuals,waves}``.

Outputs go to ``--out-dir`` (default from the config).  CSV values are written
with 17 significant digits so doubles survive a round trip; JSON reports carry
``schema_version``.  Exit status: 0 on success, 1 when a selected check fails,
2 for an invalid configuration or command line.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, load_config
from .report import SCHEMA_VERSION

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

MODULI_INDEX_ORDER = {
    "AA": "[alpha, i, beta, j] = d2Phi/dF_{i alpha} dF_{j beta}",
    "BB": "[alpha, i, beta] = d2Phi/dF_{i alpha} dE_beta",
    "CC": "[alpha, i, beta] = d2Phi/dF_{i alpha} dB_beta",
    "DD": "[alpha, i] = d2Phi/dF_{i alpha} dtheta",
    "FF": "[beta, alpha, j] = d2Phi/dE_beta dF_{j alpha}",
    "KK": "[beta, alpha, j] = d2Phi/dB_beta dF_{j alpha}",
    "GG, HH, LL, MM": "[alpha, beta] (E-E, E-B, B-E, B-B)",
    "II, NN": "[alpha] (E-theta, B-theta)",
    "A0": "[p, i, q, j] = J^-1 F_{p alpha} F_{q beta} AA[alpha, i, beta, j]",
    "B0, C0": "[i, j, k]",
    "D0": "[i, j]",
    "G0, H0, M0": "[i, j]",
    "I0, N0": "[i]",
}

RESIDUAL_HEADER = ["point", "X1", "X2", "X3", "equation", "norm", "scale", "status"]
MODULI_HEADER = ["set", "block", "index", "value"]
WAVES_HEADER = ["bias_index", "B_magnitude", "direction_index", "n1", "n2", "n3", "mode", "speed", "p1", "p2", "p3"]


def fmt(x) -> str:
    x = float(x)
    return f"{x:.17e}" if math.isfinite(x) else repr(x)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


def _out_dir(cfg: ScenarioConfig, args) -> Path:
    d = Path(args.out_dir if getattr(args, "out_dir", None) else cfg.output.directory)
    d.mkdir(parents=True, exist_ok=True)
    return d


# ---------------------------------------------------------------------------
# commands


def cmd_verify(cfg: ScenarioConfig, out: Path, log=None):
    """Run the invariant suites; writes verify_report.json (deterministic) and verify_timing.json."""
    from .verify import run_verify

    t0 = time.perf_counter()
    stamps = {}

    def progress(name):
        stamps[name] = time.perf_counter()
        if log:
            log(f"running {name}")

    report = run_verify(cfg, progress)
    path = out / "verify_report.json"
    path.write_text(report.to_json())
    names = list(stamps)
    ends = [stamps[n] for n in names[1:]] + [time.perf_counter()]
    _write_json(out / "verify_timing.json", {"schema_version": SCHEMA_VERSION, "total_s": time.perf_counter() - t0,
                                             "suites_s": {n: e - stamps[n] for n, e in zip(names, ends)}})
    if log:
        for c in report.checks:
            if c.status != "pass":
                log(f"{c.status.upper()} {c.suite}/{c.name}: {c.value!r} (tol {c.tolerance!r})")
        log(f"verify: {'PASS' if report.passed else 'FAIL'} ({len(report.checks)} checks) -> {path}")
    return report


def _bias_state(cfg: ScenarioConfig, model):
    b = cfg.bias
    theta = model.reference_temperature() if b.theta_l is None else b.theta_l
    p = b.p if model.incompressible else None
    return np.asarray(b.F), np.asarray(b.E_el), np.asarray(b.B_l), theta, p


def cmd_moduli(cfg: ScenarioConfig, out: Path, log=None) -> dict:
    """ModuliSet and UpdatedModuliSet at the bias state as JSON (nested arrays) and flat CSV."""
    from .constitutive import compute_moduli, push_forward_moduli

    model = cfg.build_model()
    F, E, B, theta, p = _bias_state(cfg, model)
    mod = compute_moduli(model, F, E, B, theta, p=p)
    up = push_forward_moduli(mod, F, printed_forms=cfg.printed_forms)
    ref, upd = mod.blocks(), up.blocks()
    doc = {
        "schema_version": SCHEMA_VERSION,
        "state": {"F": F.tolist(), "E_el": E.tolist(), "B_l": B.tolist(), "theta_l": float(theta),
                  "p": None if p is None else float(p), "J": float(up.J)},
        "model": cfg.model.model_dump(mode="json"),
        "index_order": MODULI_INDEX_ORDER,
        "referential": {k: v.tolist() for k, v in ref.items()},
        "updated": {k: v.tolist() for k, v in upd.items()},
        "symmetry_defects": mod.symmetry_defects(),
    }
    _write_json(out / "moduli.json", doc)
    rows = []
    for set_name, blocks in (("referential", ref), ("updated", upd)):
        for name, arr in blocks.items():
            for idx in np.ndindex(arr.shape):
                rows.append([set_name, name, ".".join(str(i) for i in idx), fmt(arr[idx])])
    _write_csv(out / "moduli.csv", MODULI_HEADER, rows)
    if log:
        log(f"moduli: {len(rows)} entries -> {out / 'moduli.json'}, {out / 'moduli.csv'}")
    return doc


def read_moduli_json(path) -> dict:
    """Blocks of a moduli.json file as float arrays: {"referential": {...}, "updated": {...}}."""
    doc = json.loads(Path(path).read_text())
    return {s: {k: np.asarray(v, dtype=float) for k, v in doc[s].items()} for s in ("referential", "updated")}


def _residual_sets(cfg: ScenarioConfig, sc, inc, X, t):
    from . import balance as bal
    from . import incremental as incm

    diff = cfg.numerics.diff_config()
    eps_r, mu_r = cfg.region.eps_r, cfg.region.mu_r
    sets = {
        "maxwell": lambda: [("maxwell_eulerian", bal.maxwell_residual_eulerian(sc, X, t, diff)),
                            ("maxwell_lagrangian", bal.maxwell_residual_lagrangian(sc, X, t, diff,
                                                                                   cfg.printed_forms))],
        "momentum": lambda: [("momentum", bal.momentum_residuals(sc, X, t, diff))],
        "energy": lambda: [("energy", bal.energy_residual(sc, X, t, diff))],
        "boundary": lambda: [("boundary", bal.boundary_residuals_finite(sc, X, t, diff))],
        "vacuum": lambda: [("vacuum", bal.region_maxwell_residual(sc, X, t, "vacuum", config=diff))],
        "coil": lambda: [("coil", bal.region_maxwell_residual(sc, X, t, "coil", eps_r, mu_r, diff))],
        "incremental": lambda: [
            ("incremental_lagrangian", incm.incremental_maxwell_lagrangian(sc, inc, X, t, diff, cfg.printed_forms)),
            ("incremental_eulerian", incm.incremental_maxwell_eulerian(sc, inc, X, t, diff, cfg.printed_forms)),
            ("incremental_momentum", incm.incremental_momentum_residuals(sc, inc, X, t, diff, cfg.printed_forms)),
        ],
        "assembled": lambda: [("assembled", incm.assembled_governing_residuals(sc, inc, X, t, diff,
                                                                               cfg.printed_forms))],
    }
    return [(name, sets[name]) for name in cfg.residuals.sets]


def cmd_residuals(cfg: ScenarioConfig, out: Path, log=None) -> list:
    """Residual norms of the selected sets on seeded sample points; per-point errors are recorded."""
    from .verify import manufactured_increment, manufactured_scenario

    rng = np.random.default_rng([cfg.seed, 1001])
    boundary = "boundary" in cfg.residuals.sets
    sc = manufactured_scenario(cfg, rng, boundary=boundary)
    inc = manufactured_increment(cfg, rng, sc)
    ext = cfg.residuals.extent
    points = rng.uniform(-ext, ext, (cfg.residuals.points, 3))
    t = cfg.residuals.time
    rows, reports = [], []
    for i, X in enumerate(points):
        for set_name, run in _residual_sets(cfg, sc, inc, X, t):
            try:
                results = run()
            except Exception as err:  # recorded, not fatal
                rows.append([i, *map(fmt, X), set_name, "nan", "nan", f"error: {type(err).__name__}: {err}"])
                continue
            for tag, rep in results:
                for r in rep:
                    rows.append([i, *map(fmt, X), f"{tag}/{r.name}", fmt(r.norm), fmt(r.scale),
                                 "flagged" if r.flagged else "ok"])
                reports.append({"point": i, "set": tag, "report": rep.to_dict(cfg.output.with_terms)})
    _write_csv(out / "residuals.csv", RESIDUAL_HEADER, rows)
    _write_json(out / "residuals.json", {"schema_version": SCHEMA_VERSION, "seed": cfg.seed, "time": t,
                                         "reports": reports})
    if log:
        log(f"residuals: {len(rows)} rows -> {out / 'residuals.csv'}")
    return rows


def fibonacci_directions(n: int) -> np.ndarray:
    """n nearly uniform unit vectors (deterministic)."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(1.0 - z * z)
    phi = np.pi * (1.0 + 5.0**0.5) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _wave_point(args):
    from .waves import PlaneWaveProblem, full_system_speeds, wave_speeds

    cfg, model, F, B_l, theta, p, n = args
    prob = PlaneWaveProblem.from_model(model, F, n, B_l=B_l, theta_l=theta, p=p, mu0=cfg.constants.mu0,
                                       k=cfg.waves.k)
    sol = wave_speeds(prob, magnetic=cfg.waves.magnetic)
    full = full_system_speeds(prob) if cfg.waves.full_system else None
    return prob, sol, full


def cmd_waves(cfg: ScenarioConfig, out: Path, log=None) -> list:
    """Speeds and polarizations over directions and |B_l| magnitudes."""
    model = cfg.build_model()
    F, _, B0, theta, p = _bias_state(cfg, model)
    w = cfg.waves
    dirs = np.asarray(w.directions) if w.directions is not None else fibonacci_directions(w.n_directions)
    bdir = np.asarray(w.B_direction)
    jobs = [(bi, b, di, n) for bi, b in enumerate(w.B_magnitudes) for di, n in enumerate(dirs)]
    args = [(cfg, model, F, B0 + b * bdir, theta, p, n) for _, b, _, n in jobs]

    def safe(a):
        try:
            return _wave_point(a)
        except Exception as err:  # degenerate points are reported per point
            return err

    with ThreadPoolExecutor(max_workers=w.workers) as pool:
        results = list(pool.map(safe, args))  # map keeps submission order
    header = WAVES_HEADER + (["full_system_speed"] if w.full_system else [])
    rows, diags = [], []
    for (bi, b, di, n), res in zip(jobs, results):
        base = [bi, fmt(b), di, *map(fmt, n)]
        if isinstance(res, Exception):
            diags.append({"bias_index": bi, "direction_index": di, "error": f"{type(res).__name__}: {res}"})
            continue
        prob, sol, full = res
        for m, c in enumerate(sol.speeds):
            row = base + [m, fmt(c), *map(fmt, np.real(sol.polarizations[:, m]))]
            if w.full_system:
                row.append(fmt(full[m]) if m < len(full) else "nan")
            rows.append(row)
        diags.append({"bias_index": bi, "direction_index": di, "symmetry_defect": sol.symmetry_defect,
                      "eigen_residual": sol.eigen_residual, "stable": sol.stable, "symmetrized": sol.symmetrized,
                      "rho": prob.rho})
    _write_csv(out / "waves.csv", header, rows)
    _write_json(out / "waves.json", {"schema_version": SCHEMA_VERSION, "seed": cfg.seed,
                                     "magnetic": w.magnetic, "points": diags})
    if log:
        log(f"waves: {len(rows)} rows -> {out / 'waves.csv'}")
    return rows


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="TOML configuration file")
    common.add_argument("--out-dir", default=argparse.SUPPRESS, help="directory for reports and tables")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the config seed")
    common.add_argument("--tol-scale", type=float, default=argparse.SUPPRESS,
                        help="multiply every pass tolerance by this factor")
    parser = argparse.ArgumentParser(prog="emat", parents=[common],
                                     description="Coupled magneto-electro-thermo-elastic residuals, moduli and waves")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the invariant suites")
    sub.add_parser("moduli", parents=[common], help="dump referential and updated moduli")
    sub.add_parser("residuals", parents=[common], help="evaluate residual sets on sample points")
    sub.add_parser("waves", parents=[common], help="sweep plane-wave speeds")
    return parser


COMMANDS = {"verify": cmd_verify, "moduli": cmd_moduli, "residuals": cmd_residuals, "waves": cmd_waves}


def main(argv=None) -> int:
    from ._backend import enable_compile_cache

    parser = build_parser()
    args = parser.parse_args(argv)
    log = lambda msg: print(msg, file=sys.stderr)  # noqa: E731
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cfg = load_config(getattr(args, "config", None), seed=getattr(args, "seed", None),
                              tol_scale=getattr(args, "tol_scale", None))
        for w in caught:
            log(f"warning: {w.message}")
    except ConfigError as err:
        log(f"config error: {err}")
        return EXIT_CONFIG
    enable_compile_cache()
    out = _out_dir(cfg, args)
    try:
        result = COMMANDS[args.command](cfg, out, log)
    except ConfigError as err:
        log(f"config error: {err}")
        return EXIT_CONFIG
    if args.command == "verify" and not result.passed:
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
