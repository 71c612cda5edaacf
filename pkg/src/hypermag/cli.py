"""Command-line entry point: ``hypermag <command> [options]``.

Exit codes: 0 success, 1 usage/config/input error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from . import minkowski as mk
from .audit import audit_curve
from .curvature import constant, from_selector
from .errors import HypermagError, InputError, NumericalFailure
from .flow import IntegratorConfig, integrate, write_trajectory_csv
from .hyperboloid import project_point
from .io import RunConfig, append_record, config_hash, load_config, read_records, store_path
from .reduction import CenterChart, find_reduced_zero, h_grid
from .solver import OrbitRecord, SolverConfig, continue_orbit, solve_from_zero, sweep_energy


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _add_common(p):
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--store", help="JSON-lines store (default: $HYPERMAG_STORE or ./hypermag_store.jsonl)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--k0", type=float)
    g.add_argument("--r", type=float)
    p.add_argument("--k1", help="perturbation selector, e.g. linear-e3, morse-max, product:e1;e2")
    p.add_argument("--chart-base", dest="chart_base", help="e1/e2/e3 or three comma-separated numbers")
    p.add_argument("--seed", type=int)


def build_parser():
    ap = _Parser(prog="hypermag", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="integrate an initial value problem, write CSV")
    _add_common(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--speed", type=float)
    p.add_argument("--method", choices=["rk4", "rk45"])
    p.add_argument("--tol", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("orbit", help="solve for a closed orbit seeded by a reduced zero")
    _add_common(p)
    p.add_argument("--eps", type=float)
    p.add_argument("--start", type=_floats, help="chart start x,y for the reduced zero")

    p = sub.add_parser("reduce", help="reduced field grid (CSV) and zeros (JSON)")
    _add_common(p)
    p.add_argument("--start", type=_floats)
    p.add_argument("--grid-n", dest="grid_n", type=int)
    p.add_argument("--grid-extent", dest="grid_extent", type=float)
    p.add_argument("--out", help="output prefix (writes <out>_grid.csv and <out>_zeros.json)")

    p = sub.add_parser("continue", help="eps ladder from a reduced zero")
    _add_common(p)
    p.add_argument("--eps-list", dest="eps_list", type=_floats)
    p.add_argument("--start", type=_floats)
    p.add_argument("--out", help="report JSON path (default stdout)")

    p = sub.add_parser("sweep", help="energy trichotomy for k = 1")
    _add_common(p)
    p.add_argument("--c-values", dest="c_values", type=_floats)
    p.add_argument("--out")

    p = sub.add_parser("audit", help="audit stored orbits")
    _add_common(p)
    p.add_argument("--out", help="directory for per-record JSON and summary.csv")

    p = sub.add_parser("selftest", help="run the invariant battery")
    p.add_argument("--quick", action="store_true", help="skip the slowest suites")
    return ap


_CONFIG_KEYS = set(RunConfig.__dataclass_fields__)


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    over = {k: v for k, v in vars(args).items() if k in _CONFIG_KEYS and v is not None}
    if "k0" in over and cfg.r is not None:
        cfg = replace(cfg, r=None)
    if "r" in over and cfg.k0 is not None:
        cfg = replace(cfg, k0=None)
    return replace(cfg, **over)


def _chart(cfg: RunConfig):
    base = cfg.chart_base.strip()
    axes = {"e1": mk.E1, "e2": mk.E2, "e3": mk.E3}
    if base in axes:
        w0 = axes[base]
        if base != "e3":
            raise InputError("chart base must lie on the hyperboloid (e3 or three numbers)")
    else:
        try:
            w0 = np.array(_floats(base))
        except ValueError:
            raise InputError(f"bad chart base {base!r}") from None
        if w0.shape != (3,):
            raise InputError("chart base takes three numbers")
        w0 = project_point(w0)
    return CenterChart.at(w0)


def _need_r(cfg):
    r = cfg.resolved_r()
    if r is None:
        raise InputError("give --r or --k0 > 1")
    return r


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_simulate(cfg, args):
    k0 = cfg.resolved_k0()
    if k0 is None:
        raise InputError("give --k0 or --r")
    k = constant(k0)
    if cfg.eps:
        k = k + cfg.eps * from_selector(cfg.k1)
    s0 = np.concatenate([mk.E3, cfg.speed * mk.E1])
    icfg = IntegratorConfig(cfg.method, tol=cfg.tol, step=cfg.step)
    n = cfg.n_samples if args.n_samples is not None else max(cfg.n_samples, int(math.ceil(20 * cfg.T)))
    traj = integrate(s0, k, cfg.T, icfg, n_samples=n)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            write_trajectory_csv(traj, fh)
    else:
        write_trajectory_csv(traj, sys.stdout)
    return 0


def _solve(cfg, eps):
    r = _need_r(cfg)
    chart = _chart(cfg)
    k1 = from_selector(cfg.k1)
    zero = find_reduced_zero(chart, r, k1, cfg.start)
    return solve_from_zero(chart, zero, k1, eps, SolverConfig(steps=cfg.steps))


def _audit_summary(rec: OrbitRecord):
    k = constant(rec.spec["k0"]) + rec.spec["epsilon"] * from_selector(rec.spec["k1"])
    return audit_curve(rec.curve(), k).to_dict()


def cmd_orbit(cfg, args):
    rec = _solve(cfg, cfg.eps)
    rec.audit = _audit_summary(rec)
    rec.config_hash = config_hash(cfg)
    append_record(store_path(cfg.store), "orbit", rec.to_dict(), rec.config_hash)
    summary = {k: v for k, v in rec.to_dict().items() if k not in ("points", "velocities")}
    sys.stdout.write(json.dumps(summary, indent=2, default=str) + "\n")
    return 0


def cmd_reduce(cfg, args):
    r = _need_r(cfg)
    chart = _chart(cfg)
    k1 = from_selector(cfg.k1)
    xs = np.linspace(-cfg.grid_extent, cfg.grid_extent, cfg.grid_n)
    rows = h_grid(chart, r, k1, xs, xs)
    zero = find_reduced_zero(chart, r, k1, cfg.start)
    zeros = {"r": r, "k1": cfg.k1, "zeros": [zero.to_dict()]}
    prefix = cfg.out or "reduce"
    with open(f"{prefix}_grid.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "sigma2", "sigma3"])
        for row in rows:
            w.writerow([f"{v:.17g}" for v in row])
    Path(f"{prefix}_zeros.json").write_text(json.dumps(zeros, indent=2) + "\n", encoding="utf-8")
    append_record(store_path(cfg.store), "reduction", zeros, config_hash(cfg))
    sys.stdout.write(json.dumps(zeros, indent=2) + "\n")
    return 0


def cmd_continue(cfg, args):
    r = _need_r(cfg)
    chart = _chart(cfg)
    k1 = from_selector(cfg.k1)
    eps = cfg.eps_list or (1e-3, 5e-4, 2.5e-4)
    zero = find_reduced_zero(chart, r, k1, cfg.start)
    rep = continue_orbit(chart, zero, k1, eps, SolverConfig(steps=cfg.steps))
    chash = config_hash(cfg)
    for rec in rep.records:
        rec.audit = _audit_summary(rec)
        rec.config_hash = chash
        append_record(store_path(cfg.store), "orbit", rec.to_dict(), chash)
    summary = {
        "epsilons": rep.epsilons,
        "deviations": rep.deviations,
        "center_distances": rep.center_distances,
        "ratios": rep.ratios,
        "failures": rep.failures,
        "closures": [rec.closure for rec in rep.records],
        "s1_degrees": [rec.s1_degree for rec in rep.records],
    }
    _emit(json.dumps(summary, indent=2) + "\n", cfg.out)
    if not rep.records:
        raise NumericalFailure("no eps value converged")
    return 0


def cmd_sweep(cfg, args):
    cs = cfg.c_values or (0.5, 0.9, 1.0, 1.5, 2.0)
    entries = [asdict(e) for e in sweep_energy(cs)]
    append_record(store_path(cfg.store), "sweep", {"entries": entries}, config_hash(cfg))
    _emit(json.dumps(entries, indent=2) + "\n", cfg.out)
    return 0


def cmd_audit(cfg, args):
    store = store_path(cfg.store)
    envs = read_records(store, kind="orbit")
    outdir = Path(cfg.out or "audit")
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, env in enumerate(envs):
        rec = OrbitRecord.from_dict(env["payload"])
        rep = _audit_summary(rec)
        (outdir / f"audit_{i:04d}.json").write_text(json.dumps(rep, indent=2) + "\n", encoding="utf-8")
        append_record(store, "audit", {"record_index": i, "report": rep}, env["config_hash"])
        rows.append([i, env["config_hash"], rec.spec["epsilon"], rep["length"], rep["area"],
                     rep["gauss_bonnet_residual"], rep["winding_number"], rep["iso_margin"], rep["passed"]])
    with open(outdir / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "config_hash", "epsilon", "length", "area", "gauss_bonnet_residual",
                    "winding_number", "iso_margin", "passed"])
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
    sys.stdout.write(f"audited {len(rows)} orbit records; {sum(r[-1] for r in rows)} passed\n")
    return 0 if all(r[-1] for r in rows) else 2


def cmd_selftest(cfg, args):
    from .selftest import run

    return 0 if run(quick=args.quick) else 2


COMMANDS = {
    "simulate": cmd_simulate,
    "orbit": cmd_orbit,
    "reduce": cmd_reduce,
    "continue": cmd_continue,
    "sweep": cmd_sweep,
    "audit": cmd_audit,
    "selftest": cmd_selftest,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig() if args.command == "selftest" else resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except InputError as exc:
        print(f"hypermag: error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"hypermag: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except HypermagError as exc:  # pragma: no cover - all subclasses handled above
        print(f"hypermag: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
