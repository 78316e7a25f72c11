"""The ``fpm`` command line tool.

Subcommands::

    fpm run  --case 1.1 --method pg2 [--points N] [--eta1 X] [--eta2 X]
             [--dt X] [--T X] [--out DIR] [--vtk] [--config FILE]
    fpm sweep --case 1.1 --method pg2 --eta1 0.2,1,2 --eta2 1e5 [...]
    fpm mesh-info FILE

A plain-text config file (``key = value`` lines, section headers in
brackets) mirrors every flag; explicit flags override file values. Sections
``[run]`` and ``[sweep]`` apply to their subcommands.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import configparser
import sys

import numpy as np

from ..errors import ConfigError, FpmError, SolverError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _float_list(text):
    return [float(tok) for tok in str(text).replace(",", " ").split()]


def build_parser():
    p = argparse.ArgumentParser(prog="fpm",
                                description="fragile-points heat solvers")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one benchmark case")
    run.add_argument("--case", required=False)
    run.add_argument("--method", choices=("fpm", "pg1", "pg2", "pg3"))
    run.add_argument("--points", type=int)
    run.add_argument("--eta1", type=float)
    run.add_argument("--eta2", type=float)
    run.add_argument("--dt", type=float)
    run.add_argument("--T", type=float, dest="T")
    run.add_argument("--out")
    run.add_argument("--vtk", action="store_true", default=None)
    run.add_argument("--block", help="material block for the FG cases")
    run.add_argument("--layout", help="point layout (uniform | random)")
    run.add_argument("--config", help="config file mirroring the flags")

    sweep = sub.add_parser("sweep", help="penalty-parameter sweep")
    sweep.add_argument("--case", required=False)
    sweep.add_argument("--method", choices=("fpm", "pg1", "pg2", "pg3"))
    sweep.add_argument("--eta1", help="comma-separated values")
    sweep.add_argument("--eta2", help="comma-separated values")
    sweep.add_argument("--points", type=int)
    sweep.add_argument("--dt", type=float)
    sweep.add_argument("--T", type=float, dest="T")
    sweep.add_argument("--out")
    sweep.add_argument("--config")

    info = sub.add_parser("mesh-info", help="inspect a mesh file")
    info.add_argument("file")
    return p


_CONFIG_TYPES = {"points": int, "eta1": str, "eta2": str, "dt": float,
                 "T": float, "vtk": lambda v: str(v).lower() in ("1", "true", "yes")}


def _merge_config(args):
    """Fill unset args from the config file; flags always win."""
    if not getattr(args, "config", None):
        return args
    parser = configparser.ConfigParser()
    read = parser.read(args.config)
    if not read:
        raise ConfigError(f"config file {args.config!r} not found")
    section = args.command if parser.has_section(args.command) else "DEFAULT"
    for key in ("case", "method", "points", "eta1", "eta2", "dt", "T",
                "out", "vtk", "block", "layout"):
        if getattr(args, key, None) is None and parser.has_option(section, key):
            raw = parser.get(section, key)
            conv = _CONFIG_TYPES.get(key, str)
            try:
                setattr(args, key, conv(raw))
            except ValueError as exc:
                raise ConfigError(f"bad config value {key} = {raw!r}") from exc
    return args


def _cmd_run(args):
    from .runner import run_case
    if not args.case or not args.method:
        raise ConfigError("run requires --case and --method")
    params = {}
    if args.block:
        params["block"] = args.block
    if args.layout:
        params["layout"] = args.layout
    eta1 = float(args.eta1) if args.eta1 is not None else None
    eta2 = float(args.eta2) if args.eta2 is not None else None
    res = run_case(args.case, args.method, n_points=args.points,
                   eta1=eta1, eta2=eta2, dt=args.dt, T=args.T,
                   out_dir=args.out or ".", write_vtk=bool(args.vtk),
                   case_params=params)
    r = res.report
    print(f"case {args.case} method {args.method} n={res.setup.spec.partition.n_points}")
    print(f"  e0={r.e0:.6g} e1={r.e1:.6g} ebar0={r.ebar0:.6g}")
    print(f"  nband_K={r.nband_K} nband_C={r.nband_C} wall={r.wall_s:.3f}s")
    return EXIT_OK


def _cmd_sweep(args):
    from .runner import sweep_penalties
    if not args.case or not args.method:
        raise ConfigError("sweep requires --case and --method")
    if args.eta1 is None or args.eta2 is None:
        raise ConfigError("sweep requires --eta1 and --eta2 value lists")
    rows = sweep_penalties(args.case, args.method, _float_list(args.eta1),
                           _float_list(args.eta2), n_points=args.points,
                           dt=args.dt, T=args.T)
    print("eta1,eta2,e0,status")
    for row in rows:
        print(f"{row['eta1']:g},{row['eta2']:g},{row['e0']:.6g},{row['status']}")
    if args.out:
        from pathlib import Path
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "sweep.csv", "w", encoding="utf-8") as fh:
            fh.write("case,method,eta1,eta2,e0,status\n")
            for row in rows:
                fh.write(f"{row['case']},{row['method']},{row['eta1']:g},"
                         f"{row['eta2']:g},{row['e0']:.12g},{row['status']}\n")
    return EXIT_OK


def _cmd_mesh_info(args):
    from ..geometry import import_mesh
    cloud, part = import_mesh(args.file)
    kinds = {}
    for c in part.cells:
        kinds[c.kind] = kinds.get(c.kind, 0) + 1
    segs = {}
    for fc in part.faces:
        if fc.right is None:
            segs.setdefault(fc.segment, [0, fc.kind])[0] += 1
    lo = part.vertices.min(axis=0)
    hi = part.vertices.max(axis=0)
    print(f"dim {part.dim}")
    print(f"nodes {len(part.vertices)}")
    print(f"elements {len(part.cells)} "
          + " ".join(f"{k}={v}" for k, v in sorted(kinds.items())))
    print(f"faces {len(part.faces)} "
          f"(internal {sum(1 for fc in part.faces if fc.is_internal)})")
    print(f"measure {part.total_measure:.12g}")
    print("bbox " + " ".join(f"{v:.12g}" for v in np.concatenate([lo, hi])))
    for seg, (count, kind) in sorted(segs.items()):
        print(f"segment {seg}: {count} faces, kind {kind}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_mesh_info(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except FpmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
