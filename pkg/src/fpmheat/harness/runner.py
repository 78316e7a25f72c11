"""Case execution, penalty sweeps and CSV export.

``run_case`` assembles a catalog case under one method, solves it (steady or
backward-Euler transient) and returns an :class:`ErrorReport` together with
the raw fields. Results append to ``results.csv`` with one row per run;
sweeps record divergent or singular runs as NaN rows rather than raising.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, replace

import numpy as np

from ..assembly import SolverConfig, assemble, structure_report
from ..errors import FpmError, SolverError
from ..timeint import TransientSolution, run_transient, solve_steady
from .catalog import CaseSetup, get_case
from .norms import ErrorReport, error_norms

CSV_COLUMNS = ("case", "method", "n_points", "eta1", "eta2",
               "e0", "e1", "ebar0", "nband_K", "nband_C", "wall_s")


@dataclass
class RunResult:
    case: str
    method: str
    setup: CaseSetup
    config: SolverConfig
    report: ErrorReport
    u: np.ndarray
    solution: TransientSolution | None
    system: object

    def monitor_history(self, name):
        """Temperature history at a named monitor location (shape-function
        evaluation in the containing cell)."""
        x = np.asarray(self.setup.monitors[name], dtype=float)
        part = self.setup.spec.partition
        row, ids = _eval_row_at(part, self.system.operators, x)
        return self.solution.times, self.solution.U[:, ids] @ row

    def field_at(self, x, u=None, anchor=None):
        """Field value by trial-function evaluation; ``anchor`` picks the
        evaluating cell (one-sided traces on interfaces and cracks)."""
        part = self.setup.spec.partition
        row, ids = _eval_row_at(part, self.system.operators, x, anchor=anchor)
        return float((self.u if u is None else u)[ids] @ row)

    def crack_profiles(self, xs, y=0.5, eps=1e-3):
        """Upper/lower one-sided crack-face traces at the given abscissae."""
        up = np.array([self.field_at((x, y), anchor=(x, y + eps)) for x in xs])
        lo = np.array([self.field_at((x, y), anchor=(x, y - eps)) for x in xs])
        return up, lo


_CENTROID_TREES = {}


def _eval_row_at(part, operators, x, anchor=None):
    """Shape-function row of the cell whose centroid is nearest ``anchor``
    (default: nearest x itself), evaluated at x."""
    from scipy.spatial import cKDTree
    from ..approximation import ShapeFunction, shape_eval
    key = id(part)
    if key not in _CENTROID_TREES:
        _CENTROID_TREES[key] = (part, cKDTree(np.array([c.centroid
                                                        for c in part.cells])))
    tree = _CENTROID_TREES[key][1]
    probe = np.asarray(x if anchor is None else anchor, dtype=float)
    cell = part.cells[int(tree.query(probe)[1])]
    op = operators[cell.point]
    shape = ShapeFunction(cell.id, cell.point, part.cloud.points[cell.point], op)
    return shape_eval(shape, x), list(op.support_ids)


def make_config(setup: CaseSetup, method: str, eta1=None, eta2=None,
                dt=None, **kw) -> SolverConfig:
    d1, d2 = setup.default_eta.get(method, (1.0, 1e5))
    dt_hint = None
    if setup.transient:
        dt_hint = dt if dt is not None else setup.dt
    return SolverConfig(method=method,
                        eta1=d1 if eta1 is None else float(eta1),
                        eta2=d2 if eta2 is None else float(eta2),
                        dt_hint=dt_hint, **kw)


def run_case(case_id: str, method: str, n_points=None, eta1=None, eta2=None,
             dt=None, T=None, out_dir=None, write_vtk=False,
             case_params=None, config_overrides=None) -> RunResult:
    """Assemble, solve and score one benchmark case under one method."""
    case = get_case(case_id)
    setup = case.build(n_points, **(case_params or {}))
    config = make_config(setup, method, eta1, eta2, dt,
                         **(config_overrides or {}))
    if setup.transient and method == "pg3":
        warnings.warn("pg3 in transient analysis: the heat-capacity matrix is "
                      "not diagonal and more volume quadrature may be needed",
                      stacklevel=2)

    t0 = time.perf_counter()
    system = assemble(setup.spec, config)
    part = setup.spec.partition
    report = ErrorReport()
    solution = None
    if setup.transient:
        dt_run = dt if dt is not None else setup.dt
        T_run = T if T is not None else setup.T
        u0 = setup.spec.initial_vector()
        solution = run_transient(system, u0, dt=dt_run, T=T_run)
        u = solution.U[-1]
        if setup.spec.exact is not None:
            t_eval = min(setup.eval_time or T_run, T_run)
            e0, e1 = error_norms(solution.at(t_eval), setup.spec.exact, part,
                                 system.operators, t=t_eval)
            stamps = [t for t in setup.ebar_stamps if t <= T_run + 1e-12]
            if stamps:
                vals = [error_norms(solution.at(ts), setup.spec.exact, part,
                                    system.operators, t=ts)[0]
                        for ts in stamps]
                report.ebar0 = float(np.mean(vals))
            report.e0, report.e1 = e0, e1
    else:
        u = solve_steady(system)
        if setup.spec.exact is not None:
            report.e0, report.e1 = error_norms(u, setup.spec.exact, part,
                                               system.operators, t=0.0)
    sr = structure_report(system)
    report.nband_K, report.nband_C = sr.nband_K, sr.nband_C
    report.wall_s = time.perf_counter() - t0

    result = RunResult(case_id, method, setup, config, report, u, solution,
                       system)
    if out_dir is not None:
        _write_outputs(result, out_dir, write_vtk)
    return result


def _write_outputs(result: RunResult, out_dir, write_vtk):
    from pathlib import Path
    from .vtkio import export_field
    from .norms import discrete_gradients

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [csv_row(result)]
    write_results_csv(out / "results.csv", rows, append=True)
    if write_vtk:
        part = result.setup.spec.partition
        stamp = "steady" if result.solution is None else \
            f"{result.solution.times[-1]:g}"
        grads = discrete_gradients(result.u, result.system.operators,
                                   part.n_points, part.dim)
        export_field(result.u, part, out / f"field_t{stamp}.vtk",
                     gradients=grads)


def csv_row(result: RunResult) -> dict:
    return {"case": result.case, "method": result.method,
            "n_points": result.setup.spec.partition.n_points,
            "eta1": result.config.eta1, "eta2": result.config.eta2,
            "e0": result.report.e0, "e1": result.report.e1,
            "ebar0": result.report.ebar0, "nband_K": result.report.nband_K,
            "nband_C": result.report.nband_C, "wall_s": result.report.wall_s}


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def write_results_csv(path, rows, append=False):
    from pathlib import Path
    path = Path(path)
    exists = path.exists()
    mode = "a" if append and exists else "w"
    with open(path, mode, encoding="utf-8") as fh:
        if mode == "w":
            fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in CSV_COLUMNS) + "\n")
    return path


def sweep_penalties(case_id: str, method: str, eta1_values, eta2_values,
                    n_points=None, dt=None, T=None, case_params=None):
    """e0 over the (eta1, eta2) grid; failures are recorded, not raised."""
    rows = []
    for e1 in eta1_values:
        for e2 in eta2_values:
            entry = {"case": case_id, "method": method, "eta1": float(e1),
                     "eta2": float(e2), "e0": float("nan"), "status": "ok"}
            try:
                res = run_case(case_id, method, n_points=n_points,
                               eta1=e1, eta2=e2, dt=dt, T=T,
                               case_params=case_params)
                entry["e0"] = res.report.e0
                entry["n_points"] = res.setup.spec.partition.n_points
                if not np.isfinite(res.report.e0):
                    entry["status"] = "diverged"
            except (SolverError, FpmError) as exc:
                entry["status"] = f"failed: {type(exc).__name__}"
                entry["n_points"] = n_points or get_case(case_id).default_points
            rows.append(entry)
    return rows
