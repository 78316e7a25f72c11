"""Sparse assembly of the semi-discrete system C u' + K u = q.

Four spatial discretizations share the geometry/operator stack:

``fpm``
    Galerkin baseline: linear trial = test functions, symmetric interior
    penalty on jumps and Dirichlet faces.
``pg1``
    Collocation: Dirac test functions give one strong-form row per point
    (quadratic trials) plus penalty rows built from face integrals scaled by
    ``1/A_e`` and ``eta/h_e``-type factors. C is strictly diagonal.
``pg2``
    Finite volume: Heaviside test functions give one flux-balance row per
    cell; the face flux uses the average of the two one-sided gradients, so
    the scheme stays consistent for anisotropic conductivity.
``pg3``
    Singular solution: the test function in each cell is the fundamental
    solution of the locally orthotropic steady operator anchored at a source
    point outside the domain, so K has face integrals only.

Boundary data are callables ``f(xs, t) -> (k,)`` over stacked quadrature
points; scalars are accepted anywhere a callable is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from . import materials as mat
from .approximation import (
    LINEAR,
    QUADRATIC,
    DEFAULT_MQ_C,
    ShapeFunction,
    build_gfd,
    build_rbf_dq,
    shape_eval,
    shape_grad_eval,
)
from .errors import (
    MissingOperator,
    NonPositivePenalty,
    NormalizationSingular,
    SingularBasis,
    SourcePointInsideDomain,
)
from .geometry import CRACK, EXTERNAL, Partition, compute_supports

METHODS = ("fpm", "pg1", "pg2", "pg3")

# Default Gauss points per face edge direction. The one-point midpoint rule
# is definitional for fpm/pg1/pg2: with the large boundary penalties the
# penalty terms act through their midpoint trace, and richer face rules
# over-constrain boundary cells and cost an order of accuracy. pg3 has
# non-polynomial test functions and needs the extra points to keep
# patch-test residuals near round-off.
_FACE_QUAD_DEFAULT = {"fpm": 1, "pg1": 1, "pg2": 1, "pg3": 4}


# ---------------------------------------------------------------------------
# problem description
# ---------------------------------------------------------------------------

def _as_data(value):
    """Normalize boundary/source data to a vectorized callable f(xs, t)."""
    if value is None:
        return None
    if callable(value):
        return value
    v = float(value)
    return lambda xs, t, _v=v: np.full(len(np.atleast_2d(xs)), _v)


@dataclass(frozen=True)
class DirichletBC:
    u: object
    kind: str = "Dirichlet"


@dataclass(frozen=True)
class NeumannBC:
    q: object = 0.0
    kind: str = "Neumann"


@dataclass(frozen=True)
class RobinBC:
    h: object
    u_inf: object
    kind: str = "Robin"


@dataclass(frozen=True)
class SymmetricBC:
    kind: str = "Symmetric"


@dataclass(frozen=True)
class ExactSolution:
    u: object                  # f(xs, t) -> (k,)
    grad: object = None        # f(xs, t) -> (k, dim)


@dataclass
class ProblemSpec:
    """Bound problem: partition + material + per-segment boundary data.

    Binding stamps every external face with its boundary-condition kind and
    validates that each face carries exactly one condition. Crack faces keep
    their zero-flux semantics and need no entry in ``bcs``.
    """

    partition: Partition
    material: mat.MaterialField
    bcs: dict
    source: object = None
    initial: object = None
    exact: ExactSolution | None = None
    supports: object = None
    name: str = ""

    def __post_init__(self):
        faces = [replace(f) for f in self.partition.faces]
        for f in faces:
            if f.right is not None or f.kind == CRACK:
                continue
            if f.segment not in self.bcs:
                raise ValueError(
                    f"external face {f.id} (segment {f.segment!r}) has no "
                    f"boundary condition")
            f.kind = self.bcs[f.segment].kind
        self.partition = self.partition.with_faces(faces)
        self.source = _as_data(self.source)
        self.initial = _as_data(self.initial)
        self._validate_robin()

    def _validate_robin(self):
        part = self.partition
        for f in part.faces:
            if f.kind == "Robin":
                bc = self.bcs[f.segment]
                h = _as_data(bc.h)(np.atleast_2d(f.midpoint(part.vertices)), 0.0)
                if np.any(np.asarray(h) < 0):
                    raise ValueError(f"Robin face {f.id} has h < 0")

    def initial_vector(self) -> np.ndarray:
        pts = self.partition.cloud.points
        if self.initial is None:
            return np.zeros(len(pts))
        return np.asarray(self.initial(pts, 0.0), dtype=float)


@dataclass
class SolverConfig:
    """Method choice plus the nondimensional penalty/quadrature knobs."""

    method: str = "fpm"
    eta1: float = 1.0
    eta2: float = 1e5
    rbf_c: float | None = None            # None: 4 in 2D, 10 in 3D
    kbar: object = "auto"                 # "auto" or a numeric override
    face_quadrature: int | None = None    # Gauss points per edge direction
    pg3_volume_quadrature: int | None = None
    pg3_source_offset: float = 1.0
    strong_dirichlet: bool = False
    linear_operator: str = "gfd"          # "gfd" | "rbf"
    dt_hint: float | None = None          # transient floor for kbar
    min_support: int | None = None        # quadratic-stencil size floor

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.eta2 <= 0 or self.eta1 < 0:
            raise NonPositivePenalty(
                f"eta1={self.eta1}, eta2={self.eta2} (need eta1 >= 0, eta2 > 0)")


# ---------------------------------------------------------------------------
# load vector assembler
# ---------------------------------------------------------------------------

class LoadAssembler:
    """Collects q(t) contributions as (row, coef, data(x, t)) entries."""

    def __init__(self, n):
        self.n = n
        self.const = np.zeros(n)
        self._batches = {}   # id(fn) -> [fn, rows, coefs, xs]
        self._strong = {}    # row -> (fn, x)

    def add_const(self, row, value):
        self.const[row] += value

    def add(self, row, coef, fn, x):
        if fn is None:
            return
        key = id(fn)
        batch = self._batches.setdefault(key, [fn, [], [], []])
        batch[1].append(int(row))
        batch[2].append(float(coef))
        batch[3].append(np.asarray(x, dtype=float))

    def set_strong(self, row, fn, x):
        self._strong[int(row)] = (fn, np.asarray(x, dtype=float))

    def finalize(self):
        if self._strong:
            rows = set(self._strong)
            self.const[list(rows)] = 0.0
            for batch in self._batches.values():
                keep = [k for k, r in enumerate(batch[1]) if r not in rows]
                batch[1] = [batch[1][k] for k in keep]
                batch[2] = [batch[2][k] for k in keep]
                batch[3] = [batch[3][k] for k in keep]
        self._final = []
        for fn, rows, coefs, xs in self._batches.values():
            if rows:
                self._final.append((fn, np.asarray(rows), np.asarray(coefs),
                                    np.asarray(xs)))
        return self

    def __call__(self, t=0.0) -> np.ndarray:
        out = self.const.copy()
        for fn, rows, coefs, xs in self._final:
            vals = np.asarray(fn(xs, t), dtype=float)
            np.add.at(out, rows, coefs * np.broadcast_to(vals, rows.shape))
        for row, (fn, x) in self._strong.items():
            out[row] = float(np.asarray(fn(x[None, :], t)).reshape(-1)[0])
        return out


class _Coo:
    def __init__(self):
        self.rows, self.cols, self.vals = [], [], []

    def add_row(self, i, cols, vals):
        vals = np.asarray(vals, dtype=float)
        self.rows.append(np.full(len(cols), i, dtype=np.int64))
        self.cols.append(np.asarray(cols, dtype=np.int64))
        self.vals.append(vals)

    def add_block(self, rows, cols, block):
        r = np.repeat(np.asarray(rows, dtype=np.int64), len(cols))
        c = np.tile(np.asarray(cols, dtype=np.int64), len(rows))
        self.rows.append(r)
        self.cols.append(c)
        self.vals.append(np.asarray(block, dtype=float).reshape(-1))

    def build(self, n) -> sp.csc_matrix:
        if not self.rows:
            return sp.csc_matrix((n, n))
        m = sp.coo_matrix(
            (np.concatenate(self.vals),
             (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(n, n)).tocsc()
        m.sum_duplicates()
        m.sort_indices()
        return m


@dataclass
class StructureReport:
    nband_K: int
    nband_C: int
    is_C_diagonal: bool


@dataclass
class DiscreteSystem:
    """Assembled C, K and the load assembler q(t); rows indexed by point id."""

    C: sp.csc_matrix
    K: sp.csc_matrix
    load: LoadAssembler
    method: str
    n: int
    operators: dict = field(repr=False, default=None)

    def q(self, t=0.0) -> np.ndarray:
        return self.load(t)

    def structure_report(self) -> StructureReport:
        return structure_report(self)


def structure_report(system: DiscreteSystem) -> StructureReport:
    def nband(m):
        m = m.copy()
        m.data[np.abs(m.data) < 1e-300] = 0.0
        m.eliminate_zeros()
        counts = np.diff(m.indptr)
        return int(counts.max()) if m.nnz else 0

    C = system.C
    off = C - sp.diags(C.diagonal())
    is_diag = off.nnz == 0 or np.max(np.abs(off.data)) < 1e-14 * max(
        1.0, np.max(np.abs(C.diagonal())))
    return StructureReport(nband(system.K), nband(system.C), bool(is_diag))


def jump_and_average(face, left, right=None):
    """Across-face jump and average per the numerical-flux definitions."""
    if face.is_internal:
        if right is None:
            raise ValueError("internal faces need both traces")
        return left - right, 0.5 * (left + right)
    return left, left


# ---------------------------------------------------------------------------
# quadrature rules
# ---------------------------------------------------------------------------

_TRI_RULES = {
    1: (np.array([[1 / 3, 1 / 3, 1 / 3]]), np.array([1.0])),
    2: (np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6],
                  [1 / 6, 1 / 6, 2 / 3]]), np.array([1 / 3, 1 / 3, 1 / 3])),
    3: (np.array([
        [0.108103018168070, 0.445948490915965, 0.445948490915965],
        [0.445948490915965, 0.108103018168070, 0.445948490915965],
        [0.445948490915965, 0.445948490915965, 0.108103018168070],
        [0.816847572980459, 0.091576213509771, 0.091576213509771],
        [0.091576213509771, 0.816847572980459, 0.091576213509771],
        [0.091576213509771, 0.091576213509771, 0.816847572980459]]),
        np.array([0.223381589678011] * 3 + [0.109951743655322] * 3)),
}


def _tri_rule(order):
    return _TRI_RULES[min(max(order, 1), 3)]


def _gauss(n):
    return np.polynomial.legendre.leggauss(max(1, n))


def face_quadrature(part: Partition, face, order: int):
    """Quadrature points and weights on a face; weights sum to the measure."""
    fv = part.vertices[list(face.vertices)]
    if part.dim == 2:
        a, b = fv[0], fv[1]
        g, w = _gauss(order)
        xs = 0.5 * (a + b) + 0.5 * np.outer(g, b - a)
        return xs, 0.5 * np.linalg.norm(b - a) * w
    if len(fv) == 3:
        bary, w = _tri_rule(order)
        xs = bary @ fv
        area = 0.5 * np.linalg.norm(np.cross(fv[1] - fv[0], fv[2] - fv[0]))
        return xs, area * w
    if len(fv) == 4:
        g, w = _gauss(order)
        xs, ws = [], []
        for iu, u in enumerate(g):
            for iv, v in enumerate(g):
                N = 0.25 * np.array([(1 - u) * (1 - v), (1 + u) * (1 - v),
                                     (1 + u) * (1 + v), (1 - u) * (1 + v)])
                dNu = 0.25 * np.array([-(1 - v), (1 - v), (1 + v), -(1 + v)])
                dNv = 0.25 * np.array([-(1 - u), -(1 + u), (1 + u), (1 - u)])
                xs.append(N @ fv)
                ws.append(w[iu] * w[iv]
                          * np.linalg.norm(np.cross(dNu @ fv, dNv @ fv)))
        return np.asarray(xs), np.asarray(ws)
    # general planar polygon: fan triangulation about the vertex mean
    c = fv.mean(axis=0)
    bary, w = _tri_rule(min(order, 3))
    xs, ws = [], []
    for i in range(len(fv)):
        tri = np.array([c, fv[i], fv[(i + 1) % len(fv)]])
        area = 0.5 * np.linalg.norm(np.cross(tri[1] - tri[0], tri[2] - tri[0]))
        if area <= 0:
            continue
        xs.append(bary @ tri)
        ws.append(area * w)
    return np.vstack(xs), np.concatenate(ws)


def cell_quadrature(part: Partition, cell, order: int):
    """Volume rule; ``order`` is Gauss points per direction (1 = centroid)."""
    if order <= 1:
        return cell.centroid[None, :], np.array([cell.measure])
    cv = part.vertices[list(cell.vertices)]
    if part.dim == 2:
        if cell.kind == "quad" and len(cv) == 4:
            g, w = _gauss(order)
            xs, ws = [], []
            for iu, u in enumerate(g):
                for iv, v in enumerate(g):
                    N = 0.25 * np.array([(1 - u) * (1 - v), (1 + u) * (1 - v),
                                         (1 + u) * (1 + v), (1 - u) * (1 + v)])
                    dNu = 0.25 * np.array([-(1 - v), (1 - v), (1 + v), -(1 + v)])
                    dNv = 0.25 * np.array([-(1 - u), -(1 + u), (1 + u), (1 - u)])
                    J = abs(float((dNu @ cv)[0] * (dNv @ cv)[1] - (dNu @ cv)[1] * (dNv @ cv)[0]))
                    xs.append(N @ cv)
                    ws.append(w[iu] * w[iv] * J)
            return np.asarray(xs), np.asarray(ws)
        if cell.kind == "tri" and len(cv) == 3:
            bary, w = _tri_rule(order)
            return bary @ cv, cell.measure * w
        # polygon: fan triangulation about the centroid
        bary, w = _tri_rule(min(order, 3))
        xs, ws = [], []
        c = cell.centroid
        for i in range(len(cv)):
            tri = np.array([c, cv[i], cv[(i + 1) % len(cv)]])
            e1_, e2_ = tri[1] - tri[0], tri[2] - tri[0]
            area = abs(0.5 * (e1_[0] * e2_[1] - e1_[1] * e2_[0]))
            if area <= 0:
                continue
            xs.append(bary @ tri)
            ws.append(area * w)
        return np.vstack(xs), np.concatenate(ws)
    if cell.kind == "hex" and len(cv) == 8:
        g, w = _gauss(order)
        xs, ws = [], []
        for iu, u in enumerate(g):
            for iv, v in enumerate(g):
                for iw_, t in enumerate(g):
                    sh, grads = _hex_shape(u, v, t)
                    J = np.abs(np.linalg.det(grads @ cv))
                    xs.append(sh @ cv)
                    ws.append(w[iu] * w[iv] * w[iw_] * J)
        return np.asarray(xs), np.asarray(ws)
    if cell.kind == "tet" and len(cv) == 4:
        # 4-point degree-2 rule
        a, b = 0.585410196624969, 0.138196601125011
        bary = np.array([[a, b, b, b], [b, a, b, b], [b, b, a, b], [b, b, b, a]])
        return bary @ cv, cell.measure * np.full(4, 0.25)
    return cell.centroid[None, :], np.array([cell.measure])


def _hex_shape(u, v, t):
    signs = np.array([(-1, -1, -1), (1, -1, -1), (1, 1, -1), (-1, 1, -1),
                      (-1, -1, 1), (1, -1, 1), (1, 1, 1), (-1, 1, 1)], dtype=float)
    su, sv, st = signs[:, 0], signs[:, 1], signs[:, 2]
    N = 0.125 * (1 + su * u) * (1 + sv * v) * (1 + st * t)
    dN = np.vstack([
        0.125 * su * (1 + sv * v) * (1 + st * t),
        0.125 * sv * (1 + su * u) * (1 + st * t),
        0.125 * st * (1 + su * u) * (1 + sv * v),
    ])
    return N, dN


# ---------------------------------------------------------------------------
# shared assembly context
# ---------------------------------------------------------------------------

class _Context:
    def __init__(self, spec: ProblemSpec, config: SolverConfig):
        self.spec = spec
        self.config = config
        part = spec.partition
        self.part = part
        self.pts = part.cloud.points
        self.n = part.n_points
        spec.material.check_positive_at(self.pts)

        need_ring2 = config.method == "pg1" or config.linear_operator == "rbf"
        self.region_of = None
        if spec.material.region_fn is not None:
            regions = [spec.material.region_fn(x) for x in self.pts]
            self.region_of = lambda pid: regions[pid]
        if spec.supports is not None and not need_ring2:
            supports = spec.supports
        else:
            # quadratic stencils must not straddle a material interface: the
            # field kink there wrecks the second-derivative weights
            pair_filter = None
            if need_ring2 and self.region_of is not None:
                pair_filter = lambda i, j: self.region_of(i) == self.region_of(j)
            supports = compute_supports(part, need_second_ring=need_ring2,
                                        min_m=config.min_support,
                                        pair_filter=pair_filter)
        self.supports = supports

        c = config.rbf_c if config.rbf_c is not None else DEFAULT_MQ_C[part.dim]
        quadratic = config.method == "pg1" or config.linear_operator == "rbf"
        self.ops = {}
        for i in range(self.n):
            ids = supports.neighbors(i)
            coords = self.pts[ids]
            if quadratic:
                try:
                    op = build_rbf_dq(self.pts[i], coords, c=c,
                                      home_id=i, support_ids=tuple(ids))
                except SingularBasis:
                    op = build_rbf_dq(self.pts[i], coords, c=0.5 * c,
                                      home_id=i, support_ids=tuple(ids))
            else:
                op = build_gfd(self.pts[i], coords, home_id=i,
                               support_ids=tuple(ids))
            self.ops[i] = op

        self.shapes = {}
        for cell in part.cells:
            i = cell.point
            self.shapes[cell.id] = ShapeFunction(cell.id, i, self.pts[i],
                                                 self.ops[i])
        self.kbar = estimate_kbar(spec, config, config.dt_hint)
        self.face_order = (config.face_quadrature
                           if config.face_quadrature is not None
                           else _FACE_QUAD_DEFAULT[config.method])

    # shape helpers -----------------------------------------------------

    def srow(self, cell_id, x):
        return shape_eval(self.shapes[cell_id], x)

    def sgrad(self, cell_id, x):
        return shape_grad_eval(self.shapes[cell_id], x)

    def ids(self, cell_id):
        return self.shapes[cell_id].support_ids

    def k_side(self, x, cell_id):
        """Conductivity at x evaluated with the cell's own material region."""
        return self.spec.material.k(x, side_anchor=self.part.host(cell_id))

    def rho_c(self, x, cell_id):
        host = self.part.host(cell_id)
        m = self.spec.material
        return m.rho(x, side_anchor=host) * m.c(x, side_anchor=host)

    def bc_of(self, face):
        if face.kind == CRACK:
            return NeumannBC(0.0)
        return self.spec.bcs[face.segment]


def estimate_kbar(spec: ProblemSpec, config: SolverConfig, dt=None) -> float:
    """Mean of trace(k)/dim over hosted points, floored by rho c h^2 / dt."""
    if config is not None and config.kbar != "auto":
        return float(config.kbar)
    part = spec.partition
    pts = part.cloud.points
    m = spec.material
    dim = part.dim
    traces = [np.trace(m.k(x, side_anchor=x)) / dim for x in pts]
    kbar = float(np.mean(traces))
    if dt is not None and dt > 0:
        floor = 0.0
        for f in part.faces:
            if not f.is_internal:
                continue
            rc = 0.5 * (m.rho(pts[part.cells[f.left].point]) * m.c(pts[part.cells[f.left].point])
                        + m.rho(pts[part.cells[f.right].point]) * m.c(pts[part.cells[f.right].point]))
            floor = max(floor, rc * f.h_e ** 2 / dt)
        kbar = max(kbar, floor)
    return kbar


def _kbar_row(kv: np.ndarray, gk: np.ndarray) -> np.ndarray:
    """Row [div k, k11, k22(, k33), 2k12(, 2k23, 2k13)] matching D ordering."""
    dk = mat.div_k(gk)
    if kv.shape[0] == 2:
        return np.concatenate([dk, [kv[0, 0], kv[1, 1], 2 * kv[0, 1]]])
    return np.concatenate([dk, [kv[0, 0], kv[1, 1], kv[2, 2],
                                2 * kv[0, 1], 2 * kv[1, 2], 2 * kv[0, 2]]])


# ---------------------------------------------------------------------------
# collocation (pg1)
# ---------------------------------------------------------------------------

def _assemble_pg1(ctx: _Context) -> DiscreteSystem:
    spec, part, cfg = ctx.spec, ctx.part, ctx.config
    eta1, eta2, kbar = cfg.eta1, cfg.eta2, ctx.kbar
    K, C = _Coo(), _Coo()
    load = LoadAssembler(ctx.n)
    m = spec.material

    for cell in part.cells:
        i = cell.point
        xi = ctx.pts[i]
        op = ctx.ops.get(i)
        if op is None or op.order != QUADRATIC:
            raise MissingOperator(f"point {i} lacks a quadratic operator")
        C.add_row(i, [i], [ctx.rho_c(xi, cell.id)])
        kv = ctx.k_side(xi, cell.id)
        gk = mat.grad_k(m, op, ctx.pts)
        K.add_row(i, op.support_ids, -(_kbar_row(kv, gk) @ op.B))
        if spec.source is not None:
            load.add(i, 1.0, spec.source, xi)

        for f in part.faces_of_cell(cell.id):
            n = part.outward_normal(f, cell.id)
            xs, ws = face_quadrature(part, f, ctx.face_order)
            A, h = f.area, f.h_e
            if f.is_internal:
                other = f.right if f.left == cell.id else f.left
                coef = eta1 * kbar / (h * h * A)
                if coef != 0.0:
                    row_s = sum(w * ctx.srow(cell.id, x) for x, w in zip(xs, ws))
                    row_o = sum(w * ctx.srow(other, x) for x, w in zip(xs, ws))
                    K.add_row(i, ctx.ids(cell.id), coef * row_s)
                    K.add_row(i, ctx.ids(other), -coef * row_o)
                if ctx.region_of is not None and \
                        ctx.region_of(i) != ctx.region_of(part.cells[other].point):
                    # material-interface face: with stencils severed at the
                    # interface, penalize the flux-balance residual the same
                    # way the Neumann rows penalize their flux condition
                    cf = eta2 / (h * A)
                    fr_s = sum(w * (n @ ctx.k_side(x, cell.id))
                               @ ctx.sgrad(cell.id, x) for x, w in zip(xs, ws))
                    fr_o = sum(w * (n @ ctx.k_side(x, other))
                               @ ctx.sgrad(other, x) for x, w in zip(xs, ws))
                    K.add_row(i, ctx.ids(cell.id), cf * fr_s)
                    K.add_row(i, ctx.ids(other), -cf * fr_o)
                continue
            bc = ctx.bc_of(f)
            if bc.kind == "Dirichlet":
                coef = eta2 * kbar / (h * h * A)
                row = sum(w * ctx.srow(cell.id, x) for x, w in zip(xs, ws))
                K.add_row(i, ctx.ids(cell.id), coef * row)
                fn = _as_data(bc.u)
                for x, w in zip(xs, ws):
                    load.add(i, coef * w, fn, x)
            elif bc.kind in ("Neumann",):
                coef = eta2 / (h * A)
                row = sum(w * (n @ ctx.k_side(x, cell.id)) @ ctx.sgrad(cell.id, x)
                          for x, w in zip(xs, ws))
                K.add_row(i, ctx.ids(cell.id), coef * row)
                fn = _as_data(bc.q)
                for x, w in zip(xs, ws):
                    load.add(i, coef * w, fn, x)
            elif bc.kind == "Robin":
                coef = eta2 / (h * A)
                hs = np.asarray(_as_data(bc.h)(xs, 0.0), dtype=float)
                hs = np.broadcast_to(hs, ws.shape)
                row = sum(w * (n @ ctx.k_side(x, cell.id)) @ ctx.sgrad(cell.id, x)
                          for x, w in zip(xs, ws))
                row = row + sum(w * hv * ctx.srow(cell.id, x)
                                for x, w, hv in zip(xs, ws, hs))
                K.add_row(i, ctx.ids(cell.id), coef * row)
                fn = _as_data(bc.u_inf)
                for x, w, hv in zip(xs, ws, hs):
                    load.add(i, coef * w * hv, fn, x)
            elif bc.kind == "Symmetric":
                coef = eta2 * kbar / (h * A)
                row = sum(w * n @ ctx.sgrad(cell.id, x) for x, w in zip(xs, ws))
                K.add_row(i, ctx.ids(cell.id), coef * row)

    return _finish(ctx, K, C, load)


# ---------------------------------------------------------------------------
# Galerkin baseline (fpm)
# ---------------------------------------------------------------------------

def _assemble_fpm(ctx: _Context) -> DiscreteSystem:
    spec, part, cfg = ctx.spec, ctx.part, ctx.config
    eta1, eta2, kbar = cfg.eta1, cfg.eta2, ctx.kbar
    K, C = _Coo(), _Coo()
    load = LoadAssembler(ctx.n)

    for cell in part.cells:
        ids = ctx.ids(cell.id)
        xc = cell.centroid
        w = cell.measure
        row = ctx.srow(cell.id, xc)
        grad = ctx.sgrad(cell.id, xc)
        C.add_block(ids, ids, w * ctx.rho_c(xc, cell.id) * np.outer(row, row))
        K.add_block(ids, ids, w * grad.T @ ctx.k_side(xc, cell.id) @ grad)
        if spec.source is not None:
            for idx, pid in enumerate(ids):
                load.add(pid, w * row[idx], spec.source, xc)

    for f in part.faces:
        xs, ws = face_quadrature(part, f, ctx.face_order)
        n = f.normal
        h = f.h_e
        cl = f.left
        if f.is_internal:
            cr = f.right
            ids_l, ids_r = ctx.ids(cl), ctx.ids(cr)
            for x, w in zip(xs, ws):
                Nl, Nr = ctx.srow(cl, x), ctx.srow(cr, x)
                Fl = (n @ ctx.k_side(x, cl)) @ ctx.sgrad(cl, x)
                Fr = (n @ ctx.k_side(x, cr)) @ ctx.sgrad(cr, x)
                # -( [[v]] {n.k.grad u} + {grad v.k.n} [[u]] ) + eta1 kbar/h [[v]][[u]]
                _add_two_sided(K, ids_l, ids_r, Nl, Nr, Fl, Fr, w, eta1 * kbar / h)
            continue
        bc = ctx.bc_of(f)
        ids_l = ctx.ids(cl)
        if bc.kind == "Dirichlet":
            fn = _as_data(bc.u)
            for x, w in zip(xs, ws):
                N = ctx.srow(cl, x)
                F = (n @ ctx.k_side(x, cl)) @ ctx.sgrad(cl, x)
                K.add_block(ids_l, ids_l, w * (-np.outer(N, F) - np.outer(F, N)
                                               + (eta2 * kbar / h) * np.outer(N, N)))
                for idx, pid in enumerate(ids_l):
                    load.add(pid, w * ((eta2 * kbar / h) * N[idx] - F[idx]), fn, x)
        elif bc.kind == "Neumann":
            fn = _as_data(bc.q)
            for x, w in zip(xs, ws):
                N = ctx.srow(cl, x)
                for idx, pid in enumerate(ids_l):
                    load.add(pid, w * N[idx], fn, x)
        elif bc.kind == "Robin":
            fn = _as_data(bc.u_inf)
            hs = np.broadcast_to(np.asarray(_as_data(bc.h)(xs, 0.0), dtype=float),
                                 ws.shape)
            for x, w, hv in zip(xs, ws, hs):
                N = ctx.srow(cl, x)
                K.add_block(ids_l, ids_l, w * hv * np.outer(N, N))
                for idx, pid in enumerate(ids_l):
                    load.add(pid, w * hv * N[idx], fn, x)
        elif bc.kind == "Symmetric":
            for x, w in zip(xs, ws):
                N = ctx.srow(cl, x)
                kx = ctx.k_side(x, cl)
                tang = (n @ kx) @ (np.eye(part.dim) - np.outer(n, n))
                F = tang @ ctx.sgrad(cl, x)
                K.add_block(ids_l, ids_l, -w * np.outer(N, F))

    return _finish(ctx, K, C, load)


def _add_two_sided(K, ids_l, ids_r, Nl, Nr, Fl, Fr, w, pen):
    """Internal-face Galerkin terms on the stacked index set.

    Adds ``w * ( -[[v]]{F_u} - {F_v}[[u]] + pen [[v]][[u]] )`` where the jump
    of a stacked vector is (left, -right) and the average (left/2, right/2).
    """
    ids = np.concatenate([ids_l, ids_r])
    jump_v = np.concatenate([Nl, -Nr])
    jump_u = jump_v
    avg_f = np.concatenate([0.5 * Fl, 0.5 * Fr])
    block = w * (-np.outer(jump_v, avg_f) - np.outer(avg_f, jump_u)
                 + pen * np.outer(jump_v, jump_u))
    K.add_block(ids, ids, block)


# ---------------------------------------------------------------------------
# finite volume (pg2)
# ---------------------------------------------------------------------------

def _assemble_pg2(ctx: _Context) -> DiscreteSystem:
    spec, part, cfg = ctx.spec, ctx.part, ctx.config
    eta1, eta2, kbar = cfg.eta1, cfg.eta2, ctx.kbar
    K, C = _Coo(), _Coo()
    load = LoadAssembler(ctx.n)

    for cell in part.cells:
        i = cell.point
        xc = cell.centroid
        w = cell.measure
        C.add_row(i, ctx.ids(cell.id), w * ctx.rho_c(xc, cell.id)
                  * ctx.srow(cell.id, xc))
        if spec.source is not None:
            load.add(i, w, spec.source, xc)

        for f in part.faces_of_cell(cell.id):
            n = part.outward_normal(f, cell.id)
            xs, ws = face_quadrature(part, f, ctx.face_order)
            h = f.h_e
            if f.is_internal:
                other = f.right if f.left == cell.id else f.left
                for x, w_ in zip(xs, ws):
                    Ns = ctx.srow(cell.id, x)
                    No = ctx.srow(other, x)
                    Fs = (n @ ctx.k_side(x, cell.id)) @ ctx.sgrad(cell.id, x)
                    Fo = (n @ ctx.k_side(x, other)) @ ctx.sgrad(other, x)
                    K.add_row(i, ctx.ids(cell.id),
                              w_ * (-0.5 * Fs + (eta1 * kbar / h) * Ns))
                    K.add_row(i, ctx.ids(other),
                              w_ * (-0.5 * Fo - (eta1 * kbar / h) * No))
                continue
            bc = ctx.bc_of(f)
            if bc.kind == "Dirichlet":
                fn = _as_data(bc.u)
                for x, w_ in zip(xs, ws):
                    Ns = ctx.srow(cell.id, x)
                    Fs = (n @ ctx.k_side(x, cell.id)) @ ctx.sgrad(cell.id, x)
                    K.add_row(i, ctx.ids(cell.id),
                              w_ * (-Fs + (eta2 * kbar / h) * Ns))
                    load.add(i, w_ * eta2 * kbar / h, fn, x)
            elif bc.kind == "Neumann":
                fn = _as_data(bc.q)
                for x, w_ in zip(xs, ws):
                    load.add(i, w_, fn, x)
            elif bc.kind == "Robin":
                fn = _as_data(bc.u_inf)
                hs = np.broadcast_to(
                    np.asarray(_as_data(bc.h)(xs, 0.0), dtype=float), ws.shape)
                for x, w_, hv in zip(xs, ws, hs):
                    K.add_row(i, ctx.ids(cell.id), w_ * hv * ctx.srow(cell.id, x))
                    load.add(i, w_ * hv, fn, x)
            elif bc.kind == "Symmetric":
                for x, w_ in zip(xs, ws):
                    kx = ctx.k_side(x, cell.id)
                    tang = (n @ kx) @ (np.eye(part.dim) - np.outer(n, n))
                    K.add_row(i, ctx.ids(cell.id),
                              -w_ * tang @ ctx.sgrad(cell.id, x))

    return _finish(ctx, K, C, load)


# ---------------------------------------------------------------------------
# singular solution (pg3)
# ---------------------------------------------------------------------------

def _pg3_source_point(part: Partition, offset: float, kdiags):
    """Source point outside the domain, far enough that the 2D log argument
    is >= e at every hosted point (keeps the normalization away from zero)."""
    lo = part.vertices.min(axis=0)
    diam = part.diameter
    direction = np.ones(part.dim) / math.sqrt(part.dim)
    pts = part.cloud.points
    off = offset
    for _ in range(60):
        src = lo - off * diam * direction
        ok = True
        if part.dim == 2:
            for cell in part.cells:
                d = pts[cell.point] - src
                arg = math.sqrt(float(np.sum(d * d / kdiags[cell.id])))
                if arg < math.e:
                    ok = False
                    break
        if ok:
            return src
        off *= 2.0
    raise NormalizationSingular("could not place the source point so that the "
                                "fundamental solution is bounded away from 0")


class _Psi:
    """Normalized fundamental solution of one cell's orthotropic operator."""

    def __init__(self, dim, kdiag, src, x_home):
        self.dim = dim
        self.kdiag = kdiag
        self.src = src
        psi_i = self._raw(x_home)
        if abs(psi_i) < 1e-12:
            raise NormalizationSingular("fundamental solution vanishes at the "
                                        "hosted point")
        self.psi_i = psi_i

    def _s(self, x):
        d = np.asarray(x, dtype=float) - self.src
        return float(np.sum(d * d / self.kdiag)), d

    def _raw(self, x):
        s, _ = self._s(x)
        return 0.5 * math.log(s) if self.dim == 2 else s ** -0.5

    def value(self, x):
        return self._raw(x) / self.psi_i

    def grad(self, x):
        s, d = self._s(x)
        if self.dim == 2:
            g = d / (self.kdiag * s)
        else:
            g = -d / (self.kdiag * s ** 1.5)
        return g / self.psi_i


def _assemble_pg3(ctx: _Context) -> DiscreteSystem:
    spec, part, cfg = ctx.spec, ctx.part, ctx.config
    eta1, eta2, kbar = cfg.eta1, cfg.eta2, ctx.kbar
    K, C = _Coo(), _Coo()
    load = LoadAssembler(ctx.n)
    m = spec.material

    kdiags = {}
    for cell in part.cells:
        kv = ctx.k_side(ctx.pts[cell.point], cell.id)
        kdiags[cell.id] = np.diag(kv).copy()
    if cfg.pg3_source_offset <= 0:
        raise SourcePointInsideDomain("source offset must place the point "
                                      "outside the domain")
    src = _pg3_source_point(part, cfg.pg3_source_offset, kdiags)

    psis = {cell.id: _Psi(part.dim, kdiags[cell.id], src, ctx.pts[cell.point])
            for cell in part.cells}

    vol_order = cfg.pg3_volume_quadrature
    for cell in part.cells:
        i = cell.point
        psi = psis[cell.id]
        order = vol_order
        if order is None:
            order = 1 if cell.kind in ("tri", "tet") else 2
        xs, ws = cell_quadrature(part, cell, order)
        for x, w in zip(xs, ws):
            pv = psi.value(x)
            C.add_row(i, ctx.ids(cell.id),
                      w * ctx.rho_c(x, cell.id) * pv * ctx.srow(cell.id, x))
            if spec.source is not None:
                load.add(i, w * pv, spec.source, x)

        # the test-side flux grad(psi).k.n uses the cell's own orthotropic
        # tensor (the one psi is harmonic for); trial fluxes keep the true k
        kt = np.diag(kdiags[cell.id])
        for f in part.faces_of_cell(cell.id):
            n = part.outward_normal(f, cell.id)
            xs, ws = face_quadrature(part, f, ctx.face_order)
            h = f.h_e
            beta = eta2 * h / kbar
            if f.is_internal:
                # averaged one-sided fluxes and traces: the literal per-point
                # combination couples to the neighbour side only and does not
                # converge on smooth fields; the averaged form differs by
                # flux/trace-jump terms that vanish at the exact solution
                other = f.right if f.left == cell.id else f.left
                for x, w in zip(xs, ws):
                    pv = psi.value(x)
                    G = float(psi.grad(x) @ kt @ n)
                    Ns = ctx.srow(cell.id, x)
                    No = ctx.srow(other, x)
                    Fs = (n @ ctx.k_side(x, cell.id)) @ ctx.sgrad(cell.id, x)
                    Fo = (n @ ctx.k_side(x, other)) @ ctx.sgrad(other, x)
                    K.add_row(i, ctx.ids(cell.id),
                              w * (-0.5 * pv * Fs + 0.5 * G * Ns
                                   + (eta1 * kbar / h) * pv * Ns))
                    K.add_row(i, ctx.ids(other),
                              w * (-0.5 * pv * Fo + 0.5 * G * No
                                   - (eta1 * kbar / h) * pv * No))
                continue
            bc = ctx.bc_of(f)
            for x, w in zip(xs, ws):
                pv = psi.value(x)
                kx = ctx.k_side(x, cell.id)
                G = float(psi.grad(x) @ kt @ n)
                Ns = ctx.srow(cell.id, x)
                Fs = (n @ kx) @ ctx.sgrad(cell.id, x)
                if bc.kind == "Dirichlet":
                    K.add_row(i, ctx.ids(cell.id),
                              w * ((eta2 * kbar / h) * pv * Ns - pv * Fs - G * Ns))
                    load.add(i, w * (eta2 * kbar / h) * pv, _as_data(bc.u), x)
                    load.add(i, -2.0 * w * G, _as_data(bc.u), x)
                elif bc.kind == "Neumann":
                    K.add_row(i, ctx.ids(cell.id),
                              w * (pv * Fs + G * Ns + beta * G * Fs))
                    load.add(i, w * (2.0 * pv + beta * G), _as_data(bc.q), x)
                elif bc.kind == "Robin":
                    hv = float(np.asarray(_as_data(bc.h)(x[None, :], 0.0)).reshape(-1)[0])
                    K.add_row(i, ctx.ids(cell.id),
                              w * (pv * Fs + G * Ns + beta * G * Fs
                                   + hv * (2.0 * pv + beta * G) * Ns))
                    load.add(i, w * hv * (2.0 * pv + beta * G), _as_data(bc.u_inf), x)
                elif bc.kind == "Symmetric":
                    nkn = float(n @ kx @ n)
                    ndg = n @ ctx.sgrad(cell.id, x)
                    K.add_row(i, ctx.ids(cell.id),
                              w * (-pv * Fs + G * Ns
                                   + (2.0 * pv + beta * G) * nkn * ndg))

    return _finish(ctx, K, C, load)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _finish(ctx: _Context, K: _Coo, C: _Coo, load: LoadAssembler) -> DiscreteSystem:
    part = ctx.part
    Km = K.build(ctx.n)
    Cm = C.build(ctx.n)
    if ctx.config.strong_dirichlet:
        Km, Cm = _apply_strong_dirichlet(ctx, Km, Cm, load)
    load.finalize()
    return DiscreteSystem(Cm, Km, load, ctx.config.method, ctx.n, ctx.ops)


def _apply_strong_dirichlet(ctx, Km, Cm, load):
    part = ctx.part
    tol = 1e-12 * part.diameter
    strong = {}
    for f in part.faces:
        if f.kind != "Dirichlet":
            continue
        for cid in (f.left,):
            pid = part.cells[cid].point
            x = ctx.pts[pid]
            mid = f.midpoint(part.vertices)
            if abs(float(f.normal @ (x - mid))) <= tol:
                strong[pid] = (ctx.bc_of(f), x)
    if not strong:
        return Km, Cm
    Km = Km.tolil()
    Cm = Cm.tolil()
    for pid, (bc, x) in strong.items():
        Km.rows[pid] = [pid]
        Km.data[pid] = [1.0]
        Cm.rows[pid] = []
        Cm.data[pid] = []
        load.set_strong(pid, _as_data(bc.u), x)
    return Km.tocsc(), Cm.tocsc()


def assemble(spec: ProblemSpec, config: SolverConfig) -> DiscreteSystem:
    """Assemble the semi-discrete system for the configured method."""
    ctx = _Context(spec, config)
    return {
        "pg1": _assemble_pg1,
        "fpm": _assemble_fpm,
        "pg2": _assemble_pg2,
        "pg3": _assemble_pg3,
    }[config.method](ctx)


def assemble_collocation(spec, config=None, **kw) -> DiscreteSystem:
    return assemble(spec, _with_method(config, "pg1", kw))


def assemble_galerkin(spec, config=None, **kw) -> DiscreteSystem:
    return assemble(spec, _with_method(config, "fpm", kw))


def assemble_finite_volume(spec, config=None, **kw) -> DiscreteSystem:
    return assemble(spec, _with_method(config, "pg2", kw))


def assemble_singular(spec, config=None, **kw) -> DiscreteSystem:
    return assemble(spec, _with_method(config, "pg3", kw))


def _with_method(config, method, kw):
    if config is None:
        config = SolverConfig(method=method, **kw)
    else:
        config = replace(config, method=method, **kw)
    return config
