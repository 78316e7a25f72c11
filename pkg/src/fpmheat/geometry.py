"""Point clouds, domain partitions, face topology, supports and cracks.

A partition divides the domain into conforming, non-overlapping convex cells,
each hosting exactly one point. Faces carry the metadata the weak forms need:
unit normal, measure ``area`` (length in 2D), length scale ``h_e`` (distance
between the two hosted points for internal faces, point-to-plane distance for
external ones) and the neighbouring cell ids.

Builders provided here:

* :func:`build_structured_partition` -- quad/tri grids in 2D, hex/tet in 3D;
* :func:`build_voronoi_partition` -- Voronoi cells clipped against a convex
  polygonal domain (2D) or a box (3D);
* :func:`import_mesh` -- the plain-text node/element format documented in
  :func:`import_mesh`.

All products are plain data and immutable by convention: nothing here mutates
a partition after construction (``insert_crack`` returns new objects).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    CrackMissesFaces,
    DegenerateCell,
    DuplicatePoints,
    InsufficientSupport,
    ParseError,
    PointOutsideDomain,
    UnsupportedElementType,
)

# Minimum derivative-vector size for the quadratic operator: 5 rows in 2D
# (ux, uy, uxx, uyy, uxy), 9 in 3D.
DIM_D = {2: 5, 3: 9}

INTERNAL = "internal"
EXTERNAL = "external"
CRACK = "crack"

# face kinds assigned once boundary conditions are bound to a partition
BC_KINDS = ("Dirichlet", "Neumann", "Robin", "Symmetric")


# ---------------------------------------------------------------------------
# basic containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointCloud:
    """Scattered points; the array row index is the point id."""

    points: np.ndarray  # (n, dim)

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] not in (2, 3):
            raise ValueError("points must be an (n, 2) or (n, 3) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass
class Cell:
    id: int
    vertices: tuple  # indices into Partition.vertices
    centroid: np.ndarray
    measure: float
    point: int       # hosted point id
    kind: str = "polygon"  # polygon | tri | quad | tet | hex


@dataclass
class Face:
    id: int
    vertices: tuple
    normal: np.ndarray      # unit, oriented from `left` into `right` / outward
    area: float             # length in 2D, area in 3D
    h_e: float
    left: int               # first neighbour cell id
    right: int | None       # second neighbour cell id, None for external
    segment: str | None = None  # boundary segment id for external faces
    kind: str = INTERNAL

    @property
    def is_internal(self) -> bool:
        return self.right is not None and self.kind != CRACK

    def midpoint(self, vertices: np.ndarray) -> np.ndarray:
        return vertices[list(self.vertices)].mean(axis=0)


@dataclass
class Partition:
    """Conforming partition: cells, shared vertex pool and face topology."""

    dim: int
    cloud: PointCloud
    vertices: np.ndarray
    cells: list
    faces: list
    domain_measure: float | None = None
    cracks: list = field(default_factory=list)  # list of (p0, p1) segments

    def __post_init__(self):
        self._faces_of_cell = None
        self._cell_of_point = None

    # -- derived topology ---------------------------------------------------

    @property
    def n_points(self) -> int:
        return self.cloud.n

    def cell_of_point(self, point_id: int) -> Cell:
        if self._cell_of_point is None:
            lookup = {}
            for c in self.cells:
                lookup[c.point] = c
            self._cell_of_point = lookup
        return self._cell_of_point[point_id]

    def faces_of_cell(self, cell_id: int) -> list:
        if self._faces_of_cell is None:
            fc = {c.id: [] for c in self.cells}
            for f in self.faces:
                fc[f.left].append(f)
                if f.right is not None:
                    fc[f.right].append(f)
            self._faces_of_cell = fc
        return self._faces_of_cell[cell_id]

    def outward_normal(self, face: Face, cell_id: int) -> np.ndarray:
        return face.normal if face.left == cell_id else -face.normal

    def host(self, cell_id: int) -> np.ndarray:
        return self.cloud.points[self.cells[cell_id].point]

    @property
    def diameter(self) -> float:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    @property
    def total_measure(self) -> float:
        return float(sum(c.measure for c in self.cells))

    def mean_internal_h(self) -> float:
        hs = [f.h_e for f in self.faces if f.is_internal]
        return float(np.mean(hs)) if hs else self.diameter

    # -- rebinding helpers (do not mutate in place) --------------------------

    def with_faces(self, faces: list, cracks=None) -> "Partition":
        return Partition(self.dim, self.cloud, self.vertices, self.cells,
                         faces, self.domain_measure,
                         list(self.cracks) if cracks is None else cracks)

    def with_points(self, points: np.ndarray) -> "Partition":
        """Replace hosted point coordinates (cells keep their geometry).

        Internal ``h_e`` values are recomputed from the new host distances;
        points must remain inside their cells.
        """
        cloud = PointCloud(points)
        part = Partition(self.dim, cloud, self.vertices, self.cells,
                         [replace(f) for f in self.faces],
                         self.domain_measure, list(self.cracks))
        floor = 1e-3 * self.mean_internal_h()
        for f in part.faces:
            if f.is_internal:
                p1 = cloud.points[self.cells[f.left].point]
                p2 = cloud.points[self.cells[f.right].point]
                f.h_e = float(np.linalg.norm(p2 - p1))
            else:
                p = cloud.points[self.cells[f.left].point]
                f.h_e = max(_point_plane_distance(p, f, part.vertices), floor)
        part.validate()
        return part

    # -- validation ----------------------------------------------------------

    def validate(self):
        pts = self.cloud.points
        for c in self.cells:
            if c.measure <= 0:
                raise DegenerateCell(f"cell {c.id} has non-positive measure")
            if not self._point_in_cell(pts[c.point], c):
                raise PointOutsideDomain(
                    f"hosted point {c.point} lies outside cell {c.id}")
        hosted = [c.point for c in self.cells]
        if len(set(hosted)) != len(hosted) or len(hosted) != self.cloud.n:
            raise DegenerateCell("cells and hosted points are not 1:1")
        if self.domain_measure is not None:
            total = self.total_measure
            if abs(total - self.domain_measure) > 1e-9 * abs(self.domain_measure):
                raise DegenerateCell(
                    f"cell measures sum to {total}, expected {self.domain_measure}")
        for f in self.faces:
            if abs(np.linalg.norm(f.normal) - 1.0) > 1e-12:
                raise DegenerateCell(f"face {f.id} normal not unit")
            if f.area <= 0 or f.h_e <= 0:
                raise DegenerateCell(f"face {f.id} has non-positive area or h_e")
            if f.is_internal:
                d = pts[self.cells[f.right].point] - pts[self.cells[f.left].point]
                if float(f.normal @ d) <= 0:
                    raise DegenerateCell(f"face {f.id} normal mis-oriented")

    def _point_in_cell(self, x: np.ndarray, cell: Cell, tol=1e-9) -> bool:
        # convex cells: inside iff behind every outward face plane
        scale = self.diameter
        for f in self.faces_of_cell(cell.id):
            n = self.outward_normal(f, cell.id)
            mid = f.midpoint(self.vertices)
            if float(n @ (x - mid)) > tol * scale:
                return False
        return True


@dataclass
class SupportSet:
    """First (face-sharing) and optional second neighbour rings per point."""

    ring1: dict      # point id -> sorted tuple of ids
    ring2: dict      # point id -> sorted tuple of ids (may be empty)

    def neighbors(self, point_id: int) -> list:
        return list(self.ring1[point_id]) + list(self.ring2[point_id])

    def m(self, point_id: int) -> int:
        return len(self.ring1[point_id]) + len(self.ring2[point_id])

    def drop_pair(self, i: int, j: int):
        self.ring1[i] = tuple(k for k in self.ring1[i] if k != j)
        self.ring1[j] = tuple(k for k in self.ring1[j] if k != i)
        self.ring2[i] = tuple(k for k in self.ring2[i] if k != j)
        self.ring2[j] = tuple(k for k in self.ring2[j] if k != i)


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Box:
    """Axis-aligned box domain; external segments named xmin/xmax/..."""

    lo: tuple
    hi: tuple

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def measure(self) -> float:
        return float(np.prod(np.asarray(self.hi) - np.asarray(self.lo)))

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(np.asarray(self.hi) - np.asarray(self.lo)))

    def contains(self, x, tol=0.0) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= np.asarray(self.lo) - tol)
                    and np.all(x <= np.asarray(self.hi) + tol))

    def as_polygon(self) -> "PolygonDomain":
        if self.dim != 2:
            raise ValueError("as_polygon is 2D only")
        (x0, y0), (x1, y1) = self.lo, self.hi
        verts = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
        return PolygonDomain(verts, ["ymin", "xmax", "ymax", "xmin"])


@dataclass(frozen=True)
class PolygonDomain:
    """Convex polygon domain (CCW vertices); one segment label per edge."""

    vertices: np.ndarray
    segments: list | None = None

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float)
        if _polygon_area(verts) < 0:
            verts = verts[::-1]
        object.__setattr__(self, "vertices", verts)
        segs = self.segments
        if segs is None:
            segs = [f"edge{i}" for i in range(len(verts))]
        object.__setattr__(self, "segments", list(segs))

    @property
    def dim(self) -> int:
        return 2

    @property
    def measure(self) -> float:
        return _polygon_area(self.vertices)

    @property
    def diameter(self) -> float:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def contains(self, x, tol=0.0) -> bool:
        v = self.vertices
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            e = b - a
            n = np.array([e[1], -e[0]])  # outward for CCW
            if float(n @ (np.asarray(x) - a)) > tol * np.linalg.norm(e):
                return False
        return True


def regular_polygon(center, radius, n_sides=64, segment="boundary") -> PolygonDomain:
    """CCW regular polygon approximating a circle; single boundary segment."""
    ang = 2 * np.pi * (np.arange(n_sides) + 0.5) / n_sides
    verts = np.asarray(center) + radius * np.column_stack([np.cos(ang), np.sin(ang)])
    return PolygonDomain(verts, [segment] * n_sides)


# ---------------------------------------------------------------------------
# small geometric helpers
# ---------------------------------------------------------------------------

def _polygon_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _polygon_centroid(verts: np.ndarray):
    x, y = verts[:, 0], verts[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    area = 0.5 * float(np.sum(cross))
    if abs(area) < 1e-300:
        return verts.mean(axis=0), 0.0
    cx = float(np.sum((x + np.roll(x, -1)) * cross)) / (6 * area)
    cy = float(np.sum((y + np.roll(y, -1)) * cross)) / (6 * area)
    return np.array([cx, cy]), abs(area)


def _polyhedron_measure_centroid(verts: np.ndarray, facets):
    """Volume and centroid of a convex polyhedron given CCW-outward facets."""
    ref = verts.mean(axis=0)
    vol = 0.0
    cent = np.zeros(3)
    for facet in facets:
        fv = verts[list(facet)]
        for k in range(1, len(fv) - 1):
            a, b, c = fv[0] - ref, fv[k] - ref, fv[k + 1] - ref
            v6 = float(np.dot(a, np.cross(b, c)))
            vol += v6 / 6.0
            cent += v6 / 6.0 * (ref + (a + b + c) / 4.0)
    if vol <= 0:
        return abs(vol), ref
    return vol, cent / vol


def _facet_normal_area(fverts: np.ndarray):
    """Unit normal (Newell) and area of a planar facet in 3D."""
    n = np.zeros(3)
    for i in range(len(fverts)):
        a = fverts[i]
        b = fverts[(i + 1) % len(fverts)]
        n += np.cross(a, b)
    area = 0.5 * np.linalg.norm(n)
    if area < 1e-300:
        return np.array([0.0, 0.0, 1.0]), 0.0
    return n / np.linalg.norm(n), float(area)


def _point_plane_distance(p: np.ndarray, face: Face, vertices: np.ndarray) -> float:
    mid = face.midpoint(vertices)
    return abs(float(face.normal @ (p - mid)))


def _segment_normal(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    e = b - a
    n = np.array([e[1], -e[0]])
    return n / np.linalg.norm(n)


def segments_cross(p0, p1, q0, q1, tol=1e-12) -> bool:
    """Proper intersection test between open segments p0-p1 and q0-q1."""
    p0, p1, q0, q1 = (np.asarray(v, dtype=float) for v in (p0, p1, q0, q1))
    d1, d2 = p1 - p0, q1 - q0
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(denom) < tol:
        return False
    r = q0 - p0
    t = (r[0] * d2[1] - r[1] * d2[0]) / denom
    s = (r[0] * d1[1] - r[1] * d1[0]) / denom
    return (tol < t < 1 - tol) and (tol < s < 1 - tol)


# ---------------------------------------------------------------------------
# structured partitions
# ---------------------------------------------------------------------------

def build_structured_partition(domain: Box, counts, cell_kind: str = "quad"):
    """Uniform grid partition with hosted points at cell centroids.

    ``counts`` gives the number of cells per axis; ``cell_kind`` is one of
    ``quad``/``tri`` (2D) or ``hex``/``tet`` (3D).
    """
    counts = tuple(int(c) for c in np.atleast_1d(counts))
    if len(counts) == 1:
        counts = counts * domain.dim
    if any(c < 1 for c in counts):
        raise ValueError("counts must be >= 1 per axis")
    if domain.measure <= 0:
        raise DegenerateCell("empty domain")
    if domain.dim == 2:
        if cell_kind not in ("quad", "tri"):
            raise UnsupportedElementType(cell_kind)
        return _structured_2d(domain, counts, cell_kind)
    if cell_kind not in ("hex", "tet"):
        raise UnsupportedElementType(cell_kind)
    return _structured_3d(domain, counts, cell_kind)


def _structured_2d(domain: Box, counts, cell_kind):
    nx, ny = counts
    lo = np.asarray(domain.lo, dtype=float)
    hi = np.asarray(domain.hi, dtype=float)
    xs = np.linspace(lo[0], hi[0], nx + 1)
    ys = np.linspace(lo[1], hi[1], ny + 1)
    vid = lambda i, j: j * (nx + 1) + i
    verts = np.array([[x, y] for y in ys for x in xs])

    elements = []
    for j in range(ny):
        for i in range(nx):
            q = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1))
            if cell_kind == "quad":
                elements.append(("quad", q))
            else:
                elements.append(("tri", (q[0], q[1], q[2])))
                elements.append(("tri", (q[0], q[2], q[3])))
    segment_of = _box_segment_namer(domain)
    return _partition_from_elements(2, verts, elements, segment_of, domain.measure)


def _structured_3d(domain: Box, counts, cell_kind):
    nx, ny, nz = counts
    lo = np.asarray(domain.lo, dtype=float)
    hi = np.asarray(domain.hi, dtype=float)
    xs = np.linspace(lo[0], hi[0], nx + 1)
    ys = np.linspace(lo[1], hi[1], ny + 1)
    zs = np.linspace(lo[2], hi[2], nz + 1)
    vid = lambda i, j, k: (k * (ny + 1) + j) * (nx + 1) + i
    verts = np.array([[x, y, z] for z in zs for y in ys for x in xs])

    elements = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                h = (vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k),
                     vid(i, j + 1, k), vid(i, j, k + 1), vid(i + 1, j, k + 1),
                     vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1))
                if cell_kind == "hex":
                    elements.append(("hex", h))
                else:
                    # six tets around the main diagonal h[0]-h[6]
                    for tet in ((0, 1, 2, 6), (0, 2, 3, 6), (0, 3, 7, 6),
                                (0, 7, 4, 6), (0, 4, 5, 6), (0, 5, 1, 6)):
                        elements.append(("tet", tuple(h[t] for t in tet)))
    segment_of = _box_segment_namer(domain)
    return _partition_from_elements(3, verts, elements, segment_of, domain.measure)


def _box_segment_namer(domain: Box):
    lo = np.asarray(domain.lo, dtype=float)
    hi = np.asarray(domain.hi, dtype=float)
    tol = 1e-9 * domain.diameter
    names = ["xmin", "xmax", "ymin", "ymax", "zmin", "zmax"]

    def segment_of(mid):
        for ax in range(len(lo)):
            if abs(mid[ax] - lo[ax]) < tol:
                return names[2 * ax]
            if abs(mid[ax] - hi[ax]) < tol:
                return names[2 * ax + 1]
        return "boundary"

    return segment_of


_FACET_TEMPLATES = {
    "tri": ((0, 1), (1, 2), (2, 0)),
    "quad": ((0, 1), (1, 2), (2, 3), (3, 0)),
    "tet": ((0, 2, 1), (0, 1, 3), (1, 2, 3), (0, 3, 2)),
    "hex": ((0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4),
            (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7)),
}


def _element_geometry(dim, verts, kind, conn):
    pts = verts[list(conn)]
    if dim == 2:
        centroid, area = _polygon_centroid(pts)
        return centroid, area
    vol, centroid = _polyhedron_measure_centroid(pts, _FACET_TEMPLATES[kind])
    return centroid, vol


def _partition_from_elements(dim, verts, elements, segment_of, domain_measure):
    """Shared cell/face extraction for structured grids and imported meshes."""
    cells = []
    points = []
    for cid, (kind, conn) in enumerate(elements):
        centroid, measure = _element_geometry(dim, verts, kind, conn)
        if measure <= 0:
            raise DegenerateCell(f"element {cid} has non-positive measure")
        cells.append(Cell(cid, tuple(conn), centroid, measure, cid, kind))
        points.append(centroid)
    cloud = PointCloud(np.asarray(points))

    # facet registry: sorted vertex tuple -> list of (cell id, oriented verts)
    registry = {}
    for c in cells:
        for tmpl in _FACET_TEMPLATES[c.kind]:
            fverts = tuple(c.vertices[t] for t in tmpl)
            registry.setdefault(tuple(sorted(fverts)), []).append((c.id, fverts))

    faces = []
    pending_external = []
    internal_h = []
    for key, entries in registry.items():
        if len(entries) > 2:
            raise DegenerateCell(f"facet {key} shared by {len(entries)} cells")
        cid, fverts = entries[0]
        fv = verts[list(fverts)]
        if dim == 2:
            normal = _segment_normal(fv[0], fv[1])
            area = float(np.linalg.norm(fv[1] - fv[0]))
        else:
            normal, area = _facet_normal_area(fv)
        mid = fv.mean(axis=0)
        # orient outward from the first cell
        if float(normal @ (mid - cells[cid].centroid)) < 0:
            normal = -normal
        if len(entries) == 2:
            other = entries[1][0]
            h_e = float(np.linalg.norm(cloud.points[other] - cloud.points[cid]))
            faces.append(Face(len(faces), fverts, normal, area, h_e,
                              left=cid, right=other))
            internal_h.append(h_e)
        else:
            pending_external.append((fverts, normal, area, cid, mid))

    floor = 1e-3 * (np.mean(internal_h) if internal_h else 1.0)
    for fverts, normal, area, cid, mid in pending_external:
        h_e = max(abs(float(normal @ (cloud.points[cid] - mid))), floor)
        faces.append(Face(len(faces), fverts, normal, area, h_e,
                          left=cid, right=None,
                          segment=segment_of(mid), kind=EXTERNAL))

    part = Partition(dim, cloud, np.asarray(verts, dtype=float), cells, faces,
                     domain_measure)
    part.validate()
    return cloud, part


# ---------------------------------------------------------------------------
# Voronoi partitions
# ---------------------------------------------------------------------------

def _jitter(points: np.ndarray, scale: float) -> np.ndarray:
    """Deterministic per-id perturbation used only for bisector construction."""
    out = points.copy()
    for i in range(len(points)):
        rng = np.random.default_rng(i + 12345)
        out[i] = points[i] + scale * (rng.random(points.shape[1]) - 0.5)
    return out


def build_voronoi_partition(cloud: PointCloud, domain) -> Partition:
    """Voronoi cells clipped to the domain; each cell hosts its generator.

    2D accepts any convex :class:`PolygonDomain` (or :class:`Box`); 3D is
    restricted to boxes. Equidistant ties are broken by a deterministic
    1e-12-of-diameter jitter applied to the bisector construction only.
    """
    pts = cloud.points
    if isinstance(domain, Box) and domain.dim == 2:
        domain = domain.as_polygon()
    diam = domain.diameter
    tree = cKDTree(pts)
    if cloud.n > 1:
        d, _ = tree.query(pts, k=2)
        if float(d[:, 1].min()) <= 1e-12 * diam:
            raise DuplicatePoints("points closer than 1e-12 x domain diameter")
    for i, p in enumerate(pts):
        if not domain.contains(p, tol=-1e-12):
            raise PointOutsideDomain(f"point {i} at {p} not strictly inside domain")

    if cloud.dim == 2:
        return _voronoi_2d(cloud, domain, diam)
    if not isinstance(domain, Box):
        raise ValueError("3D Voronoi partitions require a Box domain")
    return _voronoi_3d(cloud, domain, diam)


def _voronoi_2d(cloud: PointCloud, domain: PolygonDomain, diam: float) -> Partition:
    pts = cloud.points
    n = cloud.n
    jpts = _jitter(pts, 1e-12 * diam)
    order = np.argsort(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2),
                       axis=1) if n <= 2000 else None
    tree = cKDTree(pts)

    dverts = domain.vertices
    base_poly = [(dverts[i].copy(), ("seg", domain.segments[i]))
                 for i in range(len(dverts))]
    drop_tol = 1e-9 * diam

    cell_polys = []
    for i in range(n):
        poly = list(base_poly)
        if order is not None:
            near = order[i][1:]
        else:
            near = tree.query(pts[i], k=min(n, 64))[1]
            near = [j for j in near if j != i]
        seen = set()
        exhaustive = order is not None
        js = list(near) if exhaustive else list(near) + [j for j in range(n) if j != i]
        for j in js:
            if j in seen:
                continue
            seen.add(j)
            rmax = max(np.linalg.norm(np.asarray(v) - pts[i]) for v, _ in poly)
            if 0.5 * np.linalg.norm(pts[j] - pts[i]) > rmax + drop_tol:
                if exhaustive:
                    break  # sorted by distance: no further bisector can cut
                continue
            d = jpts[j] - jpts[i]
            nn = d / np.linalg.norm(d)
            m = 0.5 * (jpts[i] + jpts[j])
            poly = _clip_polygon(poly, nn, float(nn @ m), ("bis", j))
            if len(poly) < 3:
                raise DegenerateCell(f"Voronoi cell {i} clipped away")
        poly = _drop_short_edges(poly, drop_tol)
        if len(poly) < 3:
            raise DegenerateCell(f"Voronoi cell {i} degenerate after cleanup")
        cell_polys.append(poly)

    return _voronoi_cells_to_partition_2d(cloud, domain, cell_polys, diam)


def _clip_polygon(poly, n, b, tag):
    """Sutherland-Hodgman clip of tagged polygon against n.x <= b.

    Each polygon entry is (vertex, tag-of-outgoing-edge). A vertex cut on the
    way out starts the edge that runs along the clip line (the new tag); a
    vertex cut on the way in resumes the original edge.
    """
    out = []
    k = len(poly)
    for idx in range(k):
        v0, t0 = poly[idx]
        v1, _ = poly[(idx + 1) % k]
        s0 = float(n @ v0) - b
        s1 = float(n @ v1) - b
        in0, in1 = s0 <= 0, s1 <= 0
        if in0:
            out.append((v0, t0))
        if in0 != in1:
            t = s0 / (s0 - s1)
            x = v0 + t * (v1 - v0)
            out.append((x, tag if in0 else t0))
    return out


def _drop_short_edges(poly, tol):
    changed = True
    while changed and len(poly) > 2:
        changed = False
        for idx in range(len(poly)):
            nxt = (idx + 1) % len(poly)
            v0, _ = poly[idx]
            v1, t1 = poly[nxt]
            if np.linalg.norm(v1 - v0) < tol:
                # merge endpoints: the surviving edge is the removed vertex's
                poly[idx] = (v0, t1)
                del poly[nxt]
                changed = True
                break
    return poly


def _voronoi_cells_to_partition_2d(cloud, domain, cell_polys, diam):
    pts = cloud.points
    vert_pool = []
    vert_index = {}

    def add_vertex(v):
        key = (round(float(v[0]) / (1e-9 * diam)), round(float(v[1]) / (1e-9 * diam)))
        if key not in vert_index:
            vert_index[key] = len(vert_pool)
            vert_pool.append(np.asarray(v, dtype=float))
        return vert_index[key]

    cells = []
    edge_map = {}  # (i, j) -> (vid0, vid1, length)
    external = []  # (cell, vid0, vid1, segment)
    for i, poly in enumerate(cell_polys):
        ids = [add_vertex(v) for v, _ in poly]
        ring = np.array([vert_pool[k] for k in ids])
        centroid, area = _polygon_centroid(ring)
        if area <= 0:
            raise DegenerateCell(f"Voronoi cell {i} has non-positive area")
        cells.append(Cell(i, tuple(ids), centroid, area, i, "polygon"))
        for idx in range(len(poly)):
            tag = poly[idx][1]
            a = ids[idx]
            b = ids[(idx + 1) % len(poly)]
            if tag[0] == "bis":
                j = tag[1]
                key = (min(i, j), max(i, j))
                if key not in edge_map:
                    edge_map[key] = (a, b)
            else:
                external.append((i, a, b, tag[1]))

    verts = np.asarray(vert_pool)
    faces = []
    internal_h = []
    for (i, j), (a, b) in sorted(edge_map.items()):
        d = pts[j] - pts[i]
        h_e = float(np.linalg.norm(d))
        normal = d / h_e
        area = float(np.linalg.norm(verts[b] - verts[a]))
        faces.append(Face(len(faces), (a, b), normal, area, h_e, left=i, right=j))
        internal_h.append(h_e)
    floor = 1e-3 * (np.mean(internal_h) if internal_h else diam)
    for i, a, b, seg in external:
        fv = verts[[a, b]]
        normal = _segment_normal(fv[0], fv[1])
        mid = fv.mean(axis=0)
        if float(normal @ (mid - cells[i].centroid)) < 0:
            normal = -normal
        area = float(np.linalg.norm(fv[1] - fv[0]))
        h_e = max(abs(float(normal @ (pts[i] - mid))), floor)
        faces.append(Face(len(faces), (a, b), normal, area, h_e,
                          left=i, right=None, segment=seg, kind=EXTERNAL))

    part = Partition(2, cloud, verts, cells, faces, domain.measure)
    part.validate()
    return part


def _voronoi_3d(cloud: PointCloud, domain: Box, diam: float) -> Partition:
    from scipy.spatial import HalfspaceIntersection

    pts = cloud.points
    n = cloud.n
    jpts = _jitter(pts, 1e-12 * diam)
    lo = np.asarray(domain.lo, dtype=float)
    hi = np.asarray(domain.hi, dtype=float)
    segment_of = _box_segment_namer(domain)
    tree = cKDTree(pts)

    # box half-spaces A x + b <= 0, tagged with their segment name
    box_hs = []
    for ax in range(3):
        e = np.zeros(3)
        e[ax] = 1.0
        box_hs.append((np.append(-e, lo[ax]), ("seg", segment_of(_axis_point(lo, hi, ax, lo[ax])))))
        box_hs.append((np.append(e, -hi[ax]), ("seg", segment_of(_axis_point(lo, hi, ax, hi[ax])))))

    vert_pool = []
    vert_index = {}

    def add_vertex(v):
        key = tuple(round(float(c) / (1e-9 * diam)) for c in v)
        if key not in vert_index:
            vert_index[key] = len(vert_pool)
            vert_pool.append(np.asarray(v, dtype=float))
        return vert_index[key]

    cells = []
    face_geo = {}  # (i, j) -> (vid tuple, area)
    external = []
    tol = 1e-9 * diam
    for i in range(n):
        k = min(n, 33)
        while True:
            dists, idx = tree.query(pts[i], k=k)
            idx = np.atleast_1d(idx)
            neigh = [j for j in idx if j != i]
            hs = list(box_hs)
            for j in neigh:
                d = jpts[j] - jpts[i]
                nn = d / np.linalg.norm(d)
                m = 0.5 * (jpts[i] + jpts[j])
                hs.append((np.append(nn, -float(nn @ m)), ("bis", j)))
            arr = np.array([h[0] for h in hs])
            inter = HalfspaceIntersection(arr, pts[i].copy())
            verts_i = inter.intersections
            rmax = float(np.max(np.linalg.norm(verts_i - pts[i], axis=1)))
            # all candidate bisectors farther than 2 rmax cannot cut
            if k >= n or np.max(dists) > 2 * rmax + tol:
                break
            k = min(n, k * 2)

        # group vertices per half-space
        facet_ids = []
        for coef, tag in hs:
            s = verts_i @ coef[:3] + coef[3]
            sel = np.where(np.abs(s) < tol)[0]
            if len(sel) < 3:
                continue
            fverts = _order_facet(verts_i[sel], coef[:3])
            ids = tuple(dict.fromkeys(add_vertex(v) for v in fverts))
            if len(ids) < 3:
                continue
            facet_ids.append((tag, ids))

        cell_vids = tuple(dict.fromkeys(v for _, ids in facet_ids for v in ids))
        local = {v: k for k, v in enumerate(cell_vids)}
        local_facets = [[local[v] for v in ids] for _, ids in facet_ids]
        cell_verts = np.array([vert_pool[v] for v in cell_vids])
        # orient facets outward for the volume formula
        oriented = []
        cc = cell_verts.mean(axis=0)
        for f in local_facets:
            nrm, _ = _facet_normal_area(cell_verts[f])
            mid = cell_verts[f].mean(axis=0)
            oriented.append(f if float(nrm @ (mid - cc)) >= 0 else f[::-1])
        vol, centroid = _polyhedron_measure_centroid(cell_verts, oriented)
        if vol <= 0:
            raise DegenerateCell(f"Voronoi cell {i} has non-positive volume")
        cells.append(Cell(i, cell_vids, centroid, vol, i, "polygon"))

        for tag, ids in facet_ids:
            if tag[0] == "bis":
                j = tag[1]
                key = (min(i, j), max(i, j))
                if key not in face_geo:
                    fv = np.array([vert_pool[v] for v in ids])
                    _, area = _facet_normal_area(fv)
                    if area > tol * tol:
                        face_geo[key] = (ids, area)
            else:
                fv = np.array([vert_pool[v] for v in ids])
                _, area = _facet_normal_area(fv)
                if area > tol * tol:
                    external.append((i, ids, area, tag[1]))

    verts = np.asarray(vert_pool)
    faces = []
    internal_h = []
    for (i, j), (ids, area) in sorted(face_geo.items()):
        d = pts[j] - pts[i]
        h_e = float(np.linalg.norm(d))
        faces.append(Face(len(faces), ids, d / h_e, area, h_e, left=i, right=j))
        internal_h.append(h_e)
    floor = 1e-3 * (np.mean(internal_h) if internal_h else diam)
    for i, ids, area, seg in external:
        fv = verts[list(ids)]
        normal, _ = _facet_normal_area(fv)
        mid = fv.mean(axis=0)
        if float(normal @ (mid - cells[i].centroid)) < 0:
            normal = -normal
        h_e = max(abs(float(normal @ (pts[i] - mid))), floor)
        faces.append(Face(len(faces), ids, normal, area, h_e,
                          left=i, right=None, segment=seg, kind=EXTERNAL))

    part = Partition(3, cloud, verts, cells, faces, domain.measure)
    part.validate()
    return part


def _axis_point(lo, hi, ax, val):
    mid = 0.5 * (lo + hi)
    mid = mid.copy()
    mid[ax] = val
    return mid


def _order_facet(fverts: np.ndarray, normal: np.ndarray) -> np.ndarray:
    c = fverts.mean(axis=0)
    a = np.zeros(3)
    a[int(np.argmin(np.abs(normal)))] = 1.0
    u = np.cross(normal, a)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    ang = np.arctan2((fverts - c) @ v, (fverts - c) @ u)
    return fverts[np.argsort(ang)]


# ---------------------------------------------------------------------------
# mesh import
# ---------------------------------------------------------------------------

_MESH_TYPES = {"tri": (3, "tri"), "quad": (4, "quad"),
               "tet": (4, "tet"), "hex": (8, "hex")}


def import_mesh(path):
    """Read the plain-text mesh format and convert it to an FPM partition.

    Format (whitespace separated, ``#`` comments)::

        dim <2|3>
        nodes <n>
        <id> <x> <y> [z]          # n lines
        elements <m>
        <id> <type(count)> <v1> <v2> ...
        boundary <k>              # optional
        <segment-id> <v1> <v2> [...] <kind D|N|R|S>

    Hosted points are placed at element centroids. Boundary lines label the
    external face whose vertex set matches; unlisted external faces get the
    segment id ``"unassigned"``.
    """
    lines = _read_mesh_lines(path)
    pos = 0

    def expect(keyword):
        nonlocal pos
        if pos >= len(lines):
            raise ParseError(f"unexpected end of file, expected '{keyword}'",
                             line=lines[-1][0] if lines else 0)
        lineno, toks = lines[pos]
        if toks[0].lower() != keyword:
            raise ParseError(f"expected '{keyword}', got '{toks[0]}'",
                             line=lineno, column=1)
        pos += 1
        return lineno, toks

    lineno, toks = expect("dim")
    dim = _parse_int(toks, 1, lineno)
    if dim not in (2, 3):
        raise ParseError(f"dim must be 2 or 3, got {dim}", line=lineno, column=2)

    lineno, toks = expect("nodes")
    n_nodes = _parse_int(toks, 1, lineno)
    verts = np.zeros((n_nodes, dim))
    seen = np.zeros(n_nodes, dtype=bool)
    for _ in range(n_nodes):
        if pos >= len(lines):
            raise ParseError("missing node lines", line=lines[-1][0])
        lineno, toks = lines[pos]
        pos += 1
        nid = _parse_int(toks, 0, lineno)
        if not (0 <= nid < n_nodes):
            raise ParseError(f"node id {nid} out of range", line=lineno, column=1)
        if len(toks) != 1 + dim:
            raise ParseError(f"expected {dim} coordinates", line=lineno,
                             column=len(toks))
        verts[nid] = [_parse_float(toks, 1 + a, lineno) for a in range(dim)]
        seen[nid] = True
    if not seen.all():
        raise ParseError("node ids are not dense 0..n-1", line=lineno)

    lineno, toks = expect("elements")
    n_elem = _parse_int(toks, 1, lineno)
    elements = [None] * n_elem
    for _ in range(n_elem):
        if pos >= len(lines):
            raise ParseError("missing element lines", line=lines[-1][0])
        lineno, toks = lines[pos]
        pos += 1
        eid = _parse_int(toks, 0, lineno)
        if not (0 <= eid < n_elem):
            raise ParseError(f"element id {eid} out of range", line=lineno, column=1)
        etype = toks[1].lower()
        base = etype.split("(")[0]
        if base not in _MESH_TYPES:
            raise UnsupportedElementType(f"element type '{toks[1]}' (line {lineno})")
        count, kind = _MESH_TYPES[base]
        if (kind in ("tri", "quad") and dim != 2) or (kind in ("tet", "hex") and dim != 3):
            raise UnsupportedElementType(
                f"element type '{base}' invalid in {dim}D (line {lineno})")
        if len(toks) != 2 + count:
            raise ParseError(f"element type {base} needs {count} vertices",
                             line=lineno, column=len(toks))
        conn = tuple(_parse_int(toks, 2 + a, lineno) for a in range(count))
        for col, v in enumerate(conn):
            if not (0 <= v < n_nodes):
                raise ParseError(f"element {eid} references missing node {v}",
                                 line=lineno, column=3 + col)
        elements[eid] = (kind, _fix_orientation(dim, verts, kind, conn, lineno))

    boundary = []
    if pos < len(lines):
        lineno, toks = expect("boundary")
        n_bnd = _parse_int(toks, 1, lineno)
        for _ in range(n_bnd):
            if pos >= len(lines):
                raise ParseError("missing boundary lines", line=lines[-1][0])
            lineno, toks = lines[pos]
            pos += 1
            if len(toks) < (4 if dim == 2 else 5):
                raise ParseError("boundary line too short", line=lineno)
            seg = toks[0]
            kind_tok = toks[-1].upper()
            kinds = {"D": "Dirichlet", "N": "Neumann", "R": "Robin", "S": "Symmetric"}
            if kind_tok not in kinds:
                raise ParseError(f"unknown bc kind '{toks[-1]}'", line=lineno,
                                 column=len(toks))
            fverts = tuple(_parse_int(toks, a, lineno) for a in range(1, len(toks) - 1))
            boundary.append((seg, frozenset(fverts), kinds[kind_tok]))

    segments = {key: (seg, kind) for seg, key, kind in boundary}

    def segment_of(mid):
        return "unassigned"

    cloud, part = _partition_from_elements(dim, verts, elements, segment_of, None)
    for f in part.faces:
        if f.right is None:
            hit = segments.get(frozenset(f.vertices))
            if hit is not None:
                f.segment, f.kind = hit[0], hit[1]
    return cloud, part


def _fix_orientation(dim, verts, kind, conn, lineno):
    if kind == "tri":
        if _polygon_area(verts[list(conn)]) < 0:
            conn = conn[::-1]
    elif kind == "quad":
        if _polygon_area(verts[list(conn)]) < 0:
            conn = conn[::-1]
    elif kind == "tet":
        a, b, c, d = (verts[v] for v in conn)
        if float(np.dot(np.cross(b - a, c - a), d - a)) < 0:
            conn = (conn[0], conn[2], conn[1], conn[3])
    return conn


def _read_mesh_lines(path):
    out = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                body = raw.split("#", 1)[0].strip()
                if body:
                    out.append((lineno, body.split()))
    except OSError as exc:
        raise ParseError(f"cannot read mesh file: {exc}") from exc
    if not out:
        raise ParseError("empty mesh file", line=1)
    return out


def _parse_int(toks, idx, lineno):
    try:
        return int(toks[idx])
    except (ValueError, IndexError):
        raise ParseError(f"expected integer at token {idx + 1}",
                         line=lineno, column=idx + 1) from None


def _parse_float(toks, idx, lineno):
    try:
        return float(toks[idx])
    except (ValueError, IndexError):
        raise ParseError(f"expected number at token {idx + 1}",
                         line=lineno, column=idx + 1) from None


# ---------------------------------------------------------------------------
# supports
# ---------------------------------------------------------------------------

def compute_supports(partition: Partition, need_second_ring: bool = False,
                     min_m: int | None = None, pair_filter=None) -> SupportSet:
    """First ring from face adjacency; augmented rings for quadratic operators.

    With ``need_second_ring``, any point whose ring is shorter than
    ``min_m`` (default dim(D)+1) is augmented with neighbours-of-neighbours,
    ring by ring, until the minimum is met. ``pair_filter(i, j) -> bool``
    restricts adjacency (used to keep stencils from crossing material
    interfaces).
    """
    if min_m is None:
        min_m = DIM_D[partition.dim] + 1
    adj = {c.point: set() for c in partition.cells}
    for f in partition.faces:
        if f.is_internal:
            pi = partition.cells[f.left].point
            pj = partition.cells[f.right].point
            if pair_filter is not None and not pair_filter(pi, pj):
                continue
            adj[pi].add(pj)
            adj[pj].add(pi)

    ring1 = {i: tuple(sorted(s)) for i, s in adj.items()}
    ring2 = {i: () for i in adj}
    target = min_m if need_second_ring else partition.dim
    for i in adj:
        if len(ring1[i]) < target:
            known = set(ring1[i]) | {i}
            frontier = set(ring1[i])
            extra = []
            while len(ring1[i]) + len(extra) < target:
                nxt = set()
                for j in frontier:
                    nxt |= adj[j]
                nxt -= known
                if not nxt:
                    raise InsufficientSupport(
                        f"point {i}: only {len(ring1[i]) + len(extra)} supports "
                        f"available, {target} required")
                extra.extend(sorted(nxt))
                known |= nxt
                frontier = nxt
            ring2[i] = tuple(extra)
        if len(ring1[i]) + len(ring2[i]) < partition.dim:
            raise InsufficientSupport(
                f"point {i} has fewer than {partition.dim} supports")

    supports = SupportSet(ring1, ring2)
    _filter_crack_pairs(partition, supports)
    return supports


def _filter_crack_pairs(partition: Partition, supports: SupportSet):
    if not partition.cracks or partition.dim != 2:
        return
    pts = partition.cloud.points
    for i in list(supports.ring1):
        for j in supports.neighbors(i):
            if j <= i:
                continue
            for (p0, p1) in partition.cracks:
                if segments_cross(pts[i], pts[j], p0, p1):
                    supports.drop_pair(i, j)
                    break


# ---------------------------------------------------------------------------
# cracks
# ---------------------------------------------------------------------------

def insert_crack(partition: Partition, supports: SupportSet, crack):
    """Break internal faces lying on a crack segment (2D).

    Matched faces are replaced by two external faces of kind ``crack``
    (zero-flux Neumann in the weak forms) and the two hosting points are
    removed from each other's supports. Returns new (partition, supports).
    """
    if partition.dim != 2:
        raise NotImplementedError("crack insertion is implemented in 2D only")
    p0 = np.asarray(crack[0], dtype=float)
    p1 = np.asarray(crack[1], dtype=float)
    tol = 1e-9 * partition.diameter
    d = p1 - p0
    length = np.linalg.norm(d)
    if length <= 0:
        raise CrackMissesFaces("crack segment has zero length")
    d = d / length

    def on_crack(x):
        r = x - p0
        t = float(r @ d)
        off = abs(float(r[0] * d[1] - r[1] * d[0]))
        return off <= tol and -tol <= t <= length + tol

    new_faces = []
    broken = []
    floor = 1e-3 * partition.mean_internal_h()
    for f in partition.faces:
        if f.is_internal and on_crack(f.midpoint(partition.vertices)):
            broken.append(f)
        else:
            new_faces.append(replace(f))
    if not broken:
        raise CrackMissesFaces("no internal face lies on the crack locus")

    pts = partition.cloud.points
    ring1 = dict(supports.ring1)
    ring2 = dict(supports.ring2)
    new_supports = SupportSet(ring1, ring2)
    for f in broken:
        for cid, sign in ((f.left, 1.0), (f.right, -1.0)):
            host = pts[partition.cells[cid].point]
            mid = f.midpoint(partition.vertices)
            h_e = max(abs(float(f.normal @ (host - mid))), floor)
            new_faces.append(Face(0, f.vertices, sign * f.normal, f.area, h_e,
                                  left=cid, right=None, segment=CRACK, kind=CRACK))
        new_supports.drop_pair(partition.cells[f.left].point,
                               partition.cells[f.right].point)
    for fid, f in enumerate(new_faces):
        f.id = fid

    cracks = list(partition.cracks) + [(p0, p1)]
    out = partition.with_faces(new_faces, cracks)
    _filter_crack_pairs(out, new_supports)
    return out, new_supports


# ---------------------------------------------------------------------------
# point layouts used by the benchmarks
# ---------------------------------------------------------------------------

def sunflower_disc_points(n: int, radius: float = 1.0, center=(0.0, 0.0),
                          fill: float = 0.998) -> PointCloud:
    """Quasi-uniform golden-angle layout inside a disc."""
    i = np.arange(n) + 0.5
    r = radius * fill * math.cos(math.pi / 64) * np.sqrt(i / n)
    th = i * math.pi * (3.0 - math.sqrt(5.0))
    pts = np.asarray(center) + np.column_stack([r * np.cos(th), r * np.sin(th)])
    return PointCloud(pts)


def build_disc_partition(n_rings: int, n_sectors: int, radius: float = 1.0,
                         center=(0.0, 0.0), segment: str = "boundary"):
    """Mixed quad/tri partition of a disc: annular sectors with near-equal
    areas (triangles in the innermost ring), hosted points at centroids.

    The curved boundary is the inscribed ``n_sectors``-gon.
    """
    cx, cy = center
    radii = radius * np.sqrt(np.arange(n_rings + 1) / n_rings)
    theta = 2.0 * np.pi * np.arange(n_sectors) / n_sectors

    vert_index = {}
    verts = []

    def vid(i, j):
        j = j % n_sectors
        key = (i, j) if i > 0 else (0, 0)
        if key not in vert_index:
            if i == 0:
                xy = (cx, cy)
            else:
                xy = (cx + radii[i] * math.cos(theta[j]),
                      cy + radii[i] * math.sin(theta[j]))
            vert_index[key] = len(verts)
            verts.append(xy)
        return vert_index[key]

    elements = []
    for i in range(n_rings):
        for j in range(n_sectors):
            if i == 0:
                elements.append(("tri", (vid(0, 0), vid(1, j), vid(1, j + 1))))
            else:
                elements.append(("quad", (vid(i, j), vid(i + 1, j),
                                          vid(i + 1, j + 1), vid(i, j + 1))))
    poly_area = 0.5 * n_sectors * radius ** 2 * math.sin(2 * math.pi / n_sectors)
    return _partition_from_elements(2, np.asarray(verts, dtype=float), elements,
                                    lambda mid: segment, poly_area)


def lloyd_voronoi_partition(cloud: PointCloud, domain, iterations: int = 8
                            ) -> Partition:
    """Voronoi partition after Lloyd relaxation, hosts at exact centroids.

    Each pass moves every generator to its cell centroid; the final
    partition re-hosts the points at the centroids so one-point volume
    rules collocate with the hosted points (diagonal heat-capacity
    matrices for the Galerkin and finite-volume methods).
    """
    part = build_voronoi_partition(cloud, domain)
    for _ in range(iterations):
        centroids = np.array([c.centroid for c in part.cells])
        part = build_voronoi_partition(PointCloud(centroids), domain)
    centroids = np.array([c.centroid for c in part.cells])
    return part.with_points(centroids)


def build_lattice_partition(domain: Box, counts):
    """Partition hosting a boundary-inclusive lattice of points.

    The points form a ``counts``-per-axis lattice spanning the closed box
    (spacing L/(n-1)); the cells are their Voronoi boxes, i.e. a rectilinear
    grid with half-cells along the boundary. Boundary points lie on their
    cells' external faces, so external h_e values sit at the configured
    floor and Dirichlet penalties act essentially pointwise there.
    """
    counts = tuple(int(c) for c in np.atleast_1d(counts))
    if len(counts) == 1:
        counts = counts * domain.dim
    if any(c < 2 for c in counts):
        raise ValueError("lattice needs at least 2 points per axis")
    lo = np.asarray(domain.lo, dtype=float)
    hi = np.asarray(domain.hi, dtype=float)
    axes_nodes = [np.linspace(lo[a], hi[a], counts[a]) for a in range(domain.dim)]
    # Voronoi breakpoints: domain edges plus midpoints between nodes
    axes_cuts = [np.concatenate([[lo[a]], 0.5 * (ax[1:] + ax[:-1]), [hi[a]]])
                 for a, ax in enumerate(axes_nodes)]

    if domain.dim == 2:
        nx, ny = counts
        vid = lambda i, j: j * (nx + 1) + i
        verts = np.array([[x, y] for y in axes_cuts[1] for x in axes_cuts[0]])
        elements = []
        for j in range(ny):
            for i in range(nx):
                elements.append(("quad", (vid(i, j), vid(i + 1, j),
                                          vid(i + 1, j + 1), vid(i, j + 1))))
        grids = np.meshgrid(*axes_nodes, indexing="ij")
        lattice = np.column_stack([g.T.reshape(-1) for g in grids])
    else:
        nx, ny, nz = counts
        vid = lambda i, j, k: (k * (ny + 1) + j) * (nx + 1) + i
        verts = np.array([[x, y, z] for z in axes_cuts[2]
                          for y in axes_cuts[1] for x in axes_cuts[0]])
        elements = []
        for k in range(nz):
            for j in range(ny):
                for i in range(nx):
                    elements.append(("hex", (
                        vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k),
                        vid(i, j + 1, k), vid(i, j, k + 1), vid(i + 1, j, k + 1),
                        vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1))))
        xs, ys, zs = np.meshgrid(*axes_nodes, indexing="ij")
        lattice = np.column_stack([xs.transpose(2, 1, 0).reshape(-1),
                                   ys.transpose(2, 1, 0).reshape(-1),
                                   zs.transpose(2, 1, 0).reshape(-1)])

    segment_of = _box_segment_namer(domain)
    _, part = _partition_from_elements(domain.dim, verts, elements, segment_of,
                                       domain.measure)
    part = part.with_points(lattice)
    return part.cloud, part


def grid_points(domain: Box, counts) -> PointCloud:
    """Cell-center grid layout (the uniform layouts of the benchmarks)."""
    counts = tuple(int(c) for c in np.atleast_1d(counts))
    if len(counts) == 1:
        counts = counts * domain.dim
    lo = np.asarray(domain.lo, dtype=float)
    hi = np.asarray(domain.hi, dtype=float)
    axes = [lo[a] + (hi[a] - lo[a]) * (np.arange(counts[a]) + 0.5) / counts[a]
            for a in range(domain.dim)]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([g.reshape(-1) for g in grids])
    return PointCloud(pts)


def random_points(domain: Box, n: int, seed: int, min_sep_factor: float = 0.55
                  ) -> PointCloud:
    """Seeded random layout with a minimum-separation rejection rule."""
    rng = np.random.default_rng(seed)
    lo = np.asarray(domain.lo, dtype=float)
    hi = np.asarray(domain.hi, dtype=float)
    sep = min_sep_factor * (domain.measure / n) ** (1.0 / domain.dim)
    pts = []
    attempts = 0
    while len(pts) < n:
        attempts += 1
        if attempts > 2000 * n:
            raise DegenerateCell("could not place random points; lower min_sep_factor")
        x = lo + (hi - lo) * rng.random(domain.dim)
        margin = 0.25 * sep
        if np.any(x - lo < margin) or np.any(hi - x < margin):
            continue
        if all(np.linalg.norm(x - p) >= sep for p in pts):
            pts.append(x)
    return PointCloud(np.asarray(pts))
