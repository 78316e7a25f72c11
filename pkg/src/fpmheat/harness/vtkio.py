"""Legacy-ASCII VTK export of per-cell fields.

One unstructured-grid file per snapshot: cell connectivity from the
partition, the temperature of each hosted point as CELL_DATA, and the
recovered gradient as a CELL_DATA vector array. Float formatting is fixed at
17 significant digits so identical runs produce byte-identical files.
"""

from __future__ import annotations

import numpy as np

from ..errors import FpmError

_CELL_TYPES_2D = {"tri": 5, "quad": 9, "polygon": 7}
_CELL_TYPES_3D = {"tet": 10, "hex": 12}


def _g17(v):
    return format(float(v), ".17g")


def export_field(u, partition, path, gradients=None, name="temperature"):
    """Write the field to ``path``; returns the path.

    ``u`` holds one value per hosted point (ordered by point id);
    ``gradients`` is an optional (n_points, dim) array.
    """
    part = partition
    u = np.asarray(u, dtype=float)
    if u.shape[0] != part.n_points:
        raise FpmError("field length does not match the point count")
    lines = []
    lines.append("# vtk DataFile Version 3.0")
    lines.append("fpmheat field export")
    lines.append("ASCII")
    lines.append("DATASET UNSTRUCTURED_GRID")
    verts = part.vertices
    lines.append(f"POINTS {len(verts)} double")
    for v in verts:
        x, y = v[0], v[1]
        z = v[2] if part.dim == 3 else 0.0
        lines.append(f"{_g17(x)} {_g17(y)} {_g17(z)}")

    size = sum(len(c.vertices) + 1 for c in part.cells)
    lines.append(f"CELLS {len(part.cells)} {size}")
    for c in part.cells:
        lines.append(" ".join([str(len(c.vertices))]
                              + [str(v) for v in c.vertices]))
    lines.append(f"CELL_TYPES {len(part.cells)}")
    table = _CELL_TYPES_2D if part.dim == 2 else _CELL_TYPES_3D
    for c in part.cells:
        lines.append(str(table.get(c.kind, 7 if part.dim == 2 else 42)))

    lines.append(f"CELL_DATA {len(part.cells)}")
    lines.append(f"SCALARS {name} double 1")
    lines.append("LOOKUP_TABLE default")
    for c in part.cells:
        lines.append(_g17(u[c.point]))
    if gradients is not None:
        g = np.asarray(gradients, dtype=float)
        lines.append("VECTORS gradient double")
        for c in part.cells:
            row = g[c.point]
            gz = row[2] if part.dim == 3 else 0.0
            lines.append(f"{_g17(row[0])} {_g17(row[1])} {_g17(gz)}")

    data = "\n".join(lines) + "\n"
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(data)
    except OSError as exc:
        raise FpmError(f"cannot write VTK file {path}: {exc}") from exc
    return path


def read_field(path):
    """Minimal reader for the files this module writes (round-trip checks)."""
    with open(path, "r", encoding="ascii") as fh:
        tokens = fh.read().split("\n")
    it = iter(tokens)
    n_pts = n_cells = None
    points, cells, cell_types, scalars, vectors = [], [], [], [], []
    line = next(it)
    while True:
        try:
            if line.startswith("POINTS"):
                n_pts = int(line.split()[1])
                points = [tuple(map(float, next(it).split()))
                          for _ in range(n_pts)]
            elif line.startswith("CELLS"):
                n_cells = int(line.split()[1])
                for _ in range(n_cells):
                    toks = list(map(int, next(it).split()))
                    cells.append(tuple(toks[1:]))
            elif line.startswith("CELL_TYPES"):
                cell_types = [int(next(it)) for _ in range(n_cells)]
            elif line.startswith("SCALARS"):
                next(it)  # LOOKUP_TABLE
                scalars = [float(next(it)) for _ in range(n_cells)]
            elif line.startswith("VECTORS"):
                vectors = [tuple(map(float, next(it).split()))
                           for _ in range(n_cells)]
            line = next(it)
        except StopIteration:
            break
    return {"points": np.asarray(points), "cells": cells,
            "cell_types": cell_types, "temperature": np.asarray(scalars),
            "gradient": np.asarray(vectors)}
