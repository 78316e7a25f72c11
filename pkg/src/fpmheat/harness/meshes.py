"""Deterministic mesh-file generators for the benchmark catalog.

The L-shaped domain is three unit blocks: [0,2]x[0,1] plus [0,1]x[1,2].
``l_shape_mesh_text`` emits the plain-text mesh format with either a pure
quad grid (432 = 3 x 12^2 cells) or a mixed quad/tri grid (218 cells: 8x8
blocks with 26 quads split into triangle pairs).
"""

from __future__ import annotations

import io


def l_shape_mesh_text(n_elements: int = 218) -> str:
    if n_elements == 218:
        k, n_split = 8, 26
    elif n_elements == 432:
        k, n_split = 12, 0
    else:
        raise ValueError("supported element counts: 218 (mixed), 432 (quads)")
    h = 1.0 / k

    def in_l(i, j):
        return i < k or j < k

    node_id = {}
    coords = []
    for j in range(2 * k + 1):
        for i in range(2 * k + 1):
            x, y = i * h, j * h
            if x <= 1 + 1e-12 or y <= 1 + 1e-12:
                node_id[(i, j)] = len(coords)
                coords.append((x, y))

    cells = [(i, j) for j in range(2 * k) for i in range(2 * k) if in_l(i, j)]
    split = set(cells[:n_split])

    out = io.StringIO()
    out.write("# L-shaped domain, unit blocks\n")
    out.write("dim 2\n")
    out.write(f"nodes {len(coords)}\n")
    for nid, (x, y) in enumerate(coords):
        out.write(f"{nid} {x:.12g} {y:.12g}\n")

    elems = []
    for (i, j) in cells:
        q = (node_id[(i, j)], node_id[(i + 1, j)],
             node_id[(i + 1, j + 1)], node_id[(i, j + 1)])
        if (i, j) in split:
            elems.append(("tri(3)", (q[0], q[1], q[2])))
            elems.append(("tri(3)", (q[0], q[2], q[3])))
        else:
            elems.append(("quad(4)", q))
    out.write(f"elements {len(elems)}\n")
    for eid, (etype, conn) in enumerate(elems):
        out.write(f"{eid} {etype} " + " ".join(str(v) for v in conn) + "\n")

    boundary = []

    def seg(i0, j0, i1, j1, name, kind):
        boundary.append((name, node_id[(i0, j0)], node_id[(i1, j1)], kind))

    for i in range(2 * k):
        seg(i, 0, i + 1, 0, "bottom", "D")
    for i in range(k):
        seg(i, 2 * k, i + 1, 2 * k, "top", "D")
    for j in range(k):
        seg(2 * k, j, 2 * k, j + 1, "right", "N")
    for j in range(2 * k):
        seg(0, j, 0, j + 1, "left", "N")
    for i in range(k, 2 * k):
        seg(i, k, i + 1, k, "notch", "N")
    for j in range(k, 2 * k):
        seg(k, j, k, j + 1, "notch", "N")

    out.write(f"boundary {len(boundary)}\n")
    for name, a, b, kind in boundary:
        out.write(f"{name} {a} {b} {kind}\n")
    return out.getvalue()
