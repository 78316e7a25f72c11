"""Partition builders, topology invariants, supports and crack insertion.

The Voronoi builder is cross-checked against a brute-force half-plane
clipping oracle that clips the full domain polygon against every bisector
with no pruning or tagging shortcuts.
"""

import numpy as np
import pytest

import fpmheat as f
from fpmheat.errors import (
    CrackMissesFaces,
    DuplicatePoints,
    InsufficientSupport,
    ParseError,
    PointOutsideDomain,
    UnsupportedElementType,
)

UNIT = f.Box((0.0, 0.0), (1.0, 1.0))


# ---------------------------------------------------------------------------
# brute-force Voronoi oracle
# ---------------------------------------------------------------------------

def clip_halfplane(poly, n, b):
    out = []
    for i in range(len(poly)):
        v0, v1 = poly[i], poly[(i + 1) % len(poly)]
        s0, s1 = float(n @ v0) - b, float(n @ v1) - b
        if s0 <= 0:
            out.append(v0)
        if (s0 <= 0) != (s1 <= 0):
            t = s0 / (s0 - s1)
            out.append(v0 + t * (v1 - v0))
    return out


def voronoi_cell_area_oracle(points, i, domain_poly):
    poly = [np.asarray(v, dtype=float) for v in domain_poly]
    for j in range(len(points)):
        if j == i:
            continue
        d = points[j] - points[i]
        n = d / np.linalg.norm(d)
        b = float(n @ (0.5 * (points[i] + points[j])))
        poly = clip_halfplane(poly, n, b)
        if len(poly) < 3:
            return 0.0
    x = np.array([p[0] for p in poly])
    y = np.array([p[1] for p in poly])
    return 0.5 * abs(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


# ---------------------------------------------------------------------------
# Voronoi partitions
# ---------------------------------------------------------------------------

class TestVoronoi:
    def test_four_quadrant_centers(self):
        cloud = f.PointCloud(np.array([[0.25, 0.25], [0.75, 0.25],
                                       [0.25, 0.75], [0.75, 0.75]]))
        part = f.build_voronoi_partition(cloud, UNIT)
        assert len(part.cells) == 4
        for c in part.cells:
            assert c.measure == pytest.approx(0.25, rel=1e-9)
        internal = [fc for fc in part.faces if fc.is_internal]
        assert len(internal) == 4
        for fc in internal:
            assert fc.area == pytest.approx(0.5, rel=1e-6)
            assert fc.h_e == pytest.approx(0.5, rel=1e-12)

    def test_400_uniform_points(self):
        cloud = f.grid_points(UNIT, 20)
        part = f.build_voronoi_partition(cloud, UNIT)
        assert len(part.cells) == 400
        assert part.total_measure == pytest.approx(1.0, rel=1e-9)

    def test_50_random_vs_halfplane_oracle(self):
        cloud = f.random_points(UNIT, 50, seed=11)
        part = f.build_voronoi_partition(cloud, UNIT)
        assert part.total_measure == pytest.approx(1.0, rel=1e-9)
        square = [np.array(v, dtype=float)
                  for v in ((0, 0), (1, 0), (1, 1), (0, 1))]
        for c in part.cells:
            ref = voronoi_cell_area_oracle(cloud.points, c.point, square)
            assert c.measure == pytest.approx(ref, rel=1e-7)

    def test_duplicate_points_rejected(self):
        cloud = f.PointCloud(np.array([[0.5, 0.5], [0.5, 0.5], [0.2, 0.2]]))
        with pytest.raises(DuplicatePoints):
            f.build_voronoi_partition(cloud, UNIT)

    def test_point_outside_domain_rejected(self):
        cloud = f.PointCloud(np.array([[0.5, 0.5], [1.5, 0.5]]))
        with pytest.raises(PointOutsideDomain):
            f.build_voronoi_partition(cloud, UNIT)

    def test_3d_box_voronoi(self):
        box = f.Box((0, 0, 0), (1, 1, 1))
        cloud = f.random_points(box, 25, seed=5)
        part = f.build_voronoi_partition(cloud, box)
        assert part.total_measure == pytest.approx(1.0, rel=1e-9)
        for fc in part.faces:
            if fc.is_internal:
                d = part.host(fc.right) - part.host(fc.left)
                assert float(fc.normal @ d) > 0


# ---------------------------------------------------------------------------
# structured partitions
# ---------------------------------------------------------------------------

class TestStructured:
    def test_2x2_quads(self):
        cloud, part = f.build_structured_partition(UNIT, 2, "quad")
        assert len(part.cells) == 4
        internal = [fc for fc in part.faces if fc.is_internal]
        assert len(internal) == 4
        for fc in internal:
            assert fc.h_e == pytest.approx(0.5, rel=1e-12)

    def test_1000_hexes_cube(self):
        cloud, part = f.build_structured_partition(f.Box((0, 0, 0), (10, 10, 10)),
                                                   10, "hex")
        assert cloud.n == 1000
        assert part.total_measure == pytest.approx(1000.0, rel=1e-9)

    def test_two_triangle_split(self):
        cloud, part = f.build_structured_partition(UNIT, 1, "tri")
        assert len(part.cells) == 2
        internal = [fc for fc in part.faces if fc.is_internal]
        assert len(internal) == 1
        assert internal[0].h_e == pytest.approx(np.sqrt(2.0) / 3.0, rel=1e-12)

    def test_empty_domain_rejected(self):
        with pytest.raises(Exception):
            f.build_structured_partition(f.Box((0.0, 0.0), (0.0, 1.0)), 2, "quad")

    def test_counts_below_one_rejected(self):
        with pytest.raises(ValueError):
            f.build_structured_partition(UNIT, (0, 2), "quad")


# ---------------------------------------------------------------------------
# shared invariants
# ---------------------------------------------------------------------------

def partitions_for_invariants():
    yield f.build_structured_partition(UNIT, 3, "quad")[1]
    yield f.build_structured_partition(UNIT, 2, "tri")[1]
    yield f.build_structured_partition(f.Box((0, 0, 0), (2, 1, 1)), (4, 2, 2), "hex")[1]
    cloud = f.random_points(UNIT, 40, seed=2)
    yield f.build_voronoi_partition(cloud, UNIT)


@pytest.mark.parametrize("part", list(partitions_for_invariants()),
                         ids=["quads", "tris", "hexes", "voronoi"])
class TestPartitionInvariants:
    def test_measure_sum(self, part):
        assert part.total_measure == pytest.approx(part.domain_measure, rel=1e-9)

    def test_normal_orientation(self, part):
        for fc in part.faces:
            assert abs(np.linalg.norm(fc.normal) - 1) < 1e-12
            if fc.is_internal:
                d = part.host(fc.right) - part.host(fc.left)
                assert float(fc.normal @ d) > 0

    def test_internal_h_is_host_distance(self, part):
        for fc in part.faces:
            if fc.is_internal:
                d = np.linalg.norm(part.host(fc.right) - part.host(fc.left))
                assert fc.h_e == d

    def test_face_reference_counts(self, part):
        refs = {}
        for fc in part.faces:
            key = tuple(sorted(fc.vertices))
            refs.setdefault(key, 0)
            refs[key] += 2 if fc.is_internal else 1
        assert all(v in (1, 2) for v in refs.values())

    def test_support_symmetry(self, part):
        sup = f.compute_supports(part)
        for i, ring in sup.ring1.items():
            for j in ring:
                assert i in sup.ring1[j]


# ---------------------------------------------------------------------------
# supports
# ---------------------------------------------------------------------------

class TestSupports:
    def test_interior_first_ring_of_3x3(self):
        _, part = f.build_structured_partition(UNIT, 3, "quad")
        sup = f.compute_supports(part)
        assert sorted(sup.ring1[4]) == [1, 3, 5, 7]
        assert sup.ring2[4] == ()

    def test_corner_augmented_to_minimum(self):
        _, part = f.build_structured_partition(UNIT, 3, "quad")
        sup = f.compute_supports(part, need_second_ring=True)
        assert sup.m(0) >= 6
        # enumerated by hand: ring1 {1,3}; ring2 adds {2,4,6} then {5,7}
        assert sorted(sup.ring1[0]) == [1, 3]
        assert set(sup.ring2[0]) == {2, 4, 5, 6, 7}

    def test_single_cell_insufficient(self):
        _, part = f.build_structured_partition(UNIT, 1, "quad")
        with pytest.raises(InsufficientSupport):
            f.compute_supports(part, need_second_ring=True)


# ---------------------------------------------------------------------------
# mesh import
# ---------------------------------------------------------------------------

SINGLE_QUAD = """
dim 2
nodes 4
0 0 0
1 1 0
2 1 1
3 0 1
elements 1
0 quad(4) 0 1 2 3
boundary 4
bottom 0 1 D
right 1 2 N
top 2 3 D
left 3 0 S
"""


class TestImportMesh:
    def test_single_quad(self, tmp_path):
        p = tmp_path / "one.msh"
        p.write_text(SINGLE_QUAD)
        cloud, part = f.import_mesh(p)
        assert cloud.n == 1
        np.testing.assert_allclose(cloud.points[0], [0.5, 0.5])
        assert len(part.faces) == 4
        kinds = {fc.segment: fc.kind for fc in part.faces}
        assert kinds == {"bottom": "Dirichlet", "right": "Neumann",
                         "top": "Dirichlet", "left": "Symmetric"}

    def test_missing_node_reference(self, tmp_path):
        bad = SINGLE_QUAD.replace("0 quad(4) 0 1 2 3", "0 quad(4) 0 1 2 9")
        p = tmp_path / "bad.msh"
        p.write_text(bad)
        with pytest.raises(ParseError) as err:
            f.import_mesh(p)
        assert err.value.line is not None

    def test_unknown_element_type(self, tmp_path):
        bad = SINGLE_QUAD.replace("quad(4) 0 1 2 3", "pent(5) 0 1 2 3 0")
        p = tmp_path / "bad2.msh"
        p.write_text(bad)
        with pytest.raises(UnsupportedElementType):
            f.import_mesh(p)

    def test_mixed_218_element_mesh(self, tmp_path):
        from fpmheat.harness.meshes import l_shape_mesh_text
        p = tmp_path / "l218.msh"
        p.write_text(l_shape_mesh_text(218))
        cloud, part = f.import_mesh(p)
        assert cloud.n == 218
        kinds = {c.kind for c in part.cells}
        assert kinds == {"quad", "tri"}
        assert part.total_measure == pytest.approx(3.0, rel=1e-9)


# ---------------------------------------------------------------------------
# cracks
# ---------------------------------------------------------------------------

class TestInsertCrack:
    def test_2x2_full_midline(self):
        _, part = f.build_structured_partition(UNIT, 2, "quad")
        sup = f.compute_supports(part)
        part2, sup2 = f.insert_crack(part, sup, ((0.0, 0.5), (1.0, 0.5)))
        crack_faces = [fc for fc in part2.faces if fc.kind == "crack"]
        assert len(crack_faces) == 4  # two broken faces, two sides each
        n_int_before = sum(1 for fc in part.faces if fc.is_internal)
        n_int_after = sum(1 for fc in part2.faces if fc.is_internal)
        assert n_int_before - n_int_after == len(crack_faces) // 2
        # vertical neighbour links severed (cells 0-2 and 1-3)
        assert 2 not in sup2.ring1[0] and 3 not in sup2.ring1[1]
        assert 1 in sup2.ring1[0] and 3 in sup2.ring1[2]

    def test_ex17_quarter_crack_on_100x100(self):
        _, part = f.build_structured_partition(UNIT, 100, "quad")
        sup = f.compute_supports(part)
        part2, sup2 = f.insert_crack(part, sup, ((-0.25, 0.5), (0.25, 0.5)))
        crack_faces = [fc for fc in part2.faces if fc.kind == "crack"]
        # oracle: count internal faces whose midpoint lies in the crack span
        count = 0
        for fc in part.faces:
            if fc.is_internal:
                mid = fc.midpoint(part.vertices)
                if abs(mid[1] - 0.5) < 1e-12 and -0.25 < mid[0] < 0.25:
                    count += 1
        assert count == 25
        assert len(crack_faces) == 2 * count

    def test_crack_outside_domain(self):
        _, part = f.build_structured_partition(UNIT, 2, "quad")
        sup = f.compute_supports(part)
        with pytest.raises(CrackMissesFaces):
            f.insert_crack(part, sup, ((2.0, 2.0), (3.0, 3.0)))

    def test_no_support_pair_crosses_crack(self):
        _, part = f.build_structured_partition(UNIT, 6, "quad")
        sup = f.compute_supports(part)
        crack = ((0.0, 0.5), (0.5, 0.5))
        part2, _ = f.insert_crack(part, sup, crack)
        sup2 = f.compute_supports(part2, need_second_ring=True)
        pts = part2.cloud.points
        from fpmheat.geometry import segments_cross
        for i in range(part2.n_points):
            for j in sup2.neighbors(i):
                assert not segments_cross(pts[i], pts[j], *crack)


class TestDisplacedPoints:
    def test_with_points_keeps_topology(self):
        _, part = f.build_structured_partition(UNIT, 3, "quad")
        rng = np.random.default_rng(0)
        pts = part.cloud.points + 0.05 * (rng.random((9, 2)) - 0.5) / 3
        part2 = part.with_points(pts)
        for fc in part2.faces:
            if fc.is_internal:
                d = np.linalg.norm(part2.host(fc.right) - part2.host(fc.left))
                assert fc.h_e == pytest.approx(d, rel=1e-12)
