import numpy as np
import pytest

from tessrefine.lattices import UnsupportedDimension, make_lattice
from tessrefine.voronoi import abutting_obtuse_pairs, relevant_vectors, voronoi_cell


def _minimal(vecs):
    n = np.linalg.norm(vecs, axis=1)
    return int(np.sum(n <= n.min() + 1e-9))


def test_relevant_vectors_shells():
    assert len(relevant_vectors(make_lattice("cartesian", 2), shells=1)) == 8
    assert _minimal(relevant_vectors(make_lattice("a", 2), shells=1)) == 6
    assert _minimal(relevant_vectors(make_lattice("d", 3), shells=1)) == 12


def test_cartesian_square():
    c = voronoi_cell(make_lattice("cartesian", 2))
    assert c.num_facets == 4
    assert c.polygon.same_as(type(c.polygon).box(-0.5, -0.5, 0.5, 0.5))
    assert abutting_obtuse_pairs(c) == []


def test_a2_hexagon():
    c = voronoi_cell(make_lattice("a", 2), scale=0.5)
    assert c.num_facets == 6
    e = c.edge_lengths()
    assert np.ptp(e) <= 1e-9
    pairs = abutting_obtuse_pairs(c)
    assert len(pairs) == 6
    assert all(abs(ip - 0.5) <= 1e-9 for _, ip in pairs)


def test_d3_rhombic_dodecahedron():
    c = voronoi_cell(make_lattice("d", 3))
    assert c.num_facets == 12
    assert all(len(f) == 4 for f in c.facet_vertices)
    areas = []
    for idx in c.facet_vertices:
        p = c.vertices[idx]
        areas.append(0.5 * np.linalg.norm(np.cross(p[2] - p[0], p[3] - p[1])))
    assert np.ptp(areas) <= 1e-9
    pairs = abutting_obtuse_pairs(c)
    assert pairs and all(ip > 0 for _, ip in pairs)


@pytest.mark.parametrize("name,n", [
    ("cartesian", 2), ("a", 2), ("astar", 2), ("triangle-dual", 2), ("bsplit", 2),
    ("cartesian", 3), ("a", 3), ("astar", 3), ("d", 3), ("dstar", 3), ("bsplit", 3),
])
def test_volume_equals_det(name, n):
    spec = make_lattice(name, n)
    assert voronoi_cell(spec).volume() == pytest.approx(spec.det, abs=1e-6)


@pytest.mark.parametrize("name,n,facets", [
    ("d", 4, 24), ("e6", 6, 72), ("e7", 7, 126), ("e8", 8, 240), ("a", 5, 30), ("dstar", 8, 272),
])
def test_facet_counts_high_dim(name, n, facets):
    c = voronoi_cell(make_lattice(name, n))
    assert c.num_facets == facets


@pytest.mark.parametrize("name,n", [("a", 2), ("d", 3), ("astar", 3), ("d", 4), ("e8", 8)])
def test_origin_symmetric(name, n):
    c = voronoi_cell(make_lattice(name, n))
    for v in c.normals:
        assert np.min(np.linalg.norm(c.normals + v, axis=1)) <= 1e-9


@pytest.mark.parametrize("name,n", [
    ("a", 2), ("a", 3), ("astar", 2), ("astar", 3), ("d", 3), ("dstar", 3),
    ("d", 4), ("a", 5), ("e6", 6), ("e7", 7), ("e8", 8),
])
def test_root_lattices_have_obtuse_pairs(name, n):
    assert abutting_obtuse_pairs(voronoi_cell(make_lattice(name, n)))


def test_vertices_beyond_3d_rejected():
    with pytest.raises(UnsupportedDimension):
        voronoi_cell(make_lattice("d", 4), vertices=True)


def test_bisector_facets():
    c = voronoi_cell(make_lattice("astar", 3))
    for v, nrm, d in zip(c.vectors, c.normals, c.offsets):
        assert np.allclose(nrm * np.linalg.norm(v), v)
        assert d == pytest.approx(np.linalg.norm(v) / 2)
