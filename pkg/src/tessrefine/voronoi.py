"""Voronoi cells of catalogued lattices.

Cells are the intersection of bisector half-spaces ``x . v <= |v|^2 / 2``
over the Voronoi-relevant vectors.  Candidates come from enumerating all
lattice vectors in a ball that is guaranteed to hold every relevant
vector, and applying Voronoi's parity test (``v`` is relevant
iff ``+-v`` are the only shortest vectors of ``v + 2L``); each surviving
bisector is then confirmed active by a small linear program.  Vertices
are only built in dimensions 2 and 3.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .geometry import Polygon, polygon_from_halfplanes
from .lattices import LatticeSpec, UnsupportedDimension

TOL = 1e-9


@dataclass(eq=False)
class VoronoiCell:
    """Facets ``(unit normal, offset)`` plus vertices in 2D/3D.

    ``vectors[i]`` is the lattice vector whose bisector carries facet ``i``;
    ``offsets[i] = |vectors[i]| / 2``.
    """

    n: int
    vectors: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    vertices: np.ndarray | None = None
    facet_vertices: list = field(default_factory=list)
    polygon: Polygon | None = None
    neighbor_pair: tuple | None = None

    @property
    def num_facets(self) -> int:
        return len(self.normals)

    def volume(self) -> float:
        if self.n == 2:
            return self.polygon.area
        if self.n == 3:
            total = 0.0
            for idx, d in zip(self.facet_vertices, self.offsets):
                pts = self.vertices[idx]
                c = pts.mean(axis=0)
                a = 0.0
                for i in range(len(pts)):
                    a += np.linalg.norm(np.cross(pts[i] - c, pts[(i + 1) % len(pts)] - c)) / 2
                total += a * d / 3.0
            return total
        raise UnsupportedDimension("volume needs vertices (n <= 3)")

    def edge_lengths(self):
        if self.n != 2:
            raise UnsupportedDimension("edge lengths are 2D only")
        v = self.polygon.vertices
        return np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)

    def to_json(self):
        out = {"n": self.n, "facet_normals": self.normals.tolist(),
               "facet_offsets": self.offsets.tolist(), "vectors": self.vectors.tolist()}
        if self.vertices is not None:
            out["vertices"] = self.vertices.tolist()
        if self.facet_vertices:
            out["facets"] = [list(map(int, f)) for f in self.facet_vertices]
        return out


def relevant_vectors(spec: LatticeSpec, shells: int = 2) -> np.ndarray:
    """All nonzero ``G z`` with integer ``|z_i| <= shells``, deduplicated."""
    rng = np.arange(-shells, shells + 1)
    z = np.array(list(itertools.product(rng, repeat=spec.n)), dtype=float)
    z = z[np.any(z != 0, axis=1)]
    vecs = z @ spec.generator.T
    _, idx = np.unique(np.round(vecs, 9), axis=0, return_index=True)
    return vecs[np.sort(idx)]


def short_vectors(generator, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero lattice vectors of norm <= ``radius`` (Fincke-Pohst enumeration).

    Returns ``(z, G z)`` with integer coefficient rows ``z``.
    """
    g = np.asarray(generator, dtype=float)
    n = g.shape[1]
    r = np.linalg.cholesky(g.T @ g).T          # upper triangular, A = R^t R
    q = r / np.diag(r)[:, None]
    d = np.diag(r) ** 2
    bound = radius * radius * (1 + 1e-12) + 1e-12
    out = []
    z = np.zeros(n)

    def recurse(k, rest):
        # centre of coordinate k given the already fixed coordinates k+1..n-1
        c = -float(q[k, k + 1:] @ z[k + 1:])
        half = np.sqrt(max(rest, 0.0) / d[k])
        for zk in range(int(np.ceil(c - half - 1e-12)), int(np.floor(c + half + 1e-12)) + 1):
            left = rest - d[k] * (zk - c) ** 2
            if left < -1e-12:
                continue
            z[k] = zk
            if k == 0:
                out.append(z.copy())
            else:
                recurse(k - 1, left)
        z[k] = 0

    recurse(n - 1, bound)
    zs = np.array(out, dtype=np.int64).reshape(-1, n)
    zs = zs[np.any(zs != 0, axis=1)]
    return zs, zs @ g.T


def relevant_radius(generator) -> float:
    """Upper bound for the norm of any Voronoi-relevant vector.

    Relevant vectors are at most twice the covering radius, and the
    covering radius is at most half the norm of the Gram-Schmidt vectors.
    """
    r = np.linalg.qr(np.asarray(generator, dtype=float))[1]
    return float(np.sqrt(np.sum(np.diag(r) ** 2)))


def _parity_candidates(spec: LatticeSpec):
    z, vecs = short_vectors(spec.generator, relevant_radius(spec.generator))
    norms = np.einsum("ij,ij->i", vecs, vecs)
    cls = np.mod(z, 2) @ (1 << np.arange(spec.n, dtype=np.int64))
    order = np.lexsort((norms, cls))
    keep = []
    start = 0
    cls_sorted = cls[order]
    while start < len(order):
        stop = start
        while stop < len(order) and cls_sorted[stop] == cls_sorted[start]:
            stop += 1
        best = norms[order[start]]
        tied = [order[k] for k in range(start, stop) if norms[order[k]] <= best + 1e-9 * max(1.0, best)]
        if len(tied) == 2:
            keep.extend(tied)
        start = stop
    keep.sort()
    return vecs[keep]


def _active(vectors, i) -> bool:
    """Bisector of ``vectors[i]`` has a facet of positive relative measure."""
    v = vectors[i]
    n = len(v)
    others = np.delete(vectors, i, axis=0)
    # maximize t subject to x.v = |v|^2/2 and x.w + t |w| <= |w|^2/2
    a_ub = np.hstack([others, np.linalg.norm(others, axis=1)[:, None]])
    b_ub = 0.5 * np.einsum("ij,ij->i", others, others)
    a_eq = np.append(v, 0.0)[None, :]
    b_eq = [0.5 * v @ v]
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(None, None)] * n + [(None, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    return bool(res.status == 0 and -res.fun > TOL)


def _facets(spec: LatticeSpec):
    cand = _parity_candidates(spec)
    active = [i for i in range(len(cand)) if _active(cand, i)]
    vecs = cand[active]
    norms = np.linalg.norm(vecs, axis=1)
    order = np.lexsort(tuple(np.round(vecs, 9).T[::-1]))
    vecs, norms = vecs[order], norms[order]
    return vecs, vecs / norms[:, None], norms / 2.0


def _vertices_3d(normals, offsets):
    m = len(normals)
    pts = []
    for i, j, k in itertools.combinations(range(m), 3):
        a = normals[[i, j, k]]
        if abs(np.linalg.det(a)) < 1e-12:
            continue
        x = np.linalg.solve(a, offsets[[i, j, k]])
        if np.all(normals @ x <= offsets + 1e-9):
            pts.append(x)
    pts = np.array(pts)
    _, idx = np.unique(np.round(pts, 8), axis=0, return_index=True)
    pts = pts[np.sort(idx)]
    facet_vertices = []
    for nrm, d in zip(normals, offsets):
        on = np.where(np.abs(pts @ nrm - d) <= 1e-8)[0]
        c = pts[on].mean(axis=0)
        u = pts[on[0]] - c
        u /= np.linalg.norm(u)
        w = np.cross(nrm, u)
        ang = np.arctan2((pts[on] - c) @ w, (pts[on] - c) @ u)
        facet_vertices.append(on[np.argsort(ang)])
    return pts, facet_vertices


def voronoi_cell(spec: LatticeSpec, scale: float = 1.0,
                 vertices: bool | None = None) -> VoronoiCell:
    """Voronoi cell of ``spec`` scaled by ``scale``.

    Vertices are built when ``n <= 3`` (default) and requested vertex
    construction for ``n > 3`` raises ``UnsupportedDimension``.
    """
    if scale != 1.0:
        spec = spec.scaled(scale)
    if vertices is None:
        vertices = spec.n <= 3
    if vertices and spec.n > 3:
        raise UnsupportedDimension("vertex construction is limited to n <= 3")
    vecs, normals, offsets = _facets(spec)
    cell = VoronoiCell(spec.n, vecs, normals, offsets, neighbor_pair=spec.neighbor_pair)
    if vertices and spec.n == 2:
        poly = polygon_from_halfplanes([(nx, ny, d) for (nx, ny), d in zip(normals, offsets)],
                                       bound=10 * float(offsets.max()))
        cell.polygon = poly
        cell.vertices = np.array(poly.vertices)
        cell.facet_vertices = [
            np.array([i, (i + 1) % len(poly)]) for i in range(len(poly))
        ]
        # reorder facets to follow the polygon's edges
        order = []
        for a, b in poly.edges():
            mid = 0.5 * (a + b)
            order.append(int(np.argmin(np.abs(normals @ mid - offsets))))
        cell.vectors, cell.normals, cell.offsets = vecs[order], normals[order], offsets[order]
    elif vertices and spec.n == 3:
        cell.vertices, cell.facet_vertices = _vertices_3d(normals, offsets)
    return cell


def _adjacent_pairs(cell: VoronoiCell):
    if cell.n == 2:
        m = cell.num_facets
        return [(i, (i + 1) % m) for i in range(m)]
    sets = [set(map(int, f)) for f in cell.facet_vertices]
    return [(i, j) for i, j in itertools.combinations(range(len(sets)), 2)
            if len(sets[i] & sets[j]) >= 2]


def abutting_obtuse_pairs(cell: VoronoiCell):
    """Facet pairs sharing an (n-2)-face whose unit normals have positive inner product.

    For ``n > 3`` adjacency is not computed; the lattice's designated
    neighbor pair is reported instead, with facet indices where the pair
    vectors are themselves facet vectors (``None`` otherwise).
    """
    out = []
    if cell.n <= 3 and cell.facet_vertices:
        for i, j in _adjacent_pairs(cell):
            ip = float(cell.normals[i] @ cell.normals[j])
            if ip > TOL:
                out.append(((i, j), ip))
        return out
    if cell.neighbor_pair is None:
        return out
    u, v = (np.asarray(w, dtype=float) for w in cell.neighbor_pair)

    def index_of(w):
        hit = np.where(np.all(np.abs(cell.vectors - w) <= 1e-9, axis=1))[0]
        return int(hit[0]) if len(hit) else None

    ip = float((u / np.linalg.norm(u)) @ (v / np.linalg.norm(v)))
    if ip > TOL:
        out.append(((index_of(u), index_of(v)), ip))
    return out
