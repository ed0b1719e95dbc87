"""Convex polygon geometry in the plane.

Everything here works on convex polygons stored as counter-clockwise
vertex arrays.  Clipping is done by successive half-plane cuts, which is
all that is needed because every cell and every arrangement piece we
deal with is convex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

SNAP = 1e-10          # vertex snapping grid
DEDUP = 1e-9          # vertices closer than this are merged
MIN_AREA = 1e-18      # below this a polygon is degenerate
CLIP_EMPTY = 1e-12    # clip results at or below this area are empty
SLIVER = 1e-10        # arrangement pieces below this area are dropped
CONVEX_TOL = 1e-12


class GeometryError(ValueError):
    pass


class DegeneratePolygon(GeometryError):
    pass


class DegenerateFacet(GeometryError):
    pass


class CoverageGap(GeometryError):
    pass


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _signed_area(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _cleanup(v):
    """Snap, drop repeated and collinear vertices."""
    v = np.round(np.asarray(v, dtype=float) / SNAP) * SNAP + 0.0
    if len(v) == 0:
        return v.reshape(0, 2)
    keep = [v[0]]
    for p in v[1:]:
        if np.max(np.abs(p - keep[-1])) > DEDUP:
            keep.append(p)
    while len(keep) > 1 and np.max(np.abs(keep[0] - keep[-1])) <= DEDUP:
        keep.pop()
    v = np.array(keep)
    changed = True
    while changed and len(v) >= 3:
        changed = False
        for i in range(len(v)):
            a, b, c = v[i - 1], v[i], v[(i + 1) % len(v)]
            scale = max(np.linalg.norm(b - a), np.linalg.norm(c - b), 1.0)
            if abs(_cross(b - a, c - b)) <= CONVEX_TOL * scale:
                v = np.delete(v, i, axis=0)
                changed = True
                break
    return v


class Polygon:
    """Convex polygon with counter-clockwise vertices.

    Vertices are snapped to a 1e-10 grid and collinear or repeated
    vertices are removed.  Orientation is fixed to counter-clockwise.
    Raises ``DegeneratePolygon`` for area <= 1e-18 and ``GeometryError``
    for non-convex input.
    """

    __slots__ = ("vertices", "_area")

    def __init__(self, vertices):
        v = _cleanup(vertices)
        if len(v) < 3:
            raise DegeneratePolygon("fewer than three distinct vertices")
        a = _signed_area(v)
        if a < 0:
            v = v[::-1].copy()
            a = -a
        if a <= MIN_AREA:
            raise DegeneratePolygon(f"area {a:g} too small")
        e = np.roll(v, -1, axis=0) - v
        turns = _cross(e, np.roll(e, -1, axis=0))
        if np.any(turns < -CONVEX_TOL * max(1.0, float(np.max(np.abs(v))) ** 2)):
            raise GeometryError("polygon is not convex")
        v.setflags(write=False)
        self.vertices = v
        self._area = a

    @classmethod
    def maybe(cls, vertices, min_area=MIN_AREA):
        """Build a polygon, or return None when it would be degenerate."""
        try:
            p = cls(vertices)
        except DegeneratePolygon:
            return None
        except GeometryError:
            # clip results are convex in exact arithmetic; snapping noise can
            # dent a thin one, so fall back to the hull
            try:
                v = np.asarray(vertices, dtype=float)
                p = cls(v[ConvexHull(v).vertices])
            except (GeometryError, QhullError):
                return None
        return p if p.area > min_area else None

    @classmethod
    def regular(cls, k, radius=1.0, center=(0.0, 0.0), phase=0.0):
        t = phase + 2 * np.pi * np.arange(k) / k
        c = np.asarray(center, dtype=float)
        return cls(c + radius * np.column_stack([np.cos(t), np.sin(t)]))

    @classmethod
    def box(cls, x0, y0, x1, y1):
        return cls([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        pts = ", ".join(f"({x:.6g}, {y:.6g})" for x, y in self.vertices)
        return f"Polygon([{pts}])"

    @property
    def area(self) -> float:
        return self._area

    @property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        c = _cross(v, w)
        return ((v + w) * c[:, None]).sum(axis=0) / (6.0 * self._area)

    @property
    def perimeter(self) -> float:
        return float(np.linalg.norm(np.roll(self.vertices, -1, axis=0) - self.vertices, axis=1).sum())

    @property
    def diameter(self) -> float:
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((d ** 2).sum(-1)).max())

    @property
    def bounds(self):
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return lo, hi

    def edges(self):
        """Yield ``(a, b)`` for every edge, counter-clockwise."""
        v = self.vertices
        for i in range(len(v)):
            yield v[i], v[(i + 1) % len(v)]

    def facets(self, parent=None) -> list["Facet2"]:
        return [Facet2.from_points(a, b, parent=parent) for a, b in self.edges()]

    def halfplanes(self):
        """Rows ``(nx, ny, d)`` with the polygon equal to ``{x : n.x <= d}``."""
        return np.array([(f.normal[0], f.normal[1], f.offset) for f in self.facets()])

    def contains(self, p, tol=1e-12) -> bool:
        p = np.asarray(p, dtype=float)
        for a, b in self.edges():
            if _cross(b - a, p - a) < -tol * max(1.0, np.linalg.norm(b - a)):
                return False
        return True

    def contains_strictly(self, p, tol=1e-12) -> bool:
        p = np.asarray(p, dtype=float)
        for a, b in self.edges():
            if _cross(b - a, p - a) <= tol * max(1.0, np.linalg.norm(b - a)):
                return False
        return True

    def translated(self, t) -> "Polygon":
        return Polygon(self.vertices + np.asarray(t, dtype=float))

    def scaled(self, s, anchor=(0.0, 0.0)) -> "Polygon":
        a = np.asarray(anchor, dtype=float)
        return Polygon(a + s * (self.vertices - a))

    def transformed(self, matrix, shift=(0.0, 0.0)) -> "Polygon":
        m = np.asarray(matrix, dtype=float)
        return Polygon(self.vertices @ m.T + np.asarray(shift, dtype=float))

    def same_as(self, other: "Polygon", tol=1e-9) -> bool:
        """Vertex-set equality up to cyclic order."""
        if len(self) != len(other):
            return False
        a, b = self.vertices, other.vertices
        for r in range(len(a)):
            if np.max(np.abs(np.roll(b, -r, axis=0) - a)) <= tol:
                return True
        return False

    def canonical_vertices(self) -> np.ndarray:
        """Vertex list rotated to start at the lexicographically smallest vertex."""
        key = np.round(self.vertices, 9)
        i = min(range(len(key)), key=lambda j: (key[j, 0], key[j, 1]))
        return np.roll(self.vertices, -i, axis=0)

    def key(self, digits=9):
        return tuple(map(tuple, np.round(self.canonical_vertices(), digits) + 0.0))

    def to_json(self):
        return [[float(x), float(y)] for x, y in self.vertices]


@dataclass(frozen=True, eq=False)
class Facet2:
    """Oriented edge of a cell with its outward unit normal."""

    a: np.ndarray
    b: np.ndarray
    normal: np.ndarray
    parent: object = None

    @classmethod
    def from_points(cls, a, b, parent=None) -> "Facet2":
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        d = b - a
        length = float(np.hypot(*d))
        if length <= SNAP:
            raise DegenerateFacet("facet endpoints coincide")
        # outward for a counter-clockwise cell
        n = np.array([d[1], -d[0]]) / length
        return cls(a, b, n, parent)

    @property
    def length(self) -> float:
        return float(np.hypot(*(self.b - self.a)))

    @property
    def direction(self) -> np.ndarray:
        return (self.b - self.a) / self.length

    @property
    def offset(self) -> float:
        return float(self.normal @ self.a)

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.a + self.b)

    def reversed(self) -> "Facet2":
        return Facet2(self.b, self.a, -self.normal, self.parent)

    def to_json(self):
        return {"a": [float(v) for v in self.a], "b": [float(v) for v in self.b],
                "normal": [float(v) for v in self.normal]}


def cut(vertices, normal, offset, eps=1e-12):
    """Keep the part of a convex vertex loop with ``normal . x <= offset``."""
    v = np.asarray(vertices, dtype=float)
    if len(v) == 0:
        return v
    s = v @ np.asarray(normal, dtype=float) - offset
    out = []
    n = len(v)
    for i in range(n):
        p, q = v[i], v[(i + 1) % n]
        sp, sq = s[i], s[(i + 1) % n]
        if sp <= eps:
            out.append(p)
        if (sp < -eps and sq > eps) or (sp > eps and sq < -eps):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    return np.array(out).reshape(-1, 2)


def clip(subject: Polygon | None, clipper: Polygon | None) -> Polygon | None:
    """Intersection of two convex polygons; ``None`` when the area is <= 1e-12."""
    if subject is None or clipper is None:
        return None
    lo1, hi1 = subject.bounds
    lo2, hi2 = clipper.bounds
    if np.any(lo1 > hi2 + SNAP) or np.any(lo2 > hi1 + SNAP):
        return None
    v = subject.vertices
    for f in clipper.facets():
        v = cut(v, f.normal, f.offset)
        if len(v) < 3:
            return None
    return Polygon.maybe(v, CLIP_EMPTY)


def clip_halfplane(p: Polygon | None, normal, offset, min_area=CLIP_EMPTY) -> Polygon | None:
    if p is None:
        return None
    v = cut(p.vertices, normal, offset)
    return Polygon.maybe(v, min_area) if len(v) >= 3 else None


def difference(p: Polygon, c: Polygon, min_area=SLIVER) -> list[Polygon]:
    """``p`` minus ``c`` as a list of interior-disjoint convex polygons."""
    if clip(p, c) is None:
        return [p]
    out = []
    rest = p.vertices
    for f in c.facets():
        outside = cut(rest, -f.normal, -f.offset)
        if len(outside) >= 3:
            q = Polygon.maybe(outside, min_area)
            if q is not None:
                out.append(q)
        rest = cut(rest, f.normal, f.offset)
        if len(rest) < 3:
            break
    return out


def area(p: Polygon | None) -> float:
    """Shoelace area; 0 for an empty polygon."""
    return 0.0 if p is None else p.area


def reflect_point(x, facet: Facet2):
    x = np.asarray(x, dtype=float)
    s = x @ facet.normal - facet.offset
    return x - 2.0 * s[..., None] * facet.normal


def reflect_across_line(p: Polygon, f: Facet2) -> Polygon:
    """Mirror image of ``p`` across the supporting line of ``f``."""
    if f.length <= SNAP:
        raise DegenerateFacet("facet endpoints coincide")
    return Polygon(reflect_point(p.vertices, f)[::-1])


def normal_product(f1: Facet2, f2: Facet2) -> float:
    return float(f1.normal @ f2.normal)


def polygon_from_halfplanes(rows, bound=1e3) -> Polygon | None:
    """Bounded intersection of half-planes ``n . x <= d`` given as rows ``(nx, ny, d)``."""
    v = Polygon.box(-bound, -bound, bound, bound).vertices
    for nx, ny, d in rows:
        v = cut(v, (nx, ny), d)
        if len(v) < 3:
            return None
    return Polygon.maybe(v)


# -- superposition ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Piece:
    """Atom of a superposition together with the cells that contain it."""

    polygon: Polygon
    members: tuple      # sorted multiset of member ids
    cells: tuple        # indices into the input cell list

    @property
    def area(self):
        return self.polygon.area

    def to_json(self):
        return {"vertices": self.polygon.to_json(), "members": list(self.members),
                "cells": list(self.cells)}


def _sort_key(poly: Polygon):
    c = np.round(poly.centroid, 9) + 0.0
    return (c[0], c[1])


def superpose(cells: Sequence[tuple[Polygon, object]], window: Polygon,
              coverage_tol=1e-9) -> list[Piece]:
    """Common refinement of several tessellations restricted to ``window``.

    ``cells`` is a list of ``(polygon, member_id)``; cells sharing a member
    id are assumed to belong to one tessellation.  Each member must cover
    the window, otherwise ``CoverageGap`` is raised.  Pieces are sorted by
    centroid and carry the ids of every input cell containing them.
    """
    groups: dict = {}
    for i, (poly, member) in enumerate(cells):
        groups.setdefault(member, []).append(i)
    for member, idx in groups.items():
        covered = sum(area(clip(cells[i][0], window)) for i in idx)
        if abs(covered - window.area) > coverage_tol * max(1.0, window.area):
            raise CoverageGap(f"member {member!r} covers {covered:.12g} of {window.area:.12g}")

    pieces = [window]
    for member in sorted(groups, key=repr):
        nxt = []
        for piece in pieces:
            for i in groups[member]:
                q = clip(piece, cells[i][0])
                if q is not None and q.area >= SLIVER:
                    nxt.append(q)
        pieces = nxt

    out = []
    for q in sorted(pieces, key=_sort_key):
        c = q.centroid
        inside = tuple(i for i, (poly, _) in enumerate(cells) if poly.contains(c, tol=-1e-12))
        members = tuple(sorted((cells[i][1] for i in inside), key=repr))
        out.append(Piece(q, members, inside))
    return out


def arrangement(polygons: Iterable[Polygon], window: Polygon) -> list[Piece]:
    """Partition ``window`` by the boundaries of arbitrary convex polygons.

    Unlike ``superpose`` the polygons need not tessellate anything; a piece
    may lie in no polygon at all.
    """
    polys = list(polygons)
    pieces = [window]
    for c in polys:
        nxt = []
        for p in pieces:
            inner = clip(p, c)
            if inner is None:
                nxt.append(p)
                continue
            if inner.area >= SLIVER:
                nxt.append(inner)
            nxt.extend(difference(p, c))
        pieces = nxt
    out = []
    for q in sorted(pieces, key=_sort_key):
        c = q.centroid
        inside = tuple(i for i, poly in enumerate(polys) if poly.contains(c, tol=-1e-12))
        out.append(Piece(q, (), inside))
    return out
