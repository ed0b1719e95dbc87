"""Shift-invariant tessellations of the plane, scaled copies and families.

A tessellation is a motif of prototype cells, given relative to a
reference point, repeated over a translation lattice.  The reference
point sits at ``offset``; scaled copies are anchored there by default, so
translating or uniformly scaling the whole configuration leaves every
refinability verdict unchanged.
"""

from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .geometry import Polygon

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class Tessellation:
    """Motif ``prototypes`` repeated over ``offset + basis @ Z^2``.

    ``basis`` holds the two shift vectors as columns.
    """

    prototypes: tuple
    basis: np.ndarray
    offset: np.ndarray = field(default_factory=lambda: np.zeros(2))
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "prototypes", tuple(self.prototypes))
        object.__setattr__(self, "basis", np.asarray(self.basis, dtype=float).reshape(2, 2))
        object.__setattr__(self, "offset", np.asarray(self.offset, dtype=float).reshape(2))
        if abs(np.linalg.det(self.basis)) <= 1e-12:
            raise ValueError("shift basis is singular")
        motif = sum(p.area for p in self.prototypes)
        if abs(motif - abs(np.linalg.det(self.basis))) > 1e-9 * max(1.0, motif):
            raise ValueError("motif area does not match the shift lattice")

    @property
    def prototype(self) -> Polygon:
        return self.prototypes[0]

    @property
    def cell_diameter(self) -> float:
        return max(p.diameter for p in self.prototypes)

    def reference_cells(self) -> list[Polygon]:
        """The motif placed at ``offset`` (one shift period)."""
        return [p.translated(self.offset) for p in self.prototypes]

    def cell(self, k1: int, k2: int, j: int = 0) -> Polygon:
        return self.prototypes[j].translated(self.offset + self.basis @ (k1, k2))

    def shifts_near(self, lo, hi):
        """Integer shifts whose motif may touch the box ``[lo, hi]``."""
        r = self.cell_diameter + 1e-9
        lo = np.asarray(lo, dtype=float) - r
        hi = np.asarray(hi, dtype=float) + r
        corners = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [lo[0], hi[1]], [hi[0], hi[1]]])
        ref = np.array([p.vertices.mean(axis=0) for p in self.prototypes])
        k = []
        for c in ref:
            k.append(np.linalg.solve(self.basis, (corners - self.offset - c).T).T)
        k = np.vstack(k)
        k0 = np.floor(k.min(axis=0)).astype(int) - 1
        k1 = np.ceil(k.max(axis=0)).astype(int) + 1
        return [(a, b) for a in range(k0[0], k1[0] + 1) for b in range(k0[1], k1[1] + 1)]

    def cells_in(self, lo, hi) -> list[Polygon]:
        """All cells whose bounding box meets the box ``[lo, hi]``, in a fixed order."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        out = []
        for a, b in self.shifts_near(lo, hi):
            t = self.offset + self.basis @ (a, b)
            for p in self.prototypes:
                plo, phi = p.bounds
                if np.all(plo + t <= hi + 1e-12) and np.all(phi + t >= lo - 1e-12):
                    out.append(p.translated(t))
        return out

    def cells_near(self, poly: Polygon, margin: float = 0.0) -> list[Polygon]:
        lo, hi = poly.bounds
        return self.cells_in(lo - margin, hi + margin)

    def period_window(self, periods: float = 3.0) -> Polygon:
        """Parallelogram of ``periods`` shift periods centred on the motif."""
        c = self.offset + np.mean([p.centroid for p in self.prototypes], axis=0)
        b1, b2 = self.basis[:, 0], self.basis[:, 1]
        h = periods / 2.0
        return Polygon([c - h * b1 - h * b2, c + h * b1 - h * b2,
                        c + h * b1 + h * b2, c - h * b1 + h * b2])

    def is_cell(self, poly: Polygon, tol: float = 1e-9) -> bool:
        return any(poly.same_as(c, tol) for c in self.cells_near(poly, 1e-6))

    def translated(self, v) -> "Tessellation":
        return Tessellation(self.prototypes, self.basis, self.offset + np.asarray(v, dtype=float), self.name)

    def scaled(self, s, anchor=None) -> "Tessellation":
        """Copy scaled by ``s`` about ``anchor`` (default: the reference point)."""
        s = float(s)
        a = self.offset if anchor is None else np.asarray(anchor, dtype=float)
        return Tessellation(tuple(p.scaled(s) for p in self.prototypes), s * self.basis,
                            a + s * (self.offset - a), self.name)

    def with_offset(self, offset) -> "Tessellation":
        return Tessellation(self.prototypes, self.basis, offset, self.name)

    def same_lattice_class(self, other: "Tessellation", tol=1e-9) -> bool:
        d = np.linalg.solve(self.basis, other.offset - self.offset)
        return bool(np.all(np.abs(d - np.round(d)) <= tol))

    def to_json(self):
        return {"name": self.name, "prototypes": [p.to_json() for p in self.prototypes],
                "shift_basis": self.basis.T.tolist(), "offset": self.offset.tolist()}


def as_tessellation(t) -> Tessellation:
    return t.tessellation if isinstance(t, ScaledCopy) else t


@dataclass(frozen=True, eq=False)
class ScaledCopy:
    """``base`` scaled by a rational factor about ``anchor``."""

    base: Tessellation
    scale: Fraction = Fraction(1, 2)
    anchor: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "scale", Fraction(self.scale).limit_denominator(10 ** 6))
        if self.anchor is None:
            object.__setattr__(self, "anchor", self.base.offset.copy())
        else:
            object.__setattr__(self, "anchor", np.asarray(self.anchor, dtype=float))

    @property
    def tessellation(self) -> Tessellation:
        return self.base.scaled(float(self.scale), self.anchor)


@dataclass(frozen=True, eq=False)
class TessellationFamily:
    """Tessellations sharing motif and lattice, differing only in offset."""

    members: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("empty family")
        base = self.members[0]
        for m in self.members[1:]:
            if not np.allclose(m.basis, base.basis) or len(m.prototypes) != len(base.prototypes) or \
                    not all(p.same_as(q) for p, q in zip(m.prototypes, base.prototypes)):
                raise ValueError("family members must share motif and shift basis")
        for i, a in enumerate(self.members):
            for b in self.members[i + 1:]:
                if a.same_lattice_class(b):
                    raise ValueError("member offsets must differ modulo the shift lattice")

    @classmethod
    def from_offsets(cls, base: Tessellation, offsets, name="") -> "TessellationFamily":
        return cls(tuple(base.with_offset(base.offset + np.asarray(o, dtype=float)) for o in offsets), name)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def base(self) -> Tessellation:
        return self.members[0]

    def scaled(self, s, anchor=None) -> "TessellationFamily":
        a = self.base.offset if anchor is None else anchor
        return TessellationFamily(tuple(m.scaled(s, a) for m in self.members), self.name)

    def translated(self, v) -> "TessellationFamily":
        return TessellationFamily(tuple(m.translated(v) for m in self.members), self.name)

    def cells_in(self, lo, hi) -> list[tuple[Polygon, int]]:
        return [(c, j) for j, m in enumerate(self.members) for c in m.cells_in(lo, hi)]

    def to_json(self):
        return {"name": self.name, "members": [m.to_json() for m in self.members]}


def as_family(x) -> TessellationFamily:
    if isinstance(x, TessellationFamily):
        return x
    return TessellationFamily((as_tessellation(x),), getattr(x, "name", ""))


# -- presets ----------------------------------------------------------------

def square(side: float = 1.0) -> Tessellation:
    """Unit square grid; the reference point is a grid vertex."""
    return Tessellation((Polygon.box(0, 0, side, side),), side * np.eye(2), name="square")


def hexagonal(radius: float = 2.0) -> Tessellation:
    """Hexagons with vertices ``(+-r, 0)``, ``(+-r/2, +-r sqrt3/2)`` centred on the lattice."""
    hexagon = Polygon.regular(6, radius)
    b = radius * np.array([[1.5, 0.0], [SQRT3 / 2, SQRT3]])
    return Tessellation((hexagon,), b, name="hex")


def triangular(side: float = 1.0) -> Tessellation:
    """Equilateral triangulation with a vertex at the reference point."""
    h = side * SQRT3 / 2
    up = Polygon([(0, 0), (side, 0), (side / 2, h)])
    down = Polygon([(side, 0), (1.5 * side, h), (side / 2, h)])
    return Tessellation((up, down), np.array([[side, side / 2], [0.0, h]]), name="triangle")


def preset(name: str) -> Tessellation:
    try:
        return {"square": square, "hex": hexagonal, "triangle": triangular}[name]()
    except KeyError:
        raise ValueError(f"unknown tessellation preset {name!r}") from None


# offsets for the hexagon of circumradius 2
FAMILY_OFFSETS = {
    # shifted copies centred on the two vertex classes of the hex tiling
    "example3-family": ("hex", [(0.0, 0.0), (-1.0, SQRT3), (1.0, SQRT3)]),
    # shifts by (3/2, -sqrt3/2) and (0, sqrt3); lozenge configuration
    "example2-family": ("hex", [(0.0, 0.0), (1.5, -SQRT3 / 2), (0.0, SQRT3)]),
    # two half-scale shifts meeting at the midpoint of the top edge
    "fig4a-family": ("hex", [(0.0, 0.0), (-1.0, SQRT3), (1.0, SQRT3)]),
    # example3 plus the copy whose half-scale cell doubles the top edge
    "fig4b-family": ("hex", [(0.0, 0.0), (-1.0, SQRT3), (1.0, SQRT3), (0.0, SQRT3)]),
    "square-family": ("square", [(0.0, 0.0), (0.5, 0.5)]),
    "triangle-family": ("triangle", [(0.0, 0.0), (0.5, SQRT3 / 6)]),
}


def family_preset(name: str) -> TessellationFamily:
    if name in ("square", "hex", "triangle"):
        return as_family(preset(name))
    try:
        base, offsets = FAMILY_OFFSETS[name]
    except KeyError:
        raise ValueError(f"unknown family preset {name!r}") from None
    return TessellationFamily.from_offsets(preset(base), offsets, name)


# -- spec files -------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def parse_number(expr) -> float:
    """Evaluate numbers such as ``"sqrt(3)/2"`` (``+ - * /``, ``sqrt``, parentheses)."""
    if isinstance(expr, (int, float)):
        return float(expr)

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "sqrt" \
                and len(node.args) == 1 and not node.keywords:
            return math.sqrt(ev(node.args[0]))
        raise ValueError(f"unsupported expression {expr!r}")

    return ev(ast.parse(str(expr), mode="eval"))


def _points(rows):
    return np.array([[parse_number(x), parse_number(y)] for x, y in rows], dtype=float)


def load_spec(source) -> Tessellation | TessellationFamily:
    """Read a tessellation from a JSON file or an already parsed dict.

    Keys: ``prototype`` (vertex list) or ``prototypes`` (list of vertex
    lists), ``shift_basis`` (two vectors), optional ``offset`` and
    ``offsets``; the latter turns the result into a family.
    """
    if isinstance(source, (str, Path)):
        data = json.loads(Path(source).read_text())
    else:
        data = source
    if "prototypes" in data:
        protos = tuple(Polygon(_points(p)) for p in data["prototypes"])
    else:
        protos = (Polygon(_points(data["prototype"])),)
    basis = _points(data["shift_basis"]).T
    offset = _points([data.get("offset", [0, 0])])[0]
    t = Tessellation(protos, basis, offset, data.get("name", ""))
    if "offsets" in data:
        return TessellationFamily.from_offsets(t, _points(data["offsets"]), data.get("name", ""))
    return t
