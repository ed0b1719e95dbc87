"""Generator matrices and neighbor pairs for the root lattices.

Each lattice carries one pair of vectors normal to two abutting facets of
its Voronoi cell (or, for the split cube and the triangulation, of the
cell in question).  A strictly positive inner product of the pair means
the two facets meet at an obtuse angle, which rules out refinable
indicator spaces on that tessellation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

TOL = 1e-9


class UnsupportedDimension(ValueError):
    pass


class LatticeName(str, enum.Enum):
    CARTESIAN = "cartesian"
    A = "a"
    ASTAR = "astar"
    BSPLIT = "bsplit"
    D = "d"
    DSTAR = "dstar"
    E6 = "e6"
    E7 = "e7"
    E8 = "e8"
    TRIANGLE_DUAL = "triangle-dual"

    @classmethod
    def parse(cls, name) -> "LatticeName":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        aliases = {"a*": "astar", "d*": "dstar", "cube": "cartesian", "z": "cartesian",
                   "triangle": "triangle-dual", "triangledual": "triangle-dual",
                   "b": "bsplit"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown lattice {name!r}") from None


class Verdict(str, enum.Enum):
    OBTUSE = "Obtuse"
    RIGHT_ANGLE = "RightAngle"
    ACUTE = "Acute"


@dataclass(frozen=True, eq=False)
class LatticeSpec:
    name: LatticeName
    n: int
    generator: np.ndarray
    neighbor_pair: tuple

    def __post_init__(self):
        g = np.asarray(self.generator, dtype=float)
        if g.shape != (self.n, self.n):
            raise ValueError(f"generator must be {self.n}x{self.n}")
        if abs(np.linalg.det(g)) <= 1e-9:
            raise ValueError("generator is singular")
        for v in self.neighbor_pair:
            if np.linalg.norm(v) == 0:
                raise ValueError("neighbor vectors must be nonzero")

    @property
    def det(self) -> float:
        return float(abs(np.linalg.det(self.generator)))

    def scaled(self, s: float) -> "LatticeSpec":
        return LatticeSpec(self.name, self.n, s * self.generator,
                           tuple(s * v for v in self.neighbor_pair))

    def to_json(self):
        return {"name": self.name.value, "n": self.n,
                "generator": self.generator.tolist(),
                "neighbor_pair": [v.tolist() for v in self.neighbor_pair]}


@dataclass(frozen=True)
class ObtuseReport:
    inner_product: float
    verdict: Verdict

    def to_json(self):
        return {"inner_product": self.inner_product, "verdict": self.verdict.value}


_RANGES = {
    LatticeName.CARTESIAN: (2, None),
    LatticeName.BSPLIT: (2, None),
    LatticeName.A: (2, None),
    LatticeName.ASTAR: (2, None),
    LatticeName.D: (3, None),
    LatticeName.DSTAR: (3, None),
    LatticeName.E6: (6, 6),
    LatticeName.E7: (7, 7),
    LatticeName.E8: (8, 8),
    LatticeName.TRIANGLE_DUAL: (2, 2),
}


def _check_dimension(name: LatticeName, n: int):
    lo, hi = _RANGES[name]
    if not isinstance(n, (int, np.integer)) or n < lo or (hi is not None and n > hi):
        span = f"{lo}" if hi == lo else f">= {lo}" if hi is None else f"{lo}..{hi}"
        raise UnsupportedDimension(f"{name.value} needs n {span}, got {n}")


def a_generator(n: int, dual=False) -> np.ndarray:
    """``I + c J`` with ``c = (-1 + sqrt(n+1))/n`` (or ``1/sqrt(n+1)`` for the dual)."""
    root = 1.0 / math.sqrt(n + 1) if dual else math.sqrt(n + 1)
    c = (-1.0 + root) / n
    return np.eye(n) + c * np.ones((n, n))


def d_generator(n: int) -> np.ndarray:
    """Block matrix ``[[I, -e_{n-1}], [-j^t, -1]]``; columns span D_n."""
    g = np.zeros((n, n))
    g[: n - 1, : n - 1] = np.eye(n - 1)
    g[n - 2, n - 1] = -1.0
    g[n - 1, :] = -1.0
    return g


def _dn_basis(m: int) -> np.ndarray:
    # columns e1-e2, ..., e_{m-1}-e_m, e_{m-1}+e_m
    b = np.zeros((m, m))
    for i in range(m - 1):
        b[i, i] = 1.0
        b[i + 1, i] = -1.0
    b[m - 2, m - 1] = 1.0
    b[m - 1, m - 1] = 1.0
    return b


def e_generator(n: int) -> np.ndarray:
    """Generators in the coordinates used for the E-root vectors.

    E6 and E7 are D5 and D6 glued with ``(1/2, ..., 1/2, t)`` where
    ``t = sqrt(3)/2`` and ``sqrt(2)/2``.  E8 is the even coordinate system.
    """
    if n == 8:
        g = np.zeros((8, 8))
        g[0, 0] = 2.0
        for i in range(1, 7):
            g[i, i] = 1.0
            g[i - 1, i] = -1.0
        g[:, 7] = 0.5
        return g
    tail = {6: math.sqrt(3) / 2, 7: math.sqrt(2) / 2}[n]
    g = np.zeros((n, n))
    g[: n - 1, : n - 1] = _dn_basis(n - 1)
    g[: n - 1, n - 1] = 0.5
    g[n - 1, n - 1] = tail
    return g


def _e_roots(n: int):
    r1 = np.zeros(n)
    r1[:2] = 1.0
    r2 = np.full(n, 0.5)
    if n == 6:
        r2[5] = math.sqrt(3) / 2
    elif n == 7:
        r2[6] = math.sqrt(2) / 2
    return r1, r2


def make_lattice(name, n: int) -> LatticeSpec:
    """Catalogue entry for ``name`` in dimension ``n``.

    Raises ``UnsupportedDimension`` if ``n`` is outside the family's range.
    """
    name = LatticeName.parse(name)
    _check_dimension(name, n)
    eye = np.eye(n)
    if name in (LatticeName.A, LatticeName.ASTAR, LatticeName.D, LatticeName.DSTAR):
        if name is LatticeName.A:
            g = a_generator(n)
        elif name is LatticeName.ASTAR:
            g = a_generator(n, dual=True)
        elif name is LatticeName.D:
            g = d_generator(n)
        else:
            g = np.linalg.inv(d_generator(n)).T
        pair = (g @ eye[:, 0], g @ (eye[:, 0] + eye[:, 1]))
    elif name is LatticeName.CARTESIAN:
        g = eye
        pair = (eye[:, 0], eye[:, 1])
    elif name is LatticeName.BSPLIT:
        g = eye
        pair = (eye[:, 0], np.ones(n))
    elif name in (LatticeName.E6, LatticeName.E7, LatticeName.E8):
        g = e_generator(n)
        pair = _e_roots(n)
    else:
        # normals of two edges of an equilateral triangle
        g = np.array([[1.0, 0.5], [0.0, math.sqrt(3) / 2]])
        pair = (np.array([1.0, 0.0]), np.array([-0.5, math.sqrt(3) / 2]))
    return LatticeSpec(name, n, g, tuple(np.asarray(v, dtype=float) for v in pair))


def classify(inner_product: float, tol: float = TOL) -> Verdict:
    if inner_product > tol:
        return Verdict.OBTUSE
    if abs(inner_product) <= tol:
        return Verdict.RIGHT_ANGLE
    return Verdict.ACUTE


def obtuse_inner_product(spec: LatticeSpec) -> ObtuseReport:
    u, v = spec.neighbor_pair
    ip = float(u @ v)
    return ObtuseReport(ip, classify(ip))


def closed_form_inner_product(name, n: int) -> float:
    """Closed-form inner products as printed for each lattice family."""
    name = LatticeName.parse(name)
    _check_dimension(name, n)
    r = math.sqrt(n + 1)
    if name is LatticeName.A:
        return 2.0 / n * (n + r - 1.0)
    if name is LatticeName.ASTAR:
        return (n * n - 2 * n - 2 + 2 * r) / (n * (n + 1))
    return {
        LatticeName.D: 3.0,
        LatticeName.DSTAR: 2.0,
        LatticeName.CARTESIAN: 0.0,
        LatticeName.BSPLIT: 1.0,
        LatticeName.E6: 1.0,
        LatticeName.E7: 1.0,
        LatticeName.E8: 1.0,
        LatticeName.TRIANGLE_DUAL: -0.5,
    }[name]


def catalogue(max_n: int = 8):
    """All ``(name, n)`` pairs with ``n <= max_n`` that the catalogue supports."""
    out = []
    for name in LatticeName:
        lo, hi = _RANGES[name]
        top = max_n if hi is None else min(hi, max_n)
        out.extend((name, n) for n in range(lo, top + 1))
    return out
