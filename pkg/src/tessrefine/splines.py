"""Box-type splines on polygons by repeated convolution on a pixel grid.

Grid functions live on the global lattice ``h Z^2``: the value at index
``(iy, ix)`` is the sample at pixel centre ``(ix h, iy h)``.  Because all
grids share that lattice, sums and products of grid functions only need
integer index offsets.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal

from .geometry import Polygon
from .tessellation import hexagonal, square

SUPERSAMPLE = 4
SUPPORT_EPS = 1e-13


class SpacingTooCoarse(ValueError):
    pass


class SpacingMismatch(ValueError):
    pass


def rng(seed=None) -> np.random.Generator:
    """Generator seeded from ``TESSREFINE_SEED`` (default 0)."""
    if seed is None:
        seed = int(os.environ.get("TESSREFINE_SEED", "0"))
    return np.random.default_rng(seed)


@dataclass(eq=False)
class GridFunction:
    index: tuple          # (ix0, iy0) of values[0, 0]
    h: float
    values: np.ndarray

    @property
    def origin(self) -> np.ndarray:
        return np.array(self.index, dtype=float) * self.h

    @property
    def shape(self):
        return self.values.shape

    def integral(self) -> float:
        return float(self.values.sum() * self.h * self.h)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.values ** 2) * self.h * self.h))

    def coords(self):
        ny, nx = self.values.shape
        x = (self.index[0] + np.arange(nx)) * self.h
        y = (self.index[1] + np.arange(ny)) * self.h
        return x, y

    def support_points(self, eps=SUPPORT_EPS) -> np.ndarray:
        iy, ix = np.nonzero(np.abs(self.values) > eps)
        return np.column_stack([(ix + self.index[0]) * self.h, (iy + self.index[1]) * self.h])

    def boundary_vanishes(self, eps=SUPPORT_EPS) -> bool:
        v = np.abs(self.values)
        return bool(max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max()) <= eps)

    def scaled(self, s) -> "GridFunction":
        return GridFunction(self.index, self.h, s * self.values)

    def evaluate(self, points) -> np.ndarray:
        """Bilinear interpolation; zero outside the grid."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        col = p[:, 0] / self.h - self.index[0]
        row = p[:, 1] / self.h - self.index[1]
        return ndimage.map_coordinates(self.values, [row, col], order=1, mode="constant", cval=0.0)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_spacing(self, other)
        lo = np.minimum(self.index, other.index)
        hi = np.maximum(np.add(self.index, self.shape[::-1]), np.add(other.index, other.shape[::-1]))
        out = np.zeros((hi[1] - lo[1], hi[0] - lo[0]))
        for g in (self, other):
            ox, oy = g.index[0] - lo[0], g.index[1] - lo[1]
            out[oy:oy + g.shape[0], ox:ox + g.shape[1]] += g.values
        return GridFunction((int(lo[0]), int(lo[1])), self.h, out)

    def to_pgm(self) -> str:
        v = self.values[::-1]
        top = float(np.abs(v).max()) or 1.0
        q = np.clip(np.round(255 * np.abs(v) / top), 0, 255).astype(int)
        lines = ["P2", f"{q.shape[1]} {q.shape[0]}", "255"]
        lines.extend(" ".join(map(str, row)) for row in q)
        return "\n".join(lines) + "\n"


def write_pgm(f: GridFunction, path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f.to_pgm())


def _check_spacing(f, g):
    if abs(f.h - g.h) > 1e-12 * max(f.h, g.h):
        raise SpacingMismatch(f"grid spacings differ: {f.h} vs {g.h}")


def rasterize_indicator(p: Polygon, h: float, check: bool = True) -> GridFunction:
    """Pixel coverage of ``p`` from a 4x4 subsample per pixel.

    Subsamples sit at ``(i + (j - 1.5)/4) h`` so they never fall on
    polygon edges through multiples of ``h/4``.
    """
    if p is None:
        raise ValueError("empty polygon")
    if check and h > p.diameter / 16 + 1e-15:
        raise SpacingTooCoarse(f"h = {h} exceeds diameter/16 = {p.diameter / 16}")
    lo, hi = p.bounds
    i0 = np.floor(lo / h).astype(int) - 1
    i1 = np.ceil(hi / h).astype(int) + 1
    s = SUPERSAMPLE
    off = (np.arange(s) - (s - 1) / 2) / s
    x = ((np.arange(i0[0], i1[0] + 1)[:, None] + off[None, :]) * h).ravel()
    y = ((np.arange(i0[1], i1[1] + 1)[:, None] + off[None, :]) * h).ravel()
    inside = np.ones((len(y), len(x)), dtype=bool)
    for f in p.facets():
        inside &= (f.normal[0] * x[None, :] + f.normal[1] * y[:, None]) <= f.offset
    cover = inside.reshape(len(y) // s, s, len(x) // s, s).mean(axis=(1, 3))
    return GridFunction((int(i0[0]), int(i0[1])), h, cover)


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """``h^2``-weighted discrete convolution, approximating the continuous one."""
    _check_spacing(f, g)
    v = signal.fftconvolve(f.values, g.values) * f.h * f.h
    v[np.abs(v) < 1e-14 * max(1.0, np.abs(v).max())] = 0.0
    return GridFunction((f.index[0] + g.index[0], f.index[1] + g.index[1]), f.h, v)


def unit_kernel(p: Polygon, h: float) -> GridFunction:
    k = rasterize_indicator(p, h)
    return k.scaled(1.0 / k.integral())


def kernel_power(p: Polygon, h: float, m: int) -> GridFunction | None:
    """``m``-fold convolution of the unit-integral kernel of ``p`` (None for ``m = 0``)."""
    if m == 0:
        return None
    k = unit_kernel(p, h)
    out = k
    for _ in range(m - 1):
        out = convolve(out, k)
    return out


def cell_spline(cell: Polygon, k: int, h: float, kernel=None) -> GridFunction:
    """Indicator of ``cell`` convolved ``k - 1`` times with its unit-integral kernel."""
    if k < 1:
        raise ValueError("order k must be >= 1")
    f = rasterize_indicator(cell, h)
    if kernel is None:
        kernel = kernel_power(cell, h, k - 1)
    return f if kernel is None else convolve(f, kernel)


def hexagon(radius: float = 1.0) -> Polygon:
    return Polygon.regular(6, radius)


def unit_square() -> Polygon:
    return Polygon.box(0.0, 0.0, 1.0, 1.0)


def cell_and_lattice(name: str):
    """Prototype cell and shift basis (columns) for ``hex`` or ``square``."""
    if name == "hex":
        return hexagon(), hexagonal(1.0).basis
    if name == "square":
        return unit_square(), square(1.0).basis
    raise ValueError(f"unknown spline cell {name!r}")


def hex_spline(k: int, h: float) -> GridFunction:
    return cell_spline(hexagon(), k, h)


def square_spline(k: int, h: float) -> GridFunction:
    return cell_spline(unit_square(), k, h)


def _shifts(basis, radius: float):
    """Lattice points ``basis @ z`` with norm <= radius."""
    b = np.asarray(basis, dtype=float)
    m = int(np.ceil(radius * np.abs(np.linalg.inv(b)).sum(axis=1).max())) + 1
    z = np.array([(i, j) for i in range(-m, m + 1) for j in range(-m, m + 1)], dtype=float)
    pts = z @ b.T
    pts = pts[np.linalg.norm(pts, axis=1) <= radius + 1e-12]
    return pts[np.lexsort((pts[:, 0], pts[:, 1]))]


def shift_sum(cell: Polygon, basis, k: int, h: float, radius: float) -> GridFunction:
    """Sum of the order-``k`` splines over all shifts within ``radius``."""
    total = None
    for s in _shifts(basis, radius):
        r = rasterize_indicator(cell.translated(s), h)
        total = r if total is None else total + r
    kern = kernel_power(cell, h, k - 1)
    return total if kern is None else convolve(total, kern)


def partition_of_unity_error(cell_name: str, k: int, h: float, n_points: int = 100,
                             window: float = 1.0, seed=None) -> float:
    """Max ``|sum_s B(x - s) - 1|`` over random points with ``|x_i| <= window / 2``."""
    cell, basis = cell_and_lattice(cell_name)
    c = cell.centroid
    total = shift_sum(cell, basis, k, h, radius=window + k * cell.diameter + 2.0)
    pts = c + rng(seed).uniform(-window / 2, window / 2, size=(n_points, 2))
    return float(np.max(np.abs(total.evaluate(pts) - 1.0)))


def support_diameter(f: GridFunction, eps=SUPPORT_EPS) -> float:
    from scipy.spatial import ConvexHull
    pts = f.support_points(eps)
    if len(pts) < 3:
        return 0.0
    hull = pts[ConvexHull(pts).vertices]
    d = hull[:, None, :] - hull[None, :, :]
    return float(np.sqrt((d ** 2).sum(-1)).max())


def support_within(f: GridFunction, region: Polygon, tol: float, eps=SUPPORT_EPS) -> bool:
    """All support samples lie within ``tol`` of the convex ``region``."""
    pts = f.support_points(eps)
    rows = region.halfplanes()
    return bool(np.all(pts @ rows[:, :2].T <= rows[:, 2] + tol))


def _dot(f: GridFunction, g: GridFunction) -> float:
    lo = np.maximum(f.index, g.index)
    hi = np.minimum(np.add(f.index, f.shape[::-1]), np.add(g.index, g.shape[::-1]))
    if np.any(hi <= lo):
        return 0.0
    a = f.values[lo[1] - f.index[1]:hi[1] - f.index[1], lo[0] - f.index[0]:hi[0] - f.index[0]]
    b = g.values[lo[1] - g.index[1]:hi[1] - g.index[1], lo[0] - g.index[0]:hi[0] - g.index[0]]
    return float(np.sum(a * b))


def spline_refinability_residual(k: int, h: float, cell: str = "hex") -> float:
    """Relative residual ``|r| / |target|`` of the order-``k`` spline against its half-scale shifts.

    The fine splines are built like the coarse one: every half-scale cell
    shifted by half-lattice vectors is rasterized and convolved with the
    half-scale kernel power.  Coefficients come from the discrete normal
    equations (minimum-norm solve).
    """
    if not 1 <= k <= 3:
        raise ValueError("order k must be 1..3")
    proto, basis = cell_and_lattice(cell)
    target = cell_spline(proto, k, h)
    # half-scale about the lattice reference point keeps the shifts on L/2
    fine = proto.scaled(0.5, anchor=(0.0, 0.0))
    if h > fine.diameter / 16 + 1e-15:
        raise SpacingTooCoarse(f"h = {h} too coarse for the half-scale cell")
    kern = kernel_power(fine, h, k - 1)
    reach = k * proto.diameter / 2 + k * fine.diameter / 2 + fine.diameter
    cols = []
    for s in _shifts(0.5 * basis, reach):
        f = cell_spline(fine.translated(s), k, h, kernel=kern) if kern is not None \
            else rasterize_indicator(fine.translated(s), h)
        cols.append(f)
    m = len(cols)
    g = np.zeros((m, m))
    b = np.array([_dot(c, target) for c in cols])
    for i in range(m):
        for j in range(i, m):
            g[i, j] = g[j, i] = _dot(cols[i], cols[j])
    w, v = np.linalg.eigh(g)
    keep = w > 1e-12 * w.max()
    coef = v[:, keep] @ ((v[:, keep].T @ b) / w[keep])
    tt = _dot(target, target)
    return float(np.sqrt(max(tt - b @ coef, 0.0) / tt))
