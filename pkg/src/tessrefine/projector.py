"""L2 projection of a cell indicator onto fine indicator bases.

All integrands are piecewise constant on polygons, so Gram entries and
right-hand sides are exact clipped areas.  Overcomplete family bases are
solved by a truncated eigen-decomposition (minimum-norm solution).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .geometry import Polygon, arrangement, clip
from .splines import SpacingTooCoarse
from .tessellation import as_family

OVERLAP = 1e-12
EIG_CUT = 1e-10


class NumericalFailure(RuntimeError):
    pass


@dataclass(eq=False)
class IndicatorBasis:
    """Fine cells around a target.  ``core[i]`` marks cells overlapping the target."""

    cells: list
    members: list = field(default_factory=list)
    core: list = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for c in self.cells:
            k = c.key()
            if k in seen:
                raise ValueError("duplicate cell in basis")
            seen.add(k)
        if not self.members:
            self.members = [0] * len(self.cells)
        if not self.core:
            self.core = [True] * len(self.cells)

    def __len__(self):
        return len(self.cells)

    def to_json(self):
        return [{"vertices": c.to_json(), "member": int(m), "core": bool(k)}
                for c, m, k in zip(self.cells, self.members, self.core)]


def _touch(a: Polygon, b: Polygon, tol=1e-9) -> bool:
    if clip(a, b) is not None:
        return True
    va, vb = a.vertices, b.vertices
    return any(b.contains(v, tol) for v in va) or any(a.contains(v, tol) for v in vb)


def basis_for(target: Polygon, fine, ring: bool = True) -> IndicatorBasis:
    """Cells of ``fine`` overlapping ``target`` (area > 1e-12), plus one ring of neighbours."""
    fam = as_family(fine)
    diam = max(c.diameter for c in fam.base.prototypes)
    lo, hi = target.bounds
    pad = 2 * diam if ring else 0.0
    cand = []
    seen = set()
    for c, j in fam.cells_in(lo - pad, hi + pad):
        k = c.key()
        if k not in seen:
            seen.add(k)
            cand.append((c, j))
    core = [(c, j) for c, j in cand if (q := clip(c, target)) is not None and q.area > OVERLAP]
    chosen = list(core)
    if ring:
        keys = {c.key() for c, _ in core}
        for c, j in cand:
            if c.key() not in keys and any(_touch(c, d) for d, _ in core):
                chosen.append((c, j))
    order = sorted(range(len(chosen)), key=lambda i: (chosen[i][1], *np.round(chosen[i][0].centroid, 9)))
    core_keys = {c.key() for c, _ in core}
    cells = [chosen[i][0] for i in order]
    return IndicatorBasis(cells, [chosen[i][1] for i in order], [c.key() in core_keys for c in cells])


def build_gram(target: Polygon, basis: IndicatorBasis):
    m = len(basis)
    g = np.zeros((m, m))
    b = np.zeros(m)
    for i, ci in enumerate(basis.cells):
        g[i, i] = ci.area
        q = clip(ci, target)
        b[i] = 0.0 if q is None else q.area
        lo, hi = ci.bounds
        for j in range(i + 1, m):
            lo2, hi2 = basis.cells[j].bounds
            if np.any(lo > hi2) or np.any(lo2 > hi):
                continue
            q = clip(ci, basis.cells[j])
            g[i, j] = g[j, i] = 0.0 if q is None else q.area
    return g, b


def min_norm_solve(g, b, cut=EIG_CUT):
    """Returns ``(c, rank, condition)``; condition over the retained spectrum."""
    w, v = np.linalg.eigh(g)
    top = float(w.max()) if len(w) else 0.0
    if top <= 0:
        return np.zeros_like(b), 0, 1.0
    keep = w > cut * top
    c = v[:, keep] @ ((v[:, keep].T @ b) / w[keep])
    return c, int(keep.sum()), float(top / w[keep].min())


@dataclass
class ProjectionResult:
    coefficients: np.ndarray
    squared_residual: float
    gram_condition: float
    rank: int
    target_area: float
    basis: IndicatorBasis
    l1_error: float | None = None

    @property
    def l2_error(self) -> float:
        return float(np.sqrt(self.squared_residual))

    @property
    def relative_l2(self) -> float:
        return float(np.sqrt(self.squared_residual / self.target_area))

    def to_json(self, cells=True):
        out = {"squared_residual": self.squared_residual, "l2_error": self.l2_error,
               "relative_l2": self.relative_l2, "gram_condition": self.gram_condition,
               "rank": self.rank, "size": len(self.basis)}
        if self.l1_error is not None:
            out["l1_error"] = self.l1_error
        if cells:
            out["coefficients"] = [
                {"coefficient": float(c), **d} for c, d in zip(self.coefficients, self.basis.to_json())]
        return out


def errors_by_pieces(target: Polygon, basis: IndicatorBasis, coefficients):
    """``(L2 squared, L1)`` of ``chi_target - sum c_i chi_i`` summed over arrangement pieces."""
    polys = [target] + list(basis.cells)
    lo = np.min([p.bounds[0] for p in polys], axis=0) - 1.0
    hi = np.max([p.bounds[1] for p in polys], axis=0) + 1.0
    coef = np.concatenate([[-1.0], np.asarray(coefficients, dtype=float)])
    l2 = l1 = 0.0
    for piece in arrangement(polys, Polygon.box(*lo, *hi)):
        e = float(coef[list(piece.cells)].sum()) if piece.cells else 0.0
        l2 += e * e * piece.area
        l1 += abs(e) * piece.area
    return l2, l1


def project(target: Polygon, basis, l1: bool = True) -> ProjectionResult:
    """Least-squares projection of ``chi_target`` onto ``basis``.

    ``basis`` may also be a tessellation or family, in which case
    ``basis_for`` picks the cells.
    """
    if not isinstance(basis, IndicatorBasis):
        basis = basis_for(target, basis)
    g, b = build_gram(target, basis)
    c, rank, cond = min_norm_solve(g, b)
    if np.linalg.norm(g @ c - b) > 1e-6 * max(np.linalg.norm(b), 1e-300):
        raise NumericalFailure("Gram solve residual too large")
    sq = float(target.area - b @ c)
    if sq < -1e-9:
        raise NumericalFailure(f"negative squared residual {sq:.3e}")
    sq = max(sq, 0.0)
    res = ProjectionResult(c, sq, cond, rank, target.area, basis)
    if l1:
        res.l1_error = errors_by_pieces(target, basis, c)[1]
    return res


def _fine(t, scale, level):
    fam = as_family(t)
    s = Fraction(scale) ** level
    return fam if level == 0 else fam.scaled(float(s), fam.base.offset)


def error_vs_level(tess, levels: int, target: Polygon | None = None, scale=Fraction(1, 2)):
    """Projection results for levels ``0 .. levels-1`` (level ``i`` uses ``scale**i``)."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    fam = as_family(tess)
    if target is None:
        target = fam.base.reference_cells()[0]
    return [project(target, _fine(fam, scale, i), l1=False) for i in range(levels)]


# -- raster oracle ----------------------------------------------------------

def _mask(poly: Polygon, x, y):
    inside = np.ones((len(y), len(x)), dtype=bool)
    for f in poly.facets():
        inside &= (f.normal[0] * x[None, :] + f.normal[1] * y[:, None]) <= f.offset
    return inside


def rasterized_cross_check(target: Polygon, basis, h: float, supersample: int = 4) -> float:
    """Squared residual with every area replaced by a supersampled pixel count."""
    if not isinstance(basis, IndicatorBasis):
        basis = basis_for(target, basis)
    diam = min(c.diameter for c in basis.cells)
    if h > diam / 32 + 1e-15:
        raise SpacingTooCoarse(f"h = {h} exceeds 1/32 of the cell diameter {diam}")
    step = h / supersample
    polys = [target] + list(basis.cells)
    lo = np.floor(np.min([p.bounds[0] for p in polys], axis=0) / h) * h
    masks = []
    for p in polys:
        plo, phi = p.bounds
        i0 = np.floor((plo - lo) / step).astype(int)
        i1 = np.ceil((phi - lo) / step).astype(int) + 1
        x = lo[0] + (np.arange(i0[0], i1[0]) + 0.5) * step
        y = lo[1] + (np.arange(i0[1], i1[1]) + 0.5) * step
        masks.append((i0, _mask(p, x, y)))

    def overlap(a, b):
        (ia, ma), (ib, mb) = masks[a], masks[b]
        s = np.maximum(ia, ib)
        e = np.minimum(ia + ma.shape[::-1], ib + mb.shape[::-1])
        if np.any(e <= s):
            return 0.0
        sa = ma[s[1] - ia[1]:e[1] - ia[1], s[0] - ia[0]:e[0] - ia[0]]
        sb = mb[s[1] - ib[1]:e[1] - ib[1], s[0] - ib[0]:e[0] - ib[0]]
        return float(np.count_nonzero(sa & sb)) * step * step

    m = len(basis)
    g = np.zeros((m, m))
    b = np.array([overlap(0, i + 1) for i in range(m)])
    for i in range(m):
        for j in range(i, m):
            g[i, j] = g[j, i] = overlap(i + 1, j + 1)
    c, _, _ = min_norm_solve(g, b)
    t_area = float(np.count_nonzero(masks[0][1])) * step * step
    return max(float(t_area - b @ c), 0.0)
