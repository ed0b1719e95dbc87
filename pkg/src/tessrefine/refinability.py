"""Necessary conditions for refinable indicator spaces on planar tessellations.

Every test here is local: it looks at one shift period of the coarse
tessellation (or a three-period window around it) and relies on shift
invariance to extend the verdict to the whole plane.  A ``Fail`` verdict
always carries geometric evidence; a ``Pass`` only means that the
particular necessary condition holds.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .geometry import (Facet2, Polygon, arrangement, clip, clip_halfplane, reflect_across_line,
                       reflect_point)
from .tessellation import (ScaledCopy, Tessellation, TessellationFamily, as_family,
                           as_tessellation)

TOL = 1e-9
SLIVER = 1e-10
PERIODS = 3.0


class Verdict(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"


class PreconditionViolated(ValueError):
    pass


class PieceIdentificationFailed(RuntimeError):
    pass


@dataclass
class CriterionReport:
    criterion: str
    verdict: Verdict
    witness: dict | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict is Verdict.FAIL and not self.witness:
            raise ValueError("a failing criterion needs a witness")

    @property
    def failed(self) -> bool:
        return self.verdict is Verdict.FAIL

    def to_json(self):
        out = {"criterion": self.criterion, "verdict": self.verdict.value}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.details:
            out["details"] = self.details
        return out


# -- segment bookkeeping ----------------------------------------------------

def _pt(x):
    return [float(x[0]), float(x[1])]


def _segment_json(a, b):
    return [_pt(a), _pt(b)]


def _edges(cells) -> np.ndarray:
    out = [(a, b) for c in cells for a, b in c.edges()]
    return np.array(out, dtype=float).reshape(-1, 2, 2)


def _intervals_on_line(origin, direction, edges, tol=TOL):
    """Parameter intervals of the edges lying on the line ``origin + t direction``."""
    if len(edges) == 0:
        return np.zeros((0, 2))
    nrm = np.array([direction[1], -direction[0]])
    p = edges[:, 0] - origin
    q = edges[:, 1] - origin
    on = (np.abs(p @ nrm) <= tol) & (np.abs(q @ nrm) <= tol)
    t = np.column_stack([p[on] @ direction, q[on] @ direction])
    return np.sort(t, axis=1)


def _uncovered(lo, hi, intervals, tol=TOL):
    """Sub-intervals of ``[lo, hi]`` longer than ``tol`` not covered by ``intervals``."""
    gaps = []
    cur = lo
    for s, e in sorted(map(tuple, intervals)):
        if e <= cur + tol:
            continue
        if s > cur + tol:
            gaps.append((cur, min(s, hi)))
        cur = max(cur, e)
        if cur >= hi - tol:
            break
    if cur < hi - tol:
        gaps.append((cur, hi))
    return [(s, e) for s, e in gaps if e - s > tol and s < hi - tol]


def _coverage_counts(lo, hi, intervals, tol=TOL):
    """Yield ``(s, e, count)`` over the elementary pieces of ``[lo, hi]``."""
    pts = [lo, hi]
    for s, e in intervals:
        pts.extend(x for x in (s, e) if lo < x < hi)
    pts = sorted(pts)
    merged = [pts[0]]
    for x in pts[1:]:
        if x - merged[-1] > tol:
            merged.append(x)
    for s, e in zip(merged, merged[1:]):
        m = 0.5 * (s + e)
        cnt = int(np.sum((intervals[:, 0] <= m) & (intervals[:, 1] >= m))) if len(intervals) else 0
        yield s, e, cnt


def _chord(window: Polygon, origin, direction):
    """Parameter range of the line inside a convex window."""
    lo, hi = -np.inf, np.inf
    for f in window.facets():
        a = f.normal @ direction
        b = f.offset - f.normal @ origin
        if abs(a) < 1e-15:
            if b < 0:
                return None
            continue
        t = b / a
        if a > 0:
            hi = min(hi, t)
        else:
            lo = max(lo, t)
    return (lo, hi) if hi - lo > TOL else None


def _fine(fine) -> Tessellation:
    return as_tessellation(fine)


def default_fine(coarse: Tessellation, scale=Fraction(1, 2)) -> ScaledCopy:
    return ScaledCopy(coarse, scale)


# -- straddling -------------------------------------------------------------

def straddles(cell: Polygon, f: Facet2, min_area=SLIVER) -> bool:
    """True when ``cell`` has interior on both sides of ``f`` within the span of ``f``."""
    d = f.direction
    slab = clip_halfplane(cell, -d, -(d @ f.a), min_area)
    slab = clip_halfplane(slab, d, d @ f.b, min_area)
    if slab is None:
        return False
    inner = clip_halfplane(slab, f.normal, f.offset, min_area)
    outer = clip_halfplane(slab, -f.normal, -f.offset, min_area)
    return inner is not None and outer is not None


def straddling_cells(f: Facet2, fine) -> list[Polygon]:
    t = _fine(fine)
    lo = np.minimum(f.a, f.b)
    hi = np.maximum(f.a, f.b)
    return [c for c in t.cells_in(lo, hi) if straddles(c, f)]


def straddle_witness(f: Facet2, fine) -> Polygon | None:
    """A fine cell straddling ``f``, or None when the fine facets follow ``f``."""
    cells = straddling_cells(f, fine)
    if not cells:
        return None
    return min(cells, key=lambda c: tuple(np.round(c.centroid, 9)))


# -- single tessellation ----------------------------------------------------

def facet_union_test(coarse: Tessellation, fine=None) -> CriterionReport:
    """Every coarse facet must be a union of fine facets.

    One shift period of coarse facets is checked.  ``fine`` defaults to the
    half-scale copy anchored at the coarse reference point.
    """
    if fine is None:
        fine = default_fine(coarse)
    ft = _fine(fine)
    uncovered = []
    bisected = []
    seen = set()
    facets = [f for c in coarse.reference_cells() for f in c.facets(parent=c)]
    for f in facets:
        lo = np.minimum(f.a, f.b) - TOL
        hi = np.maximum(f.a, f.b) + TOL
        cells = ft.cells_in(lo, hi)
        ivs = _intervals_on_line(f.a, f.direction, _edges(cells))
        gaps = _uncovered(0.0, f.length, ivs)
        if gaps:
            s, e = gaps[0]
            uncovered.append((f, f.a + s * f.direction, f.a + e * f.direction))
        for c in cells:
            if straddles(c, f) and c.key() not in seen:
                seen.add(c.key())
                bisected.append(c)
    bisected.sort(key=lambda c: tuple(np.round(c.centroid, 9)))
    details = {"facets_checked": len(facets), "straddling_cells": len(bisected)}
    if not uncovered:
        return CriterionReport("facet-union", Verdict.PASS, details=details)
    f, a, b = uncovered[0]
    witness = {
        "facet": f.to_json(),
        "uncovered_segment": _segment_json(a, b),
        "straddling_cell": straddle_witness(f, ft).to_json(),
        "bisected_cells": [c.to_json() for c in bisected],
    }
    return CriterionReport("facet-union", Verdict.FAIL, witness, details)


def _line_coverage(window: Polygon, facets, cells):
    edges = _edges(cells)
    for f in facets:
        rng = _chord(window, f.a, f.direction)
        if rng is None:
            continue
        ivs = _intervals_on_line(f.a, f.direction, edges)
        gaps = _uncovered(rng[0], rng[1], ivs)
        if gaps:
            s, e = gaps[0]
            return f, f.a + s * f.direction, f.a + e * f.direction
    return None


def hyperplane_extension_test(t: Tessellation, periods: float = PERIODS) -> CriterionReport:
    """The full line through every facet must be covered by facets of ``t``."""
    window = t.period_window(periods)
    lo, hi = window.bounds
    cells = t.cells_in(lo, hi)
    facets = [f for c in t.reference_cells() for f in c.facets(parent=c)]
    hit = _line_coverage(window, facets, cells)
    details = {"facets_checked": len(facets), "window_periods": periods}
    if hit is None:
        return CriterionReport("hyperplane-extension", Verdict.PASS, details=details)
    f, a, b = hit
    return CriterionReport("hyperplane-extension", Verdict.FAIL,
                           {"facet": f.to_json(), "uncovered_segment": _segment_json(a, b)}, details)


def _abutting(cell: Polygon):
    """Ordered pairs of consecutive facets ``(f1, f2)`` in both orders."""
    fs = cell.facets(parent=cell)
    m = len(fs)
    for i in range(m):
        a, b = fs[i], fs[(i + 1) % m]
        yield a, b
        yield b, a


def obtuse_reflection_test(t: Tessellation) -> CriterionReport:
    """Fails when two abutting facets meet obtusely and the mirror cell is a cell of ``t``."""
    obtuse = 0
    for cell in t.reference_cells():
        for f1, f2 in _abutting(cell):
            ip = float(f1.normal @ f2.normal)
            if ip <= TOL:
                continue
            obtuse += 1
            mirror = reflect_across_line(cell, f2)
            if t.is_cell(mirror):
                witness = {"cell": cell.to_json(), "f1": f1.to_json(), "f2": f2.to_json(),
                           "normal_product": ip, "reflected_cell": mirror.to_json()}
                return CriterionReport("obtuse-reflection", Verdict.FAIL, witness,
                                       {"obtuse_pairs": obtuse})
    return CriterionReport("obtuse-reflection", Verdict.PASS,
                           details={"obtuse_pairs": obtuse, "triggered": obtuse > 0})


# -- families ---------------------------------------------------------------

def _family_window(fam: TessellationFamily, periods=PERIODS):
    return fam.base.period_window(periods)


def efficiency_test(fam, periods: float = PERIODS) -> CriterionReport:
    """No sub-segment of positive length may lie on more than two cell facets."""
    fam = as_family(fam)
    window = _family_window(fam, periods)
    lo, hi = window.bounds
    cells = [c for c, _ in fam.cells_in(lo, hi)]
    edges = _edges(cells)
    for a, b in edges:
        if clip(window, Polygon.box(*(np.minimum(a, b) - 1e-3), *(np.maximum(a, b) + 1e-3))) is None:
            continue
        length = float(np.hypot(*(b - a)))
        d = (b - a) / length
        ivs = _intervals_on_line(a, d, edges)
        for s, e, cnt in _coverage_counts(0.0, length, ivs):
            if cnt > 2 and e - s > TOL:
                seg = _segment_json(a + s * d, a + e * d)
                return CriterionReport("efficiency", Verdict.FAIL,
                                       {"segment": seg, "facet_count": cnt},
                                       {"members": len(fam)})
    return CriterionReport("efficiency", Verdict.PASS, details={"members": len(fam)})


def family_hyperplane_test(fam, periods: float = PERIODS) -> CriterionReport:
    """Lines through all member facets must be covered by the pooled facets."""
    fam = as_family(fam)
    for m in fam.members:
        window = m.period_window(periods)
        lo, hi = window.bounds
        cells = [c for c, _ in fam.cells_in(lo, hi)]
        facets = [f for c in m.reference_cells() for f in c.facets(parent=c)]
        hit = _line_coverage(window, facets, cells)
        if hit is not None:
            f, a, b = hit
            return CriterionReport("family-hyperplane", Verdict.FAIL,
                                   {"facet": f.to_json(), "uncovered_segment": _segment_json(a, b)},
                                   {"members": len(fam)})
    return CriterionReport("family-hyperplane", Verdict.PASS, details={"members": len(fam)})


def overlap_criterion_test(fam) -> CriterionReport:
    """Obtuse abutting facets ``f_a, f_b`` with no sharper angle at ``f_b`` and a mirror cell.

    The family must be efficient; ``PreconditionViolated`` otherwise.  The
    angle condition is evaluated on outward normals: a facet ``f`` meets
    ``f_b`` at an angle of at least ``pi - alpha`` iff
    ``n_f . n_b >= -n_a . n_b``.
    """
    fam = as_family(fam)
    eff = efficiency_test(fam)
    if eff.failed:
        raise PreconditionViolated("family is not efficient: " + repr(eff.witness))
    t0 = fam.base
    obtuse = 0
    for cell in t0.reference_cells():
        fs = cell.facets(parent=cell)
        m = len(fs)
        for ib in range(m):
            fb = fs[ib]
            neighbours = (fs[ib - 1], fs[(ib + 1) % m])
            for fa in neighbours:
                ip = float(fa.normal @ fb.normal)
                if ip <= TOL:
                    continue
                obtuse += 1
                if not all(float(f.normal @ fb.normal) >= -ip - TOL for f in neighbours):
                    continue
                mirror = reflect_across_line(cell, fb)
                if not t0.is_cell(mirror):
                    continue
                alpha = math.pi - math.acos(max(-1.0, min(1.0, ip)))
                witness = {"cell": cell.to_json(), "f_a": fa.to_json(), "f_b": fb.to_json(),
                           "facet_b_index": ib, "alpha": alpha, "pi_minus_alpha": math.pi - alpha,
                           "normal_product": ip, "reflected_cell": mirror.to_json()}
                return CriterionReport("overlap", Verdict.FAIL, witness, {"obtuse_pairs": obtuse})
    return CriterionReport("overlap", Verdict.PASS,
                           details={"obtuse_pairs": obtuse, "triggered": obtuse > 0})


def cells_overlapping(poly: Polygon, fam, min_area=SLIVER):
    """``(cell, member, fraction of poly covered)`` for family cells meeting ``poly``."""
    fam = as_family(fam)
    lo, hi = poly.bounds
    out = []
    for c, j in fam.cells_in(lo - 1e-9, hi + 1e-9):
        q = clip(c, poly)
        if q is not None and q.area > min_area:
            out.append((c, j, q.area / poly.area))
    out.sort(key=lambda x: (x[1], *np.round(x[0].centroid, 9)))
    return out


def lozenge() -> Polygon:
    """Pair of triangles at ``(-3/4, sqrt3)`` shared by three half-scale cells of example2-family."""
    s3 = math.sqrt(3)
    return Polygon([(-1.0, s3), (-0.75, s3 - s3 / 4), (-0.5, s3), (-0.75, s3 + s3 / 4)])


# -- the step certificate ---------------------------------------------------

@dataclass
class Certificate:
    """Local contradiction between unit steps across ``f_b`` near ``p``."""

    applicable: bool
    point: np.ndarray
    facet: Facet2
    required_step: float = 1.0
    implied_step: float | None = None
    residual: float = 0.0
    feasible: bool = True
    pieces: dict = field(default_factory=dict)
    facet_cells: list = field(default_factory=list)
    cells: list = field(default_factory=list)
    crossing_cells: int = 0
    note: str = ""

    def to_json(self):
        out = {"applicable": self.applicable, "point": _pt(self.point), "facet": self.facet.to_json(),
               "required_step": self.required_step, "implied_step": self.implied_step,
               "least_squares_residual": self.residual, "feasible": self.feasible,
               "pieces": {k: v.to_json() for k, v in sorted(self.pieces.items())},
               "facet_cells": [c.to_json() for c in self.facet_cells],
               "crossing_cells": self.crossing_cells}
        if self.note:
            out["note"] = self.note
        return out


def _cells_on_facet(cells, fb: Facet2, inside_only=True):
    """Cells with an edge on ``fb``'s line overlapping ``fb``, with that edge's parameter range."""
    out = []
    for c in cells:
        if inside_only and c.centroid @ fb.normal - fb.offset >= 0:
            continue
        ivs = _intervals_on_line(fb.a, fb.direction, _edges([c]))
        for s, e in ivs:
            if min(e, fb.length) - max(s, 0.0) > TOL:
                out.append((c, float(s), float(e)))
    return out


def locate_shared_point(fine_cells, fb: Facet2):
    """Points of ``fb``'s relative interior where two inner fine facets on ``fb`` meet."""
    on = _cells_on_facet(fine_cells, fb)
    ends = sorted({round(x, 9) for _, s, e in on for x in (s, e) if TOL < x < fb.length - TOL})
    shared = []
    for x in ends:
        left = [c for c, s, e in on if abs(e - x) <= 1e-8]
        right = [c for c, s, e in on if abs(s - x) <= 1e-8]
        if left and right:
            shared.append(fb.a + x * fb.direction)
    mid = fb.length / 2
    shared.sort(key=lambda p: (round(abs((p - fb.a) @ fb.direction - mid), 9),
                               round(float((p - fb.a) @ fb.direction), 9)))
    return shared


def step_infeasibility_certificate(fam, fine=None, f_b: Facet2 | int | None = None, p=None,
                                   radius: float | None = None) -> Certificate:
    """Build the unit-step constraints around ``p`` on ``f_b`` and test them.

    Unknowns are the coefficients of every fine cell meeting a small disc
    around ``p``.  Each piece of the local arrangement inside the coarse
    cell is paired with its mirror image across ``f_b``; every pair must
    show a step of exactly one.  When two fine cells with facets on
    ``f_b`` overlap near ``p`` the overlap piece's step is forced to the
    sum of the two single-cover steps, i.e. two.
    """
    fam = as_family(fam)
    if fine is None:
        fine = fam.scaled(0.5)
    fine = as_family(fine)
    cell = fam.base.reference_cells()[0]
    facets = cell.facets(parent=cell)
    if f_b is None:
        f_b = max(range(len(facets)), key=lambda i: (round(facets[i].midpoint[1], 9), -i))
    fb = facets[f_b] if isinstance(f_b, int) else f_b

    lo = np.minimum(fb.a, fb.b) - 1e-6
    hi = np.maximum(fb.a, fb.b) + 1e-6
    near = [c for c, _ in fine.cells_in(lo, hi)]
    if p is None:
        shared = locate_shared_point(near, fb)
        if not shared:
            return Certificate(False, fb.midpoint, fb, note="no shared fine facet endpoint on the facet")
        p = shared[0]
    p = np.asarray(p, dtype=float)

    if radius is None:
        scale = min(c.diameter for c in near)
        radius = 0.05 * scale
    disc = Polygon.regular(48, radius, center=p)
    local = [c for c, _ in fine.cells_in(p - radius, p + radius) if clip(c, disc) is not None]
    uniq = []
    for c in local:
        if not any(c.same_as(u) for u in uniq):
            uniq.append(c)
    local = sorted(uniq, key=lambda c: tuple(np.round(c.centroid, 9)))

    pieces = arrangement([clip(c, disc) for c in local], disc)
    inside = [q for q in pieces if q.polygon.centroid @ fb.normal - fb.offset < 0]
    outside = [q for q in pieces if q.polygon.centroid @ fb.normal - fb.offset > 0]

    def row(piece):
        r = np.zeros(len(local))
        r[list(piece.cells)] = 1.0
        return r

    def mirror(piece):
        m = reflect_point(piece.polygon.centroid, fb)
        hits = [q for q in outside if q.polygon.contains(m, tol=1e-9)]
        if len(hits) != 1:
            raise PieceIdentificationFailed("no unique mirror piece across the facet")
        return hits[0]

    pairs = [(q, mirror(q)) for q in inside]
    a = np.array([row(i) - row(o) for i, o in pairs])
    rhs = np.ones(len(pairs))
    sol, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    residual = float(np.linalg.norm(a @ sol - rhs))

    on = _cells_on_facet(local, fb)
    at_p = [(c, s, e) for c, s, e in on
            if min(abs(s - (p - fb.a) @ fb.direction), abs(e - (p - fb.a) @ fb.direction)) <= 1e-8]
    at_p.sort(key=lambda x: x[1])
    idx = [next(i for i, u in enumerate(local) if u.same_as(c)) for c, _, _ in at_p]
    # cells cut by the facet line inside the disc contribute equally on both sides
    crossing = 0
    for c in local:
        q = clip(c, disc)
        if clip_halfplane(q, fb.normal, fb.offset, SLIVER) is not None and \
                clip_halfplane(q, -fb.normal, -fb.offset, SLIVER) is not None:
            crossing += 1

    cert = Certificate(False, p, fb, residual=residual, feasible=residual <= 1e-9,
                       facet_cells=[c for c, _, _ in at_p], cells=local, crossing_cells=crossing)
    if len(idx) != 2:
        raise PieceIdentificationFailed(f"{len(idx)} inner fine facets on the facet end at the point, expected 2")
    c1, c2 = idx

    def pick(pred, name):
        hits = [q for q in inside if pred(set(q.cells))]
        if len(hits) > 1:
            raise PieceIdentificationFailed(f"piece {name} is not unique")
        return hits[0] if hits else None

    i1 = pick(lambda s: c1 in s and c2 not in s, "i_1")
    i2 = pick(lambda s: c2 in s and c1 not in s, "i_2")
    icap = pick(lambda s: c1 in s and c2 in s, "i_cap")
    if i1 is None or i2 is None:
        raise PieceIdentificationFailed("missing single-cover piece next to the point")
    cert.pieces = {"i_1": i1.polygon, "i_2": i2.polygon}
    o1, o2 = mirror(i1), mirror(i2)
    cert.pieces.update({"o_1": o1.polygon, "o_2": o2.polygon})
    if icap is None:
        cert.note = "fine cells on the facet do not overlap; no overlap piece"
        return cert
    ocap = mirror(icap)
    cert.pieces.update({"i_cap": icap.polygon, "o_cap": ocap.polygon})
    r1, r2 = row(i1) - row(o1), row(i2) - row(o2)
    rc = row(icap) - row(ocap)
    coef, *_ = np.linalg.lstsq(np.column_stack([r1, r2]), rc, rcond=None)
    if np.linalg.norm(np.column_stack([r1, r2]) @ coef - rc) > 1e-9:
        raise PieceIdentificationFailed("overlap step is not determined by the single-cover steps")
    cert.applicable = True
    cert.implied_step = float(coef.sum())
    return cert
