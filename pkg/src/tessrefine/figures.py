"""Deterministic SVG scenes.

Each polygon becomes one ``<path>``; open polylines (witness segments,
arrows) are also paths but are not polygons.  Coordinates are printed
with a fixed number of decimals so identical scenes give identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Polygon
from .projector import basis_for
from .refinability import (CriterionReport, cells_overlapping, efficiency_test, lozenge,
                           step_infeasibility_certificate)
from .tessellation import family_preset, preset

PX = 60.0
MARGIN = 0.5

PALETTE = {
    "coarse": {"fill": "#d9d9d9", "stroke": "#000000", "stroke-width": "1.5"},
    "fine": {"fill": "none", "stroke": "#1f4e79", "stroke-width": "1"},
    "member0": {"fill": "none", "stroke": "#1f4e79", "stroke-width": "1"},
    "member1": {"fill": "none", "stroke": "#2e7d32", "stroke-width": "1"},
    "member2": {"fill": "none", "stroke": "#8e24aa", "stroke-width": "1"},
    "member3": {"fill": "none", "stroke": "#6d4c41", "stroke-width": "1"},
    "dashed": {"fill": "none", "stroke": "#000000", "stroke-width": "1", "stroke-dasharray": "6 4"},
    "highlight": {"fill": "#e07b39", "fill-opacity": "0.6", "stroke": "#a0461a", "stroke-width": "1"},
    "inside": {"fill": "#4f9bd9", "fill-opacity": "0.5", "stroke": "#1f4e79", "stroke-width": "0.5"},
    "outside": {"fill": "#f2c14e", "fill-opacity": "0.5", "stroke": "#8a6d1a", "stroke-width": "0.5"},
    "witness": {"fill": "none", "stroke": "#c62828", "stroke-width": "3"},
    "arrow": {"fill": "none", "stroke": "#000000", "stroke-width": "2"},
}


@dataclass
class Layer:
    items: list
    style: str = "fine"
    closed: bool = True


@dataclass
class Scene:
    layers: list = field(default_factory=list)
    labels: list = field(default_factory=list)   # (x, y, text)

    def add(self, items, style="fine", closed=True):
        items = [p.vertices if isinstance(p, Polygon) else np.asarray(p, dtype=float) for p in items]
        self.layers.append(Layer(items, style, closed))
        return self

    def label(self, x, y, text):
        self.labels.append((float(x), float(y), str(text)))
        return self

    @property
    def num_polygons(self) -> int:
        return sum(len(l.items) for l in self.layers if l.closed)

    def bounds(self):
        pts = [np.asarray(v, dtype=float).reshape(-1, 2) for l in self.layers for v in l.items]
        pts += [np.array([[x, y]]) for x, y, _ in self.labels]
        if not pts:
            return np.zeros(2), np.ones(2)
        allp = np.vstack(pts)
        return allp.min(axis=0), allp.max(axis=0)


def _num(v: float) -> str:
    s = f"{round(float(v), 3) + 0.0:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(scene: Scene, path=None) -> str:
    """Serialize ``scene``; also written to ``path`` when given."""
    lo, hi = scene.bounds()
    lo = lo - MARGIN
    hi = hi + MARGIN
    w = (hi[0] - lo[0]) * PX
    hgt = (hi[1] - lo[1]) * PX

    def xy(p):
        return _num((p[0] - lo[0]) * PX), _num((hi[1] - p[1]) * PX)

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(w)}" height="{_num(hgt)}" '
           f'viewBox="0 0 {_num(w)} {_num(hgt)}">',
           f'<rect x="0" y="0" width="{_num(w)}" height="{_num(hgt)}" fill="#ffffff"/>']
    for layer in scene.layers:
        attrs = " ".join(f'{k}="{v}"' for k, v in sorted(PALETTE[layer.style].items()))
        for item in layer.items:
            pts = [xy(p) for p in np.asarray(item, dtype=float).reshape(-1, 2)]
            d = "M " + " L ".join(f"{x} {y}" for x, y in pts) + (" Z" if layer.closed else "")
            out.append(f'<path class="{layer.style}" d="{d}" {attrs}/>')
    for x, y, text in scene.labels:
        px, py = xy((x, y))
        out.append(f'<text x="{px}" y="{py}" font-family="serif" font-size="14">{_escape(text)}</text>')
    out.append("</svg>")
    svg = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(svg)
    return svg


# -- preset scenes ----------------------------------------------------------

def fig1b() -> Scene:
    """Hexagon and the seven half-scale hexagons overlapping it."""
    t = preset("hex")
    h = t.reference_cells()[0]
    basis = basis_for(h, t.scaled(0.5), ring=False)
    return Scene().add([h], "coarse").add(basis.cells, "fine").label(0, -0.3, "H")


def fig3() -> Scene:
    """Three half-scale shifted hexagons sharing the lozenge."""
    fam = family_preset("example2-family")
    h = fam.base.reference_cells()[0]
    loz = lozenge()
    hits = cells_overlapping(loz, fam.scaled(0.5))
    s = Scene().add([h], "coarse")
    for c, j, _ in hits:
        s.add([c], f"member{j % 4}")
    s.add([loz], "highlight")
    s.add([[(0, 0), (0, 2 * math.sqrt(3))], [(0, 0), (3, -math.sqrt(3))]], "arrow", closed=False)
    return s.label(-0.75, 1.75, "l").label(0.2, 3.3, "r2").label(3.0, -1.8, "r1")


def _fig4_cells(fam_name):
    fam = family_preset(fam_name)
    h = fam.base.reference_cells()[0]
    top = [c for c, j in fam.scaled(0.5).cells_in((-2, 0), (2, 2))
           if j > 0 and abs(c.bounds[1][1] - math.sqrt(3)) < 1e-9 and abs(c.centroid[0]) < 1.0]
    top.sort(key=lambda c: round(c.centroid[0], 9))
    return fam, h, top


def fig4a() -> Scene:
    fam, h, top = _fig4_cells("fig4a-family")
    s = Scene().add([h], "coarse").add(top, "fine")
    return s.label(-0.5, 2.0, "f2b").label(0.5, 2.0, "f1b").label(0.0, 2.0, "e1")


def fig4b() -> Scene:
    fam, h, top = _fig4_cells("fig4b-family")
    dashed = [c for c in top if abs(c.centroid[0]) < 1e-9]
    solid = [c for c in top if abs(c.centroid[0]) >= 1e-9]
    s = Scene().add([h], "coarse").add(solid, "fine").add(dashed, "dashed")
    rep = efficiency_test(fam)
    if rep.witness:
        s.add([rep.witness["segment"]], "witness", closed=False)
    return s


def fig5d(radius: float = 0.25) -> Scene:
    """Pieces of the step certificate around the shared point on the top edge."""
    fam = family_preset("example3-family")
    h = fam.base.reference_cells()[0]
    cert = step_infeasibility_certificate(fam, radius=radius)
    s = Scene().add([h], "coarse").add(cert.facet_cells, "fine")
    ins = [v for k, v in sorted(cert.pieces.items()) if k.startswith("i_")]
    outs = [v for k, v in sorted(cert.pieces.items()) if k.startswith("o_")]
    s.add(ins, "inside").add(outs, "outside")
    s.add([[cert.facet.a, cert.facet.b]], "witness", closed=False)
    for k, v in sorted(cert.pieces.items()):
        c = v.centroid
        s.label(c[0], c[1], k)
    return s


def voronoi_scene(cell, neighbours=True) -> Scene:
    """2D Voronoi cell with its translates by the facet vectors."""
    s = Scene().add([cell.polygon], "coarse")
    if neighbours:
        s.add([cell.polygon.translated(v) for v in cell.vectors], "fine")
    return s


def refinability_scene(coarse, fine, reports: list[CriterionReport]) -> Scene:
    h = coarse.reference_cells()[0]
    lo, hi = h.bounds
    s = Scene().add(coarse.cells_near(h), "coarse")
    s.add([c for c in fine.cells_in(lo, hi)], "fine")
    for r in reports:
        w = r.witness or {}
        for key in ("uncovered_segment", "segment"):
            if key in w:
                s.add([w[key]], "witness", closed=False)
        if "reflected_cell" in w:
            s.add([w["reflected_cell"]], "dashed")
        if "straddling_cell" in w:
            s.add([w["straddling_cell"]], "highlight")
    return s


PRESETS = {"fig1b": fig1b, "fig3": fig3, "fig4a": fig4a, "fig4b": fig4b, "fig5d": fig5d}


def scene(name: str) -> Scene:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown figure preset {name!r}") from None
