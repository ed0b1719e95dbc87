import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tessrefine.geometry import Polygon, clip
from tessrefine.projector import (IndicatorBasis, basis_for, build_gram, error_vs_level, errors_by_pieces,
                                  project, rasterized_cross_check)
from tessrefine.refinability import facet_union_test, straddle_witness
from tessrefine.tessellation import ScaledCopy, family_preset, preset

S3 = math.sqrt(3)
A1 = 3 * S3 / 2          # half-scale hexagon of circumradius 1


def _hex():
    t = preset("hex")
    return t, t.reference_cells()[0]


def test_gram_single_tessellation_diagonal():
    t, h = _hex()
    basis = basis_for(h, t.scaled(0.5))
    g, b = build_gram(h, basis)
    assert np.allclose(g, np.diag(np.diag(g)), atol=1e-12)
    assert np.allclose(np.diag(g), [c.area for c in basis.cells])


def test_gram_family_offdiagonal():
    fam = family_preset("example3-family")
    h = fam.base.reference_cells()[0]
    basis = basis_for(h, fam.scaled(0.5), ring=False)
    g, _ = build_gram(h, basis)
    i, j = np.argwhere(np.triu(g, 1) > 1e-9)[0]
    assert g[i, j] == pytest.approx(clip(basis.cells[i], basis.cells[j]).area, abs=1e-12)
    assert np.count_nonzero(np.triu(g, 1) > 1e-9) > 0


def test_gram_one_cell():
    p = Polygon.regular(6, 1.0)
    g, b = build_gram(p, IndicatorBasis([p]))
    assert g.shape == (1, 1) and g[0, 0] == pytest.approx(p.area) and b[0] == pytest.approx(p.area)


def test_project_nested_square():
    t = preset("square")
    r = project(t.reference_cells()[0], t.scaled(0.5))
    core = np.array(r.basis.core)
    assert np.allclose(r.coefficients[core], 1.0, atol=1e-9)
    assert np.allclose(r.coefficients[~core], 0.0, atol=1e-9)
    assert r.squared_residual <= 1e-9


def test_project_example1():
    t, h = _hex()
    r = project(h, t.scaled(0.5))
    core = np.array(r.basis.core)
    c = np.sort(r.coefficients[core])
    assert len(c) == 7
    assert np.allclose(c[:6], 0.5, atol=1e-9) and c[6] == pytest.approx(1.0, abs=1e-9)
    assert r.squared_residual == pytest.approx(1.5 * A1, abs=1e-9)
    assert r.l1_error == pytest.approx(3 * A1, abs=1e-9)
    assert r.relative_l2 == pytest.approx(math.sqrt(3 / 8), abs=1e-9)


def test_project_triangle():
    t = preset("triangle")
    tri = t.reference_cells()[0]
    r = project(tri, t.scaled(0.5))
    core = np.array(r.basis.core)
    assert core.sum() == 4
    assert np.allclose(r.coefficients[core], 1.0, atol=1e-9)
    assert r.squared_residual <= 1e-9


def test_residual_formula_consistency():
    t, h = _hex()
    r = project(h, t.scaled(0.5))
    g, b = build_gram(h, r.basis)
    assert r.squared_residual == pytest.approx(h.area - b @ r.coefficients, abs=1e-9)
    l2, _ = errors_by_pieces(h, r.basis, r.coefficients)
    assert l2 == pytest.approx(r.squared_residual, abs=1e-9)


def test_error_vs_level_hex():
    t, _ = _hex()
    res = [r.squared_residual for r in error_vs_level(t, 4)]
    assert res[0] <= 1e-12 < res[1]
    assert all(e > 0 for e in res[1:])
    # regression baselines
    assert res[1] == pytest.approx(1.5 * A1, rel=1e-9)
    assert res[2] == pytest.approx(1.5 * A1 / 4, rel=1e-9)
    assert res[3] == pytest.approx(0.7307089, rel=1e-6)


def test_error_vs_level_square():
    assert all(r.squared_residual <= 1e-9 for r in error_vs_level(preset("square"), 4))


def test_raster_square():
    t = preset("square")
    sq = t.reference_cells()[0]
    assert rasterized_cross_check(sq, t.scaled(0.5), 1 / 64) <= 1e-3 * sq.area


def test_raster_example1():
    t, h = _hex()
    est = rasterized_cross_check(h, t.scaled(0.5), 1 / 64)
    assert abs(est - 1.5 * A1) <= max(1e-3, 5 / 64) * h.area


def test_raster_example3_family():
    fam = family_preset("example3-family")
    h = fam.base.reference_cells()[0]
    exact = project(h, fam.scaled(0.5), l1=False)
    est = rasterized_cross_check(h, exact.basis, 1 / 64)
    assert est > 0 and exact.squared_residual > 1e-6
    assert abs(est - exact.squared_residual) <= max(1e-3, 5 / 64) * h.area


@pytest.mark.parametrize("name,scale", [("square", Fraction(1, 2)), ("square", Fraction(1, 3)),
                                        ("triangle", Fraction(1, 2)), ("hex", Fraction(1, 2)),
                                        ("hex", Fraction(1, 3))])
def test_nestedness_agreement(name, scale):
    t = preset(name)
    fine = ScaledCopy(t, scale)
    r = project(t.reference_cells()[0], fine.tessellation, l1=False)
    fu = facet_union_test(t, fine)
    straddled = any(straddle_witness(f, fine) is not None for f in t.reference_cells()[0].facets())
    if fu.verdict.value == "Pass":
        assert r.squared_residual <= 1e-9
    if straddled:
        assert r.squared_residual > 1e-6


@settings(max_examples=10)
@given(st.floats(0, 2 * math.pi), st.floats(-3, 3), st.floats(-3, 3))
def test_rigid_motion_invariance(theta, dx, dy):
    t, h = _hex()
    base = project(h, t.scaled(0.5), l1=False)
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    moved = IndicatorBasis([c.transformed(rot, (dx, dy)) for c in base.basis.cells])
    r = project(h.transformed(rot, (dx, dy)), moved, l1=False)
    assert r.squared_residual == pytest.approx(base.squared_residual, abs=1e-9)


@settings(max_examples=10)
@given(st.data())
def test_basis_extension_monotone(data):
    fam = family_preset("example3-family")
    h = fam.base.reference_cells()[0]
    full = basis_for(h, fam.scaled(0.5))
    idx = sorted(data.draw(st.sets(st.integers(0, len(full) - 1), min_size=1, max_size=len(full))))
    extra = data.draw(st.integers(0, len(full) - 1))
    small = IndicatorBasis([full.cells[i] for i in idx])
    bigger = IndicatorBasis([full.cells[i] for i in sorted(set(idx) | {extra})])
    assert project(h, bigger, l1=False).squared_residual <= project(h, small, l1=False).squared_residual + 1e-9
