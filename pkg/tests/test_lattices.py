import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tessrefine.lattices import (LatticeName, UnsupportedDimension, Verdict, catalogue, classify,
                                 closed_form_inner_product, make_lattice, obtuse_inner_product)


def test_closed_form_examples():
    assert closed_form_inner_product("a", 2) == pytest.approx(1 + math.sqrt(3), abs=1e-12)
    assert closed_form_inner_product("dstar", 5) == 2.0
    assert closed_form_inner_product("astar", 2) == pytest.approx((math.sqrt(3) - 1) / 3, abs=1e-12)


@pytest.mark.parametrize("name,n,value", [
    ("d", 4, 3.0), ("d", 3, 3.0), ("cartesian", 5, 0.0), ("bsplit", 4, 1.0),
    ("e6", 6, 1.0), ("e7", 7, 1.0), ("e8", 8, 1.0), ("triangle-dual", 2, -0.5),
])
def test_inner_products_agreeing_rows(name, n, value):
    assert obtuse_inner_product(make_lattice(name, n)).inner_product == pytest.approx(value, abs=1e-9)


@pytest.mark.parametrize("name,n", catalogue())
def test_computed_matches_closed_form(name, n):
    # closed forms as printed; the a, astar and dstar rows disagree with the generators
    got = obtuse_inner_product(make_lattice(name, n)).inner_product
    assert abs(got - closed_form_inner_product(name, n)) <= 1e-9


@pytest.mark.parametrize("n", range(2, 40))
def test_astar_closed_form_positive(n):
    assert closed_form_inner_product("astar", n) > 0


@pytest.mark.parametrize("name,n", catalogue())
def test_verdict_classes(name, n):
    v = obtuse_inner_product(make_lattice(name, n)).verdict
    if name is LatticeName.CARTESIAN:
        assert v is Verdict.RIGHT_ANGLE
    elif name is LatticeName.TRIANGLE_DUAL:
        assert v is Verdict.ACUTE
    else:
        assert v is Verdict.OBTUSE


@pytest.mark.parametrize("name,n", [("e6", 5), ("e8", 9), ("d", 2), ("triangle-dual", 3), ("a", 1)])
def test_unsupported_dimensions(name, n):
    with pytest.raises(UnsupportedDimension):
        make_lattice(name, n)
    with pytest.raises(UnsupportedDimension):
        closed_form_inner_product(name, n)


@pytest.mark.parametrize("name,n", catalogue())
def test_generators_nonsingular(name, n):
    assert make_lattice(name, n).det > 1e-9


def test_e_lattice_dets():
    # unimodular E8, Gram determinants 3 and 2 for E6 and E7
    for n, gram_det in ((6, 3.0), (7, 2.0), (8, 1.0)):
        g = make_lattice(f"e{n}", n).generator
        assert np.linalg.det(g.T @ g) == pytest.approx(gram_det, rel=1e-9)


def test_parse_aliases():
    assert LatticeName.parse("A*") is LatticeName.ASTAR
    assert LatticeName.parse("D_STAR".replace("_", "")) is LatticeName.DSTAR
    with pytest.raises(ValueError):
        LatticeName.parse("f4")


def test_classify_boundaries():
    assert classify(2e-9) is Verdict.OBTUSE
    assert classify(5e-10) is Verdict.RIGHT_ANGLE
    assert classify(-2e-9) is Verdict.ACUTE


@given(st.sampled_from(catalogue()), st.floats(0.1, 10.0))
def test_scaling_inner_product(entry, s):
    name, n = entry
    spec = make_lattice(name, n)
    a = obtuse_inner_product(spec)
    b = obtuse_inner_product(spec.scaled(s))
    assert b.inner_product == pytest.approx(s * s * a.inner_product, rel=1e-9, abs=1e-12)
    assert b.verdict is a.verdict
