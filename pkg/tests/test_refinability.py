import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tessrefine.geometry import Facet2, Polygon, reflect_across_line
from tessrefine.refinability import (PieceIdentificationFailed, PreconditionViolated, Verdict,
                                     cells_overlapping, efficiency_test, facet_union_test,
                                     family_hyperplane_test, hyperplane_extension_test, lozenge,
                                     obtuse_reflection_test, overlap_criterion_test,
                                     step_infeasibility_certificate, straddle_witness, straddles)
from tessrefine.tessellation import ScaledCopy, as_family, family_preset, preset

S3 = math.sqrt(3)
PASS, FAIL = Verdict.PASS, Verdict.FAIL


def _facets(t):
    return [f for c in t.reference_cells() for f in c.facets(parent=c)]


def test_straddle_square_none():
    t = preset("square")
    fine = ScaledCopy(t, Fraction(1, 2))
    assert all(straddle_witness(f, fine) is None for f in _facets(t))


def test_straddle_triangle_none():
    t = preset("triangle")
    fine = ScaledCopy(t, Fraction(1, 2))
    assert all(straddle_witness(f, fine) is None for f in _facets(t))


def test_straddle_hex_every_facet():
    t = preset("hex")
    fine = ScaledCopy(t)
    for f in _facets(t):
        w = straddle_witness(f, fine)
        assert w is not None and straddles(w, f)


def test_facet_union_verdicts():
    assert facet_union_test(preset("square"), ScaledCopy(preset("square"), Fraction(1, 2))).verdict is PASS
    assert facet_union_test(preset("square"), ScaledCopy(preset("square"), Fraction(1, 3))).verdict is PASS
    assert facet_union_test(preset("triangle")).verdict is PASS
    r = facet_union_test(preset("hex"))
    assert r.verdict is FAIL
    assert r.details["straddling_cells"] == 6
    assert len(r.witness["bisected_cells"]) == 6


def test_hyperplane_extension_verdicts():
    assert hyperplane_extension_test(preset("square")).verdict is PASS
    assert hyperplane_extension_test(preset("triangle")).verdict is PASS
    assert hyperplane_extension_test(preset("hex")).verdict is FAIL


def test_obtuse_reflection_verdicts():
    r = obtuse_reflection_test(preset("hex"))
    assert r.verdict is FAIL
    assert r.witness["normal_product"] == pytest.approx(0.5, abs=1e-9)
    sq = obtuse_reflection_test(preset("square"))
    assert sq.verdict is PASS and not sq.details["triggered"]
    tr = obtuse_reflection_test(preset("triangle"))
    assert tr.verdict is PASS and tr.details["obtuse_pairs"] == 0


def test_efficiency_fig4():
    assert efficiency_test(family_preset("fig4a-family")).verdict is PASS
    r = efficiency_test(family_preset("fig4b-family"))
    assert r.verdict is FAIL
    (a, b) = np.array(r.witness["segment"])
    assert r.witness["facet_count"] >= 3
    assert np.linalg.norm(b - a) > 1e-9


def test_efficiency_single_member():
    assert efficiency_test(preset("hex")).verdict is PASS


def test_family_hyperplane():
    assert family_hyperplane_test(family_preset("example3-family")).verdict is PASS
    assert family_hyperplane_test(as_family(preset("hex"))).verdict is FAIL
    assert family_hyperplane_test(family_preset("square-family")).verdict is PASS


def test_overlap_criterion():
    r = overlap_criterion_test(family_preset("example3-family"))
    assert r.verdict is FAIL
    assert r.witness["alpha"] == pytest.approx(2 * math.pi / 3, abs=1e-9)
    assert r.witness["pi_minus_alpha"] == pytest.approx(math.pi / 3, abs=1e-9)
    assert overlap_criterion_test(family_preset("square-family")).verdict is PASS
    assert overlap_criterion_test(family_preset("triangle-family")).verdict is PASS
    with pytest.raises(PreconditionViolated):
        overlap_criterion_test(family_preset("fig4b-family"))


def test_certificate_example3():
    cert = step_infeasibility_certificate(family_preset("example3-family"))
    assert cert.applicable
    assert np.allclose(cert.point, (0.0, S3))
    assert cert.required_step == 1.0
    assert cert.implied_step == pytest.approx(2.0, abs=1e-9)
    assert cert.residual > 0
    assert cert.residual ** 2 == pytest.approx(1 / 3, abs=1e-9)
    assert set(cert.pieces) == {"i_1", "i_2", "i_cap", "o_1", "o_2", "o_cap"}


def test_certificate_square_not_applicable():
    cert = step_infeasibility_certificate(family_preset("square-family"))
    assert not cert.applicable
    assert cert.feasible


def test_certificate_bad_point():
    fam = family_preset("example3-family")
    with pytest.raises(PieceIdentificationFailed):
        # interior of a fine facet on f_b: only one fine facet passes, nothing ends there
        step_infeasibility_certificate(fam, p=(0.5, S3))


def test_lozenge_three_cells():
    hits = cells_overlapping(lozenge(), family_preset("example2-family").scaled(0.5))
    assert len(hits) == 3
    assert all(abs(frac - 1.0) <= 1e-9 for _, _, frac in hits)
    assert sorted(j for _, j, _ in hits) == [0, 1, 2]


def test_fail_always_has_witness():
    for t in ("hex",):
        for fn in (facet_union_test, hyperplane_extension_test, obtuse_reflection_test):
            r = fn(preset(t))
            assert r.verdict is FAIL and r.witness


def test_witness_revalidates():
    t = preset("hex")
    r = facet_union_test(t)
    w = r.witness
    f = Facet2(np.array(w["facet"]["a"]), np.array(w["facet"]["b"]), np.array(w["facet"]["normal"]))
    assert straddles(Polygon(w["straddling_cell"]), f)
    o = obtuse_reflection_test(t).witness
    f2 = Facet2(np.array(o["f2"]["a"]), np.array(o["f2"]["b"]), np.array(o["f2"]["normal"]))
    assert t.is_cell(reflect_across_line(Polygon(o["cell"]), f2))


# -- implication chain and invariance -------------------------------------------

@pytest.mark.parametrize("name", ["square", "hex", "triangle"])
def test_implications(name):
    t = preset(name)
    fu = facet_union_test(t)
    he = hyperplane_extension_test(t)
    orf = obtuse_reflection_test(t)
    if fu.verdict is FAIL:
        assert fu.witness["straddling_cell"]
    if he.verdict is FAIL:
        assert fu.verdict is FAIL
    if orf.verdict is FAIL:
        assert he.verdict is FAIL


verdict_fns = [facet_union_test, hyperplane_extension_test, obtuse_reflection_test]


@settings(max_examples=15)
@given(st.sampled_from(["square", "hex", "triangle"]), st.floats(-3, 3), st.floats(-3, 3),
       st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_verdicts_invariant(name, dx, dy, s):
    t = preset(name)
    moved = t.translated((dx, dy)).scaled(s, anchor=(0.0, 0.0))
    for fn in verdict_fns:
        assert fn(moved).verdict is fn(t).verdict


@settings(max_examples=8)
@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from([0.5, 2.0]))
def test_family_verdicts_invariant(dx, dy, s):
    fam = family_preset("example3-family")
    moved = fam.translated((dx, dy)).scaled(s)
    assert efficiency_test(moved).verdict is efficiency_test(fam).verdict
    assert family_hyperplane_test(moved).verdict is family_hyperplane_test(fam).verdict
    assert overlap_criterion_test(moved).verdict is overlap_criterion_test(fam).verdict
