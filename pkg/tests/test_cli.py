import json

import numpy as np
import pytest

from tessrefine.cli import main
from tessrefine.figures import Scene, fig1b, fig3, render_svg, scene
from tessrefine.geometry import Facet2, Polygon
from tessrefine.refinability import straddles


def run(tmp_path, *argv):
    out = tmp_path / "out.json"
    code = main(list(argv) + ["--json", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_lattice_check_d4(tmp_path):
    code, rep = run(tmp_path, "lattice", "check", "d", "4")
    assert code == 0
    assert rep["inner_product"] == pytest.approx(3.0)
    assert rep["verdict"] == "Obtuse" and rep["closed_form_match"] is True


def test_refinability_hex(tmp_path):
    code, rep = run(tmp_path, "refinability", "--tess", "hex", "--scale", "1/2")
    assert code == 0
    assert rep["overall"] == "non-refinable-with-witness"
    crit = {c["criterion"]: c for c in rep["criteria"]}
    for name in ("facet-union", "hyperplane-extension", "obtuse-reflection"):
        assert crit[name]["verdict"] == "Fail" and crit[name]["witness"]


def test_refinability_square(tmp_path):
    code, rep = run(tmp_path, "refinability", "--tess", "square", "--scale", "1/3")
    assert code == 0 and rep["overall"] == "refinable-not-excluded"


def test_refinability_family(tmp_path):
    code, rep = run(tmp_path, "refinability", "--tess", "hex", "--family", "example3-family")
    assert code == 0
    assert rep["overall"] == "non-refinable-with-witness"
    assert rep["certificate"]["implied_step"] == pytest.approx(2.0)


def test_refinability_inefficient_family(tmp_path):
    code, rep = run(tmp_path, "refinability", "--tess", "hex", "--family", "fig4b-family")
    crit = {c["criterion"]: c for c in rep["criteria"]}
    assert crit["efficiency"]["verdict"] == "Fail"
    assert crit["overlap"]["verdict"] == "Inconclusive"


def test_witness_from_report_revalidates(tmp_path):
    _, rep = run(tmp_path, "refinability", "--tess", "hex")
    w = [c for c in rep["criteria"] if c["criterion"] == "facet-union"][0]["witness"]
    f = Facet2(*(np.array(w["facet"][k]) for k in ("a", "b", "normal")))
    assert straddles(Polygon(w["straddling_cell"]), f)


def test_project_hex_levels(tmp_path):
    code, rep = run(tmp_path, "project", "--tess", "hex", "--levels", "2")
    assert code == 0
    e = rep["errors"]
    assert len(e) == 2 and e[0] == 0.0 and e[1] > 0
    assert "gram_condition" in rep["level1"] and rep["level1"]["coefficients"]


def test_spline(tmp_path):
    code, rep = run(tmp_path, "spline", "--cell", "square", "--order", "2", "--h", "1/32")
    assert code == 0
    assert rep["refinability_residual"] <= 5 / 32


def test_voronoi_svg(tmp_path):
    svg = tmp_path / "v.svg"
    code, rep = run(tmp_path, "voronoi", "a", "2", "--svg", str(svg))
    assert code == 0 and rep["num_facets"] == 6
    assert svg.read_text().count("<path") == 7


def test_usage_errors(tmp_path, capsys):
    assert main(["lattice", "check", "e6", "5"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["refinability", "--tess", "pentagon"]) == 2
    assert main(["refinability", "--tess", "hex", "--scale", "0/1"]) == 2
    assert main(["render", "--preset", "fig9", "--svg", str(tmp_path / "x.svg")]) == 2
    assert main(["voronoi", "d", "3", "--svg", str(tmp_path / "x.svg")]) == 2


def test_numerical_failure_exit(monkeypatch, tmp_path):
    from tessrefine import cli, projector

    def boom(*a, **k):
        raise projector.NumericalFailure("forced")
    monkeypatch.setattr(cli, "error_vs_level", boom)
    assert main(["project", "--tess", "hex", "--levels", "2"]) == 3


def test_report_round_trip(tmp_path):
    out = tmp_path / "r.json"
    main(["refinability", "--tess", "triangle", "--json", str(out)])
    text = out.read_text()
    assert json.dumps(json.loads(text), indent=2, sort_keys=True) + "\n" == text


def test_file_spec(tmp_path):
    spec = tmp_path / "sq.json"
    spec.write_text(json.dumps({"prototype": [[0, 0], [1, 0], [1, 1], [0, 1]],
                                "shift_basis": [[1, 0], [0, 1]]}))
    code, rep = run(tmp_path, "refinability", "--tess", f"file:{spec}")
    assert code == 0 and rep["overall"] == "refinable-not-excluded"


# -- figures -----------------------------------------------------------------

def test_fig1b_paths():
    s = fig1b()
    assert s.num_polygons == 8
    assert render_svg(s).count("<path") == 8


def test_fig3_lozenge_highlighted():
    svg = render_svg(fig3())
    assert svg.count('class="highlight"') == 1


def test_empty_scene():
    svg = render_svg(Scene())
    assert svg.startswith("<?xml") and "<path" not in svg and svg.rstrip().endswith("</svg>")


@pytest.mark.parametrize("name", ["fig1b", "fig3", "fig4a", "fig4b", "fig5d"])
def test_render_presets(tmp_path, name):
    p = tmp_path / f"{name}.svg"
    assert main(["render", "--preset", name, "--svg", str(p)]) == 0
    import xml.dom.minidom
    xml.dom.minidom.parseString(p.read_text())
    assert render_svg(scene(name)) == p.read_text()
