import json

import pytest

from knotforge.cli import format_alexander, main
from knotforge.fixtures import CURVES
from knotforge.services.curve_files import dumps_pattern, loads_curve
from knotforge.services.diagram import SignPattern
from knotforge.services.plotting import PALETTE


def test_crossings(capsys):
    assert main(["crossings", "--input", "trefoil_xy"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("trefoil_xy: 3 double points")
    assert len(out.strip().splitlines()) == 4


def test_crossings_of_circle(capsys):
    assert main(["crossings", "--input", "circle"]) == 0
    assert "circle: 0 double points" in capsys.readouterr().out


def test_identify_trefoil(capsys):
    assert main(["identify", "--input", "trefoil_xyz"]) == 0
    out = capsys.readouterr().out
    assert "degree sequence (2/4, 2/4, 2/4)" in out
    assert "determinant: 3" in out
    assert "tricolor count: 9" in out
    assert "alexander: t^2 - t + 1" in out
    assert "knot: 3_1" in out
    assert "z monotonic regions: 4" in out


def test_identify_reports_noncompact_height(capsys):
    assert main(["identify", "--input", "fig8_xyz_paper"]) == 2
    out = capsys.readouterr().out
    assert "z denominator has real roots" in out
    assert "z monotonic regions: n/a" in out


def test_printed_triple_under_relaxed_tolerance(capsys):
    assert main(["identify", "--input", "fig8_xyz_paper", "--tol", "1e-6"]) == 2
    out = capsys.readouterr().out
    assert "violation: z denominator has real roots" in out
    assert "tangent sine" not in out


def test_identify_needs_height():
    assert main(["identify", "--input", "trefoil_xy"]) == 4


def test_identify_unknotted_circle(tmp_path, capsys):
    circle = {
        "name": "flat_circle",
        "x": {"num": [0, 2], "den": [1, 0, 1]},
        "y": {"num": [1, 0, -1], "den": [1, 0, 1]},
        "z": {"num": [0.5], "den": [1]},
    }
    path = tmp_path / "circle.json"
    path.write_text(json.dumps(circle))
    assert main(["identify", "--input", str(path)]) == 0
    assert "knot: unknot" in capsys.readouterr().out


def test_invalid_configuration(capsys):
    assert main(["crossings", "--input", "trefoil_xy", "--tol", "-1"]) == 4
    assert "solver_tol" in capsys.readouterr().err


def test_invalid_root_tolerance(capsys):
    assert main(["identify", "--input", "trefoil_xyz", "--root-tol", "-1"]) == 4
    assert "root_tol" in capsys.readouterr().err


def test_crossings_through_one_point_exit_degenerate(tmp_path, capsys):
    den = [1, 0, 2, 0, 1]
    for name, y in (("triple", [0, 0, -1, 0, 1]), ("touching", [1, 0, -2, 0, 1])):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps({"name": name, "x": {"num": [0, -1, 0, 1], "den": den},
                                    "y": {"num": y, "den": den}}))
        assert main(["crossings", "--input", str(path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_fixture():
    assert main(["crossings", "--input", "no_such_curve"]) == 4


def test_bad_axes():
    assert main(["plot", "--input", "trefoil_xyz", "--axes", "x,x"]) == 4


def test_synth_then_identify(tmp_path, capsys):
    out_path = tmp_path / "trefoil.json"
    assert main(["synth", "--input", "trefoil_xy", "--pattern", "3_1", "--out", str(out_path)]) == 0
    data = json.loads(out_path.read_text())
    assert "z" in data
    assert min(data["meta"]["margins"]) >= 1e-3
    assert data["meta"]["monotonic_regions"] >= 1
    capsys.readouterr()
    assert main(["identify", "--input", str(out_path)]) == 0
    assert "knot: 3_1" in capsys.readouterr().out


def test_synth_needs_pattern():
    assert main(["synth", "--input", "trefoil_xy"]) == 4


def test_synth_rejects_pattern_for_other_crossings(tmp_path):
    path = tmp_path / "pattern.json"
    path.write_text(dumps_pattern(SignPattern.from_tuples([(1, 2, ">"), (3, 4, "<"), (5, 6, ">")])))
    assert main(["synth", "--input", "trefoil_xy", "--pattern", str(path)]) == 4


def test_synth_reports_infeasible_budget():
    args = ["synth", "--input", "trefoil_xy", "--pattern", "3_1", "--min-margin", "5", "--budget", "1", "--workers", "1"]
    assert main(args) == 3


def test_reduce_keeps_minimal_curve(tmp_path):
    out_path = tmp_path / "out.json"
    assert main(["reduce", "--input", "trefoil_xyz", "--target", "3_1", "--out", str(out_path)]) == 0
    assert loads_curve(out_path.read_text()) == CURVES["trefoil_xyz"]


def test_reduce_is_deterministic(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for path in (first, second):
        args = ["reduce", "--input", "trefoil_xy", "--pattern", "3_1", "--target", "3_1", "--seed", "3", "--out", str(path)]
        assert main(args) == 0
    assert first.read_text() == second.read_text()
    assert json.loads(first.read_text())["meta"]["degree_sequence"] == "(2/4, 2/4, 2/4)"


def test_plot_circle(capsys):
    assert main(["plot", "--input", "circle"]) == 0
    svg = capsys.readouterr().out
    assert svg.startswith("<svg")
    assert "<circle" not in svg
    assert "<polyline" in svg


def test_plot_trefoil_in_color(tmp_path):
    out_path = tmp_path / "trefoil.svg"
    assert main(["plot", "--input", "trefoil_xyz", "--color", "--out", str(out_path)]) == 0
    svg = out_path.read_text()
    assert svg.count("<circle") == 3
    assert sum(color in svg for color in PALETTE) >= 2


def test_patterns(capsys):
    assert main(["patterns", "--input", "trefoil_xy", "--target", "3_1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "2 patterns over 3 crossings identify as 3_1"
    assert len(lines) == 3


@pytest.mark.parametrize("coeffs,text", [
    ((1,), "1"),
    ((1, -1, 1), "t^2 - t + 1"),
    ((1, -3, 1), "t^2 - 3t + 1"),
    ((2, -3, 2), "2t^2 - 3t + 2"),
])
def test_format_alexander(coeffs, text):
    assert format_alexander(coeffs) == text


def test_plot_figure_eight_projection(tmp_path):
    out_path = tmp_path / "fig8.svg"
    assert main(["plot", "--input", "fig8_xy", "--out", str(out_path)]) == 0
    assert out_path.read_text().count("<circle") == 10


def test_five_crossing_synthesis_reports_success_or_budget(tmp_path, capsys):
    out_path = tmp_path / "cinquefoil.json"
    code = main(["synth", "--input", "cinquefoil_xy", "--pattern", "5_1", "--budget", "4", "--workers", "2",
                 "--out", str(out_path)])
    assert code in (0, 3)
    if code == 3:
        assert "infeasible" in capsys.readouterr().err
    else:
        assert min(json.loads(out_path.read_text())["meta"]["margins"]) >= 1e-3
