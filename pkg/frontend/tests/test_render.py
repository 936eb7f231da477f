"""Rendering tests on hand-built artifacts."""

import numpy as np
import pytest

from conftest import write_field_file, write_results_file
from romplot import FigureSpec, PlotInputError, parse_spec, render
from romplot.cli import main as cli_main


def _spec(name, kind, inputs, output, **kwargs):
    return FigureSpec(name, kind, tuple(inputs), output, **kwargs)


# ---------------------------------------------------------------------------
# figure specs
# ---------------------------------------------------------------------------

def test_parse_spec_two_figures(tmp_path, field_file, results_file):
    field_path, _, _ = field_file
    csv_path, _ = results_file
    spec_file = tmp_path / "figures.ini"
    spec_file.write_text(f"""
[height]
kind = contour
input = {field_path}
output = {tmp_path}/height.svg
variable = 0
px = 2
py = 2
bounds = -5 5 -5 5
title = final height

[errors]
kind = param_curve
input = {csv_path}
output = {tmp_path}/errors.svg
train = -4 -3 -2
test = -0.5 -1.5
""")
    specs = parse_spec(spec_file)
    assert [s.name for s in specs] == ["height", "errors"]
    assert specs[0].kind == "contour"
    assert specs[0].bounds == (-5.0, 5.0, -5.0, 5.0)
    assert specs[1].train == (-4.0, -3.0, -2.0)
    assert specs[1].test == (-0.5, -1.5)


def test_spec_unknown_kind(tmp_path, field_file):
    path, _, _ = field_file
    with pytest.raises(PlotInputError, match="unknown kind"):
        _spec("f", "surface", [path], tmp_path / "f.svg")


def test_spec_missing_input_file(tmp_path):
    with pytest.raises(PlotInputError, match="missing inputs"):
        _spec("f", "contour", [tmp_path / "nope.snap"], tmp_path / "f.svg")


def test_spec_requires_inputs(tmp_path):
    with pytest.raises(PlotInputError, match="no input files"):
        _spec("f", "contour", [], tmp_path / "f.svg")


def test_spec_file_unknown_key(tmp_path, field_file):
    path, _, _ = field_file
    spec_file = tmp_path / "figures.ini"
    spec_file.write_text(f"""
[f]
kind = contour
input = {path}
output = {tmp_path}/f.svg
colour = blue
""")
    with pytest.raises(PlotInputError, match="unknown keys"):
        parse_spec(spec_file)


def test_spec_file_missing_required_key(tmp_path, field_file):
    path, _, _ = field_file
    spec_file = tmp_path / "figures.ini"
    spec_file.write_text(f"[f]\nkind = contour\ninput = {path}\n")
    with pytest.raises(PlotInputError, match="missing required key"):
        parse_spec(spec_file)


def test_spec_file_with_no_sections(tmp_path):
    spec_file = tmp_path / "figures.ini"
    spec_file.write_text("")
    with pytest.raises(PlotInputError, match="defines no figures"):
        parse_spec(spec_file)


# ---------------------------------------------------------------------------
# field kinds
# ---------------------------------------------------------------------------

def test_contour_draws_dashed_interfaces(tmp_path, field_file):
    path, _, _ = field_file
    out = render(_spec("c", "contour", [path], tmp_path / "c.svg",
                       variable=1, px=2, py=2, bounds=(-5, 5, -5, 5)))
    svg = out.read_bytes()
    assert svg and b"stroke-dasharray" in svg


def test_contour_without_decomposition_has_no_dashes(tmp_path, field_file):
    path, _, _ = field_file
    out = render(_spec("c", "contour", [path], tmp_path / "c.svg"))
    assert b"stroke-dasharray" not in out.read_bytes()


def test_contour_of_uniform_field(tmp_path):
    data = np.full((8, 8, 1, 2), 3.7)
    path = write_field_file(tmp_path / "u.snap", data, [0.0, 0.1])
    out = render(_spec("u", "contour", [path], tmp_path / "u.svg", px=2))
    assert out.exists() and out.stat().st_size > 0


def test_error_field_kind(tmp_path, field_file):
    path, _, _ = field_file
    out = render(_spec("e", "error_field", [path], tmp_path / "e.svg",
                       px=3, py=2))
    assert b"stroke-dasharray" in out.read_bytes()


def test_field_variable_out_of_range(tmp_path, field_file):
    path, _, _ = field_file
    with pytest.raises(PlotInputError, match="variable index"):
        render(_spec("c", "contour", [path], tmp_path / "c.svg", variable=7))


def test_field_column_selection(tmp_path, field_file):
    path, _, _ = field_file
    out = render(_spec("c", "contour", [path], tmp_path / "c.svg", column=0))
    assert out.exists()


def test_render_is_byte_stable(tmp_path, field_file):
    path, _, _ = field_file
    spec = _spec("c", "contour", [path], tmp_path / "c1.svg", px=2, py=2)
    first = render(spec).read_bytes()
    spec2 = _spec("c", "contour", [path], tmp_path / "c2.svg", px=2, py=2)
    second = render(spec2).read_bytes()
    assert first == second


def test_render_png_output(tmp_path, field_file):
    path, _, _ = field_file
    out = render(_spec("c", "contour", [path], tmp_path / "c.png"))
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


# ---------------------------------------------------------------------------
# curve kinds
# ---------------------------------------------------------------------------

def test_param_curve_colors_ticks(tmp_path, results_file):
    path, _ = results_file
    out = render(_spec("p", "param_curve", [path], tmp_path / "p.svg",
                       train=(-4.0, -3.0), test=(-0.5, -1.5)))
    svg = out.read_bytes()
    assert b"relative space-time error" in svg
    # red tick labels for test parameters, black for training ones
    assert b'style="fill: #ff0000' in svg or b"fill: #ff0000" in svg


def test_iter_bar_renders(tmp_path, results_file):
    path, _ = results_file
    out = render(_spec("i", "iter_bar", [path], tmp_path / "i.svg",
                       test=(-0.5, -1.5)))
    assert b"mean Schwarz iterations" in out.read_bytes()


def test_pareto_has_two_x_axes(tmp_path, results_file):
    path, _ = results_file
    out = render(_spec("pa", "pareto", [path], tmp_path / "pa.svg"))
    svg = out.read_bytes()
    assert b"speedup vs decomposed FOM" in svg
    assert b"speedup vs monolithic FOM" in svg


def test_pareto_three_row_csv(tmp_path):
    path = write_results_file(tmp_path / "pareto.csv", [
        (-0.5, "h", 1e-9, 3.0, 0.5, 4.0, 1.5),
        (-1.0, "h", 5e-9, 3.2, 0.4, 5.0, 1.9),
        (-1.5, "h", 2e-8, 3.4, 0.3, 6.0, 2.3),
    ])
    out = render(_spec("pa", "pareto", [path], tmp_path / "pa.svg"))
    assert out.exists() and out.stat().st_size > 0


def test_empty_csv_renders_empty_axes_with_warning(tmp_path, capsys):
    path = write_results_file(tmp_path / "empty.csv", [])
    out = render(_spec("p", "param_curve", [path], tmp_path / "p.svg"))
    assert out.exists()
    assert "warning" in capsys.readouterr().err
    for kind in ("iter_bar", "pareto"):
        out = render(_spec(kind, kind, [path], tmp_path / f"{kind}.svg"))
        assert out.exists()


def test_status_only_csv_renders_empty_axes(tmp_path, capsys):
    path = write_results_file(tmp_path / "failed.csv", [
        (-0.5, "status", "failed: coupling stalled", "", "", "", ""),
    ])
    out = render(_spec("p", "param_curve", [path], tmp_path / "p.svg"))
    assert out.exists()
    assert "warning" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_spec_mode(tmp_path, field_file, capsys):
    path, _, _ = field_file
    spec_file = tmp_path / "figures.ini"
    spec_file.write_text(f"""
[height]
kind = contour
input = {path}
output = {tmp_path}/h.svg
px = 2
py = 2
""")
    assert cli_main(["--spec", str(spec_file)]) == 0
    assert "wrote" in capsys.readouterr().out
    assert (tmp_path / "h.svg").exists()


def test_cli_single_kind_mode(tmp_path, results_file, capsys):
    path, _ = results_file
    rc = cli_main(["--kind", "param_curve", "--input", str(path),
                   "--output", str(tmp_path / "p.svg"),
                   "--train", "-4", "--test", "-0.5", "-1.5"])
    assert rc == 0
    assert (tmp_path / "p.svg").exists()


def test_cli_empty_csv_exits_zero(tmp_path, capsys):
    path = write_results_file(tmp_path / "empty.csv", [])
    rc = cli_main(["--kind", "param_curve", "--input", str(path),
                   "--output", str(tmp_path / "p.svg")])
    assert rc == 0
    captured = capsys.readouterr()
    assert "warning" in captured.err
    assert "wrote" in captured.out


def test_cli_error_paths(tmp_path, capsys):
    assert cli_main(["--kind", "contour", "--input",
                     str(tmp_path / "nope.snap"),
                     "--output", str(tmp_path / "c.svg")]) == 1
    assert "error:" in capsys.readouterr().err
    assert cli_main([]) == 1
    assert "nothing to do" in capsys.readouterr().err
    assert cli_main(["--kind", "contour"]) == 1
    assert "needs --output" in capsys.readouterr().err
