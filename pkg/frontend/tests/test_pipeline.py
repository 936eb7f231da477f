"""End-to-end: render every figure kind from a real campaign's artifacts.

The campaign is produced by invoking the solver's command-line interface
as a subprocess (see conftest), so this package is exercised exactly the
way a user would drive it — through files only.
"""

import sys
from pathlib import Path

import romplot
from romplot.cli import main as cli_main

TRAIN = "-4.0 -2.0"
TEST = "-0.5"


def _write_spec(campaign, tmp_path):
    final = sorted((campaign / "fields").glob("*rom_decomp_final.snap"))
    errfield = sorted((campaign / "fields").glob("*rom_decomp_errfield.snap"))
    assert final and errfield, "campaign produced no decomposed-ROM fields"
    figs = tmp_path / "figs"
    spec_file = tmp_path / "figures.ini"
    spec_file.write_text(f"""
[height_contour]
kind = contour
input = {final[0]}
output = {figs}/height.svg
variable = 0
px = 2
py = 2
bounds = -5 5 -5 5
train = {TRAIN}
test = {TEST}

[height_error_field]
kind = error_field
input = {errfield[0]}
output = {figs}/errfield.svg
variable = 0
px = 2
py = 2
bounds = -5 5 -5 5

[error_curve]
kind = param_curve
input = {campaign / "tables" / "results_decomposed_rom.csv"}
output = {figs}/errors.svg
train = {TRAIN}
test = {TEST}

[iterations]
kind = iter_bar
input = {campaign / "tables" / "results_decomposed_rom.csv"}
output = {figs}/iters.svg
train = {TRAIN}
test = {TEST}

[pareto_front]
kind = pareto
input = {campaign / "tables" / "pareto.csv"}
output = {figs}/pareto.svg
""")
    return spec_file, figs


def test_criterion_12_all_figure_kinds_from_campaign_outputs(
        campaign_dir, tmp_path, capsys):
    spec_file, figs = _write_spec(campaign_dir, tmp_path)
    assert cli_main(["--spec", str(spec_file)]) == 0
    out = capsys.readouterr().out
    assert out.count("wrote") == 5
    for name in ("height", "errfield", "errors", "iters", "pareto"):
        svg = figs / f"{name}.svg"
        assert svg.exists() and svg.stat().st_size > 0, f"{name} not written"
    # contour and error-field figures mark subdomain interfaces with dashes
    assert b"stroke-dasharray" in (figs / "height.svg").read_bytes()
    assert b"stroke-dasharray" in (figs / "errfield.svg").read_bytes()
    # pareto carries both baselines as separate x-axes
    pareto = (figs / "pareto.svg").read_bytes()
    assert b"speedup vs decomposed FOM" in pareto
    assert b"speedup vs monolithic FOM" in pareto


def test_campaign_field_metadata_round_trip(campaign_dir):
    final = sorted((campaign_dir / "fields").glob("*_final.snap"))
    field = romplot.read_field(final[0])
    assert (field.nx, field.ny, field.n_vars) == (12, 12, 3)
    assert field.n_cols == 1
    assert field.times[-1] == 0.05


def test_campaign_tables_parse(campaign_dir):
    for table_path in sorted((campaign_dir / "tables").glob("*.csv")):
        if table_path.name == "projection_errors.csv":
            continue  # offline table, different header
        table = romplot.read_results(table_path)
        assert not table.empty, table_path


def test_solver_package_is_never_imported():
    assert "schwarzrom" not in sys.modules
    package_dir = Path(romplot.__file__).parent
    for source in package_dir.glob("*.py"):
        assert "schwarzrom" not in source.read_text(), (
            f"{source.name} references the solver package")
