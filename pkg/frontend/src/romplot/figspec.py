"""Figure specifications: what to draw, from which files, with which styling.

A spec file is INI-style; every section describes one figure:

    [height_contour]
    kind = contour                ; contour | error_field | param_curve |
                                  ; iter_bar | pareto
    input = out/fields/run_final.snap
    output = figs/height.svg
    variable = 0                  ; field variable index (field kinds)
    column = -1                   ; saved-snapshot column (field kinds)
    px = 2                        ; subdomain grid, draws dashed interfaces
    py = 2
    bounds = -5 5 -5 5            ; physical extent (defaults to cell indices)
    train = -4 -3 -2 -1 0         ; parameter values labeled in black
    test = -0.5                   ; parameter values labeled in red
    title = water height at final time
    levels = 30                   ; filled-contour level count
"""

from dataclasses import dataclass, field
from pathlib import Path

import configparser

from romplot.readers import PlotInputError

KINDS = ("contour", "error_field", "param_curve", "iter_bar", "pareto")


@dataclass(frozen=True)
class FigureSpec:
    """One figure: kind, input files, output path, and styling."""

    name: str
    kind: str
    inputs: tuple
    output: Path
    variable: int = 0
    column: int = -1
    px: int = 1
    py: int = 1
    bounds: tuple | None = None
    train: tuple = field(default_factory=tuple)
    test: tuple = field(default_factory=tuple)
    title: str = ""
    levels: int = 30

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotInputError(f"figure '{self.name}': unknown kind "
                                 f"{self.kind!r} (expected one of {KINDS})")
        if not self.inputs:
            raise PlotInputError(f"figure '{self.name}': no input files")
        missing = [str(p) for p in self.inputs if not Path(p).exists()]
        if missing:
            raise PlotInputError(f"figure '{self.name}': missing inputs "
                                 f"{missing}")
        if self.px < 1 or self.py < 1:
            raise PlotInputError(f"figure '{self.name}': subdomain counts "
                                 f"must be positive, got {self.px}x{self.py}")
        if self.bounds is not None and len(self.bounds) != 4:
            raise PlotInputError(f"figure '{self.name}': bounds need four "
                                 f"values, got {len(self.bounds)}")
        if self.levels < 1:
            raise PlotInputError(f"figure '{self.name}': level count must "
                                 f"be positive")


def _floats(text):
    return tuple(float(v) for v in text.split())


def spec_from_options(name, options) -> FigureSpec:
    """Build a FigureSpec from a string-valued option mapping."""
    opts = dict(options)
    try:
        kind = opts.pop("kind")
        output = opts.pop("output")
    except KeyError as exc:
        raise PlotInputError(f"figure '{name}': missing required key "
                             f"{exc.args[0]!r}") from exc
    inputs = tuple(Path(p) for p in opts.pop("input", "").split())
    kwargs = {}
    try:
        if "variable" in opts:
            kwargs["variable"] = int(opts.pop("variable"))
        if "column" in opts:
            kwargs["column"] = int(opts.pop("column"))
        if "px" in opts:
            kwargs["px"] = int(opts.pop("px"))
        if "py" in opts:
            kwargs["py"] = int(opts.pop("py"))
        if "levels" in opts:
            kwargs["levels"] = int(opts.pop("levels"))
        if "bounds" in opts:
            kwargs["bounds"] = _floats(opts.pop("bounds"))
        if "train" in opts:
            kwargs["train"] = _floats(opts.pop("train"))
        if "test" in opts:
            kwargs["test"] = _floats(opts.pop("test"))
    except ValueError as exc:
        raise PlotInputError(f"figure '{name}': {exc}") from exc
    kwargs["title"] = opts.pop("title", "")
    if opts:
        raise PlotInputError(f"figure '{name}': unknown keys "
                             f"{sorted(opts)}")
    return FigureSpec(name, kind, inputs, Path(output), **kwargs)


def parse_spec(path) -> list:
    """Parse a spec file into a list of FigureSpec, one per section."""
    path = Path(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise PlotInputError(f"cannot read spec '{path}': {exc}") from exc
    except configparser.Error as exc:
        raise PlotInputError(f"malformed spec '{path}': {exc}") from exc
    specs = []
    for section in cp.sections():
        specs.append(spec_from_options(section, cp[section]))
    if not specs:
        raise PlotInputError(f"spec '{path}' defines no figures")
    return specs
