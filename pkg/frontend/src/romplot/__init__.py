"""Figure rendering for campaign artifacts.

Reads only the solver's documented on-disk formats (field/snapshot
binaries and CSV tables) through its own parsers; the solver package is
never imported.
"""

from romplot.figspec import KINDS, FigureSpec, parse_spec, spec_from_options
from romplot.readers import (
    Field,
    PlotInputError,
    ResultRow,
    ResultTable,
    read_field,
    read_results,
)
from romplot.render import render

__version__ = "0.1.0"

__all__ = [
    "Field",
    "FigureSpec",
    "KINDS",
    "PlotInputError",
    "ResultRow",
    "ResultTable",
    "parse_spec",
    "read_field",
    "read_results",
    "render",
    "spec_from_options",
]
