"""Render figure specifications to image files.

Rendering is read-only over its inputs.  Vector (SVG) output is
byte-stable across repeated renders: the SVG id salt is pinned, text is
emitted as text (not paths), and the date stamp is suppressed.
"""

import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from romplot.figspec import FigureSpec  # noqa: E402
from romplot.readers import (  # noqa: E402
    PlotInputError,
    read_field,
    read_results,
)

matplotlib.rcParams["svg.hashsalt"] = "romplot"
matplotlib.rcParams["svg.fonttype"] = "none"

TRAIN_COLOR = "black"
TEST_COLOR = "red"


def _close_to_any(value, values, tol=1e-12):
    return any(abs(value - v) <= tol * max(1.0, abs(v)) for v in values)


def _save(fig, spec):
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    if spec.output.suffix.lower() == ".svg":
        fig.savefig(spec.output, metadata={"Date": None})
    else:
        fig.savefig(spec.output)
    plt.close(fig)
    return spec.output


def _warn(message):
    print(f"warning: {message}", file=sys.stderr)


# ---------------------------------------------------------------------------
# field kinds: contour and error_field
# ---------------------------------------------------------------------------

def _field_extent(spec, field):
    if spec.bounds is not None:
        x0, x1, y0, y1 = spec.bounds
    else:
        x0, x1, y0, y1 = 0.0, float(field.nx), 0.0, float(field.ny)
    dx = (x1 - x0) / field.nx
    dy = (y1 - y0) / field.ny
    xc = x0 + dx * (np.arange(field.nx) + 0.5)
    yc = y0 + dy * (np.arange(field.ny) + 0.5)
    return xc, yc, (x0, x1, y0, y1)


def _draw_interfaces(ax, spec, field, extent):
    """Dashed lines on the nominal subdomain boundaries (uniform split)."""
    x0, x1, y0, y1 = extent
    for k in range(1, spec.px):
        x = x0 + (x1 - x0) * k / spec.px
        ax.axvline(x, color="black", linestyle="--", linewidth=1.0)
    for k in range(1, spec.py):
        y = y0 + (y1 - y0) * k / spec.py
        ax.axhline(y, color="black", linestyle="--", linewidth=1.0)


def _render_field(spec, error_style):
    field = read_field(spec.inputs[0])
    if not -field.n_vars <= spec.variable < field.n_vars:
        raise PlotInputError(f"figure '{spec.name}': variable index "
                             f"{spec.variable} outside the {field.n_vars} "
                             "stored variables")
    if not -field.n_cols <= spec.column < field.n_cols:
        raise PlotInputError(f"figure '{spec.name}': column {spec.column} "
                             f"outside the {field.n_cols} stored snapshots")
    frame = field.frame(spec.column)[..., spec.variable]
    xc, yc, extent = _field_extent(spec, field)
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    cmap = "magma" if error_style else "viridis"
    # transpose: the first field axis is x, imshow/contourf expect rows = y
    cs = ax.contourf(xc, yc, frame.T, levels=spec.levels, cmap=cmap)
    fig.colorbar(cs, ax=ax)
    _draw_interfaces(ax, spec, field, extent)
    ax.set_xlim(extent[0], extent[1])
    ax.set_ylim(extent[2], extent[3])
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    t = field.times[spec.column]
    default = (f"variable {spec.variable}"
               f"{' mean |error|' if error_style else ''} at t = {t:g}, "
               f"parameter {field.param:g}")
    ax.set_title(spec.title or default)
    ax.set_aspect("equal")
    return _save(fig, spec)


# ---------------------------------------------------------------------------
# curve kinds: param_curve, iter_bar, pareto
# ---------------------------------------------------------------------------

def _param_ticks(ax, spec, table):
    """Ticks at the train/test parameters, colored by membership."""
    ticks = sorted(set(spec.train) | set(spec.test) | set(table.params()))
    ax.set_xticks(ticks)
    ax.set_xticklabels([format(t, "g") for t in ticks])
    for tick, label in zip(ticks, ax.get_xticklabels()):
        if _close_to_any(tick, spec.train):
            label.set_color(TRAIN_COLOR)
        else:
            label.set_color(TEST_COLOR)


def _empty_axes(spec, message):
    _warn(f"'{spec.inputs[0]}' has no data rows; rendering empty axes")
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.set_title(spec.title or message)
    return _save(fig, spec)


def _render_param_curve(spec):
    table = read_results(spec.inputs[0])
    if not table.completed():
        return _empty_axes(spec, "no completed runs")
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for variable in table.variables():
        params, errors = table.series(variable)
        ax.semilogy(params, errors, marker="o", label=variable)
    ax.set_xlabel("parameter")
    ax.set_ylabel("relative space-time error")
    ax.legend()
    _param_ticks(ax, spec, table)
    ax.set_title(spec.title or "error vs parameter")
    return _save(fig, spec)


def _render_iter_bar(spec):
    table = read_results(spec.inputs[0])
    per_param = {}
    for row in table.completed():
        if row.mean_schwarz_iters is not None:
            per_param.setdefault(row.param, row.mean_schwarz_iters)
    if not per_param:
        return _empty_axes(spec, "no completed runs")
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    params = sorted(per_param)
    span = (max(params) - min(params)) if len(params) > 1 else 1.0
    ax.bar(params, [per_param[p] for p in params],
           width=0.6 * span / max(len(params), 1), color="steelblue")
    ax.set_xlabel("parameter")
    ax.set_ylabel("mean Schwarz iterations per step")
    _param_ticks(ax, spec, table)
    ax.set_title(spec.title or "coupling iterations vs parameter")
    return _save(fig, spec)


def _render_pareto(spec):
    table = read_results(spec.inputs[0])
    rows = [r for r in table.completed()
            if r.error is not None and r.speedup_vs_decomp is not None]
    if not rows:
        return _empty_axes(spec, "no completed runs")
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    top = ax.twiny()
    for variable in table.variables():
        sub = [r for r in rows if r.variable == variable]
        if not sub:
            continue
        ax.scatter([r.speedup_vs_decomp for r in sub],
                   [r.error for r in sub], marker="o", label=variable)
        top.scatter([r.speedup_vs_mono for r in sub],
                    [r.error for r in sub], marker="s", alpha=0.0)
    ax.set_yscale("log")
    ax.set_xlabel("speedup vs decomposed FOM")
    top.set_xlabel("speedup vs monolithic FOM")
    ax.set_ylabel("relative space-time error")
    ax.legend()
    ax.set_title(spec.title or "error vs speedup")
    fig.tight_layout()
    return _save(fig, spec)


_RENDERERS = {
    "contour": lambda spec: _render_field(spec, error_style=False),
    "error_field": lambda spec: _render_field(spec, error_style=True),
    "param_curve": _render_param_curve,
    "iter_bar": _render_iter_bar,
    "pareto": _render_pareto,
}


def render(spec: FigureSpec):
    """Render one figure and return the written path."""
    return _RENDERERS[spec.kind](spec)
