"""Command-line front end: render a spec file or a single ad-hoc figure."""

import argparse
import sys

from romplot.figspec import KINDS, parse_spec, spec_from_options
from romplot.readers import PlotInputError
from romplot.render import render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="romplot",
        description="Render campaign artifacts (field dumps, CSV tables) "
                    "into figures.")
    parser.add_argument("--spec", metavar="PATH",
                        help="INI spec file; each section is one figure")
    parser.add_argument("--kind", choices=KINDS,
                        help="render a single figure of this kind")
    parser.add_argument("--input", action="append", default=[],
                        metavar="PATH", help="input file (repeatable)")
    parser.add_argument("--output", metavar="PATH", help="image file to write")
    parser.add_argument("--variable", type=int, metavar="V",
                        help="field variable index (field kinds)")
    parser.add_argument("--column", type=int, metavar="C",
                        help="saved-snapshot column (field kinds)")
    parser.add_argument("--px", type=int, metavar="N",
                        help="subdomains along x, for dashed interfaces")
    parser.add_argument("--py", type=int, metavar="N",
                        help="subdomains along y, for dashed interfaces")
    parser.add_argument("--bounds", nargs=4, type=float,
                        metavar=("X0", "X1", "Y0", "Y1"),
                        help="physical extent of field plots")
    parser.add_argument("--train", nargs="*", type=float, metavar="P",
                        help="training parameters (black tick labels)")
    parser.add_argument("--test", nargs="*", type=float, metavar="P",
                        help="testing parameters (red tick labels)")
    parser.add_argument("--title", help="figure title")
    parser.add_argument("--levels", type=int, metavar="N",
                        help="filled-contour level count")
    return parser


def _specs_from_args(args):
    if args.spec and args.kind:
        raise PlotInputError("--spec and --kind are mutually exclusive")
    if args.spec:
        return parse_spec(args.spec)
    if not args.kind:
        raise PlotInputError("nothing to do: pass --spec or --kind")
    if not args.output:
        raise PlotInputError("--kind needs --output")
    options = {
        "kind": args.kind,
        "input": " ".join(args.input),
        "output": args.output,
    }
    for key in ("variable", "column", "px", "py", "levels", "title"):
        value = getattr(args, key)
        if value is not None:
            options[key] = str(value)
    for key in ("bounds", "train", "test"):
        value = getattr(args, key)
        if value is not None:
            options[key] = " ".join(format(v, "g") for v in value)
    return [spec_from_options(args.kind, options)]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        specs = _specs_from_args(args)
        for spec in specs:
            path = render(spec)
            print(f"wrote {path}")
    except PlotInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
