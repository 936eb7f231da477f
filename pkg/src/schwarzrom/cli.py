"""Command-line entry points for campaign stages.

Every subcommand takes the same flags and executes one pipeline stage (plus
any in-memory prerequisites already on disk from earlier invocations):

  schwarzrom train  --config c.ini          training runs -> snapshots
  schwarzrom basis  --config c.ini          snapshots -> POD bases
  schwarzrom sample --config c.ini          bases -> sample meshes
  schwarzrom run    --config c.ini          test runs -> records + fields
  schwarzrom report --config c.ini          records -> CSV tables
"""

import argparse
import sys

from .campaign import Campaign, load_config
from .exceptions import SchwarzRomError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schwarzrom",
        description="Domain-decomposed FOM/ROM campaign driver.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("train", "run the monolithic training simulations"),
        ("basis", "compute POD bases from stored snapshots"),
        ("sample", "build hyper-reduction sample meshes"),
        ("run", "execute the test-parameter runs"),
        ("report", "write the CSV summary tables"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True,
                       help="campaign INI file")
        p.add_argument("--output", default=None,
                       help="override the configured output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the configured RNG seed")
        p.add_argument("--override", action="append", default=[],
                       metavar="SECTION.KEY=VALUE",
                       help="override any config entry (repeatable)")
    return parser


def _config_from_args(args):
    overrides = list(args.override)
    if args.output is not None:
        overrides.append(f"output.directory={args.output}")
    if args.seed is not None:
        overrides.append(f"output.seed={args.seed}")
    return load_config(args.config, overrides)


_STAGES = {
    "train": Campaign.stage_train,
    "basis": Campaign.stage_basis,
    "sample": Campaign.stage_sample,
    "run": Campaign.stage_run,
    "report": Campaign.stage_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        campaign = Campaign(cfg)
        _STAGES[args.command](campaign)
    except SchwarzRomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{args.command} finished; artifacts under {cfg.out_dir} "
          f"(config hash {cfg.hash()[:12]})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
