"""Command-line entry point: ``wikikg {build,metrics,analyze,report,verify}``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from wikikg import __version__
from wikikg.config import KEYS, load_config
from wikikg.errors import (
    ConfigError,
    IntegrityViolationsPresent,
    MissingGraph,
    MissingMetrics,
    ParseError,
    WikiKGError,
)
from wikikg.pipeline import Pipeline

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_INTEGRITY = 3
EXIT_MISSING_GRAPH = 4
EXIT_MISSING_METRICS = 5
EXIT_PARSE = 6

_EXIT_CODES = [
    (ConfigError, EXIT_CONFIG),
    (IntegrityViolationsPresent, EXIT_INTEGRITY),
    (MissingGraph, EXIT_MISSING_GRAPH),
    (MissingMetrics, EXIT_MISSING_METRICS),
    (ParseError, EXIT_PARSE),
]

log = logging.getLogger("wikikg")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="sectioned key-value configuration file")
    p.add_argument("--force", action="store_true", help="rerun stages even if they are current")
    p.add_argument("-v", "--verbose", action="store_true")
    groups = {}
    for key in KEYS:
        group = groups.get(key.section)
        if group is None:
            group = groups[key.section] = p.add_argument_group(f"[{key.section}] settings")
        flag = "--" + key.name.replace("_", "-")
        if key.kind == "flag":
            group.add_argument(flag, dest=key.name, action="store_const", const="true", default=None,
                               help=key.help)
        else:
            group.add_argument(flag, dest=key.name, metavar=key.name.upper(), default=None,
                               help=f"{key.help} (default: {key.default!r})" if key.help else None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wikikg",
        description="Build a relational knowledge graph from Wikipedia dumps and compute article metrics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "build": "parse the dumps and write the nine graph tables",
        "metrics": "compute the twelve article metrics from the graph",
        "analyze": "class means, summary statistics, correlations and rankings",
        "report": "print the run reports",
        "verify": "check keys and foreign keys of the written graph",
    }
    for name, text in helps.items():
        _add_config_flags(sub.add_parser(name, help=text, description=text))
    return parser


def _exit_code(exc: BaseException) -> int:
    for cls, code in _EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return EXIT_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k.name: getattr(args, k.name) for k in KEYS}
    stage = args.command
    pipe = None
    try:
        cfg = load_config(args.config, overrides)
        cfg.validate()
        pipe = Pipeline(cfg, force=args.force)
        if stage == "build":
            counters = pipe.build()
            if not pipe.ran:
                print("all stages current")
            else:
                print(f"graph written to {pipe.layout.graph} ({counters.get('page.rows', 0)} pages, "
                      f"{counters.get('page_link.edges', 0)} links)")
        elif stage == "metrics":
            counters = pipe.metrics()
            print("all stages current" if not pipe.ran else
                  f"metrics for {counters.get('metrics.articles', 0)} articles written to {pipe.layout.metrics}")
        elif stage == "analyze":
            pipe.analyze()
            print("all stages current" if not pipe.ran else f"analysis written to {pipe.layout.analysis}")
        elif stage == "report":
            sys.stdout.write(pipe.report())
        elif stage == "verify":
            report = pipe.verify()
            sys.stdout.write(report.render())
            if not report.ok:
                return EXIT_INTEGRITY
    except (WikiKGError, OSError) as exc:
        if pipe is not None and pipe.ran:
            stage = f"{stage} (stage {pipe.ran[-1]})"
        print(f"wikikg {stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _exit_code(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
