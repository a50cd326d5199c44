"""Command-line entry point.

``techrates run`` executes every pipeline stage in order; the per-stage
subcommands (ingest, decompose, centrality, estimate, stats, index)
rerun a single stage from the artifacts the earlier ones left behind.
``search`` answers a query offline, printing the same JSON the HTTP
service would return, and ``serve`` starts that service.

Configuration comes from, in increasing precedence: built-in defaults,
a ``--config`` file of ``key = value`` lines, TECHRATES_* environment
variables, and command-line flags. Every key has a default, so with no
configuration at all the pipeline runs a small synthetic corpus preset.

Exit codes: 0 success, 2 configuration or usage error, 3 stage or
artifact failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline
from .config import ConfigError, PipelineConfig, load_config

_EXIT_OK = 0
_EXIT_CONFIG = 2
_EXIT_STAGE = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="configuration file (key = value lines)")
    parser.add_argument("--outdir", metavar="DIR", help="artifact output directory")
    parser.add_argument("--seed", type=int, metavar="N", help="master random seed")
    parser.add_argument(
        "--replicates", type=int, metavar="R", help="null-model replicates per cohort"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="techrates",
        description="Decompose a patent corpus into technological domains "
        "and estimate their yearly improvement rates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run every pipeline stage in order")
    _add_common(run)

    for name, text in (
        ("ingest", "load (or synthesize), filter, and checkpoint the corpus"),
        ("decompose", "compute class-overlap domains and coverage"),
        ("centrality", "per-cohort citation centrality against the null model"),
        ("estimate", "per-domain improvement rates from mean centrality"),
        ("stats", "distribution fits, normality tests, and sensitivity checks"),
        ("index", "build the full-text search index"),
    ):
        stage = sub.add_parser(name, help=text)
        _add_common(stage)
        if name == "estimate":
            stage.add_argument(
                "--sigma2", type=float, metavar="S2",
                help="variance smearing correction applied to rates",
            )

    search = sub.add_parser("search", help="query finished artifacts offline")
    search.add_argument("query", help="search text (multiple words intersect)")
    search.add_argument("--artifacts", metavar="DIR", help="artifact directory (default: outdir)")
    search.add_argument("-n", type=int, default=5, metavar="N", help="matches to return")
    search.add_argument(
        "--table", action="store_true", help="print a plain table instead of JSON"
    )
    _add_common(search)

    serve = sub.add_parser("serve", help="serve finished artifacts over HTTP")
    serve.add_argument("--artifacts", metavar="DIR", help="artifact directory (default: outdir)")
    serve.add_argument("--bind", metavar="HOST:PORT", help="listen address")
    serve.add_argument("--ui", metavar="DIR", help="built web UI directory to serve under /ui/")
    _add_common(serve)

    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    overrides = {
        "outdir": args.outdir,
        "seed": args.seed,
        "replicates": args.replicates,
        "sigma2": getattr(args, "sigma2", None),
        "bind": getattr(args, "bind", None),
    }
    return load_config(path=args.config, overrides=overrides)


def _warn_if_no_rates(cfg: PipelineConfig) -> None:
    rates_path = Path(cfg.outdir) / "rates.tsv"
    if rates_path.exists() and not pipeline.read_rates(rates_path):
        print(
            "warning: no rate estimates produced "
            "(no valid domain has centrality-scored patents)",
            file=sys.stderr,
        )


def _artifact_dir(args: argparse.Namespace, cfg: PipelineConfig) -> str:
    return args.artifacts if args.artifacts else cfg.outdir


def _print_search_table(payload: dict) -> None:
    header = f"{'code':<14} {'K %/yr':>8} {'MPR':>6} {'size':>7} {'matched':>8}"
    print(header)
    print("-" * len(header))
    for row in payload["results"]:
        k_text = f"{100.0 * row['k']:.1f}" if row["k"] is not None else "-"
        print(
            f"{row['code']:<14} {k_text:>8} {row['mpr']:>6.3f} "
            f"{row['size']:>7} {row['matched_count']:>8}"
        )
    if not payload["results"]:
        print(f"(no domain matches {payload['query']!r})")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
    except ConfigError as exc:
        print(f"techrates: configuration error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG

    try:
        if args.command == "run":
            pipeline.run_all(cfg)
            _warn_if_no_rates(cfg)
            print(cfg.outdir)
        elif args.command in pipeline.STAGE_ORDER:
            pipeline.run_stage(args.command, cfg)
            if args.command == "estimate":
                _warn_if_no_rates(cfg)
        elif args.command == "search":
            from .service import ArtifactBundle, ArtifactError
            from .textsearch import EmptyQueryError

            try:
                bundle = ArtifactBundle(_artifact_dir(args, cfg), seed=cfg.seed,
                                        sample_size=cfg.sample_size)
            except ArtifactError as exc:
                print(f"techrates: {exc}", file=sys.stderr)
                return _EXIT_STAGE
            try:
                payload = bundle.search_response(args.query, args.n)
            except (EmptyQueryError, ValueError) as exc:
                print(f"techrates: {exc}", file=sys.stderr)
                return _EXIT_CONFIG
            if args.table:
                _print_search_table(payload)
            else:
                print(json.dumps(payload, sort_keys=True, indent=2))
        elif args.command == "serve":
            from .service import ArtifactError, serve

            try:
                serve(
                    _artifact_dir(args, cfg),
                    bind=cfg.bind,
                    seed=cfg.seed,
                    ui_dir=args.ui,
                )
            except ArtifactError as exc:
                print(f"techrates: {exc}", file=sys.stderr)
                return _EXIT_STAGE
            except ValueError as exc:
                print(f"techrates: {exc}", file=sys.stderr)
                return _EXIT_CONFIG
    except pipeline.StageError as exc:
        print(f"techrates: {exc}", file=sys.stderr)
        return _EXIT_STAGE
    return _EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
