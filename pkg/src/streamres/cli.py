"""Command-line entry point.

    streamres run      [--config cfg.json] [--seed N] [--out DIR] [--section.key VALUE ...]
    streamres generate [--count N] [--format jsonl|csv] [--output FILE]
    streamres sample | cluster | detect | export   (one stage each)
    streamres bench    [--ks 100,4500,9000] [--repeats 7]

Exit codes: 0 success, 1 operational failure (one ``error ...`` line on
stderr), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from . import __version__
from .bench import BenchGrid, format_csv, format_table, run_bench
from .errors import InvalidConfig, StreamResError
from .ingest import generate_synthetic, read_records, write_records
from .pipeline import (
    FILES,
    PipelineConfig,
    apply_overrides,
    with_defaults,
    load_windows,
    run_pipeline,
    stage_cluster,
    stage_detect,
    stage_export,
    stage_sample,
    _read_jsonl,
)

log = logging.getLogger("streamres")


class UsageError(Exception):
    pass


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--verbose", "-v", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="streamres", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("--version", action="version", version=f"streamres {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("run", parents=[common], help="full pipeline")

    g = sub.add_parser("generate", parents=[common], help="write synthetic records")
    g.add_argument("--count", type=int)
    g.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    g.add_argument("--output")

    sub.add_parser("sample", parents=[common], help="pooled reservoir sampling -> samples.jsonl, pool.json")

    c = sub.add_parser("cluster", parents=[common], help="windowed k-means -> windows.jsonl")
    c.add_argument("--samples", help="sample stream (default OUT/samples.jsonl)")

    d = sub.add_parser("detect", parents=[common], help="outlier events -> events.jsonl")
    d.add_argument("--windows", help="default OUT/windows.jsonl")
    d.add_argument("--samples", help="default OUT/samples.jsonl")

    e = sub.add_parser("export", parents=[common], help="knowledge graph -> graph.ttl, graph.dot")
    e.add_argument("--windows", help="default OUT/windows.jsonl")
    e.add_argument("--events", help="default OUT/events.jsonl")

    b = sub.add_parser("bench", parents=[common], help="sampling timing grid")
    b.add_argument("--ks", default="100,4500,9000")
    b.add_argument("--data-modes", default="dataset,random")
    b.add_argument("--replacement", default="yes,no")
    b.add_argument("--families", default="uniform,weighted")
    b.add_argument("--repeats", type=int, default=7)
    b.add_argument("--loops", type=int)
    return parser


def _parse_overrides(extra: List[str]):
    pairs = []
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise UsageError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        elif i + 1 < len(extra):
            value = extra[i + 1]
            i += 2
        else:
            raise UsageError(f"flag {tok} needs a value")
        pairs.append((key.replace("-", "_"), value))
    return pairs


def load_config(args, extra) -> PipelineConfig:
    d = {}
    if args.config:
        if not os.path.isfile(args.config):
            raise InvalidConfig(f"config file not found: {args.config}")
        with open(args.config, encoding="utf-8") as fh:
            d = json.load(fh)
    d = apply_overrides(with_defaults(d), _parse_overrides(extra))
    if args.seed is not None:
        d["seed"] = args.seed
    if args.out is not None:
        d["out"] = args.out
    cfg = PipelineConfig.from_dict(d)
    cfg.validate()
    return cfg


def _path(arg, out, name):
    return arg if arg else os.path.join(out, FILES[name])


def _dispatch(args, extra) -> int:
    if args.command == "bench":
        if extra:
            raise UsageError(f"unexpected arguments {extra}")
        out = args.out or "out"
        grid = BenchGrid(
            ks=tuple(int(k) for k in args.ks.split(",")),
            data_modes=tuple(args.data_modes.split(",")),
            replacement=tuple(args.replacement.split(",")),
            families=tuple(args.families.split(",")),
            repeats=args.repeats,
            loops=args.loops,
            seed=args.seed or 0,
        )
        rows = run_bench(grid)
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "bench.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(format_csv(rows))
        table = format_table(rows)
        with open(os.path.join(out, "bench.txt"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(table)
        sys.stdout.write(table)
        return 0

    cfg = load_config(args, extra)
    out = cfg.out
    if args.command == "generate":
        if "synthetic" not in cfg.source:
            raise InvalidConfig("generate needs a synthetic source")
        count = args.count or cfg.source["count"]
        path = args.output or os.path.join(out, "records." + args.format)
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        write_records(generate_synthetic(cfg.synthetic_spec(), count), path, args.format)
        return 0
    os.makedirs(out, exist_ok=True)

    if args.command == "run":
        summary = run_pipeline(cfg, out)
        log.info("wrote %d windows, %d events to %s", summary["windows"], summary["events"], out)
    elif args.command == "sample":
        stage_sample(cfg, out)
    elif args.command == "cluster":
        samples = read_records(_path(args.samples, out, "samples"), "jsonl")
        stage_cluster(cfg, out, samples)
    elif args.command == "detect":
        windows = load_windows(_path(args.windows, out, "windows"), _path(args.samples, out, "samples"), cfg.cluster.q)
        stage_detect(cfg, out, windows)
    elif args.command == "export":
        windows = _read_jsonl(_path(args.windows, out, "windows"))
        reports = _read_jsonl(_path(args.events, out, "events"))
        stage_export(out, windows, reports)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args, extra)
    except UsageError as exc:
        parser.error(str(exc))  # exits 2
    except (StreamResError, OSError, ValueError, KeyError) as exc:
        msg = json.dumps(str(exc))
        print(f"error stage={args.command} type={type(exc).__name__} message={msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
