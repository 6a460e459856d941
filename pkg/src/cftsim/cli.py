"""Command line: ``cftsim run | sweep | oracle``.

Exit codes: 0 success, 1 oracle mismatch, 2 configuration error,
3 protocol invariant violation (trace dump path printed).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, ScenarioConfig, parse_config
from .oracle import CASES, check_case
from .protocol import ProtocolViolation
from .simulation import dump_violation_trace, simulate
from .sweep import FIGURES, Row, SweepPoint, emit_outputs, figure_spec, run_points

EXIT_OK = 0
EXIT_ORACLE = 1
EXIT_CONFIG = 2
EXIT_VIOLATION = 3

OUT_ENV = "CFTSIM_OUT"

_FIGURE_ARGS = {"f3": "F3", "f4": "F4", "f5": "F5", "f6": "F6", "f7": "F7_8", "f9": "F9_10"}


def _default_out() -> str:
    return os.environ.get(OUT_ENV, "results")


def _handle_violation(exc: ProtocolViolation, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    path = out / "violation_trace.txt"
    cfg = getattr(exc, "config", None)
    seed = getattr(exc, "seed", None)
    if cfg is not None:
        dump_violation_trace(cfg, seed, path)
        print(f"protocol invariant violated: {exc}\ntrace dump: {path}", file=sys.stderr)
    else:
        print(f"protocol invariant violated: {exc}", file=sys.stderr)
    return EXIT_VIOLATION


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    out = Path(args.out)
    seeds = range(cfg.seed, cfg.seed + cfg.replications)
    rows = []
    for seed in seeds:
        res = simulate(cfg, seed, trace=args.trace)
        rows.append(Row("custom", cfg.variant.value, 0.0, cfg, res.stats))
        if args.trace:
            out.mkdir(parents=True, exist_ok=True)
            (out / f"trace_seed{seed}.txt").write_text("\n".join(res.trace) + "\n")
        s = res.stats
        print(
            f"seed={seed} generated={s.generated} committed={s.committed} aborted={s.aborted} "
            f"commit_rate={s.commit_rate:.4f} presumed_commit_rate={s.presumed_commit_rate:.4f}"
            if s.generated
            else f"seed={seed} generated=0"
        )
    for p in emit_outputs(rows, out):
        print(f"wrote {p}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    figures = FIGURES if args.figure == "all" else (_FIGURE_ARGS[args.figure],)
    base = ScenarioConfig() if args.horizon is None else ScenarioConfig(horizon=args.horizon)
    points: list[SweepPoint] = []
    for f in figures:
        points.extend(figure_spec(f, base).points())
    first = args.first_seed
    rows = run_points(points, range(first, first + args.seeds), jobs=args.jobs)
    for p in emit_outputs(rows, args.out):
        print(f"wrote {p}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    names = list(CASES) if args.case == "all" else [args.case]
    failed = 0
    for name in names:
        res = check_case(name)
        print(res.line())
        failed += not res.ok
    print(f"{len(names) - failed}/{len(names)} oracle cases agree")
    return EXIT_ORACLE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cftsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", default=_default_out())
    run.add_argument("--trace", action="store_true", help="write the per-event trace")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="run an experiment family over its grid")
    sw.add_argument("--figure", required=True, choices=[*_FIGURE_ARGS, "all"])
    sw.add_argument("--seeds", type=int, default=10)
    sw.add_argument("--first-seed", type=int, default=1)
    sw.add_argument("--out", default=_default_out())
    sw.add_argument("--horizon", type=float, help="simulated seconds per run (default 36000)")
    sw.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    sw.set_defaults(func=cmd_sweep)

    orc = sub.add_parser("oracle", help="compare the simulator with the exhaustive enumerator")
    orc.add_argument("--case", default="all", choices=[*CASES, "all"])
    orc.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProtocolViolation as exc:
        return _handle_violation(exc, Path(getattr(args, "out", _default_out())))
    except PermissionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
