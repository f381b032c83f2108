"""Command-line interface.

Subcommands::

    kinex run CONFIG [--seed S] [--out DIR] [--runs K] [--format csv|json]
    kinex reproduce FIGURE_ID [--seed S] [--out DIR] [--runs K] [--format ...]
    kinex sweep CONFIG --param NAME --values V1,V2,... [common flags]

Exit status: 0 when every requested run completed with money conserved,
1 on a failed run or conservation breach, 2 on bad input.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import load_config
from .errors import KinexError
from .presets import FIGURE_IDS, preset
from .runner import run_ensemble

logger = logging.getLogger("kinex")

_SWEEPABLE = ("lambda", "c1", "c2", "a", "b", "warmup")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    p.add_argument("--out", default=None, help="output directory (overrides config)")
    p.add_argument("--runs", type=int, default=1, help="ensemble size (default 1)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt",
                   help="table output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kinex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configuration")
    p_run.add_argument("config", help="path to a key-value config file")
    _add_common(p_run)

    p_rep = sub.add_parser("reproduce", help="run a reference-figure preset")
    p_rep.add_argument("figure_id", choices=FIGURE_IDS)
    _add_common(p_rep)

    p_sweep = sub.add_parser("sweep", help="grid over one model parameter")
    p_sweep.add_argument("config", help="path to a key-value config file")
    p_sweep.add_argument("--param", required=True, choices=_SWEEPABLE)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated parameter values")
    _add_common(p_sweep)
    return parser


def _overrides(args) -> dict:
    out = {}
    if args.seed is not None:
        out["seed"] = args.seed
    if args.out is not None:
        out["output_dir"] = args.out
    return out


def _execute(cfg, runs: int, out_dir: str, fmt: str) -> bool:
    result = run_ensemble(cfg, runs, out_dir=out_dir, fmt=fmt)
    ok = all(m.conservation_ok for m in result.manifests)
    for m in result.manifests:
        status = "ok" if m.conservation_ok else "CONSERVATION BREACH"
        logger.info(
            "run %d: %d trades, drift %.3e (%s)",
            m.run_index, m.trades_end, m.conservation_rel_drift, status,
        )
    return ok


def _cmd_run(args) -> int:
    cfg = load_config(args.config, **_overrides(args))
    ok = _execute(cfg, args.runs, cfg.output_dir, args.fmt)
    return 0 if ok else 1


def _cmd_reproduce(args) -> int:
    seed = args.seed if args.seed is not None else 0
    base = args.out if args.out is not None else os.path.join("out", args.figure_id)
    ok = True
    for member in preset(args.figure_id, seed=seed, output_dir=base):
        member_dir = os.path.join(base, member.label)
        logger.info("preset %s / %s: %s", args.figure_id, member.label, member.note)
        ok = _execute(member.config, args.runs, member_dir, args.fmt) and ok
    return 0 if ok else 1


def _cmd_sweep(args) -> int:
    values = [v for v in (s.strip() for s in args.values.split(",")) if v]
    if not values:
        raise KinexError("--values must name at least one value")
    key = "lam" if args.param == "lambda" else args.param
    caster = int if args.param == "warmup" else float
    ok = True
    for raw in values:
        try:
            value = caster(raw)
        except ValueError:
            raise KinexError(f"bad value {raw!r} for --param {args.param}") from None
        cfg = load_config(args.config, **_overrides(args), **{key: value})
        point_dir = os.path.join(cfg.output_dir, f"{args.param}={raw}")
        logger.info("sweep point %s=%s", args.param, raw)
        ok = _execute(cfg, args.runs, point_dir, args.fmt) and ok
    return 0 if ok else 1


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "reproduce": _cmd_reproduce, "sweep": _cmd_sweep}[args.command]
    try:
        return handler(args)
    except KinexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
