"""Command-line entry point: ``seqbell [flags]``.

Exit status is 0 on success, 2 on a configuration error and 1 on a runtime
failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from .ensemble import MODES, SimulationConfig, run_ensemble
from .io import FORMATS, emit
from .protocol import SCHEDULE_MODES

logger = logging.getLogger("seqbell")

# flag -> SimulationConfig field
_FLAG_FIELDS = {
    "--n-ancilla": "n_ancilla",
    "--pairs": "pairs",
    "--runs": "runs",
    "--mode": "mode",
    "--schedule": "schedule_mode",
    "--seed": "master_seed",
    "--bin-width": "bin_width",
    "--trunc-eps": "trunc_eps",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqbell",
        description="Simulate sequential CHSH runs whose pairs share one bosonic ancilla.",
    )
    parser.add_argument("--n-ancilla", type=int, default=1, help="ancilla particles N")
    parser.add_argument("--pairs", type=int, default=400, help="pairs per run M")
    parser.add_argument("--runs", type=int, default=10_000, help="number of runs R")
    parser.add_argument("--mode", choices=MODES, default="reused")
    parser.add_argument("--schedule", choices=SCHEDULE_MODES, default="balanced")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--bin-width", type=float, default=0.02)
    parser.add_argument("--trunc-eps", type=float, default=0.0,
                        help="drop ancilla amplitudes below this modulus (0 = exact)")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", choices=FORMATS, default="both")
    parser.add_argument("--from-summary", metavar="JSON",
                        help="take the configuration from a previous summary.json "
                             "(explicit flags are ignored)")
    parser.add_argument("--record-wall-time", action="store_true",
                        help="store the wall time in summary.json (breaks byte-identity)")
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker processes (default: $SEQBELL_THREADS or CPU count)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _config_from_args(args) -> SimulationConfig:
    if args.from_summary:
        with open(args.from_summary, encoding="utf-8") as fh:
            return SimulationConfig.from_dict(json.load(fh)["config"])
    values = {field: getattr(args, flag[2:].replace("-", "_")) for flag, field in _FLAG_FIELDS.items()}
    try:
        return SimulationConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{_offending_flag(exc)}: {exc}") from exc


def _offending_flag(exc) -> str:
    text = str(exc)
    for flag, field in _FLAG_FIELDS.items():
        if field in text:
            return flag
    if "divisible by 4" in text:
        return "--pairs"
    return "configuration"


def parse_config(argv=None) -> SimulationConfig:
    """Validated :class:`SimulationConfig` from command-line arguments.

    Raises ``SystemExit(2)`` with a usage message on invalid input.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _config_from_args(args)
    except ValueError as exc:
        parser.error(str(exc))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = _config_from_args(args)
    except (ValueError, KeyError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"seqbell: error: {exc}", file=sys.stderr)
        return 2

    try:
        start = time.perf_counter()
        result = run_ensemble(config, n_jobs=args.jobs)
        wall_time = time.perf_counter() - start
        paths = emit(result, args.out, args.format,
                     wall_time=wall_time if args.record_wall_time else None)
    except Exception as exc:  # noqa: BLE001 - reported as exit status 1
        logger.error("%s", exc)
        return 1

    logger.info("wrote %s in %.2fs", ", ".join(paths), wall_time)
    print(
        f"N={config.n_ancilla} M={config.pairs} R={config.runs} {config.mode}: "
        f"mean C(a',b')={result.mean_c:.4f} std={result.std_c:.4f} "
        f"P(violation)={result.violation_probability:.4f}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
