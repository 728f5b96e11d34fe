"""``minglab <command> [--config FILE] [overrides]``.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .experiments import COMMANDS, ConfigError, load_config, run
from .experiments.output import render, write_atomic

log = logging.getLogger("minglab")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _samples(text: str):
    return text if text == "auto" else int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minglab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON experiment manifest; flags override its fields")
    parser.add_argument("--n", dest="n_list", type=int, nargs="+", help="apparatus sizes")
    parser.add_argument("--alpha", type=float, help="defect-budget exponent in (0, 1)")
    parser.add_argument("--h0", type=float, help="base action constant")
    parser.add_argument("--a1-sq", dest="a1_sq", type=float, help="|a1|^2 of the incident particle")
    parser.add_argument("--phase", type=float, help="relative phase of a1 (radians)")
    parser.add_argument("--samples", type=_samples, help="quadrature points M, or 'auto' (2n+1)")
    parser.add_argument("--defects", type=int, help="random defects in the initial pattern")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--method", choices=("quadrature", "closed-form"), help="limit: data source")
    parser.add_argument("--trials", type=int, help="macro-check: prefix draws")
    parser.add_argument("--tol", type=float, help="macro-check: spread tolerance")
    parser.add_argument("--memory-cap-mb", dest="memory_cap_mb", type=float)
    parser.add_argument("--output", help="output file (stdout when omitted)")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    overrides = {
        k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")
    }
    try:
        cfg = load_config(args.config, args.command, overrides)
        table = run(cfg)
        text = render(table.rows, table.columns, cfg.format)
    except ConfigError as exc:
        print(f"minglab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"minglab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.output:
        write_atomic(cfg.output, text)
        log.info("wrote %d rows to %s", len(table.rows), cfg.output)
    else:
        sys.stdout.write(text)
    if table.exit_code:
        print("minglab: validation failed", file=sys.stderr)
    return table.exit_code


if __name__ == "__main__":
    sys.exit(main())
