"""Command-line front end.

Usage::

    cosbem price CONFIG [--out results.csv] [--manifest run.json] [--threads N]
    cosbem vanilla CONFIG
    cosbem mc CONFIG [--seed S]
    cosbem estimate-nf CONFIG
    cosbem error-bound CONFIG

With ``--server URL`` the config is sent to a running ``cosbem-serve``
instance and the returned table is written locally. Exit codes: 0 success,
2 invalid config or arguments, 3 numerical failure, 4 service unreachable.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .config import load_config, parse_config
from .errors import ArgumentError, ConfigError, CosBemError, DomainError
from .runner import COMMANDS, RunTable, format_csv, manifest, run_command

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_SERVICE = 4


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cosbem", description="COS-BEM barrier option pricing")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "price": "price barrier options by boundary elements",
        "vanilla": "price the unbarriered option with the reference oracles",
        "mc": "Monte Carlo barrier price with confidence interval",
        "estimate-nf": "smallest number of cosine terms for a tolerance",
        "error-bound": "truncation error bound and realized COS error against N_F",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("config", help="experiment config file")
        sp.add_argument("--out", help="output file (default: standard output)")
        sp.add_argument("--manifest", help="JSON run manifest path (default: OUT.json when --out is set)")
        sp.add_argument("--threads", type=int, default=1, help="worker thread cap")
        sp.add_argument("--seed", type=int, default=None, help="override the Monte Carlo seed")
        sp.add_argument("--server", default=None, help="run remotely on a cosbem service at this URL")
    return ap


def _remote(args, text: str) -> tuple[RunTable, dict]:
    from .service.client import run_remote

    return run_remote(args.server, args.command, text, args.threads, args.seed)


def _local(args, text: str) -> tuple[RunTable, dict]:
    cfg = parse_config(text)
    started = time.time()
    t0 = time.perf_counter()
    table = run_command(args.command, cfg, args.threads, args.seed)
    return table, manifest(args.command, cfg, table, args.threads, args.seed, started, time.perf_counter() - t0)


def _write(args, table: RunTable, man: dict) -> None:
    body = table.text if table.text is not None else format_csv(table)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    man_path = args.manifest or (args.out + ".json" if args.out else None)
    if man_path:
        with open(man_path, "w", encoding="utf-8") as fh:
            json.dump(man, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ArgumentError(f"--threads must be >= 1, got {args.threads}")
        text = load_config(args.config).source
        table, man = _remote(args, text) if args.server else _local(args, text)
        _write(args, table, man)
    except (ConfigError, ArgumentError, DomainError) as exc:
        print(f"cosbem: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConnectionError as exc:
        print(f"cosbem: service error: {exc}", file=sys.stderr)
        return EXIT_SERVICE
    except (CosBemError, ArithmeticError) as exc:
        print(f"cosbem: numerical failure in {_origin(exc)}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _origin(exc: BaseException) -> str:
    tb = exc.__traceback__
    module = "cosbem"
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("cosbem."):
            module = name
        tb = tb.tb_next
    return module


if __name__ == "__main__":
    sys.exit(main())
