"""Command line front end.

Subcommands:

- ``ipf run --config cfg.json --out dir``: execute the configured sweep
  and write raw.csv + summary.csv into the output directory;
- ``ipf exact --config cfg.json``: exact asymptotic constants of the
  configured finite model, one CSV row per test function;
- ``ipf crossover --config cfg.json``: empirical MSE on both sides of the
  predicted interaction threshold;
- ``ipf summarize raw.csv [--config cfg.json]``: recompute the summary
  from a raw CSV (oracle columns need the config).
"""

from __future__ import annotations

import argparse
import csv
import sys

from .errors import IslandPfError
from .harness import (
    SUMMARY_COLUMNS,
    ConfigError,
    crossover_report,
    exact_constants_table,
    load_config,
    run_experiment,
    summarize_raw_file,
)


def _write_dict_rows(stream, columns, rows) -> None:
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c]
                         for c in columns])


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ipf",
        description="Island particle filter experiments over Feynman-Kac models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured sweep")
    p_run.add_argument("--config", required=True, help="JSON experiment config")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--workers", type=int, default=None,
                       help="replication worker processes (default: all cores)")
    p_run.add_argument("--island-workers", type=int, default=1,
                       help="threads for island steps inside one replication")

    p_exact = sub.add_parser("exact", help="exact asymptotic constants")
    p_exact.add_argument("--config", required=True)
    p_exact.add_argument("--out", default=None, help="CSV path (default stdout)")

    p_cross = sub.add_parser("crossover", help="MSE around the predicted threshold")
    p_cross.add_argument("--config", required=True)
    p_cross.add_argument("--out", default=None)
    p_cross.add_argument("--workers", type=int, default=None)

    p_summ = sub.add_parser("summarize", help="summary rows from a raw CSV")
    p_summ.add_argument("raw", help="raw CSV produced by 'ipf run'")
    p_summ.add_argument("--config", default=None,
                        help="config JSON enabling the oracle columns")
    p_summ.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, IslandPfError, OSError) as exc:
        print(f"ipf: error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "run":
        cfg = load_config(args.config)
        raw_path, summary_path = run_experiment(
            cfg, args.out, workers=args.workers,
            island_workers=args.island_workers,
        )
        print(f"raw: {raw_path}")
        print(f"summary: {summary_path}")
        return 0

    if args.command == "exact":
        cfg = load_config(args.config)
        rows = exact_constants_table(cfg)
        cols = ["function", "n", "B", "V", "B_tilde", "V_tilde",
                "crossover_N1_per_N2"]
        stream, close = _open_out(args.out)
        try:
            _write_dict_rows(stream, cols, rows)
        finally:
            if close:
                stream.close()
        return 0

    if args.command == "crossover":
        cfg = load_config(args.config)
        rows = crossover_report(cfg, workers=args.workers)
        cols = ["N2", "threshold", "N1", "mode", "mse", "se", "note"]
        stream, close = _open_out(args.out)
        try:
            _write_dict_rows(stream, cols, rows)
        finally:
            if close:
                stream.close()
        return 0

    if args.command == "summarize":
        cfg = load_config(args.config) if args.config else None
        rows = summarize_raw_file(args.raw, cfg)
        stream, close = _open_out(args.out)
        try:
            writer = csv.writer(stream, lineterminator="\r\n")
            writer.writerow(SUMMARY_COLUMNS)
            for row in rows:
                writer.writerow([repr(v) if isinstance(v, float) else v
                                 for v in row])
        finally:
            if close:
                stream.close()
        return 0

    raise ConfigError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
