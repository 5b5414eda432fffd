"""Command-line driver: single solves and parameter sweeps to CSV.

    qjunction <mode> [--config PATH] [--out PATH] [--workers N]
              [--override key=value ...]

Exit codes: 0 success, 1 configuration error, 2 at least one grid point
failed (partial output is still written).
"""

from __future__ import annotations

import argparse
import sys

import yaml

from .sweep import (
    MODES,
    ConfigError,
    apply_overrides,
    config_from_mapping,
    load_config,
    run,
    write_csv,
    write_report,
)


def _parse_overrides(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} is not of the form key=value")
        key, _, raw = pair.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"override {pair!r} has an empty key")
        try:
            out[key] = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse override value {raw!r}: {exc}")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qjunction",
        description="Steady-state heat transport through a two-bath qubit "
                    "junction (collective-mode embedding).",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode, help=f"run a {mode} computation")
        sp.add_argument("--config", help="YAML configuration file")
        sp.add_argument("--out", help="output CSV path "
                                      "(default: from config or <mode>.csv)")
        sp.add_argument("--workers", type=int,
                        help="worker processes (default: from config or all cores)")
        sp.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="dotted-path config override, repeatable")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = _parse_overrides(args.override)
        if args.workers is not None:
            overrides["workers"] = args.workers
        if args.config is not None:
            cfg = load_config(args.config, mode=args.mode, overrides=overrides)
        else:
            mapping = apply_overrides({}, overrides)
            cfg = config_from_mapping(mapping, mode=args.mode)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    result = run(cfg)
    out_path = args.out or cfg.out or f"{cfg.mode}.csv"
    write_csv(result, out_path)
    write_report(result, out_path + ".report.txt")
    failed = result.failed_rows()
    if failed:
        print(f"{len(failed)} of {len(result.rows)} points failed; "
              f"partial results in {out_path}", file=sys.stderr)
        return 2
    print(f"wrote {len(result.rows)} rows to {out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
