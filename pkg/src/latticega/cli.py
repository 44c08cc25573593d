"""Command-line entry point: ``latticega {geo-mc,astro,orbit} [options]``.

Settings resolve in three layers: per-problem defaults, then a flat
``key = value`` config file (``--config``), then command-line flags.  Every
config key is also a flag, spelled with underscores or dashes.
"""
from __future__ import annotations

import argparse
import logging
import sys
import typing
from pathlib import Path

from . import bench, io
from .engine import GAConfig
from .errors import ConfigurationError, InitializationError

ALIASES = {"operator": "operator_choice"}
SUBCOMMANDS = {"geo-mc": "geo_mc", "astro": "astro", "orbit": "orbit"}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _field_types() -> dict[str, type]:
    hints = {**typing.get_type_hints(bench.RunConfig), **typing.get_type_hints(GAConfig)}
    out = {}
    for key in bench.config_keys():
        hint = hints[key]
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        out[key] = args[0] if args else hint
    return out


def coerce(key: str, raw: str):
    kind = _field_types()[key]
    text = raw.strip()
    if text.lower() in {"none", ""} and kind is not str:
        return None
    try:
        if kind is bool:
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError(text)
        return kind(text)
    except ValueError:
        raise ConfigurationError(f"{key}: cannot read {raw!r} as {kind.__name__}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latticega", description="Constraint-consistent NSGA-II benchmark runs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "geo-mc": "Monte Carlo study on the land-constrained target problem",
        "astro": "three-objective telescope siting",
        "orbit": "variable-length constellation design",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="flat key = value config file")
        for key in bench.config_keys():
            flags = [f"--{key}"]
            if "_" in key:
                flags.append(f"--{key.replace('_', '-')}")
            if key == "operator_choice":
                flags.append("--operator")
            p.add_argument(*flags, dest=key, default=None, metavar="VALUE")
    return parser


def resolve_config(command: str, args: argparse.Namespace) -> bench.RunConfig:
    problem = SUBCOMMANDS[command]
    config = bench.default_config(problem)
    if args.config:
        values = {ALIASES.get(k, k): v for k, v in io.read_config(args.config).items()}
        unknown = sorted(set(values) - set(bench.config_keys()))
        if unknown:
            raise ConfigurationError(f"{args.config}: unknown keys {unknown}")
        config = bench.apply_overrides(config, {k: coerce(k, v) for k, v in values.items()})
    flags = {k: coerce(k, v) for k, v in vars(args).items()
             if k in bench.config_keys() and v is not None}
    config = bench.apply_overrides(config, flags)
    if config.problem != problem:
        raise ConfigurationError(f"config selects problem {config.problem!r} but subcommand is {command!r}")
    return config


def _geo_mc(config: bench.RunConfig) -> None:
    report = bench.run_monte_carlo_geo(config)
    out = Path(config.out_dir)
    tag = config.ga.operator_choice
    bench.export_trace_csv(report, out / f"geo_mc_trace_{tag}.csv")
    bench.export_runs_csv(report, out / f"geo_mc_runs_{tag}.csv")
    print(report.summary())
    print(f"wrote {out / f'geo_mc_trace_{tag}.csv'} and {out / f'geo_mc_runs_{tag}.csv'}")


def _astro(config: bench.RunConfig) -> None:
    result, path = bench.run_astro(config)
    print(f"astro: {result.generations} generations, {result.evaluations} evaluations, "
          f"converged={result.converged}")
    print(f"wrote {path}")


def _orbit(config: bench.RunConfig) -> None:
    result, path = bench.run_orbit(config)
    print(f"orbit: {result.generations} generations, {result.evaluations} evaluations, "
          f"converged={result.converged}")
    print(f"wrote {path}")


HANDLERS = {"geo-mc": _geo_mc, "astro": _astro, "orbit": _orbit}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = resolve_config(args.command, args)
        HANDLERS[args.command](config)
    except (ConfigurationError, InitializationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
