"""Command-line front end: run, sweep, validate, dump-workload.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, List, Optional

from . import engine as engine_mod
from . import report as report_mod
from .cache import dump_cache_entries
from .scenario import (
    ConfigError,
    Scenario,
    get_by_path,
    parse_scenario,
    parse_scenario_dict,
    scenario_to_dict,
    set_by_path,
)
from .workload import dump_stream, generate_stream

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load(path: str, seed: Optional[int]) -> Scenario:
    scenario = parse_scenario(path)
    if seed is not None:
        data = scenario_to_dict(scenario)
        data["seed"] = seed
        scenario = parse_scenario_dict(data)
    return scenario


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = _load(args.config, args.seed)
    out_dir = args.out or scenario.output.dir
    eng = engine_mod.Engine(scenario)
    result = eng.run()
    paths = report_mod.write_run_artifacts(result, out_dir)
    if args.dump_caches:
        caches = []
        for kind, node in eng.caches.items():
            if node.prompt is not None:
                caches.append((kind.label, "prompt", node.prompt))
            if node.vector is not None:
                caches.append((kind.label, "vector", node.vector))
        dump_cache_entries(caches, args.dump_caches)
        paths.append(args.dump_caches)
    print(report_mod.summary_table(result.report))
    print("wrote: " + ", ".join(paths))
    return EXIT_OK


def _parse_sweep_value(raw: str, current: Any) -> Any:
    if isinstance(current, bool):
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"sweep value {raw!r} is not a boolean")
    if isinstance(current, int) and not isinstance(current, bool):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"sweep value {raw!r} is not an integer") from None
    if isinstance(current, float):
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"sweep value {raw!r} is not a number") from None
    if isinstance(current, str) or current is None:
        return raw
    raise ConfigError(f"swept parameter has unsupported type {type(current).__name__}")


def _cmd_sweep(args: argparse.Namespace) -> int:
    scenario = _load(args.config, args.seed)
    base = scenario_to_dict(scenario)
    current = get_by_path(base, args.param)
    values = [_parse_sweep_value(v, current) for v in args.values.split(",")]
    out_dir = args.out or scenario.output.dir
    rows = []
    for i, value in enumerate(values):
        point_dict = set_by_path(base, args.param, value)
        try:
            point_scenario = parse_scenario_dict(point_dict)
            result = engine_mod.run(point_scenario)
        except ConfigError as exc:
            raise ConfigError(f"sweep point {i} ({args.param}={value!r}): {exc}") from None
        point_dir = os.path.join(out_dir, f"point_{i:02d}")
        report_mod.write_run_artifacts(result, point_dir)
        rows.append(report_mod.sweep_row(i, args.param, value, result.report))
    paths = report_mod.write_sweep_artifacts(rows, out_dir)
    width = max(len(str(r["value"])) for r in rows)
    print(f"sweep over {args.param} ({len(rows)} points)")
    for row in rows:
        mean = "na" if row["mean_ms"] is None else f"{row['mean_ms']:.2f}"
        print(
            f"  {str(row['value']):>{width}}  mean_ms={mean}"
            f"  sem_hit={row['semantic_hit_ratio']:.3f}"
            f"  early_exit={row['early_exit_fraction']:.3f}"
        )
    print("wrote: " + ", ".join(paths))
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    scenario = _load(args.config, None)
    print(f"{args.config}: valid ({scenario.architecture.value}, seed {scenario.seed})")
    return EXIT_OK


def _cmd_dump_workload(args: argparse.Namespace) -> int:
    scenario = _load(args.config, args.seed)
    requests = generate_stream(scenario.seed, scenario.workload)
    out = args.out or os.path.join(scenario.output.dir, "workload.tsv")
    out_dir = os.path.dirname(out)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    dump_stream(requests, out)
    print(f"wrote {len(requests)} requests to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgesim",
        description="Discrete-event simulator of tiered edge inference serving with semantic caching.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write metrics artifacts")
    p_run.add_argument("config", help="scenario JSON file")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_run.add_argument("--out", default=None, help="output directory (default: scenario output.dir)")
    p_run.add_argument("--dump-caches", default=None, help="also dump cache contents to this file")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the scenario once per value of one parameter")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True, help="dotted config path, e.g. cache.similarity_threshold")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_val = sub.add_parser("validate", help="parse and validate a scenario file")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_dump = sub.add_parser("dump-workload", help="generate and dump the request stream")
    p_dump.add_argument("config")
    p_dump.add_argument("--seed", type=int, default=None)
    p_dump.add_argument("--out", default=None)
    p_dump.set_defaults(func=_cmd_dump_workload)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
