"""Command line entry point.

Exit status: 0 success, 1 invalid input, 2 internal contract violation or
oracle divergence.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from . import engine, reference, scenario_io
from .core import ConfigError, ContractViolation, ScenarioError

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2


def _load(path: str, seed=None):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from None
    return scenario_io.parse_scenario(text, seed=seed, source=path)


def cmd_run(args, out) -> int:
    scenario = _load(args.path, seed=args.seed)
    metrics = engine.run(scenario, check=True)
    text = scenario_io.export_metrics(metrics, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    served = sum(m.fog_served + m.cloud_served for m in metrics)
    blacklist = len(metrics[-1].blacklist)
    print(f"seconds={len(metrics)} served={served} blacklist={blacklist}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args, out) -> int:
    scenario = _load(args.path)
    demands = sum(len(t.demands) for t in scenario.schedule)
    out.write(f"ok: {len(scenario.schedule)} seconds, {demands} demands\n")
    return EXIT_OK


def cmd_case(args, out) -> int:
    if args.name not in scenario_io.PAPER_TABLES:
        raise ScenarioError(f"unknown case {args.name!r}; choose from {', '.join(scenario_io.PAPER_TABLES)}")
    scenario = scenario_io.builtin_fixture(args.name)
    metrics = engine.run(scenario, check=True)
    got = scenario_io.flag_rows(metrics[0], scenario.params.f_cap)
    ok = True
    for row, want in scenario_io.PAPER_TABLES[args.name].items():
        have = got.get(row, [])
        width = max(len(want), len(have))
        cells = []
        for i in range(width):
            w = want[i] if i < len(want) else None
            h = have[i] if i < len(have) else None
            mark = "ok" if w == h else "MISMATCH"
            ok &= w == h
            cells.append(f"{'-' if h is None else h}/{'-' if w is None else w} {mark}")
        out.write(f"{row:8} " + " | ".join(cells) + "\n")
    out.write(f"blacklist: {{{', '.join(metrics[-1].blacklist)}}}\n")
    out.write(f"cloud: {metrics[0].cloud_served}\n")
    out.write("match\n" if ok else "mismatch\n")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_oracle_check(args, out) -> int:
    if args.path:
        scenarios = [(args.path, _load(args.path))]
    else:
        rng = random.Random(args.seed)
        scenarios = [(f"random #{i}", engine.random_small_scenario(rng)) for i in range(args.random)]
    for label, scenario in scenarios:
        metrics = engine.run(scenario)
        diff = reference.first_divergence(scenario, metrics)
        if diff is not None:
            out.write(f"DIVERGENCE in {label}: {diff}\n")
            return EXIT_INTERNAL
    out.write(f"match: {len(scenarios)} scenario(s)\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fogmtd", description="Fog-layer DDoS isolation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario file and export metrics")
    p.add_argument("path")
    p.add_argument("--format", choices=("rows", "events"), default="rows")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("case", help="replay a worked case against its published flag table")
    p.add_argument("name")
    p.set_defaults(func=cmd_case)

    p = sub.add_parser("oracle-check", help="compare the engine with the naive replay")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("path", nargs="?")
    g.add_argument("--random", type=int, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (ScenarioError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ContractViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
