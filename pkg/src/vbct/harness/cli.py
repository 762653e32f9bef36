"""Command-line front end.

Exit codes: 0 success (bounds hold), 2 invalid config, 3 bound violated or
verification mismatch, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
from importlib import resources
from pathlib import Path

from vbct.errors import ParameterError
from vbct.harness import config as cfgmod
from vbct.harness.runner import (
    EXIT_BOUND,
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_OK,
    run_scenario,
    summary_table,
    verify_file,
)


def fixture_names() -> list[str]:
    root = resources.files("vbct.harness") / "fixtures"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def fixture_text(name: str) -> str:
    """Config text of a shipped fixture; a bare protocol id means its honest fixture."""
    names = fixture_names()
    if name not in names and f"{name}_honest" in names:
        name = f"{name}_honest"
    if name not in names:
        raise cfgmod.ConfigError(f"--protocol: unknown fixture {name!r}; valid: {', '.join(names)}")
    return (resources.files("vbct.harness") / "fixtures" / f"{name}.cfg").read_text(encoding="utf-8")


def _load(args) -> cfgmod.ScenarioConfig:
    if args.config and args.protocol:
        raise cfgmod.ConfigError("give --config or --protocol, not both")
    if args.config:
        c = cfgmod.load_config(args.config)
    elif args.protocol:
        name = args.protocol
        c = cfgmod.loads(fixture_text(name), name if name in fixture_names() else f"{name}_honest")
    else:
        raise cfgmod.ConfigError("one of --config or --protocol is required")
    return c.with_overrides(args.trials, args.seed)


def _echo(result, c) -> None:
    print(summary_table([{"scenario": c.name, **result.report.summary_row()}]), end="")
    for b in result.report.bound_comparisons:
        mark = "ok  " if b.satisfied else "FAIL"
        slack = f" (slack {b.slack:.3g})" if b.slack else ""
        print(f"{mark} {b.name}: {b.empirical:.6g} {b.relation} {b.bound:.6g}{slack}")
    if result.violations:
        print("schedule violations: " + ", ".join(f"{k}={v}" for k, v in sorted(result.violations.items())))


def cmd_run(args) -> int:
    c = _load(args)
    result = run_scenario(c, args.out, args.parallelism)
    _echo(result, c)
    return result.exit_code


def _grid(specs: list[str]) -> list[dict[str, str]]:
    axes = []
    for s in specs:
        if "=" not in s:
            raise cfgmod.ConfigError(f"--grid {s!r}: expected key=v1,v2,...")
        k, vs = s.split("=", 1)
        values = [v.strip() for v in vs.split(",") if v.strip()]
        if not values:
            raise cfgmod.ConfigError(f"--grid {k}: no values")
        axes.append([(k.strip(), v) for v in values])
    return [dict(combo) for combo in itertools.product(*axes)]


def cmd_sweep(args) -> int:
    base = _load(args)
    mapping = cfgmod.to_mapping(base)
    points = _grid(args.grid or [])
    # validate the whole grid before running anything
    configs = []
    for k, point in enumerate(points):
        m = {**mapping, **point}
        c = cfgmod.from_mapping(m, f"{base.name}_{k:03d}").with_overrides(args.trials, args.seed)
        configs.append((point, c))
    out = Path(args.out)
    rows, code = [], EXIT_OK
    for point, c in configs:
        result = run_scenario(c, out / c.name, args.parallelism)
        label = ",".join(f"{k}={v}" for k, v in point.items())
        rows.append({"scenario": f"{c.name}[{label}]", **result.report.summary_row()})
        code = max(code, result.exit_code)
    table = summary_table(rows)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep_summary.tsv").write_text(table, encoding="utf-8", newline="\n")
    print(table, end="")
    return code


def cmd_verify(args) -> int:
    r = verify_file(args.transcripts, replay=not args.no_replay)
    print(json.dumps(r.as_dict(), sort_keys=True))
    return EXIT_OK if r.ok else EXIT_BOUND


def cmd_fixtures(args) -> int:
    for n in fixture_names():
        print(n)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vbct", description="Variable-bias coin toss laboratory.")
    sub = ap.add_subparsers(dest="command", required=True)

    def scenario_flags(p):
        p.add_argument("--config", metavar="PATH", help="scenario config file")
        p.add_argument("--protocol", metavar="NAME",
                       help="shipped fixture name, or a protocol id for its honest fixture")
        p.add_argument("--trials", type=int, metavar="N", help="override the trial count")
        p.add_argument("--seed", type=int, metavar="S", help="override the master seed")
        p.add_argument("--out", metavar="DIR", default="out", help="output directory (default: out)")
        p.add_argument("--parallelism", type=int, metavar="K", default=1, help="worker processes")

    p = sub.add_parser("run", help="run one scenario")
    scenario_flags(p)
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("sweep", help="run a Cartesian grid of scenarios")
    scenario_flags(p)
    p.add_argument("--grid", action="append", metavar="KEY=V1,V2",
                   help="config key and values to sweep; repeat for more axes")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("verify", help="re-check timing and reproducibility of a transcript file")
    p.add_argument("transcripts", metavar="PATH")
    p.add_argument("--no-replay", action="store_true", help="only re-check timing constraints")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("fixtures", help="list shipped fixtures")
    p.set_defaults(func=cmd_fixtures)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (cfgmod.ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        # malformed transcript files
        print(f"I/O error: unreadable input ({exc})", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
