"""Command-line interface: single runs, comparison suites, scenario export."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import POLICIES, RunConfig
from .harness import run_episode, run_suite
from .render import write_frames
from .scenarios import write_library
from .world import load_scenario


def _load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = RunConfig.from_file(args.config, base=cfg)
    overrides = dict(kv.split("=", 1) for kv in (args.set or []))
    if overrides:
        cfg = cfg.with_overrides(overrides)
    cfg.validate()
    return cfg


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    cfg = _load_config(args)
    log = run_episode(
        scenario,
        cfg,
        policy=args.policy,
        seed=args.seed,
        collect_snapshots=bool(args.render_dir),
        snapshot_path=args.snapshots,
        frame_dump_dir=Path(args.render_dir) / "frames" if args.dump_frames and args.render_dir else (
            "frames" if args.dump_frames else None
        ),
    )
    if args.out:
        log.to_csv(args.out)
    if args.render_dir:
        write_frames(log, args.render_dir)
    print(
        f"{scenario.name} policy={log.policy} seed={log.seed}: {log.outcome} "
        f"after {log.ticks} ticks, {log.trajectory_length:.1f} m"
    )
    return 0 if log.outcome == "Success" else 1


def _cmd_suite(args) -> int:
    cfg = _load_config(args)
    paths = sorted(Path(args.scenarios).glob("*.scen"))
    if not paths:
        print(f"no .scen files under {args.scenarios}", file=sys.stderr)
        return 2
    scenarios = [load_scenario(p) for p in paths]
    policies = args.policies.split(",")
    for p in policies:
        if p not in POLICIES:
            print(f"unknown policy '{p}'", file=sys.stderr)
            return 2
    seeds = [int(s) for s in args.seeds.split(",")]
    result = run_suite(scenarios, policies, seeds, cfg)
    result.to_csv(args.out)
    print(result.summary_table())
    print(f"wrote {args.out}")
    return 0


def _cmd_make_scenarios(args) -> int:
    paths = write_library(args.out, res=args.resolution)
    for p in paths:
        print(p)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="scoutnav", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one episode")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--policy", default="wildos", choices=POLICIES)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--config", default=None)
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_run.add_argument("--out", default=None, help="per-tick episode CSV")
    p_run.add_argument("--render-dir", default=None, help="write per-tick SVG frames here")
    p_run.add_argument("--dump-frames", action="store_true", help="dump vision maps as PGM")
    p_run.add_argument("--snapshots", default=None, help="write JSON-lines graph snapshots here")
    p_run.set_defaults(fn=_cmd_run)

    p_suite = sub.add_parser("suite", help="run a scenario/policy/seed grid")
    p_suite.add_argument("--scenarios", required=True, help="directory of .scen files")
    p_suite.add_argument("--policies", default="wildos,vanilla,lrn")
    p_suite.add_argument("--seeds", default="0,1,2")
    p_suite.add_argument("--out", required=True, help="suite CSV path")
    p_suite.add_argument("--config", default=None)
    p_suite.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_suite.set_defaults(fn=_cmd_suite)

    p_make = sub.add_parser("make-scenarios", help="write the built-in scenario library")
    p_make.add_argument("--out", required=True)
    p_make.add_argument("--resolution", type=float, default=0.1)
    p_make.set_defaults(fn=_cmd_make_scenarios)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
