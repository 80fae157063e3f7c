"""Command-line front end: run, validate and list experiment scenarios.

Configs are JSON files of the form
    {"scenario": "<name>", "seed": 1234, "params": { ... }}
where params overrides the scenario defaults. Every builtin scenario runs
with an empty override set. The output directory resolves, in order of
precedence: --out flag, KINUQ_OUT env var, ./out/<scenario>.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .io_utils import RunManifest, config_hash, write_json
from .scenarios import REGISTRY

OUT_ENV = "KINUQ_OUT"


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}")
    if not isinstance(cfg, dict) or "scenario" not in cfg:
        raise ConfigError(f"config {path} must be an object with a 'scenario' key")
    return cfg


def resolve_config(cfg: dict):
    """Merge a config with the scenario defaults; returns (scenario, params, seed)."""
    name = cfg["scenario"]
    if name not in REGISTRY:
        known = ", ".join(sorted(REGISTRY))
        raise ConfigError(f"scenario: unknown scenario {name!r} (known: {known})")
    scenario = REGISTRY[name]
    params = dict(scenario.defaults)
    overrides = cfg.get("params", {})
    if not isinstance(overrides, dict):
        raise ConfigError("params: must be an object")
    unknown = sorted(set(overrides) - set(params))
    if unknown:
        raise ConfigError(f"params: unknown keys {unknown} for scenario {name}")
    params.update(overrides)
    seed = cfg.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed: must be a nonnegative integer, got {seed!r}")
    return scenario, params, seed


def validate_config(cfg: dict) -> list:
    """Full precondition sweep; returns all issues, not just the first."""
    issues = []
    try:
        scenario, params, seed = resolve_config(cfg)
    except ConfigError as e:
        return [f"error: {e}"]
    issues.extend(scenario.validate(params))
    return issues


def _out_dir(args, scenario_name) -> Path:
    if args.out:
        base = Path(args.out)
    elif os.environ.get(OUT_ENV):
        base = Path(os.environ[OUT_ENV])
    else:
        base = Path("out") / scenario_name
    base.mkdir(parents=True, exist_ok=True)
    return base


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    issues = validate_config(cfg)
    errors = [m for m in issues if m.startswith("error")]
    for m in issues:
        print(m, file=sys.stderr)
    if errors:
        print(f"validation failed with {len(errors)} error(s)", file=sys.stderr)
        return 2
    scenario, params, seed = resolve_config(cfg)
    out_dir = _out_dir(args, scenario.name)
    manifest = RunManifest(
        scenario=scenario.name,
        config_hash=config_hash({"scenario": scenario.name, "seed": seed,
                                 "params": params}),
        master_seed=seed,
        code_version=__version__,
    )
    manifest.phase_seeds["master"] = seed
    try:
        files = scenario.run(params, seed, out_dir, manifest, args.threads)
    except Exception as e:
        phases = list(manifest.phase_seconds)
        where = phases[-1] if phases else "setup"
        print(f"run failed during phase {where!r}: {e}", file=sys.stderr)
        return 1
    manifest_path = out_dir / "manifest.json"
    manifest.save(manifest_path)
    print(f"wrote {len(files)} artifact(s) + manifest to {out_dir}")
    for f in files:
        print(f"  {Path(f).name}")
    return 0


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    issues = validate_config(cfg)
    if not issues:
        print("ok")
        return 0
    for m in issues:
        print(m)
    errors = [m for m in issues if m.startswith("error")]
    return 2 if errors else 0


def cmd_list(args) -> int:
    width = max(len(n) for n in REGISTRY)
    for name in sorted(REGISTRY):
        print(f"{name:<{width}}  {REGISTRY[name].description}")
    return 0


def cmd_dump_config(name) -> int:
    if name not in REGISTRY:
        print(f"unknown scenario {name!r}", file=sys.stderr)
        return 2
    scenario = REGISTRY[name]
    json.dump({"scenario": name, "seed": 0, "params": scenario.defaults},
              sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="kinuq",
        description="Scenario runner for kinetic uncertainty quantification "
                    "experiments.")
    p.add_argument("--dump-config", metavar="NAME",
                   help="print the builtin config for a scenario and exit")
    sub = p.add_subparsers(dest="command")
    run_p = sub.add_parser("run", help="run a scenario config")
    run_p.add_argument("config")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the config's master seed")
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="worker pool size for independent solves")
    val_p = sub.add_parser("validate", help="check a config without computing")
    val_p.add_argument("config")
    sub.add_parser("list", help="list builtin scenarios")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dump_config:
        return cmd_dump_config(args.dump_config)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "list":
            return cmd_list(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    parser.print_help()
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
