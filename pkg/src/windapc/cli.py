"""Command-line interface.

Subcommands: simulate (one-shot wake evaluation), graph (export coordination
edges), regimes (cluster + demand fractions), run (single scenario), grid
(full sweep), report (emit tables from a saved result store).  Scenario and
grid configuration files are YAML with an explicit schema field; unknown keys
are rejected.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import yaml

from . import graph as graph_mod
from . import regimes as regimes_mod
from . import reports, scenario, wake
from .farm import FarmLayout, SetPointMenu, WindCondition, default_farm, load_farm

SCENARIO_SCHEMA = "windapc-scenario-1"
GRID_SCHEMA = "windapc-grid-1"

_SCENARIO_KEYS = {f.name for f in dataclasses.fields(scenario.ScenarioSpec)}
_GRID_KEYS = {
    "grid_master",
    "directions_deg",
    "demands_w",
    "high_risk_counts",
    "iterations",
    "repetitions",
    "speed",
    "sigma_w",
    "sigma_n_w",
    "epsilon_w",
    "regime_k",
    "fraction_mode",
    "farm",
}


class ConfigError(ValueError):
    pass


def _load_yaml(path: str, schema: str, allowed: set[str]) -> dict:
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a mapping")
    if doc.pop("schema", None) != schema:
        raise ConfigError(f"{path}: missing or unsupported schema (want {schema})")
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown fields {sorted(unknown)}")
    return doc


def _farm_arg(value: str | None) -> FarmLayout:
    if value is None or value == "default":
        return default_farm()
    return load_farm(Path(value).read_text(encoding="utf-8"))


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands

def _cmd_simulate(args) -> int:
    farm = _farm_arg(args.farm)
    wind = WindCondition(args.direction, args.speed)
    menu = SetPointMenu()
    if args.set_points:
        doc = yaml.safe_load(Path(args.set_points).read_text(encoding="utf-8"))
        config = {str(k): float(v) for k, v in doc.items()}
    else:
        config = {tid: max(menu.levels) for tid in farm.ids}
    flow = wake.evaluate(farm, wind, config)
    lines = [
        f"schema_version,{reports.SCHEMA_VERSION}",
        "turbine_id,set_point_w,effective_speed_ms,achieved_power_w",
    ]
    for i, tid in enumerate(flow.ids):
        lines.append(
            f"{tid},{config[tid]!r},{flow.effective_speed[i]!r},"
            f"{flow.achieved_power[i]!r}"
        )
    lines.append(f"farm_total,,,{flow.farm_total!r}")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_graph(args) -> int:
    farm = _farm_arg(args.farm)
    wind = WindCondition(args.direction, args.speed)
    g = graph_mod.build_graph(farm, wind)
    _write(graph_mod.render_edges(g), args.out)
    return 0


def _cmd_regimes(args) -> int:
    farm = _farm_arg(args.farm)
    wind = WindCondition(args.direction, args.speed)
    features = regimes_mod.power_features(farm, wind)
    lrds = regimes_mod.generate_synthetic_lrd(farm, wind, args.seed)
    damages = {
        tid: regimes_mod.turbine_damage(lrds[tid], farm.spec_for(tid))
        for tid in farm.ids
    }
    k = args.k if args.k != "auto" else "auto"
    if isinstance(k, str) and k != "auto":
        k = int(k)
    partition = regimes_mod.cluster_regimes(features, k, seed=args.seed)
    reg = regimes_mod.demand_fractions(partition, damages, mode=args.mode)
    _write(regimes_mod.render_partition(reg), args.out)
    return 0


def _numeric(value, path: str, key: str) -> float:
    # YAML 1.1 reads "80.0e6" (no signed exponent) as a string; accept it.
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: field {key} must be numeric") from None


def _scenario_from_file(path: str) -> tuple[scenario.ScenarioSpec, FarmLayout]:
    doc = _load_yaml(path, SCENARIO_SCHEMA, _SCENARIO_KEYS | {"farm"})
    farm = _farm_arg(doc.pop("farm", None))
    missing = {"direction_deg", "demand_w", "n_high_risk", "selection_seed", "master_seed"} - set(doc)
    if missing:
        raise ConfigError(f"{path}: missing fields {sorted(missing)}")
    ints = {"n_high_risk", "selection_seed", "master_seed", "iterations", "repetitions", "regime_k"}
    for key, value in doc.items():
        if key in ("fraction_mode",) or (key == "regime_k" and value == "auto"):
            continue
        doc[key] = int(_numeric(value, path, key)) if key in ints else _numeric(value, path, key)
    return scenario.ScenarioSpec(**doc), farm


def _cmd_run(args) -> int:
    sc, farm = _scenario_from_file(args.scenario)
    record = scenario.run_learner(sc, farm)
    base = scenario.run_baseline(sc, farm)
    lines = [
        f"schema_version,{reports.SCHEMA_VERSION}",
        "iteration,demand_error_w,penalty_count",
    ]
    for i, (e, p) in enumerate(zip(record.demand_errors, record.penalty_counts)):
        lines.append(f"{i + 1},{e!r},{p}")
    pen, err = record.best_pair()
    lines.append(f"best,{err!r},{pen}")
    lines.append(f"baseline,{base['error']!r},{base['penalty']}")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_grid(args) -> int:
    doc = _load_yaml(args.grid, GRID_SCHEMA, _GRID_KEYS)
    farm_field = doc.pop("farm", None)
    ints = {"grid_master", "iterations", "repetitions", "regime_k"}
    for key, value in list(doc.items()):
        if key in ("fraction_mode",) or (key == "regime_k" and value == "auto"):
            continue
        if key == "high_risk_counts":
            doc[key] = tuple(int(_numeric(v, args.grid, key)) for v in value)
        elif isinstance(value, (list, tuple)):
            doc[key] = tuple(_numeric(v, args.grid, key) for v in value)
        elif key in ints:
            doc[key] = int(_numeric(value, args.grid, key))
        else:
            doc[key] = _numeric(value, args.grid, key)
    if farm_field == "desk":
        cells, farm = scenario.desk_grid(doc.pop("grid_master", 7), **doc)
    else:
        farm = _farm_arg(farm_field)
        cells = scenario.build_grid(doc.pop("grid_master", 0), **doc)

    def progress(cell, rep, record):
        if args.verbose:
            pen, err = record.best_pair()
            print(
                f"cell {cell} rep {rep}: penalty {pen} error {err:.0f} W "
                f"({record.duration_s:.1f} s)",
                file=sys.stderr,
            )

    store = scenario.run_grid(cells, farm, progress=progress)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "store.json").write_text(reports.store_to_json(store), encoding="utf-8")
    written = reports.emit_reports(store, out)
    for p in written:
        print(p, file=sys.stderr)
    return 0


def _cmd_report(args) -> int:
    store = reports.store_from_json(Path(args.store).read_text(encoding="utf-8"))
    for p in reports.emit_reports(store, args.out):
        print(p, file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="windapc", description="Wind-farm active power control toolkit."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, farm=True):
        if farm:
            p.add_argument("--farm", help="farm layout YAML (default: built-in 6x4)")
        p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("simulate", help="one-shot wake evaluation")
    p.add_argument("--direction", type=float, required=True)
    p.add_argument("--speed", type=float, default=11.0)
    p.add_argument("--set-points", help="YAML map turbine id -> set-point (W)")
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("graph", help="export coordination graph edges")
    p.add_argument("--direction", type=float, required=True)
    p.add_argument("--speed", type=float, default=11.0)
    common(p)
    p.set_defaults(func=_cmd_graph)

    p = sub.add_parser("regimes", help="cluster regimes and demand fractions")
    p.add_argument("--direction", type=float, required=True)
    p.add_argument("--speed", type=float, default=11.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", default="auto", help='component count or "auto"')
    p.add_argument("--mode", choices=("inverse", "complement"), default="inverse")
    common(p)
    p.set_defaults(func=_cmd_regimes)

    p = sub.add_parser("run", help="single scenario: learner + baseline")
    p.add_argument("scenario", help="scenario YAML")
    common(p, farm=False)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("grid", help="full grid sweep")
    p.add_argument("grid", help="grid YAML")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("report", help="emit tables from a saved store")
    p.add_argument("store", help="store.json from a grid run")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
