"""Report files for a completed grid: learning-curve tables, comparison
heatmap tables and farm power maps.  All outputs are deterministic CSV with a
schema-version field; float cells use repr so reruns are byte-identical."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .scenario import GridStore

SCHEMA_VERSION = "windapc-report-1"


def _cell_prefix(sc) -> str:
    return f"{sc.direction_deg!r},{sc.demand_w!r},{sc.n_high_risk}"


def learning_curves_csv(store: GridStore) -> str:
    """Per cell and iteration: mean/std demand error and penalty across reps."""
    lines = [
        f"schema_version,{SCHEMA_VERSION}",
        "direction_deg,demand_w,n_high_risk,iteration,"
        "mean_demand_error_w,std_demand_error_w,mean_penalty,std_penalty",
    ]
    for cell, sc in enumerate(store.scenarios):
        if cell not in store.runs:
            continue
        records = store.runs[cell]
        errs = np.array([r.demand_errors for r in records])
        pens = np.array([r.penalty_counts for r in records], dtype=float)
        for it in range(errs.shape[1]):
            lines.append(
                f"{_cell_prefix(sc)},{it + 1},"
                f"{errs[:, it].mean()!r},{errs[:, it].std()!r},"
                f"{pens[:, it].mean()!r},{pens[:, it].std()!r}"
            )
    return "\n".join(lines) + "\n"


def heatmap_csv(store: GridStore) -> str:
    """Per cell: mean best demand error / penalty of the learner, the
    baseline's values, and baseline-minus-learner differences (positive means
    the learner did better)."""
    lines = [
        f"schema_version,{SCHEMA_VERSION}",
        "direction_deg,demand_w,n_high_risk,"
        "learner_mean_best_error_w,learner_mean_best_penalty,"
        "heuristic_error_w,heuristic_penalty,error_diff_w,penalty_diff",
    ]
    for cell, sc in enumerate(store.scenarios):
        if cell not in store.runs or cell not in store.baselines:
            continue
        pairs = [r.best_pair() for r in store.runs[cell]]
        mean_err = float(np.mean([e for _, e in pairs]))
        mean_pen = float(np.mean([p for p, _ in pairs]))
        base = store.baselines[cell]
        lines.append(
            f"{_cell_prefix(sc)},"
            f"{mean_err!r},{mean_pen!r},{base['error']!r},{base['penalty']!r},"
            f"{base['error'] - mean_err!r},{base['penalty'] - mean_pen!r}"
        )
    return "\n".join(lines) + "\n"


def farm_power_csv(store: GridStore) -> str:
    """Per cell and turbine: mean achieved power of the best configurations
    found by the learner (across reps) and by the baseline."""
    lines = [
        f"schema_version,{SCHEMA_VERSION}",
        "direction_deg,demand_w,n_high_risk,turbine_id,"
        "learner_mean_power_w,heuristic_power_w",
    ]
    for cell, sc in enumerate(store.scenarios):
        if cell not in store.runs or cell not in store.baselines:
            continue
        records = store.runs[cell]
        base = store.baselines[cell]
        for tid in store.farm.ids:
            mean_p = float(np.mean([r.best_powers[tid] for r in records]))
            lines.append(
                f"{_cell_prefix(sc)},{tid},{mean_p!r},{base['powers'][tid]!r}"
            )
    return "\n".join(lines) + "\n"


def emit_reports(store: GridStore, out_dir: str | Path) -> list[Path]:
    """Write the three report tables; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in (
        ("learning_curves.csv", learning_curves_csv(store)),
        ("heatmap.csv", heatmap_csv(store)),
        ("farm_power.csv", farm_power_csv(store)),
    ):
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    if store.failures:
        path = out / "failures.csv"
        rows = [f"schema_version,{SCHEMA_VERSION}", "cell,error"]
        rows += [f"{cell},{msg}" for cell, msg in sorted(store.failures.items())]
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# Store (de)serialization, for the standalone `report` CLI subcommand

def store_to_json(store: GridStore) -> str:
    from . import farm as farm_mod
    from .scenario import RunRecord, ScenarioSpec  # noqa: F401

    def record(r):
        return {
            "configs": [list(c) for c in r.configs],
            "demand_errors": r.demand_errors,
            "penalty_counts": r.penalty_counts,
            "best_index": r.best_index,
            "best_config": r.best_config,
            "best_powers": r.best_powers,
            "duration_s": r.duration_s,
        }

    doc = {
        "schema": SCHEMA_VERSION,
        "farm": farm_mod.render_farm(store.farm),
        "scenarios": [vars(s) | {"regime_k": s.regime_k} for s in store.scenarios],
        "runs": {str(c): [record(r) for r in rs] for c, rs in store.runs.items()},
        "baselines": {
            str(c): {
                "config": b["config"],
                "penalty": b["penalty"],
                "error": b["error"],
                "powers": b["powers"],
            }
            for c, b in store.baselines.items()
        },
        "failures": {str(c): m for c, m in store.failures.items()},
    }
    return json.dumps(doc, sort_keys=True)


def store_from_json(text: str) -> GridStore:
    from . import farm as farm_mod
    from .scenario import RunRecord, ScenarioSpec

    doc = json.loads(text)
    if doc.get("schema") != SCHEMA_VERSION:
        raise ValueError("unrecognized store schema")
    farm = farm_mod.load_farm(doc["farm"])
    scenarios = [ScenarioSpec(**{k: v for k, v in s.items()}) for s in doc["scenarios"]]
    store = GridStore(scenarios, farm)
    for c, rs in doc["runs"].items():
        store.runs[int(c)] = [
            RunRecord(
                [tuple(x) for x in r["configs"]],
                r["demand_errors"],
                r["penalty_counts"],
                r["best_index"],
                r["best_config"],
                r["best_powers"],
                r["duration_s"],
            )
            for r in rs
        ]
    for c, b in doc["baselines"].items():
        store.baselines[int(c)] = {**b, "trace": None}
    for c, m in doc.get("failures", {}).items():
        store.failures[int(c)] = m
    return store
