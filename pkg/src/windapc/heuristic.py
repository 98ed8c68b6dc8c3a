"""Physics-based baseline: raise set-points back-to-front until the demand is
met, then keep the visited configuration that compares best.

The comparison protocol is the same lexicographic (penalty count, |farm power
- demand|) rule used for the learned policy, so the two methods are judged
identically.  The sweep is fully deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .farm import FarmLayout, SetPointMenu, WindCondition
from .solver import ObjectiveSpec
from . import wake


@dataclass(frozen=True)
class HeuristicTrace:
    """Every configuration visited by the sweep with its simulated outcome."""

    candidates: tuple[dict, ...]
    farm_powers: tuple[float, ...]
    penalty_counts: tuple[int, ...]
    selected: int


def _penalty_count(flow: wake.FlowResult, spec: ObjectiveSpec) -> int:
    return sum(
        1
        for tid, p in flow.powers().items()
        if tid in spec.penalty.high_risk and p >= spec.penalty.threshold_w
    )


def run_heuristic(
    farm: FarmLayout,
    wind: WindCondition,
    menu: SetPointMenu,
    spec: ObjectiveSpec,
    evaluate=wake.evaluate,
) -> tuple[dict, HeuristicTrace]:
    """Back-to-front sweep: turbines sorted by descending downstream coordinate
    (canonical tie-break) are raised one at a time from the minimum to the
    maximum level; the first raise that overshoots the demand additionally
    visits each intermediate menu level for that turbine."""
    theta = math.radians(wind.direction_deg)
    dx, dy = math.cos(theta), math.sin(theta)
    along = {tid: x * dx + y * dy for tid, (x, y), _ in farm.turbines}
    rank = {tid: i for i, tid in enumerate(farm.ids)}
    sweep = sorted(farm.ids, key=lambda t: (-along[t], rank[t]))

    candidates: list[dict] = []
    powers: list[float] = []
    penalties: list[int] = []

    def visit(config: dict) -> float:
        flow = evaluate(farm, wind, config)
        candidates.append(dict(config))
        powers.append(flow.farm_total)
        penalties.append(_penalty_count(flow, spec))
        return flow.farm_total

    config = {tid: menu.minimum for tid in farm.ids}
    total = visit(config)
    overshoot_explored = total > spec.demand_w
    for tid in sweep:
        config[tid] = menu.maximum
        total = visit(config)
        if total > spec.demand_w and not overshoot_explored:
            for level in menu.levels[1:-1]:
                trial = dict(config)
                trial[tid] = level
                visit(trial)
            overshoot_explored = True

    best = min(
        range(len(candidates)),
        key=lambda i: (penalties[i], abs(powers[i] - spec.demand_w), i),
    )
    trace = HeuristicTrace(
        tuple(candidates), tuple(powers), tuple(penalties), best
    )
    return dict(candidates[best]), trace


def render_trace(trace: HeuristicTrace, farm: FarmLayout) -> str:
    """CSV export of the sweep: one row per visited candidate."""
    header = "candidate,selected,farm_power_w,penalty_count," + ",".join(farm.ids)
    lines = [header]
    for i, (cfg, p, pen) in enumerate(
        zip(trace.candidates, trace.farm_powers, trace.penalty_counts)
    ):
        levels = ",".join(repr(cfg[t]) for t in farm.ids)
        lines.append(f"{i},{int(i == trace.selected)},{p!r},{pen},{levels}")
    return "\n".join(lines) + "\n"
