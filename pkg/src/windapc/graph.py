"""Dependency graph between turbines, derived from wake geometry.

A turbine is influenced by an upstream neighbour when it sits within a given
radius of it and within a given half-angle of the wind vector.  The graph
yields per-turbine local scopes (the turbine plus its parents) and a
min-degree elimination order used by the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .farm import FarmLayout, WindCondition

DEFAULT_RADIUS_M = 1000.0
DEFAULT_HALF_ANGLE_DEG = 22.5


@dataclass(frozen=True)
class CoordinationGraph:
    """Parents point strictly upstream; scope(w) = (w,) + parents(w)."""

    ids: tuple[str, ...]
    parents: dict[str, tuple[str, ...]]
    elimination_order: tuple[str, ...]

    def scope(self, turbine_id: str) -> tuple[str, ...]:
        return self.parents[turbine_id] + (turbine_id,)

    def scopes(self) -> dict[str, tuple[str, ...]]:
        return {tid: self.scope(tid) for tid in self.ids}

    def edges(self) -> list[tuple[str, str]]:
        """(child, parent) pairs in canonical order."""
        return [(tid, p) for tid in self.ids for p in self.parents[tid]]


def _min_degree_order(ids: tuple[str, ...], scopes: dict[str, tuple[str, ...]]) -> tuple[str, ...]:
    """Min-degree elimination order over the moralized interaction graph.

    Two turbines interact when they co-occur in some scope.  Eliminating a
    turbine connects its remaining neighbours (fill-in); ties break by
    canonical order.
    """
    rank = {tid: i for i, tid in enumerate(ids)}
    neigh: dict[str, set[str]] = {tid: set() for tid in ids}
    for scope in scopes.values():
        for a in scope:
            for b in scope:
                if a != b:
                    neigh[a].add(b)
    remaining = set(ids)
    order: list[str] = []
    while remaining:
        best = min(remaining, key=lambda t: (len(neigh[t] & remaining), rank[t]))
        order.append(best)
        remaining.remove(best)
        live = neigh[best] & remaining
        for a in live:
            neigh[a] |= live - {a}
    return tuple(order)


def build_graph(
    farm: FarmLayout,
    wind: WindCondition,
    radius: float = DEFAULT_RADIUS_M,
    half_angle: float = DEFAULT_HALF_ANGLE_DEG,
) -> CoordinationGraph:
    """Geometric dependency test: child w depends on w_ref iff
    dist(w_ref, w) <= radius and angle(wind vector, w_ref -> w) <= half_angle.

    Both boundaries are inclusive.  Acyclic for every wind direction because a
    half-angle < 90 deg forces parents strictly upstream.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if not 0 < half_angle < 90:
        raise ValueError("half_angle must be in (0, 90) degrees")
    theta = math.radians(wind.direction_deg)
    wx, wy = math.cos(theta), math.sin(theta)
    cos_limit = math.cos(math.radians(half_angle))
    parents: dict[str, tuple[str, ...]] = {}
    for cid, (cx, cy), _ in farm.turbines:
        ps = []
        for pid, (px, py), _ in farm.turbines:
            if pid == cid:
                continue
            vx, vy = cx - px, cy - py
            dist = math.hypot(vx, vy)
            if dist > radius:
                continue
            # inclusive angle test, written as cos(angle) >= cos(half_angle)
            if (vx * wx + vy * wy) / dist >= cos_limit - 1e-12:
                ps.append(pid)
        parents[cid] = tuple(ps)
    ids = farm.ids
    scopes = {tid: parents[tid] + (tid,) for tid in ids}
    return CoordinationGraph(ids, parents, _min_degree_order(ids, scopes))


def elimination_order(graph: CoordinationGraph) -> tuple[str, ...]:
    return graph.elimination_order


def frontier_schedule(graph: CoordinationGraph, decision_order: tuple[str, ...]) -> list[tuple[str, ...]]:
    """Frontier after each decision: decided turbines that still appear in a
    scope with an undecided member.  Used by the solver and as a width gauge."""
    scopes = list(graph.scopes().values())
    decided: set[str] = set()
    result = []
    for tid in decision_order:
        decided.add(tid)
        frontier = set()
        for scope in scopes:
            if not decided.issuperset(scope):
                frontier.update(decided.intersection(scope))
        result.append(tuple(t for t in graph.ids if t in frontier))
    return result


def frontier_width(graph: CoordinationGraph, decision_order: tuple[str, ...]) -> int:
    return max((len(f) for f in frontier_schedule(graph, decision_order)), default=0)


def render_edges(graph: CoordinationGraph) -> str:
    """Edge-list export: one 'child parent' pair per line, canonical order."""
    return "".join(f"{c} {p}\n" for c, p in graph.edges())
