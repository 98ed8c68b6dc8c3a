"""Joint set-point selection from sampled local powers.

The objective is lexicographic: number of violated high-risk constraints
first, then the summed per-regime absolute demand mismatch.  Small instances
are solved by exhaustive enumeration; larger ones by a dynamic program over
the coordination graph's elimination order whose per-regime partial sums are
quantized to eps-wide bins, giving a penalty-exact, error-eps-approximate
solution (bound n_turbines * eps).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .beliefs import LocalArm, SampleMap
from .farm import FarmLayout, SetPointMenu
from .graph import CoordinationGraph
from .regimes import RegimePartition

DEFAULT_DAMAGE_THRESHOLD_W = 5_200_000.0
DEFAULT_EPSILON_W = 10_000.0
EXHAUSTIVE_GUARD = 10_000_000
DEFAULT_FRONTIER_CAP = 12
DEFAULT_MAX_STATES = 400_000

_SAT = np.int64(-(10**15))  # sentinel bin: regime sum has crossed its target


class ExhaustiveGuardError(ValueError):
    """Instance too large to enumerate; use solve_dp."""


class StateLimitError(RuntimeError):
    """DP state count exceeded the memory cap; retry with a larger epsilon."""


@dataclass(frozen=True)
class PenaltyRule:
    high_risk: frozenset[str]
    threshold_w: float = DEFAULT_DAMAGE_THRESHOLD_W

    def __post_init__(self) -> None:
        if not 0 < self.threshold_w:
            raise ValueError("threshold must be positive")


@dataclass(frozen=True)
class ObjectiveSpec:
    demand_w: float
    partition: RegimePartition
    penalty: PenaltyRule
    epsilon_w: float = DEFAULT_EPSILON_W

    def __post_init__(self) -> None:
        if self.demand_w < 0:
            raise ValueError("demand must be non-negative")
        if self.epsilon_w <= 0:
            raise ValueError("epsilon must be positive")

    @property
    def targets(self) -> tuple[float, ...]:
        return tuple(f * self.demand_w for f in self.partition.fractions)


@dataclass(frozen=True)
class SolveResult:
    configuration: dict[str, float]
    demand_error: float
    penalty_count: int
    optimality: str  # "exact" or "eps-approximate"
    error_bound: float = 0.0


def objective(
    config, samples: SampleMap, graph: CoordinationGraph, spec: ObjectiveSpec
) -> tuple[int, float]:
    """(penalty count, demand error) of a configuration under sampled powers."""
    regime_of = spec.partition.regime_of()
    sums = [0.0] * len(spec.partition.regimes)
    penalty = 0
    for tid in graph.ids:
        arm = LocalArm(tid, tuple(config[m] for m in graph.scope(tid)))
        p = samples[arm]
        sums[regime_of[tid]] += p
        if tid in spec.penalty.high_risk and p >= spec.penalty.threshold_w:
            penalty += 1
    error = sum(abs(t - s) for t, s in zip(spec.targets, sums))
    return penalty, error


# ---------------------------------------------------------------------------
# Shared arm tables

def _arm_tables(
    farm: FarmLayout,
    graph: CoordinationGraph,
    samples: SampleMap,
    spec: ObjectiveSpec,
    menu: SetPointMenu,
):
    """Per turbine: sampled power vector over its local arms (big-endian
    lexicographic combo order) plus a penalty indicator vector."""
    L = len(menu)
    powers: dict[str, np.ndarray] = {}
    pens: dict[str, np.ndarray] = {}
    for tid in farm.ids:
        scope = graph.scope(tid)
        vec = np.empty(L ** len(scope))
        for code, combo in enumerate(itertools.product(menu.levels, repeat=len(scope))):
            vec[code] = samples[LocalArm(tid, combo)]
        powers[tid] = vec
        if tid in spec.penalty.high_risk:
            pens[tid] = (vec >= spec.penalty.threshold_w).astype(np.int32)
        else:
            pens[tid] = np.zeros(len(vec), dtype=np.int32)
    return powers, pens


def _digits_matrix(n_slots: int, base: int) -> np.ndarray:
    """All base**n_slots codes as big-endian digit rows."""
    codes = np.arange(base**n_slots)
    pows = base ** np.arange(n_slots - 1, -1, -1)
    return (codes[:, None] // pows) % base


# ---------------------------------------------------------------------------
# Exhaustive oracle

def solve_exhaustive(
    farm: FarmLayout,
    graph: CoordinationGraph,
    samples: SampleMap,
    spec: ObjectiveSpec,
    menu: SetPointMenu,
    chunk: int = 1 << 17,
) -> SolveResult:
    """Enumerate every joint configuration; lexicographic minimum with ties
    broken by the canonically smallest configuration encoding."""
    n = len(farm)
    L = len(menu)
    total = L**n
    if total > EXHAUSTIVE_GUARD:
        raise ExhaustiveGuardError(
            f"{total} configurations exceed the exhaustive guard; use solve_dp"
        )
    powers, pens = _arm_tables(farm, graph, samples, spec, menu)
    regime_of = spec.partition.regime_of()
    targets = np.array(spec.targets)
    idx = {tid: i for i, tid in enumerate(farm.ids)}
    pows = L ** np.arange(n - 1, -1, -1)
    # per turbine: arm code = config digits of its scope combined big-endian
    scope_meta = []
    for tid in farm.ids:
        scope = graph.scope(tid)
        positions = np.array([idx[m] for m in scope])
        weights = L ** np.arange(len(scope) - 1, -1, -1)
        scope_meta.append((tid, positions, weights, regime_of[tid]))

    best: tuple[int, float, int] | None = None  # (penalty, error, config code)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total))
        digits = (codes[:, None] // pows) % L
        pen = np.zeros(len(codes), dtype=np.int64)
        sums = np.zeros((len(codes), len(targets)))
        for tid, positions, weights, r in scope_meta:
            arm_codes = digits[:, positions] @ weights
            sums[:, r] += powers[tid][arm_codes]
            pen += pens[tid][arm_codes]
        err = np.abs(targets[None, :] - sums).sum(axis=1)
        k = int(np.lexsort((err, pen))[0])
        cand = (int(pen[k]), float(err[k]), int(codes[k]))
        if best is None or cand < best:
            best = cand
    digits = [(best[2] // int(p)) % L for p in pows]
    config = {tid: menu.levels[d] for tid, d in zip(farm.ids, digits)}
    return SolveResult(config, best[1], best[0], "exact")


# ---------------------------------------------------------------------------
# Quantized-sum dynamic program

@dataclass
class DpPlan:
    """Structural (sample-independent) part of the DP, reusable across solves."""

    decision_order: tuple[str, ...]
    steps: list[dict] = field(default_factory=list)
    width: int = 0


def build_plan(
    farm: FarmLayout,
    graph: CoordinationGraph,
    spec: ObjectiveSpec,
    menu: SetPointMenu,
    frontier_cap: int = DEFAULT_FRONTIER_CAP,
) -> DpPlan:
    """Decision order = reversed elimination order; per step, the frontier
    before/after, the scopes that become fully decided, and regime bookkeeping."""
    regime_of = spec.partition.regime_of()
    n_regimes = len(spec.partition.regimes)
    order = tuple(reversed(graph.elimination_order))
    scopes = graph.scopes()
    plan = DpPlan(order)
    decided: set[str] = set()
    committed: set[str] = set()
    f_old: tuple[str, ...] = ()
    for t in order:
        decided.add(t)
        now = [w for w in graph.ids if w not in committed and decided.issuperset(scopes[w])]
        committed.update(now)
        frontier = set()
        for w in graph.ids:
            if not decided.issuperset(scopes[w]):
                frontier.update(decided.intersection(scopes[w]))
        f_new = tuple(w for w in graph.ids if w in frontier)
        ext = f_old + (t,)
        plan.width = max(plan.width, len(ext))
        plan.steps.append(
            {
                "turbine": t,
                "f_old": f_old,
                "f_new": f_new,
                "ext": ext,
                "commits": now,
                # filled below once remaining contributors are known
                "future": None,
            }
        )
        f_old = f_new
    if plan.width > frontier_cap:
        raise ValueError(
            f"frontier width {plan.width} exceeds the cap {frontier_cap};"
            " refine the graph or raise the cap"
        )
    # remaining (not yet committed) contributors per regime after each step
    remaining = {r: [] for r in range(n_regimes)}
    for w in graph.ids:
        remaining[regime_of[w]].append(w)
    committed_sets: list[set[str]] = []
    acc: set[str] = set()
    for step in plan.steps:
        acc = acc | set(step["commits"])
        committed_sets.append(set(acc))
    for step, done in zip(plan.steps, committed_sets):
        step["future"] = {
            r: [w for w in remaining[r] if w not in done] for r in range(n_regimes)
        }
    return plan


def solve_dp(
    farm: FarmLayout,
    graph: CoordinationGraph,
    samples: SampleMap,
    spec: ObjectiveSpec,
    menu: SetPointMenu,
    hint=None,
    plan: DpPlan | None = None,
    max_states: int = DEFAULT_MAX_STATES,
    frontier_cap: int = DEFAULT_FRONTIER_CAP,
) -> SolveResult:
    """Penalty-exact, error-eps-approximate minimizer of the objective.

    Sampled powers are rounded to eps-wide bins, so the returned
    configuration's true demand error is within len(farm) * eps of the
    optimum while its penalty count is exactly optimal.  A hint
    configuration, when given, is used as an incumbent to prune states and as
    a fallback candidate; it never worsens the result.
    """
    if plan is None:
        plan = build_plan(farm, graph, spec, menu, frontier_cap)
    L = len(menu)
    eps = spec.epsilon_w
    n_regimes = len(spec.partition.regimes)
    regime_of = spec.partition.regime_of()
    targets_q = np.array(spec.targets) / eps  # bin units

    powers, pens = _arm_tables(farm, graph, samples, spec, menu)
    q = {tid: np.rint(powers[tid] / eps).astype(np.int64) for tid in farm.ids}

    incumbent: tuple[int, float] | None = None
    if hint is not None:
        hp, _ = objective(hint, samples, graph, spec)
        # incumbent cost measured in the same quantized units as the DP
        hsums = np.zeros(n_regimes, dtype=np.int64)
        for tid in graph.ids:
            scope = graph.scope(tid)
            code = 0
            for m in scope:
                code = code * L + menu.levels.index(hint[m])
            hsums[regime_of[tid]] += q[tid][code]
        hcost = float(np.abs(targets_q - hsums).sum())
        incumbent = (hp, hcost)

    # per-step future min/max committed bin mass per regime, for bound pruning
    fut_min = np.zeros((len(plan.steps), n_regimes), dtype=np.int64)
    fut_max = np.zeros((len(plan.steps), n_regimes), dtype=np.int64)
    sat_ok = np.zeros((len(plan.steps), n_regimes), dtype=bool)
    for k, step in enumerate(plan.steps):
        for r in range(n_regimes):
            future = step["future"][r]
            fut_min[k, r] = sum(int(q[w].min()) for w in future)
            fut_max[k, r] = sum(int(q[w].max()) for w in future)
            sat_ok[k, r] = all(int(q[w].min()) >= 0 for w in future)

    # one state: frontier code, per-regime bins, penalty, accumulated cost
    fcode = np.zeros(1, dtype=np.int64)
    bins = np.zeros((1, n_regimes), dtype=np.int64)
    pen = np.zeros(1, dtype=np.int64)
    cost = np.zeros(1, dtype=np.float64)
    trace: list[tuple[np.ndarray, np.ndarray]] = []  # (parent, choice) per step

    for k, step in enumerate(plan.steps):
        ext = step["ext"]
        e = len(ext)
        ext_digits = _digits_matrix(e, L)
        n_ext = L**e
        # transition tables over extended assignments
        dq = np.zeros((n_ext, n_regimes), dtype=np.int64)
        dpen = np.zeros(n_ext, dtype=np.int64)
        pos_in_ext = {w: i for i, w in enumerate(ext)}
        for w in step["commits"]:
            scope = graph.scope(w)
            cols = [pos_in_ext[m] for m in scope]
            weights = L ** np.arange(len(scope) - 1, -1, -1)
            arm_codes = ext_digits[:, cols] @ weights
            dq[:, regime_of[w]] += q[w][arm_codes]
            dpen += pens[w][arm_codes]
        # new frontier code per extended assignment
        new_cols = [pos_in_ext[w] for w in step["f_new"]]
        if new_cols:
            wts = L ** np.arange(len(new_cols) - 1, -1, -1)
            newf_table = (ext_digits[:, new_cols] @ wts).astype(np.int64)
        else:
            newf_table = np.zeros(n_ext, dtype=np.int64)

        S = len(fcode)
        extf = (fcode[:, None] * L + np.arange(L)).ravel()
        parent = np.repeat(np.arange(S, dtype=np.int64), L)
        choice = np.tile(np.arange(L, dtype=np.int8), S)
        npen = np.repeat(pen, L) + dpen[extf]
        ncost = np.repeat(cost, L)
        nbins = np.empty((S * L, n_regimes), dtype=np.int64)
        for r in range(n_regimes):
            old = np.repeat(bins[:, r], L)
            add = dq[extf, r]
            sat = old == _SAT
            summed = np.where(sat, old, old + add)
            ncost += np.where(sat, add.astype(np.float64), 0.0)
            if sat_ok[k, r]:
                cross = (~sat) & (summed >= targets_q[r])
                ncost += np.where(cross, summed - targets_q[r], 0.0)
                summed = np.where(cross, _SAT, summed)
            nbins[:, r] = summed
        nfcode = newf_table[extf]

        # bound pruning against the incumbent (penalty first, then cost)
        if incumbent is not None:
            lb = ncost.copy()
            for r in range(n_regimes):
                b = nbins[:, r]
                sat = b == _SAT
                lb += np.where(sat, float(fut_min[k, r]), 0.0)
                short = np.maximum(0, targets_q[r] - b - fut_max[k, r])
                over = np.maximum(0, b + fut_min[k, r] - targets_q[r])
                lb += np.where(sat, 0.0, short + over)
            keep = (npen < incumbent[0]) | (
                (npen == incumbent[0]) & (lb <= incumbent[1] + 1e-9)
            )
            nfcode, npen, ncost, parent, choice = (
                nfcode[keep], npen[keep], ncost[keep], parent[keep], choice[keep],
            )
            nbins = nbins[keep]
            if len(nfcode) == 0:
                # incumbent dominates everything reachable; fall back to it
                trace = None
                break

        # merge states with identical (frontier assignment, bins): keep the
        # lexicographic (penalty, cost) minimum, first arrival on ties
        sort_keys = (ncost, npen) + tuple(nbins[:, r] for r in range(n_regimes - 1, -1, -1)) + (nfcode,)
        orderx = np.lexsort(sort_keys)
        key_mat = np.column_stack([nfcode, nbins])[orderx]
        first = np.ones(len(orderx), dtype=bool)
        if len(orderx) > 1:
            first[1:] = np.any(key_mat[1:] != key_mat[:-1], axis=1)
        sel = orderx[first]
        sel.sort()  # deterministic layer order independent of value ties
        if len(sel) > max_states:
            raise StateLimitError(
                f"{len(sel)} DP states exceed the cap {max_states};"
                " retry with a larger epsilon"
            )
        fcode, pen, cost, bins = nfcode[sel], npen[sel], ncost[sel], nbins[sel]
        trace.append((parent[sel], choice[sel]))

    result_cfg = None
    if trace is not None and len(fcode):
        term = cost.copy()
        for r in range(n_regimes):
            b = bins[:, r]
            term += np.where(b == _SAT, 0.0, np.abs(targets_q[r] - b))
        k = int(np.lexsort((term, pen))[0])
        digits = []
        for (parent, choice) in reversed(trace):
            digits.append(int(choice[k]))
            k = int(parent[k])
        digits.reverse()
        result_cfg = {
            t: menu.levels[d] for t, d in zip(plan.decision_order, digits)
        }

    bound = len(farm) * eps
    candidates = []
    if result_cfg is not None:
        candidates.append(result_cfg)
    if hint is not None:
        candidates.append(dict(hint))
    if not candidates:
        raise StateLimitError("no DP states and no hint; cannot produce a result")
    scored = [(objective(c, samples, graph, spec), i, c) for i, c in enumerate(candidates)]
    (p_best, e_best), _, cfg_best = min(scored, key=lambda t: (t[0], t[1]))
    return SolveResult(dict(cfg_best), e_best, p_best, "eps-approximate", bound)
