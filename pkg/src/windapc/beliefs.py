"""Gaussian beliefs over expected power per (turbine, local joint set-point).

Priors are centered on the no-wake expectation min(set-point, available power
at freestream); observations update the conjugate Normal posterior of the arm
that was actually executed.  The observation history is an append-only log
from which the sufficient statistics can be replayed exactly.
"""

from __future__ import annotations

import itertools
from typing import NamedTuple

import numpy as np

from .farm import FarmLayout, SetPointMenu, WindCondition, available_power
from .graph import CoordinationGraph
from .wake import FlowResult, JointConfiguration

DEFAULT_PRIOR_STD = 1_000_000.0  # W
DEFAULT_OBS_NOISE_STD = 1_000.0  # W; keeps the conjugate update well-posed


class LocalArm(NamedTuple):
    """One joint assignment of set-points to a turbine's scope.

    levels follow the scope order (parents in canonical order, then the
    turbine itself)."""

    turbine_id: str
    levels: tuple[float, ...]


class SampleMap:
    """One posterior draw per arm, addressable by arm or by array index."""

    def __init__(self, arms: list[LocalArm], index: dict[LocalArm, int], values: np.ndarray):
        self.arms = arms
        self.index = index
        self.values = values

    def __getitem__(self, arm: LocalArm) -> float:
        return float(self.values[self.index[arm]])

    def __len__(self) -> int:
        return len(self.arms)


class BeliefState:
    """Per-arm conjugate-Gaussian posteriors plus the observation history."""

    def __init__(
        self,
        farm: FarmLayout,
        graph: CoordinationGraph,
        menu: SetPointMenu,
        wind: WindCondition,
        sigma: float = DEFAULT_PRIOR_STD,
        sigma_n: float = DEFAULT_OBS_NOISE_STD,
    ):
        if sigma <= 0:
            raise ValueError("prior std sigma must be positive")
        if sigma_n <= 0:
            raise ValueError("observation noise std sigma_n must be positive")
        self.farm = farm
        self.graph = graph
        self.menu = menu
        self.wind = wind
        self.sigma = sigma
        self.sigma_n = sigma_n

        # Canonical arm order: turbine order, then lexicographic local assignment.
        self.arms: list[LocalArm] = []
        prior = []
        for tid in farm.ids:
            scope = graph.scope(tid)
            avail = available_power(farm.spec_for(tid), wind.speed)
            for combo in itertools.product(menu.levels, repeat=len(scope)):
                self.arms.append(LocalArm(tid, combo))
                prior.append(min(combo[-1], avail))  # own level is last in scope order
        self.arm_index = {arm: i for i, arm in enumerate(self.arms)}
        self.prior_mean = np.array(prior, dtype=float)
        self.n_obs = np.zeros(len(self.arms), dtype=np.int64)
        self.sum_y = np.zeros(len(self.arms), dtype=float)
        self.history: list[tuple[int, LocalArm, float]] = []

    def local_arm(self, turbine_id: str, config: JointConfiguration) -> LocalArm:
        scope = self.graph.scope(turbine_id)
        return LocalArm(turbine_id, tuple(config[m] for m in scope))

    def posterior_params(self) -> tuple[np.ndarray, np.ndarray]:
        """Closed-form conjugate posterior mean and variance per arm."""
        var = 1.0 / (1.0 / self.sigma**2 + self.n_obs / self.sigma_n**2)
        mean = var * (self.prior_mean / self.sigma**2 + self.sum_y / self.sigma_n**2)
        return mean, var

    def sample_all(self, rng: np.random.Generator) -> SampleMap:
        """One independent posterior draw per arm, in canonical arm order."""
        mean, var = self.posterior_params()
        values = mean + np.sqrt(var) * rng.standard_normal(len(self.arms))
        return SampleMap(self.arms, self.arm_index, values)

    def update(self, executed: JointConfiguration, flow: FlowResult, iteration: int) -> "BeliefState":
        """Record each turbine's observed power under its executed local arm."""
        if set(executed) != set(self.farm.ids) or set(flow.ids) != set(self.farm.ids):
            raise ValueError("executed configuration and flow must cover the farm")
        powers = flow.powers()
        for tid in self.farm.ids:
            arm = self.local_arm(tid, executed)
            y = powers[tid]
            i = self.arm_index[arm]
            self.n_obs[i] += 1
            self.sum_y[i] += y
            self.history.append((iteration, arm, y))
        return self

    def replayed(self) -> "BeliefState":
        """Fresh state rebuilt from the history log; must reproduce the
        sufficient statistics exactly."""
        fresh = BeliefState(self.farm, self.graph, self.menu, self.wind, self.sigma, self.sigma_n)
        for iteration, arm, y in self.history:
            i = fresh.arm_index[arm]
            fresh.n_obs[i] += 1
            fresh.sum_y[i] += y
            fresh.history.append((iteration, arm, y))
        return fresh


def init_beliefs(
    farm: FarmLayout,
    graph: CoordinationGraph,
    menu: SetPointMenu,
    wind: WindCondition,
    sigma: float = DEFAULT_PRIOR_STD,
    sigma_n: float = DEFAULT_OBS_NOISE_STD,
) -> BeliefState:
    return BeliefState(farm, graph, menu, wind, sigma, sigma_n)


def render_history(beliefs: BeliefState) -> str:
    """Flat CSV log: iteration, turbine, local arm encoding, observed power."""
    lines = ["iteration,turbine_id,local_arm,observed_power_w"]
    for iteration, arm, y in beliefs.history:
        enc = "|".join(repr(l) for l in arm.levels)
        lines.append(f"{iteration},{arm.turbine_id},{enc},{y!r}")
    return "\n".join(lines) + "\n"
