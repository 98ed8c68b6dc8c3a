"""Top-hat wake simulator with derating-dependent wake strength.

Evaluates a joint set-point configuration under a wind condition: turbines are
swept upstream to downstream, each one's effective speed reduced by the
root-sum-of-squares of the deficits of all upstream wakes reaching it, and the
wake it sheds is driven by the axial induction needed to produce its achieved
power at its effective speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .farm import FarmLayout, SetPointMenu, TurbineSpec, WindCondition, available_power

AIR_DENSITY = 1.225  # kg/m^3, fixed
DEFAULT_EXPANSION_K = 0.05  # offshore wake expansion
BETZ_LIMIT = 1.0 / 3.0

# Joint set-point configuration: turbine_id -> set-point level (W).
JointConfiguration = Mapping[str, float]


class ConfigurationError(ValueError):
    """Raised when a joint configuration does not match the farm or menu."""


def check_configuration(farm: FarmLayout, menu: SetPointMenu, config: JointConfiguration) -> None:
    """Every turbine appears exactly once and every value is a menu level."""
    if set(config) != set(farm.ids):
        raise ConfigurationError("configuration must assign exactly the farm's turbines")
    for tid, level in config.items():
        if level not in menu.levels:
            raise ConfigurationError(f"set-point {level!r} of {tid!r} is not a menu level")


@dataclass(frozen=True)
class FlowResult:
    """Per-turbine effective hub speeds and achieved powers; canonical order."""

    ids: tuple[str, ...]
    effective_speed: tuple[float, ...]
    achieved_power: tuple[float, ...]

    @property
    def farm_total(self) -> float:
        return sum(self.achieved_power)

    def speed_of(self, turbine_id: str) -> float:
        return self.effective_speed[self.ids.index(turbine_id)]

    def power_of(self, turbine_id: str) -> float:
        return self.achieved_power[self.ids.index(turbine_id)]

    def powers(self) -> dict[str, float]:
        return dict(zip(self.ids, self.achieved_power))


def axial_induction(set_point: float, spec: TurbineSpec, hub_speed: float) -> float:
    """Axial induction factor a in [0, 1/3] that produces the target power.

    Solves P = 2 rho A u^3 a (1-a)^2 for the target min(set_point, available
    power at hub_speed); if the target exceeds the Betz maximum, returns 1/3.
    """
    if hub_speed <= 0:
        return 0.0
    target = min(set_point, available_power(spec, hub_speed))
    if target <= 0:
        return 0.0
    area = math.pi * spec.rotor_radius_m**2
    coef = 2.0 * AIR_DENSITY * area * hub_speed**3
    if target >= coef * BETZ_LIMIT * (1.0 - BETZ_LIMIT) ** 2:
        return BETZ_LIMIT
    lo, hi = 0.0, BETZ_LIMIT
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if coef * mid * (1.0 - mid) ** 2 < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def thrust_coefficient(a: float) -> float:
    """Actuator-disk thrust coefficient Ct = 4 a (1 - a)."""
    return 4.0 * a * (1.0 - a)


def _circle_overlap(r1: float, r2: float, d: float) -> float:
    """Intersection area of two circles with radii r1, r2 at center distance d."""
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        r = min(r1, r2)
        return math.pi * r * r
    a1 = math.acos(max(-1.0, min(1.0, (d * d + r1 * r1 - r2 * r2) / (2 * d * r1))))
    a2 = math.acos(max(-1.0, min(1.0, (d * d + r2 * r2 - r1 * r1) / (2 * d * r2))))
    return (
        r1 * r1 * (a1 - math.sin(2 * a1) / 2) + r2 * r2 * (a2 - math.sin(2 * a2) / 2)
    )


def single_wake_deficit(
    a: float,
    rotor_radius: float,
    downstream_distance: float,
    crosswind_offset: float,
    expansion_k: float = DEFAULT_EXPANSION_K,
    downstream_radius: float | None = None,
) -> float:
    """Fractional velocity deficit of a top-hat wake at a downstream rotor.

    The full-wake deficit 2a (r0 / (r0 + k x))^2 is scaled by the fraction of
    the downstream rotor disk covered by the wake disk; disjoint disks give 0.
    """
    if downstream_distance <= 0:
        raise ValueError("downstream_distance must be positive")
    if a <= 0:
        return 0.0
    r_dst = rotor_radius if downstream_radius is None else downstream_radius
    wake_radius = rotor_radius + expansion_k * downstream_distance
    overlap = _circle_overlap(wake_radius, r_dst, abs(crosswind_offset))
    if overlap <= 0.0:
        return 0.0
    frac = overlap / (math.pi * r_dst * r_dst)
    return 2.0 * a * (rotor_radius / wake_radius) ** 2 * frac


def evaluate(
    farm: FarmLayout,
    wind: WindCondition,
    config: JointConfiguration,
    expansion_k: float = DEFAULT_EXPANSION_K,
    noise_std: float = 0.0,
    rng=None,
) -> FlowResult:
    """Simulate one joint configuration; deterministic for noise_std == 0.

    Turbines are processed by increasing downstream coordinate along the wind
    vector (ties broken by canonical order).  Deficits superpose by
    root-sum-of-squares, clamped so effective speeds stay in [0, freestream].
    """
    if set(config) != set(farm.ids):
        raise ConfigurationError("configuration must assign exactly the farm's turbines")
    theta = math.radians(wind.direction_deg)
    dx, dy = math.cos(theta), math.sin(theta)
    n = len(farm)
    along = [x * dx + y * dy for _, (x, y), _ in farm.turbines]
    cross = [-x * dy + y * dx for _, (x, y), _ in farm.turbines]
    order = sorted(range(n), key=lambda i: along[i])  # stable: canonical tie-break

    speeds = [0.0] * n
    powers = [0.0] * n
    inductions = [0.0] * n
    for pos_i, i in enumerate(order):
        tid, _, spec = farm.turbines[i]
        sq = 0.0
        for j in order[:pos_i]:
            dist = along[i] - along[j]
            if dist <= 0.0:
                continue
            d = single_wake_deficit(
                inductions[j],
                farm.turbines[j][2].rotor_radius_m,
                dist,
                cross[i] - cross[j],
                expansion_k,
                downstream_radius=spec.rotor_radius_m,
            )
            sq += d * d
        u = wind.speed * (1.0 - math.sqrt(min(1.0, sq)))
        speeds[i] = u
        powers[i] = min(config[tid], available_power(spec, u))
        inductions[i] = axial_induction(config[tid], spec, u)

    if noise_std > 0.0:
        if rng is None:
            raise ValueError("noise_std > 0 requires an rng")
        powers = [p + noise_std * rng.standard_normal() for p in powers]

    return FlowResult(farm.ids, tuple(speeds), tuple(powers))
