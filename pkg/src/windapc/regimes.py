"""Operational regimes: cluster turbines by wake-conditioned power production,
derive per-turbine damage from load-revolution histograms, and split the power
demand across regimes inversely to their accumulated damage."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.mixture import GaussianMixture

from .farm import FarmLayout, WindCondition, rotor_speed, shaft_torque
from . import wake

DAMAGE_POWER_FRACTION = 0.65  # damage occurs above this fraction of rated power
N_RESTARTS = 20
MAX_AUTO_COMPONENTS = 6
DEFAULT_DAMAGE_FLOOR = 1e-6  # fraction of total damage granted to a zero-damage regime


class RegimeError(ValueError):
    pass


@dataclass(frozen=True)
class LoadRevolutionDistribution:
    """Histogram of rotor revolutions by main-shaft torque for one turbine."""

    bin_edges: tuple[float, ...]  # strictly increasing, len = n_bins + 1
    rotations: tuple[float, ...]  # non-negative, len = n_bins

    def __post_init__(self) -> None:
        if len(self.bin_edges) != len(self.rotations) + 1 or not self.rotations:
            raise RegimeError("histogram needs at least one bin")
        if any(b <= a for a, b in zip(self.bin_edges, self.bin_edges[1:])):
            raise RegimeError("bin edges must be strictly increasing")
        if any(c < 0 for c in self.rotations):
            raise RegimeError("rotation counts must be non-negative")


@dataclass(frozen=True)
class RegimePartition:
    """Disjoint, covering turbine clusters with normalized damages and demand fractions."""

    regimes: tuple[tuple[str, ...], ...]
    damage: dict[str, float]  # normalized, sums to 1
    fractions: tuple[float, ...]  # per regime, sums to 1

    def regime_of(self) -> dict[str, int]:
        return {tid: r for r, members in enumerate(self.regimes) for tid in members}


def cluster_regimes(
    features: dict[str, float], k: int | str, seed: int = 0
) -> tuple[tuple[str, ...], ...]:
    """Cluster turbines on 1-D power features with a Gaussian mixture (EM).

    k may be a fixed component count or "auto" (BIC over 1..6).  Components are
    canonicalized by ascending mean so the assignment is invariant under
    component relabeling; fitting is deterministic for a given seed.
    """
    ids = list(features)
    x = np.array([features[t] for t in ids], dtype=float).reshape(-1, 1)
    if not np.all(np.isfinite(x)):
        raise RegimeError("features must be finite")
    distinct = len(set(x.ravel().tolist()))
    if k == "auto":
        candidates = range(1, min(MAX_AUTO_COMPONENTS, distinct, len(ids)) + 1)
    else:
        if not isinstance(k, int) or k < 1:
            raise RegimeError(f"invalid component count {k!r}")
        if k > distinct:
            raise RegimeError("degenerate clustering request: k exceeds distinct feature values")
        candidates = [k]

    best = None
    for n_comp in candidates:
        gm = GaussianMixture(
            n_components=n_comp,
            covariance_type="full",
            n_init=N_RESTARTS,
            init_params="k-means++",
            random_state=seed,
            reg_covar=1e-6 * max(1.0, float(np.var(x))),
        ).fit(x)
        bic = gm.bic(x)
        if best is None or bic < best[0]:
            best = (bic, gm)
    gm = best[1]

    order = np.argsort(gm.means_.ravel(), kind="stable")
    relabel = {int(old): new for new, old in enumerate(order)}
    labels = [relabel[int(l)] for l in gm.predict(x)]
    groups: list[list[str]] = [[] for _ in range(gm.n_components)]
    for tid, lab in zip(ids, labels):
        groups[lab].append(tid)
    return tuple(tuple(g) for g in groups if g)


def damage_threshold_torque(spec) -> float:
    """Torque above which a rotation counts as damage: the torque at 65% of
    rated power in the rated rotor-speed region."""
    return DAMAGE_POWER_FRACTION * spec.rated_power_w / spec.rated_rotor_speed


def turbine_damage(lrd: LoadRevolutionDistribution, spec) -> float:
    """Rotations above the damage threshold; the straddling bin counts pro-rata."""
    tau = damage_threshold_torque(spec)
    total = 0.0
    for lo, hi, count in zip(lrd.bin_edges, lrd.bin_edges[1:], lrd.rotations):
        if lo >= tau:
            total += count
        elif hi > tau:
            total += count * (hi - tau) / (hi - lo)
    return total


def demand_fractions(
    partition: tuple[tuple[str, ...], ...],
    damages: dict[str, float],
    mode: str = "inverse",
    floor: float = DEFAULT_DAMAGE_FLOOR,
) -> RegimePartition:
    """Normalize damages and assign per-regime demand fractions.

    mode "inverse": f_r proportional to 1 / D_r; mode "complement": f_r
    proportional to 1 - D_r.  Both give regimes with lower damage a larger
    share of the demand.
    """
    if not partition:
        raise RegimeError("at least one regime required")
    total = sum(damages[t] for r in partition for t in r)
    if total <= 0:
        raise RegimeError("total damage must be positive")
    norm = {t: damages[t] / total for r in partition for t in r}
    d_r = []
    for r in partition:
        d = sum(norm[t] for t in r)
        if d <= 0:
            if floor <= 0:
                raise RegimeError("zero-damage regime; supply a damage floor")
            d = floor
        d_r.append(d)
    if mode == "inverse":
        weights = [1.0 / d for d in d_r]
    elif mode == "complement":
        weights = [1.0 - d for d in d_r]
    else:
        raise RegimeError(f"unknown fraction mode {mode!r}")
    wsum = sum(weights)
    fractions = tuple(w / wsum for w in weights)
    return RegimePartition(tuple(partition), norm, fractions)


def power_features(farm: FarmLayout, wind: WindCondition) -> dict[str, float]:
    """Per-turbine achieved power at all-maximum set-points under the given wind."""
    config = {tid: farm.spec_for(tid).rated_power_w for tid in farm.ids}
    flow = wake.evaluate(farm, wind, config)
    return flow.powers()


def generate_synthetic_lrd(
    farm: FarmLayout,
    wind: WindCondition,
    seed: int,
    total_rotations: float = 1e6,
    n_bins: int = 48,
) -> dict[str, LoadRevolutionDistribution]:
    """Synthetic per-turbine load-revolution histograms.

    Simulates steady all-maximum operation under the dominant wind, converts
    each turbine's achieved power to a mean torque, and spreads the rotation
    budget around it with a seeded per-turbine lognormal scale factor so the
    high-torque mass grows with achieved power.  Deterministic per seed.
    """
    config = {tid: farm.spec_for(tid).rated_power_w for tid in farm.ids}
    flow = wake.evaluate(farm, wind, config)
    out: dict[str, LoadRevolutionDistribution] = {}
    for idx, (tid, _, spec) in enumerate(farm.turbines):
        rng = np.random.default_rng(np.random.SeedSequence((seed, idx)))
        tau_rated = spec.rated_power_w / spec.rated_rotor_speed
        u = flow.speed_of(tid)
        omega = rotor_speed(spec, u)
        tau_mean = shaft_torque(flow.power_of(tid), omega)
        jitter = math.exp(0.1 * rng.standard_normal())
        center = tau_mean * jitter
        sigma = 0.12 * tau_rated
        edges = np.linspace(0.0, 1.25 * tau_rated, n_bins + 1)
        z_hi = (edges[1:] - center) / sigma
        z_lo = (edges[:-1] - center) / sigma
        mass = 0.5 * (_erf_vec(z_hi / math.sqrt(2)) - _erf_vec(z_lo / math.sqrt(2)))
        mass = np.clip(mass, 0.0, None)
        mass = mass / mass.sum() if mass.sum() > 0 else np.full(n_bins, 1.0 / n_bins)
        out[tid] = LoadRevolutionDistribution(
            tuple(float(e) for e in edges),
            tuple(float(total_rotations * m) for m in mass),
        )
    return out


def _erf_vec(z: np.ndarray) -> np.ndarray:
    from scipy.special import erf

    return erf(z)


# ---------------------------------------------------------------------------
# File formats

def render_lrd(lrds: dict[str, LoadRevolutionDistribution]) -> str:
    """CSV: turbine_id, torque_bin_lower_Nm, torque_bin_upper_Nm, rotations."""
    lines = ["turbine_id,torque_bin_lower_Nm,torque_bin_upper_Nm,rotations"]
    for tid, lrd in lrds.items():
        for lo, hi, count in zip(lrd.bin_edges, lrd.bin_edges[1:], lrd.rotations):
            lines.append(f"{tid},{lo!r},{hi!r},{count!r}")
    return "\n".join(lines) + "\n"


def load_lrd(text: str) -> dict[str, LoadRevolutionDistribution]:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != "turbine_id,torque_bin_lower_Nm,torque_bin_upper_Nm,rotations":
        raise RegimeError("unrecognized load-revolution file header")
    rows: dict[str, list[tuple[float, float, float]]] = {}
    for line in lines[1:]:
        tid, lo, hi, count = line.split(",")
        rows.setdefault(tid, []).append((float(lo), float(hi), float(count)))
    out = {}
    for tid, bins in rows.items():
        for (_, hi0, _), (lo1, _, _) in zip(bins, bins[1:]):
            if lo1 != hi0:
                raise RegimeError(f"non-contiguous bins for turbine {tid!r}")
        edges = tuple([bins[0][0]] + [b[1] for b in bins])
        out[tid] = LoadRevolutionDistribution(edges, tuple(b[2] for b in bins))
    return out


def render_partition(partition: RegimePartition) -> str:
    """CSV: regime_id, turbine_ids (space separated), D_r, f_r."""
    lines = ["regime_id,turbine_ids,D_r,f_r"]
    for r, (members, f) in enumerate(zip(partition.regimes, partition.fractions)):
        d = sum(partition.damage[t] for t in members)
        lines.append(f"{r},{' '.join(members)},{d!r},{f!r}")
    return "\n".join(lines) + "\n"
