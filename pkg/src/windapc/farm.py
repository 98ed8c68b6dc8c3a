"""Physical description of the wind farm: turbines, layout, wind and set-point menu."""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

# Piecewise-linear power curve anchors (hub wind speed m/s -> available power W).
# The three non-zero anchors correspond 1:1 to the set-point menu levels.
DEFAULT_POWER_CURVE: tuple[tuple[float, float], ...] = (
    (0.0, 0.0),
    (6.5, 1_490_000.0),
    (10.0, 6_420_000.0),
    (13.5, 8_000_000.0),
)

# Angular rotor speed (hub wind speed m/s -> rad/s), linear ramp held constant
# above rated speed.  Only used for torque bookkeeping, never by the optimizer.
DEFAULT_ROTOR_SPEED_CURVE: tuple[tuple[float, float], ...] = (
    (0.0, 0.6),
    (4.0, 0.6),
    (13.5, 1.0),
)

DEFAULT_RATED_POWER_W = 8_000_000.0
DEFAULT_ROTOR_DIAMETER_M = 164.0

DEFAULT_SET_POINTS_W: tuple[float, ...] = (1_490_000.0, 6_420_000.0, 8_000_000.0)


class LayoutError(ValueError):
    """Raised when a farm layout document or turbine specification is invalid."""


def _interp(curve: tuple[tuple[float, float], ...], x: float) -> float:
    """Piecewise-linear interpolation, clamped to the first/last anchor values."""
    if x <= curve[0][0]:
        return curve[0][1]
    if x >= curve[-1][0]:
        return curve[-1][1]
    for (x0, y0), (x1, y1) in zip(curve, curve[1:]):
        if x0 <= x <= x1:
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    raise AssertionError("unreachable: curve anchors cover the query point")


@dataclass(frozen=True)
class TurbineSpec:
    """Static turbine data: rotor geometry, power curve and rotor-speed curve."""

    rotor_diameter_m: float = DEFAULT_ROTOR_DIAMETER_M
    rated_power_w: float = DEFAULT_RATED_POWER_W
    power_curve: tuple[tuple[float, float], ...] = DEFAULT_POWER_CURVE
    rotor_speed_curve: tuple[tuple[float, float], ...] = DEFAULT_ROTOR_SPEED_CURVE

    def __post_init__(self) -> None:
        if self.rotor_diameter_m <= 0:
            raise LayoutError("rotor_diameter_m must be positive")
        if self.rated_power_w <= 0:
            raise LayoutError("rated_power_w must be positive")
        if len(self.power_curve) < 2:
            raise LayoutError("power_curve needs at least two anchors")
        speeds = [s for s, _ in self.power_curve]
        powers = [p for _, p in self.power_curve]
        if any(s1 <= s0 for s0, s1 in zip(speeds, speeds[1:])):
            raise LayoutError("power_curve speeds must be strictly increasing")
        if any(p1 < p0 for p0, p1 in zip(powers, powers[1:])):
            raise LayoutError("power_curve must be non-decreasing")
        if any(p < 0 for p in powers) or max(powers) > self.rated_power_w + 1e-9:
            raise LayoutError("power_curve must stay within [0, rated_power_w]")
        if len(self.rotor_speed_curve) < 1:
            raise LayoutError("rotor_speed_curve needs at least one anchor")
        ws = [s for s, _ in self.rotor_speed_curve]
        if any(s1 <= s0 for s0, s1 in zip(ws, ws[1:])):
            raise LayoutError("rotor_speed_curve speeds must be strictly increasing")
        if any(w <= 0 for _, w in self.rotor_speed_curve):
            raise LayoutError("rotor_speed_curve must be strictly positive")

    @property
    def rotor_radius_m(self) -> float:
        return 0.5 * self.rotor_diameter_m

    @property
    def rated_rotor_speed(self) -> float:
        """Rotor speed in the rated region (value at the last curve anchor)."""
        return self.rotor_speed_curve[-1][1]


def available_power(spec: TurbineSpec, hub_speed: float) -> float:
    """Available power (W) at a hub wind speed, from the turbine's power curve.

    Linear interpolation between anchors, clamped to [0, rated]; speeds beyond
    the last anchor return rated power.
    """
    if hub_speed < 0:
        raise ValueError("hub_speed must be non-negative")
    if hub_speed >= spec.power_curve[-1][0]:
        return spec.rated_power_w
    p = _interp(spec.power_curve, hub_speed)
    return min(max(p, 0.0), spec.rated_power_w)


def rotor_speed(spec: TurbineSpec, hub_speed: float) -> float:
    """Angular rotor speed (rad/s) at a hub wind speed."""
    return _interp(spec.rotor_speed_curve, hub_speed)


def shaft_torque(power: float, rotor_speed: float) -> float:
    """Main-shaft torque (N*m) produced at a given power (W) and rotor speed (rad/s)."""
    if rotor_speed <= 0:
        raise ValueError("rotor_speed must be positive")
    return power / rotor_speed


@dataclass(frozen=True)
class WindCondition:
    """Incoming wind: direction in degrees (wind vector from the origin toward
    increasing coordinates) and speed in m/s."""

    direction_deg: float
    speed: float = 11.0

    def __post_init__(self) -> None:
        if self.speed <= 0:
            raise ValueError("wind speed must be positive")
        object.__setattr__(self, "direction_deg", self.direction_deg % 360.0)


@dataclass(frozen=True)
class SetPointMenu:
    """Power set-point levels (W) available to every turbine."""

    levels: tuple[float, ...] = DEFAULT_SET_POINTS_W

    def __post_init__(self) -> None:
        if not self.levels:
            raise ValueError("menu must contain at least one level")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("menu levels must be strictly increasing")

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def minimum(self) -> float:
        return self.levels[0]

    @property
    def maximum(self) -> float:
        return self.levels[-1]


@dataclass(frozen=True)
class FarmLayout:
    """Ordered turbines; file/construction order is the canonical ordering used
    for every downstream tie-break."""

    turbines: tuple[tuple[str, tuple[float, float], TurbineSpec], ...]

    def __post_init__(self) -> None:
        if not self.turbines:
            raise LayoutError("layout must contain at least one turbine")
        seen_ids: set[str] = set()
        seen_pos: set[tuple[float, float]] = set()
        for tid, pos, _spec in self.turbines:
            if tid in seen_ids:
                raise LayoutError(f"duplicate turbine id {tid!r}")
            if pos in seen_pos:
                raise LayoutError(f"duplicate turbine position {pos} (id {tid!r})")
            seen_ids.add(tid)
            seen_pos.add(pos)

    def __len__(self) -> int:
        return len(self.turbines)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(tid for tid, _, _ in self.turbines)

    def index(self, turbine_id: str) -> int:
        return self.ids.index(turbine_id)

    def position(self, turbine_id: str) -> tuple[float, float]:
        for tid, pos, _ in self.turbines:
            if tid == turbine_id:
                return pos
        raise KeyError(turbine_id)

    def spec_for(self, turbine_id: str) -> TurbineSpec:
        for tid, _, spec in self.turbines:
            if tid == turbine_id:
                return spec
        raise KeyError(turbine_id)

    def rotated(self, angle_deg: float) -> "FarmLayout":
        """New layout with every position rotated about the origin."""
        import math

        c = math.cos(math.radians(angle_deg))
        s = math.sin(math.radians(angle_deg))
        return FarmLayout(
            tuple(
                (tid, (c * x - s * y, s * x + c * y), spec)
                for tid, (x, y), spec in self.turbines
            )
        )


def grid_farm(
    n_cols: int = 6,
    n_rows: int = 4,
    dx: float = 500.0,
    dy: float = 400.0,
    spec: TurbineSpec | None = None,
) -> FarmLayout:
    """Regular grid layout, columns along x.  Ids are row-major: T01..T06 is the
    first row at y=0."""
    spec = spec or TurbineSpec()
    turbines = []
    n = 0
    for r in range(n_rows):
        for c in range(n_cols):
            n += 1
            turbines.append((f"T{n:02d}", (c * dx, r * dy), spec))
    return FarmLayout(tuple(turbines))


def default_farm() -> FarmLayout:
    """The 24-turbine 4-by-6 reference layout: 500 m spacing along x, 400 m along y."""
    return grid_farm(n_cols=6, n_rows=4, dx=500.0, dy=400.0)


# ---------------------------------------------------------------------------
# Layout file format (YAML)

_SCHEMA = "windapc-layout-1"
_DEFAULT_FIELDS = {"rotor_diameter_m", "rated_power_w", "power_curve", "rotor_speed_curve"}
_TURBINE_FIELDS = {"id", "x_m", "y_m"} | _DEFAULT_FIELDS


def _curve_from_doc(raw, where: str) -> tuple[tuple[float, float], ...]:
    try:
        return tuple((float(a), float(b)) for a, b in raw)
    except (TypeError, ValueError) as exc:
        raise LayoutError(f"malformed curve in {where}: {raw!r}") from exc


def _spec_from_fields(fields: dict, where: str) -> TurbineSpec:
    kwargs = {}
    for key in ("rotor_diameter_m", "rated_power_w"):
        if key in fields:
            try:
                kwargs[key] = float(fields[key])
            except (TypeError, ValueError) as exc:
                raise LayoutError(f"malformed {key} in {where}") from exc
    for key in ("power_curve", "rotor_speed_curve"):
        if key in fields:
            kwargs[key] = _curve_from_doc(fields[key], where)
    try:
        return TurbineSpec(**kwargs)
    except LayoutError as exc:
        raise LayoutError(f"{where}: {exc}") from exc


def load_farm(layout_document: str) -> FarmLayout:
    """Parse and validate a layout document (see render_farm for the format)."""
    try:
        doc = yaml.safe_load(layout_document)
    except yaml.YAMLError as exc:
        raise LayoutError(f"layout document is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise LayoutError("layout document must be a mapping")
    unknown = set(doc) - {"schema", "defaults", "turbines"}
    if unknown:
        raise LayoutError(f"unknown top-level fields: {sorted(unknown)}")
    if doc.get("schema") != _SCHEMA:
        raise LayoutError(f"unsupported schema {doc.get('schema')!r}, expected {_SCHEMA!r}")

    defaults = doc.get("defaults") or {}
    if not isinstance(defaults, dict):
        raise LayoutError("defaults must be a mapping")
    unknown = set(defaults) - _DEFAULT_FIELDS
    if unknown:
        raise LayoutError(f"unknown defaults fields: {sorted(unknown)}")
    default_spec = _spec_from_fields(defaults, "defaults")

    records = doc.get("turbines")
    if not records:
        raise LayoutError("layout must contain at least one turbine")
    turbines = []
    for rec in records:
        if not isinstance(rec, dict) or "id" not in rec:
            raise LayoutError(f"malformed turbine record: {rec!r}")
        tid = str(rec["id"])
        unknown = set(rec) - _TURBINE_FIELDS
        if unknown:
            raise LayoutError(f"unknown fields on turbine {tid!r}: {sorted(unknown)}")
        try:
            x = float(rec["x_m"])
            y = float(rec["y_m"])
        except (KeyError, TypeError, ValueError) as exc:
            raise LayoutError(f"malformed coordinate on turbine {tid!r}") from exc
        overrides = {k: rec[k] for k in _DEFAULT_FIELDS if k in rec}
        spec = _spec_from_fields({**_spec_fields(default_spec), **overrides}, f"turbine {tid!r}") \
            if overrides else default_spec
        turbines.append((tid, (x, y), spec))
    return FarmLayout(tuple(turbines))


def _spec_fields(spec: TurbineSpec) -> dict:
    return {
        "rotor_diameter_m": spec.rotor_diameter_m,
        "rated_power_w": spec.rated_power_w,
        "power_curve": [list(a) for a in spec.power_curve],
        "rotor_speed_curve": [list(a) for a in spec.rotor_speed_curve],
    }


def render_farm(farm: FarmLayout) -> str:
    """Serialize a layout so that load_farm(render_farm(farm)) == farm.

    The first turbine's spec is written as the farm-level defaults section;
    turbines with a different spec carry per-turbine overrides.
    """
    default_spec = farm.turbines[0][2]
    records = []
    for tid, (x, y), spec in farm.turbines:
        rec: dict = {"id": tid, "x_m": x, "y_m": y}
        if spec != default_spec:
            rec.update(_spec_fields(spec))
        records.append(rec)
    doc = {
        "schema": _SCHEMA,
        "defaults": _spec_fields(default_spec),
        "turbines": records,
    }
    return yaml.safe_dump(doc, sort_keys=False)
