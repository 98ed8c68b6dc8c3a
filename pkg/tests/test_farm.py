import math

import pytest

from windapc.farm import (
    DEFAULT_SET_POINTS_W,
    FarmLayout,
    LayoutError,
    SetPointMenu,
    TurbineSpec,
    WindCondition,
    available_power,
    default_farm,
    grid_farm,
    load_farm,
    render_farm,
    rotor_speed,
    shaft_torque,
)

SPEC = TurbineSpec()


def test_power_curve_anchors_exact():
    assert available_power(SPEC, 6.5) == 1.49e6
    assert available_power(SPEC, 10.0) == 6.42e6
    assert available_power(SPEC, 13.5) == 8.0e6


def test_power_curve_interpolation():
    # [DERIVED] midpoint of the (6.5, 1.49 MW)-(10, 6.42 MW) segment at 8.25 m/s:
    # 1.49e6 + (1.75 / 3.5) * (6.42e6 - 1.49e6) = 3.955e6
    assert available_power(SPEC, 8.25) == pytest.approx(3_955_000.0, rel=1e-12)


def test_power_curve_clamps():
    assert available_power(SPEC, 0.0) == 0.0
    assert available_power(SPEC, 20.0) == SPEC.rated_power_w
    with pytest.raises(ValueError):
        available_power(SPEC, -1.0)


def test_rotor_speed_curve():
    assert rotor_speed(SPEC, 0.0) == 0.6
    assert rotor_speed(SPEC, 13.5) == 1.0
    assert rotor_speed(SPEC, 20.0) == 1.0
    # [DERIVED] 0.6 + 0.4 * (8 - 4) / (13.5 - 4)
    assert rotor_speed(SPEC, 8.0) == pytest.approx(0.6 + 0.4 * 4 / 9.5, rel=1e-12)


def test_shaft_torque():
    assert shaft_torque(8e6, 1.0) == 8e6
    assert shaft_torque(3e6, 0.75) == 4e6
    with pytest.raises(ValueError):
        shaft_torque(1e6, 0.0)


def test_turbine_spec_validation():
    with pytest.raises(LayoutError):
        TurbineSpec(rotor_diameter_m=0.0)
    with pytest.raises(LayoutError):
        TurbineSpec(rated_power_w=-1.0)
    with pytest.raises(LayoutError):
        TurbineSpec(power_curve=((0.0, 0.0),))
    with pytest.raises(LayoutError):
        TurbineSpec(power_curve=((0.0, 0.0), (5.0, 2e6), (5.0, 3e6)))
    with pytest.raises(LayoutError):
        TurbineSpec(power_curve=((0.0, 0.0), (5.0, 9e6)))  # above rated


def test_wind_condition_normalization():
    assert WindCondition(370.0).direction_deg == pytest.approx(10.0)
    assert WindCondition(-90.0).direction_deg == pytest.approx(270.0)
    assert WindCondition(0.0).speed == 11.0
    with pytest.raises(ValueError):
        WindCondition(0.0, speed=0.0)


def test_set_point_menu_defaults():
    menu = SetPointMenu()
    assert menu.levels == DEFAULT_SET_POINTS_W
    assert menu.minimum == 1.49e6
    assert menu.maximum == 8.0e6
    assert len(menu) == 3
    with pytest.raises(ValueError):
        SetPointMenu(levels=(2e6, 1e6))  # not ascending
    with pytest.raises(ValueError):
        SetPointMenu(levels=())


def test_grid_farm_layout():
    farm = grid_farm(n_cols=3, n_rows=2, dx=500.0, dy=400.0)
    assert farm.ids == ("T01", "T02", "T03", "T04", "T05", "T06")
    assert farm.position("T02") == (500.0, 0.0)
    assert farm.position("T04") == (0.0, 400.0)
    assert farm.index("T06") == 5


def test_default_farm_shape():
    farm = default_farm()
    assert len(farm) == 24
    assert farm.position("T07") == (0.0, 400.0)
    assert farm.position("T06") == (2500.0, 0.0)


def test_duplicate_ids_rejected():
    t = TurbineSpec()
    with pytest.raises(LayoutError):
        FarmLayout((("A", (0.0, 0.0), t), ("A", (500.0, 0.0), t)))


def test_rotated_preserves_distances():
    farm = default_farm()
    rot = farm.rotated(37.0)
    a, b = farm.position("T01"), farm.position("T24")
    ra, rb = rot.position("T01"), rot.position("T24")
    assert math.dist(a, b) == pytest.approx(math.dist(ra, rb), rel=1e-12)
    assert rot.ids == farm.ids


def test_yaml_round_trip():
    farm = grid_farm(n_cols=2, n_rows=2)
    doc = render_farm(farm)
    again = load_farm(doc)
    assert again == farm
    assert render_farm(again) == doc


def test_yaml_rejects_unknown_fields():
    doc = render_farm(grid_farm(n_cols=2, n_rows=1))
    with pytest.raises(LayoutError):
        load_farm(doc + "\nbogus_field: 3\n")


def test_yaml_rejects_wrong_schema():
    doc = render_farm(grid_farm(n_cols=2, n_rows=1))
    with pytest.raises(LayoutError):
        load_farm(doc.replace("windapc-layout-1", "windapc-layout-99"))
