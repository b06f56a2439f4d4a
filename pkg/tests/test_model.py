"""Domain type invariants and scenario validation."""

from __future__ import annotations

import dataclasses

from dersched import (DerSpec, ReserveConsumption, Scenario, StorageMode,
                      consistency_warnings, validate_scenario)


def _der(**overrides) -> DerSpec:
    base = dict(id=1, inverter_rating_kw=60.0,
                pv_predicted_kw=(0.0,) * 96, storage_capacity_kwh=16.0,
                soc_init_pct=65.0, soc_min_pct=30.0, discharge_hours=1.0,
                discharge_rate_max_kw=11.2, charge_rate_max_kw=1.3)
    base.update(overrides)
    return DerSpec(**base)


def _scenario(**overrides) -> Scenario:
    base = dict(ders=(_der(),), load_kw=(1000.0,) * 96,
                tsrp_kw=(15.0,) * 96)
    base.update(overrides)
    return Scenario(**base)


def test_bundled_scenarios_validate_clean(summer_scenario, winter_scenario):
    assert validate_scenario(summer_scenario) == []
    assert validate_scenario(winter_scenario) == []
    assert consistency_warnings(summer_scenario) == []
    assert consistency_warnings(winter_scenario) == []


def test_valid_synthetic_scenario():
    assert validate_scenario(_scenario()) == []


def test_der_invariant_violations():
    cases = [
        (dict(inverter_rating_kw=0.0), "inverter_rating_kw"),
        (dict(storage_capacity_kwh=-1.0), "storage_capacity_kwh"),
        (dict(soc_min_pct=80.0, soc_max_pct=70.0, soc_init_pct=75.0),
         "soc_min_pct"),
        (dict(soc_init_pct=20.0), "soc_init_pct"),
        (dict(soc_init_pct=101.0), "soc_init_pct"),
        (dict(discharge_hours=0.0), "discharge_hours"),
        (dict(discharge_rate_max_kw=-2.0), "discharge_rate_max_kw"),
        (dict(charge_rate_max_kw=-0.5), "charge_rate_max_kw"),
        (dict(srf_min=0.2, srf_max=0.1), "srf_min"),
        (dict(srf_max=1.5), "srf_min"),
        (dict(saf_setpoint=1.5), "saf_setpoint"),
        (dict(pv_predicted_kw=(0.0,) * 95), "pv_predicted_kw"),
        (dict(pv_predicted_kw=(-1.0,) + (0.0,) * 95), "pv_predicted_kw"),
        (dict(pv_predicted_kw=(61.0,) + (0.0,) * 95), "pv_predicted_kw"),
    ]
    for overrides, field_name in cases:
        violations = validate_scenario(_scenario(ders=(_der(**overrides),)))
        assert any(v.field == field_name for v in violations), overrides
        assert all(v.der_id == 1 for v in violations
                   if v.field == field_name)


def test_scenario_level_violations():
    v = validate_scenario(_scenario(load_kw=(1000.0,) * 90))
    assert any(x.field == "load_kw" and x.der_id is None for x in v)

    v = validate_scenario(_scenario(tsrp_kw=(-1.0,) * 96))
    assert any(x.field == "tsrp_kw" for x in v)

    v = validate_scenario(_scenario(interval_hours=0.0))
    assert [x.field for x in v] == ["interval_hours"]

    v = validate_scenario(_scenario(interval_hours=0.7))
    assert any(x.field == "interval_hours" for x in v)

    v = validate_scenario(_scenario(ders=()))
    assert any(x.field == "ders" for x in v)

    v = validate_scenario(_scenario(
        reserve_consumption=ReserveConsumption(mean_fraction=1.5)))
    assert any("mean_fraction" in x.field for x in v)

    v = validate_scenario(_scenario(
        reserve_consumption=ReserveConsumption(sigma_fraction=-0.1)))
    assert any("sigma_fraction" in x.field for x in v)


def test_duplicate_ids_flagged():
    v = validate_scenario(_scenario(ders=(_der(), _der())))
    assert any(x.field == "id" and x.der_id == 1 for x in v)


def test_violation_str_names_scope():
    v = validate_scenario(_scenario(ders=(_der(inverter_rating_kw=-1.0),)))
    assert v and str(v[0]).startswith("der 1: inverter_rating_kw")
    v = validate_scenario(_scenario(load_kw=(1.0,)))
    assert any(str(x).startswith("scenario:") for x in v)


def test_consistency_warnings_do_not_block():
    # rate far off the usable-span implied value: warns, still valid
    s = _scenario(ders=(_der(discharge_rate_max_kw=100.0),))
    assert validate_scenario(s) == []
    w = consistency_warnings(s)
    assert any(x.field == "discharge_rate_max_kw" for x in w)

    s = _scenario(ders=(_der(discharge_hours=0.1,
                             discharge_rate_max_kw=112.0),))
    assert any(x.field == "discharge_hours" for x in consistency_warnings(s))

    # matched rate: quiet
    s = _scenario(ders=(_der(),))
    assert consistency_warnings(s) == []


def test_usable_and_headroom_energy():
    d = _der()
    assert d.usable_energy_kwh(65.0) == (65.0 - 30.0) / 100.0 * 16.0
    assert d.usable_energy_kwh(30.0) == 0.0
    assert d.headroom_energy_kwh(100.0) == 0.0
    assert d.headroom_energy_kwh(65.0) == 35.0 / 100.0 * 16.0


def test_specs_are_immutable():
    d = _der()
    try:
        d.soc_init_pct = 50.0  # type: ignore[misc]
    except dataclasses.FrozenInstanceError:
        pass
    else:
        raise AssertionError("DerSpec should be frozen")


def test_initial_mode_field():
    d = _der(initial_mode=StorageMode.DISCHARGING)
    assert d.initial_mode is StorageMode.DISCHARGING
    assert _der().initial_mode is None
