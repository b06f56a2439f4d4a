"""Battery charge curve, SoC stepping and mode hysteresis."""

from __future__ import annotations

import numpy as np
import pytest

from dersched import (ChargeCurve, ChargeSource, DerSpec, RateLimitError,
                      StorageMode, StorageState, charge_rate, curve_for,
                      decide_mode, discharge_limit_kw, step_soc)


def _spec(**overrides) -> DerSpec:
    base = dict(id=1, inverter_rating_kw=60.0, pv_predicted_kw=(0.0,) * 96,
                storage_capacity_kwh=16.0, soc_init_pct=65.0,
                soc_min_pct=30.0, discharge_hours=1.0,
                discharge_rate_max_kw=11.2, charge_rate_max_kw=10.0)
    base.update(overrides)
    return DerSpec(**base)


CURVE10 = ChargeCurve(cr_max_kw=10.0, bulk_threshold_pct=80.0)


def test_charge_rate_reference_values():
    assert charge_rate(50.0, CURVE10, 0.0, ChargeSource.GRID) == 10.0
    assert charge_rate(90.0, CURVE10, 0.0, ChargeSource.GRID) == 5.0
    assert charge_rate(100.0, CURVE10, 0.0, ChargeSource.GRID) == 0.0
    assert charge_rate(50.0, CURVE10, 6.0, ChargeSource.PV_ONLY) == 6.0


def test_charge_rate_bounds_and_monotonicity():
    rng = np.random.default_rng(3)
    for _ in range(200):
        curve = ChargeCurve(cr_max_kw=float(rng.uniform(0.5, 20)),
                            bulk_threshold_pct=float(rng.uniform(10, 95)))
        pv = float(rng.uniform(0, 15))
        src = ChargeSource.PV_ONLY if rng.uniform() < 0.5 else ChargeSource.GRID
        socs = np.sort(rng.uniform(0, 100, size=8))
        rates = [charge_rate(float(s), curve, pv, src) for s in socs]
        for r in rates:
            assert 0.0 <= r <= curve.cr_max_kw
            if src is ChargeSource.PV_ONLY:
                assert r <= pv
        # nonincreasing in soc
        for a, b in zip(rates, rates[1:]):
            assert b <= a + 1e-12


def test_charge_rate_domain():
    with pytest.raises(ValueError):
        charge_rate(101.0, CURVE10, 0.0, ChargeSource.GRID)
    with pytest.raises(ValueError):
        charge_rate(50.0, CURVE10, -1.0, ChargeSource.GRID)
    with pytest.raises(ValueError):
        ChargeCurve(cr_max_kw=0.0)
    with pytest.raises(ValueError):
        ChargeCurve(cr_max_kw=5.0, bulk_threshold_pct=100.0)


def test_curve_for_uses_spec_rate():
    assert curve_for(_spec(charge_rate_max_kw=3.5)).cr_max_kw == 3.5


def test_discharge_limit():
    spec = _spec()
    # usable 35% of 16 kWh over 1 h = 5.6 kW, tighter than 11.2
    assert discharge_limit_kw(spec, 65.0) == pytest.approx(5.6)
    assert discharge_limit_kw(spec, 30.0) == 0.0
    assert discharge_limit_kw(spec, 100.0) == pytest.approx(11.2)


def test_step_soc_reference_values():
    spec = _spec(soc_min_pct=0.0, discharge_rate_max_kw=100.0)
    state = StorageState(soc_pct=50.0, mode=StorageMode.DISCHARGING)
    new, delivered = step_soc(state, spec, 6.0, 0.25)
    assert new.soc_pct == pytest.approx(40.625)
    assert delivered == pytest.approx(1.5)

    # same power from just above the floor: clamps, partial energy
    spec = _spec()
    state = StorageState(soc_pct=31.0, mode=StorageMode.DISCHARGING)
    new, delivered = step_soc(state, spec, 6.0, 0.25)
    assert new.soc_pct == 30.0
    assert delivered == pytest.approx(0.16)

    state = StorageState(soc_pct=47.0, mode=StorageMode.IDLE)
    new, delivered = step_soc(state, spec, 0.0, 0.25)
    assert new == state and delivered == 0.0


def test_step_soc_charging_and_clamp_at_top():
    spec = _spec(soc_max_pct=96.0)
    state = StorageState(soc_pct=95.5, mode=StorageMode.CHARGING)
    new, delivered = step_soc(state, spec, -1.0, 0.25)
    # requested 0.25 kWh but headroom is 0.5% of 16 = 0.08 kWh
    assert new.soc_pct == 96.0
    assert delivered == pytest.approx(-0.08)


def test_step_soc_rate_violations():
    spec = _spec()
    state = StorageState(soc_pct=65.0, mode=StorageMode.DISCHARGING)
    with pytest.raises(RateLimitError):
        step_soc(state, spec, 50.0, 0.25)  # above the rated 11.2 kW
    # above the sustained usable/DR limit but below the rated limit:
    # allowed, the clamp covers any energy shortfall
    new, delivered = step_soc(StorageState(31.0, StorageMode.DISCHARGING),
                              spec, 11.0, 0.25)
    assert new.soc_pct == 30.0 and delivered == pytest.approx(0.16)
    with pytest.raises(RateLimitError):
        step_soc(StorageState(90.0, StorageMode.CHARGING), spec, -9.0, 0.25)
    with pytest.raises(ValueError):
        step_soc(state, spec, 1.0, 0.0)

    empty = _spec(storage_capacity_kwh=0.0)
    st = StorageState(soc_pct=0.0, mode=StorageMode.IDLE)
    assert step_soc(st, empty, 0.0, 0.25) == (st, 0.0)
    with pytest.raises(RateLimitError):
        step_soc(st, empty, 1.0, 0.25)


def test_step_soc_energy_conservation():
    rng = np.random.default_rng(5)
    spec = _spec()
    state = StorageState(soc_pct=65.0, mode=StorageMode.IDLE)
    total = 0.0
    start = state.soc_pct
    for _ in range(500):
        if rng.uniform() < 0.5:
            p = float(rng.uniform(0, discharge_limit_kw(spec, state.soc_pct)))
        else:
            p = -float(rng.uniform(0, charge_rate(
                state.soc_pct, curve_for(spec), 0.0, ChargeSource.GRID)))
        state, delivered = step_soc(state, spec, p, 0.25)
        total += delivered
        assert spec.soc_min_pct - 1e-12 <= state.soc_pct \
            <= spec.soc_max_pct + 1e-12
    expected = spec.storage_capacity_kwh * (start - state.soc_pct) / 100.0
    assert abs(total - expected) <= 1e-9 * max(abs(expected), 1.0)


def test_decide_mode_reference_flips():
    spec = _spec(soc_max_pct=96.0)
    full = StorageState(soc_pct=96.0, mode=StorageMode.CHARGING)
    assert decide_mode(full, spec, 0.0) is StorageMode.DISCHARGING

    drained = StorageState(soc_pct=30.0, mode=StorageMode.DISCHARGING)
    assert decide_mode(drained, spec, 5.0) is StorageMode.CHARGING

    mid = StorageState(soc_pct=50.0, mode=StorageMode.DISCHARGING)
    assert decide_mode(mid, spec, 5.0) is StorageMode.DISCHARGING

    mid_charging = StorageState(soc_pct=50.0, mode=StorageMode.CHARGING)
    assert decide_mode(mid_charging, spec, 5.0) is StorageMode.CHARGING


def test_decide_mode_empty_side_deadband():
    # discharge drains asymptotically; slightly above the floor must
    # still flip to charging
    spec = _spec()
    near_floor = StorageState(soc_pct=30.3, mode=StorageMode.DISCHARGING)
    assert decide_mode(near_floor, spec, 5.0) is StorageMode.CHARGING
    above_band = StorageState(soc_pct=30.8, mode=StorageMode.DISCHARGING)
    assert decide_mode(above_band, spec, 5.0) is StorageMode.DISCHARGING


def test_decide_mode_idle_rules():
    spec = _spec()
    drained = StorageState(soc_pct=30.0, mode=StorageMode.DISCHARGING)
    # wants to charge, no PV, PV-only source: stalls
    assert decide_mode(drained, spec, 0.0) is StorageMode.IDLE
    # grid charging never stalls
    assert decide_mode(drained, spec, 0.0,
                       ChargeSource.GRID) is StorageMode.CHARGING
    # idle resumes charging when PV returns
    idle = StorageState(soc_pct=30.0, mode=StorageMode.IDLE)
    assert decide_mode(idle, spec, 4.0) is StorageMode.CHARGING
    # no storage: permanently idle
    hollow = _spec(storage_capacity_kwh=0.0)
    assert decide_mode(idle, hollow, 50.0) is StorageMode.IDLE


def test_mode_trace_hysteresis_property():
    # random walk of valid steps: charging->discharging only at soc_max,
    # discharging->charging only near soc_min
    rng = np.random.default_rng(9)
    spec = _spec(soc_max_pct=96.0, charge_rate_max_kw=4.0)
    state = StorageState(soc_pct=65.0, mode=StorageMode.CHARGING)
    deadband = 0.5
    for _ in range(2000):
        pv = float(rng.uniform(0, 8))
        mode = decide_mode(state, spec, pv, ChargeSource.GRID)
        prev_soc = state.soc_pct
        if mode is StorageMode.DISCHARGING and \
                state.mode in (StorageMode.CHARGING, StorageMode.IDLE):
            assert prev_soc >= spec.soc_max_pct - 1e-9
        if mode is StorageMode.CHARGING and \
                state.mode is StorageMode.DISCHARGING:
            assert prev_soc <= spec.soc_min_pct + deadband + 1e-9
        if mode is StorageMode.DISCHARGING:
            p = float(rng.uniform(0, discharge_limit_kw(spec, prev_soc)))
        elif mode is StorageMode.CHARGING:
            p = -charge_rate(prev_soc, curve_for(spec), pv, ChargeSource.GRID)
        else:
            p = 0.0
        new_state, _ = step_soc(StorageState(prev_soc, mode), spec, p, 0.25)
        state = new_state
