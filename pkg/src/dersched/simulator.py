"""Day-ahead simulation of a solar-plus-storage fleet.

Interval loop: decide each unit's mode, split availability into dispatch
and reserve across the discharging units, run the charge curve on the
charging units, draw the reserve actually consumed, then advance every
SoC. Committed power is backed by PV first; only the shortfall drains
the battery. A charging unit splits its PV output into non-dispatchable
injection and storage arbitrage, so under PV-only charging
ndf + saf = pv / inverter holds exactly on daytime intervals.

A reserve target the discharging units cannot hold does not abort the
day: the interval falls back to per-unit reserve floors and is flagged
via ``tsrp_unmet``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import storage as stor
from .dispatch import (DerAllocation, DispatchProblem, SolveStatus,
                       build_problem, feasible_tsrp_range, solve)
from .factors import availability_factor_btm
from .model import (ChargeSource, DerSpec, ReserveConsumption, Scenario,
                    StorageMode, StorageState, Violation, validate_scenario)


class ScenarioValidationError(Exception):
    """Scenario failed type validation; carries every finding."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"scenario failed validation: {lines}")


@dataclass(frozen=True)
class DerInterval:
    """One unit's outcome for one interval. ``soc_pct`` is end-of-interval.

    ``storage_discharge_kw``/``storage_charge_kw`` are the battery
    terminal flows actually moved, for energy accounting; they are not
    part of the emitted CSV schema.
    """

    der_id: int
    mode: StorageMode
    soc_pct: float
    af: float
    df: float
    srf: float
    saf: float
    ndf: float
    ucp_kw: float
    nd_kw: float
    srp_kw: float
    arb_kw: float
    storage_discharge_kw: float
    storage_charge_kw: float


@dataclass(frozen=True)
class IntervalRecord:
    """Fleet-level outcome for one interval plus the per-unit rows."""

    index: int
    time_hours: float
    load_kw: float
    feeder_kw: float
    total_ucp_kw: float
    total_nd_kw: float
    total_srp_kw: float
    total_arb_kw: float
    reserve_consumed_kw: float
    ders: tuple[DerInterval, ...]
    tsrp_unmet: bool
    tsrp_window_kw: tuple[float, float]


def draw_reserve_consumption(srp_kw: float, cfg: ReserveConsumption,
                             rng: np.random.Generator) -> float:
    """Reserve actually called this interval: one normal draw around
    mean_fraction of the scheduled reserve, clamped to [0, srp]."""
    if srp_kw <= 0:
        return 0.0
    x = rng.normal(cfg.mean_fraction * srp_kw, cfg.sigma_fraction * srp_kw)
    return min(max(x, 0.0), srp_kw)


def split_charging_power(pv_now_kw: float, cr_kw: float,
                         charge_source: ChargeSource) -> tuple[float, float]:
    """Split a charging unit's interval into (nd_kw, arb_kw).

    Arbitrage is what the battery absorbs; non-dispatchable is the PV
    remainder pushed to the feeder. PV-only charging draws arbitrage from
    PV, so nd + arb = pv. Grid charging absorbs the full rate regardless
    of PV (PV still offsets the grid draw first).
    """
    if pv_now_kw < 0 or cr_kw < 0:
        raise ValueError("pv_now_kw and cr_kw must be >= 0")
    if charge_source is ChargeSource.PV_ONLY:
        arb = min(cr_kw, pv_now_kw)
    else:
        arb = cr_kw
    nd = max(pv_now_kw - min(arb, pv_now_kw), 0.0)
    return nd, arb


def feeder_power(load_kw: float, ucp_kw: float, nd_kw: float, arb_kw: float,
                 consumed_kw: float) -> float:
    """Power the feeder head must supply: load minus net fleet injection
    (committed + non-dispatchable + consumed reserve - charging draw)."""
    return load_kw - (ucp_kw + nd_kw + consumed_kw - arb_kw)


def _initial_state(spec: DerSpec) -> StorageState:
    if spec.initial_mode is not None:
        return StorageState(spec.soc_init_pct, spec.initial_mode)
    # Charge-first policy: a unit holds off discharging until full;
    # decide_mode immediately corrects this at the SoC bounds.
    return StorageState(spec.soc_init_pct, StorageMode.CHARGING)


def _fallback_allocations(problem: DispatchProblem) -> dict[int, DerAllocation]:
    """Reserve floors when the target is unreachable: each unit holds
    min(srf_min, af_clamped) so dispatch never goes negative."""
    out = {}
    for e in problem.entries:
        srf = min(e.srf_min, e.af_clamped)
        df = e.af_clamped - srf
        out[e.der_id] = DerAllocation(e.der_id, df, srf,
                                      df * e.inverter_kw, srf * e.inverter_kw)
    return out


def run_day_ahead(
    scenario: Scenario,
    pv_actual: Mapping[int, Sequence[float]] | None = None,
) -> list[IntervalRecord]:
    """Simulate one day and return one record per interval.

    ``pv_actual`` optionally overrides realised PV per unit id (same
    length as the forecast); by default actual equals predicted. The
    reserve-consumption draws come from a Generator seeded with the
    scenario's rng_seed, so a run is reproducible bit-for-bit.
    """
    violations = validate_scenario(scenario)
    if violations:
        raise ScenarioValidationError(violations)
    if pv_actual is not None:
        for der_id, series in pv_actual.items():
            if len(series) != scenario.n_intervals:
                raise ValueError(f"pv_actual for der {der_id}: expected "
                                 f"{scenario.n_intervals} entries, "
                                 f"got {len(series)}")

    dt = scenario.interval_hours
    source = scenario.charge_source
    cfg = scenario.reserve_consumption
    rng = np.random.default_rng(cfg.rng_seed)
    states = {d.id: _initial_state(d) for d in scenario.ders}

    records: list[IntervalRecord] = []
    for t in range(scenario.n_intervals):
        pv_pred = {d.id: d.pv_predicted_kw[t] for d in scenario.ders}
        if pv_actual is None:
            pv_act = pv_pred
        else:
            pv_act = {d.id: (float(pv_actual[d.id][t]) if d.id in pv_actual
                             else pv_pred[d.id]) for d in scenario.ders}

        for d in scenario.ders:
            st = states[d.id]
            mode = stor.decide_mode(st, d, pv_act[d.id], source)
            states[d.id] = StorageState(st.soc_pct, mode)

        af_by_id = {
            d.id: availability_factor_btm(
                states[d.id].soc_pct, d.soc_min_pct, d.storage_capacity_kwh,
                d.discharge_hours, pv_pred[d.id], d.inverter_rating_kw)
            for d in scenario.ders
        }
        fleet = [(d, states[d.id], af_by_id[d.id], pv_pred[d.id])
                 for d in scenario.ders]
        problem = build_problem(fleet, scenario.tsrp_kw[t])
        window = feasible_tsrp_range(problem)
        solution = solve(problem)
        if solution.status is SolveStatus.OPTIMAL:
            alloc = {a.der_id: a for a in solution.allocations}
            tsrp_unmet = False
        else:
            alloc = _fallback_allocations(problem)
            tsrp_unmet = True

        # Charge-side pass first so the aggregate reserve is known before
        # the consumption draw.
        plans: dict[int, tuple] = {}
        total_srp = 0.0
        for d in scenario.ders:
            st = states[d.id]
            if st.mode is StorageMode.DISCHARGING:
                a = alloc[d.id]
                plans[d.id] = ("discharge", a)
                total_srp += a.srp_kw
            elif st.mode is StorageMode.CHARGING:
                cr = stor.charge_rate(st.soc_pct, stor.curve_for(d),
                                      pv_act[d.id], source)
                if d.saf_setpoint is not None:
                    cr = min(cr, d.saf_setpoint * d.inverter_rating_kw)
                headroom = d.headroom_energy_kwh(st.soc_pct)
                cr = min(cr, max(headroom, 0.0) / dt)
                nd, arb = split_charging_power(pv_act[d.id], cr, source)
                plans[d.id] = ("charge", nd, arb)
            else:
                plans[d.id] = ("idle",)

        consumed = draw_reserve_consumption(total_srp, cfg, rng)

        der_rows = []
        totals = {"ucp": 0.0, "nd": 0.0, "srp": 0.0, "arb": 0.0}
        for d in scenario.ders:
            st = states[d.id]
            plan = plans[d.id]
            inv = d.inverter_rating_kw
            if plan[0] == "discharge":
                a: DerAllocation = plan[1]
                share = consumed * a.srp_kw / total_srp if total_srp > 0 else 0.0
                request = max(a.ucp_kw + share - pv_act[d.id], 0.0)
                limit = min(stor.discharge_limit_kw(d, st.soc_pct),
                            max(d.usable_energy_kwh(st.soc_pct), 0.0) / dt)
                new_state, moved = stor.step_soc(st, d, min(request, limit), dt)
                row = DerInterval(
                    der_id=d.id, mode=st.mode, soc_pct=new_state.soc_pct,
                    af=af_by_id[d.id], df=a.df, srf=a.srf, saf=0.0, ndf=0.0,
                    ucp_kw=a.ucp_kw, nd_kw=0.0, srp_kw=a.srp_kw, arb_kw=0.0,
                    storage_discharge_kw=moved / dt, storage_charge_kw=0.0)
            elif plan[0] == "charge":
                nd, arb = plan[1], plan[2]
                new_state, moved = stor.step_soc(st, d, -arb, dt)
                row = DerInterval(
                    der_id=d.id, mode=st.mode, soc_pct=new_state.soc_pct,
                    af=af_by_id[d.id], df=0.0, srf=0.0,
                    saf=arb / inv, ndf=nd / inv,
                    ucp_kw=0.0, nd_kw=nd, srp_kw=0.0, arb_kw=arb,
                    storage_discharge_kw=0.0, storage_charge_kw=-moved / dt)
            else:
                # Idle: PV (if any) flows through as non-dispatchable.
                nd = pv_act[d.id]
                new_state = st
                row = DerInterval(
                    der_id=d.id, mode=st.mode, soc_pct=st.soc_pct,
                    af=af_by_id[d.id], df=0.0, srf=0.0, saf=0.0,
                    ndf=nd / inv, ucp_kw=0.0, nd_kw=nd, srp_kw=0.0,
                    arb_kw=0.0, storage_discharge_kw=0.0, storage_charge_kw=0.0)
            states[d.id] = new_state
            der_rows.append(row)
            totals["ucp"] += row.ucp_kw
            totals["nd"] += row.nd_kw
            totals["srp"] += row.srp_kw
            totals["arb"] += row.arb_kw

        records.append(IntervalRecord(
            index=t,
            time_hours=t * dt,
            load_kw=scenario.load_kw[t],
            feeder_kw=feeder_power(scenario.load_kw[t], totals["ucp"],
                                   totals["nd"], totals["arb"], consumed),
            total_ucp_kw=totals["ucp"],
            total_nd_kw=totals["nd"],
            total_srp_kw=totals["srp"],
            total_arb_kw=totals["arb"],
            reserve_consumed_kw=consumed,
            ders=tuple(der_rows),
            tsrp_unmet=tsrp_unmet,
            tsrp_window_kw=window,
        ))
    return records
