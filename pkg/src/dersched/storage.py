"""Battery charge curve, SoC bookkeeping and mode selection.

The charge curve is two-stage: constant-rate bulk charging below a SoC
threshold, then a linear absorption taper that hits zero at 100% SoC.
Mode selection is hysteretic: a unit keeps charging until it reaches
soc_max and keeps discharging until it drains to soc_min, so it never
chatters between modes inside the band.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .model import ChargeSource, DerSpec, StorageMode, StorageState

DEFAULT_BULK_THRESHOLD_PCT = 80.0

# SoC comparisons tolerate one part in 1e9 of a percent: a charge step
# that targets soc_max exactly can land an ulp short and must still count
# as full, or the discharge flip would never fire.
_SOC_TOL = 1e-9

# Empty-side deadband, SoC points. Committed power scales with usable
# energy, so discharge approaches the floor asymptotically and an exact
# soc == soc_min test would never flip the mode; flipping half a point
# early is the usual BMS treatment. Shrinks for very narrow SoC bands.
DRAIN_DEADBAND_PCT = 0.5


class RateLimitError(ValueError):
    """Raised when a caller asks step_soc to move power faster than the
    unit's verified limits allow; indicates a scheduling bug upstream."""


@dataclass(frozen=True)
class ChargeCurve:
    """Two-stage charging law for one unit."""

    cr_max_kw: float
    bulk_threshold_pct: float = DEFAULT_BULK_THRESHOLD_PCT

    def __post_init__(self) -> None:
        if self.cr_max_kw <= 0:
            raise ValueError(f"cr_max_kw must be > 0, got {self.cr_max_kw}")
        if not 0.0 < self.bulk_threshold_pct < 100.0:
            raise ValueError(f"bulk threshold must be inside (0, 100), "
                             f"got {self.bulk_threshold_pct}")


def curve_for(spec: DerSpec) -> ChargeCurve:
    """Charge curve implied by a unit spec (default bulk threshold)."""
    return ChargeCurve(cr_max_kw=spec.charge_rate_max_kw)


def charge_rate(soc_pct: float, curve: ChargeCurve, pv_now_kw: float,
                charge_source: ChargeSource) -> float:
    """Charging power available right now, in kW.

    Bulk region charges at cr_max; above the threshold the rate tapers
    linearly to zero at 100% SoC. PV-only charging is additionally capped
    by the unit's current PV output.
    """
    if not 0.0 <= soc_pct <= 100.0:
        raise ValueError(f"soc must be within [0, 100], got {soc_pct}")
    if pv_now_kw < 0:
        raise ValueError(f"pv_now_kw must be >= 0, got {pv_now_kw}")
    if soc_pct < curve.bulk_threshold_pct:
        rate = curve.cr_max_kw
    else:
        span = 100.0 - curve.bulk_threshold_pct
        rate = curve.cr_max_kw * (100.0 - soc_pct) / span
    if charge_source is ChargeSource.PV_ONLY:
        rate = min(rate, pv_now_kw)
    return max(rate, 0.0)


def discharge_limit_kw(spec: DerSpec, soc_pct: float) -> float:
    """Maximum sustained discharge power at the given SoC: the rated
    limit, or usable energy spread over the discharge envelope if that is
    tighter."""
    usable = spec.usable_energy_kwh(soc_pct)
    return min(spec.discharge_rate_max_kw,
               max(usable, 0.0) / spec.discharge_hours)


def step_soc(state: StorageState, spec: DerSpec, power_kw: float,
             dt_hours: float) -> tuple[StorageState, float]:
    """Advance SoC by one interval of constant battery power.

    ``power_kw`` is signed at the battery terminals: positive discharges,
    negative charges. Returns the new state and the energy actually moved
    (kWh, same sign convention); the SoC clamp at the unit's bounds is
    reflected in that energy. The caller must already have limited the
    power to the unit's verified rates; a clear violation raises
    RateLimitError.
    """
    if dt_hours <= 0:
        raise ValueError(f"dt_hours must be > 0, got {dt_hours}")
    esc = spec.storage_capacity_kwh
    if esc <= 0:
        if abs(power_kw) > 0:
            raise RateLimitError(
                f"der {spec.id}: no storage capacity but power={power_kw} kW")
        return state, 0.0

    if power_kw > 0:
        # Gate on the instantaneous rate only; running out of usable
        # energy mid-step is legitimate and handled by the clamp below.
        limit = spec.discharge_rate_max_kw
        if power_kw > limit * (1 + 1e-9) + 1e-12:
            raise RateLimitError(
                f"der {spec.id}: discharge {power_kw} kW exceeds the rated "
                f"limit {limit} kW")
    elif power_kw < 0:
        # The PV-capped component of the charge limit is not visible
        # here, so check against the curve ceiling only.
        limit = charge_rate(min(max(state.soc_pct, 0.0), 100.0),
                            curve_for(spec), float("inf"), ChargeSource.GRID)
        if -power_kw > limit * (1 + 1e-9) + 1e-12:
            raise RateLimitError(
                f"der {spec.id}: charge {-power_kw} kW exceeds curve rate "
                f"{limit} kW at soc {state.soc_pct}%")

    raw = state.soc_pct - 100.0 * power_kw * dt_hours / esc
    new_soc = min(max(raw, spec.soc_min_pct), spec.soc_max_pct)
    delivered_kwh = esc * (state.soc_pct - new_soc) / 100.0
    return replace(state, soc_pct=new_soc), delivered_kwh


def decide_mode(state: StorageState, spec: DerSpec, pv_now_kw: float,
                charge_source: ChargeSource = ChargeSource.PV_ONLY) -> StorageMode:
    """Operating mode for the coming interval.

    Hysteresis: full (soc >= soc_max) forces Discharging, drained
    (soc within the deadband above soc_min) forces Charging, anything in
    between keeps the previous intent (Idle counts as stalled Charging).
    A unit that wants to charge but has no source right now (PV-only
    after dark) reports Idle instead.
    """
    if spec.storage_capacity_kwh <= 0:
        return StorageMode.IDLE
    if state.soc_pct >= spec.soc_max_pct - _SOC_TOL:
        return StorageMode.DISCHARGING
    deadband = min(DRAIN_DEADBAND_PCT,
                   (spec.soc_max_pct - spec.soc_min_pct) / 4.0)
    if state.soc_pct <= spec.soc_min_pct + deadband + _SOC_TOL:
        intent = StorageMode.CHARGING
    elif state.mode is StorageMode.DISCHARGING:
        intent = StorageMode.DISCHARGING
    else:
        intent = StorageMode.CHARGING

    if intent is StorageMode.CHARGING:
        rate = charge_rate(state.soc_pct, curve_for(spec), pv_now_kw,
                           charge_source)
        if rate <= 0 and pv_now_kw <= 0 \
                and charge_source is ChargeSource.PV_ONLY:
            return StorageMode.IDLE
    return intent
