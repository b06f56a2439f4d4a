"""Domain types and scenario validation.

Unit conventions used throughout the package:

- power: kW (positive = injection toward the feeder unless stated otherwise)
- energy: kWh
- state of charge (SoC): percent of storage capacity, 0..100
- durations: hours; one scheduling interval is 0.25 h by default
- operational factors: dimensionless fractions of the unit's inverter rating

All types are immutable; validation returns data instead of raising so a
caller can collect every problem in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class StorageMode(Enum):
    """Exclusive battery operating mode for one interval."""

    CHARGING = "charging"
    DISCHARGING = "discharging"
    IDLE = "idle"


class ChargeSource(Enum):
    """Where charging power may be drawn from.

    PV_ONLY caps the charge rate at the unit's own PV output, so charging
    stalls after dark. GRID allows night-time arbitrage charging at the
    full curve rate.
    """

    PV_ONLY = "pv_only"
    GRID = "grid"


@dataclass(frozen=True)
class DerSpec:
    """Static description of one solar-plus-storage unit.

    ``pv_predicted_kw`` holds one day-ahead PV forecast entry per
    scheduling interval. ``discharge_hours`` is the envelope over which
    usable battery energy is rated when computing availability; it is not
    the interval length. ``srf_min``/``srf_max`` bound the share of the
    inverter rating this unit may carry as spinning reserve.
    """

    id: int
    inverter_rating_kw: float
    pv_predicted_kw: tuple[float, ...]
    storage_capacity_kwh: float
    soc_init_pct: float
    soc_min_pct: float
    discharge_hours: float
    discharge_rate_max_kw: float
    charge_rate_max_kw: float
    soc_max_pct: float = 100.0
    srf_min: float = 0.0
    srf_max: float = 1.0
    saf_setpoint: float | None = None
    bus_label: str = ""
    initial_mode: StorageMode | None = None

    def usable_energy_kwh(self, soc_pct: float) -> float:
        """Energy available above the SoC floor at the given SoC."""
        return (soc_pct - self.soc_min_pct) / 100.0 * self.storage_capacity_kwh

    def headroom_energy_kwh(self, soc_pct: float) -> float:
        """Energy the battery can still absorb before hitting soc_max."""
        return (self.soc_max_pct - soc_pct) / 100.0 * self.storage_capacity_kwh


@dataclass(frozen=True)
class StorageState:
    """Battery state carried between intervals."""

    soc_pct: float
    mode: StorageMode


@dataclass(frozen=True)
class OperationalFactors:
    """Per-unit factor snapshot for one interval.

    ``af`` may be None when the factors were recovered from measured
    powers alone (availability is not observable from powers).
    """

    df: float
    srf: float
    saf: float
    ndf: float
    af: float | None = None


@dataclass(frozen=True)
class ReserveConsumption:
    """Stochastic model of how much scheduled reserve is actually called.

    Each interval draws Normal(mean_fraction * SRP, sigma_fraction * SRP)
    and clamps to [0, SRP].
    """

    mean_fraction: float = 0.5
    sigma_fraction: float = 0.1
    rng_seed: int = 0


@dataclass(frozen=True)
class UtilityStorage:
    """Optional utility-scale storage block used by the fleet-level
    availability computation; not dispatched by the day-ahead loop."""

    capacity_kwh: float
    soc_pct: float
    soc_min_pct: float
    discharge_hours: float
    inverter_kw: float


@dataclass(frozen=True)
class Scenario:
    """One day-ahead study case: a fleet plus feeder-level series.

    ``load_kw`` and ``tsrp_kw`` carry one entry per interval; every DER's
    PV forecast must be the same length. ``tsrp_kw`` is the total spinning
    reserve the fleet is asked to hold each interval.
    """

    ders: tuple[DerSpec, ...]
    load_kw: tuple[float, ...]
    tsrp_kw: tuple[float, ...]
    interval_hours: float = 0.25
    reserve_consumption: ReserveConsumption = field(default_factory=ReserveConsumption)
    charge_source: ChargeSource = ChargeSource.PV_ONLY
    utility_storage: UtilityStorage | None = None

    @property
    def n_intervals(self) -> int:
        return len(self.load_kw)


@dataclass(frozen=True)
class Violation:
    """One validation finding. der_id is None for scenario-level issues."""

    der_id: int | None
    field: str
    message: str

    def __str__(self) -> str:
        scope = f"der {self.der_id}" if self.der_id is not None else "scenario"
        return f"{scope}: {self.field}: {self.message}"


def _validate_der(d: DerSpec, n_intervals: int) -> list[Violation]:
    v: list[Violation] = []

    def bad(field_name: str, message: str) -> None:
        v.append(Violation(d.id, field_name, message))

    if d.inverter_rating_kw <= 0:
        bad("inverter_rating_kw", f"must be > 0, got {d.inverter_rating_kw}")
    if d.storage_capacity_kwh < 0:
        bad("storage_capacity_kwh", f"must be >= 0, got {d.storage_capacity_kwh}")
    if not 0.0 <= d.soc_min_pct < d.soc_max_pct <= 100.0:
        bad("soc_min_pct", f"need 0 <= soc_min < soc_max <= 100, got "
            f"[{d.soc_min_pct}, {d.soc_max_pct}]")
    if not d.soc_min_pct <= d.soc_init_pct <= d.soc_max_pct:
        bad("soc_init_pct", f"{d.soc_init_pct} outside "
            f"[{d.soc_min_pct}, {d.soc_max_pct}]")
    if d.discharge_hours <= 0:
        bad("discharge_hours", f"must be > 0, got {d.discharge_hours}")
    if d.discharge_rate_max_kw < 0:
        bad("discharge_rate_max_kw", f"must be >= 0, got {d.discharge_rate_max_kw}")
    if d.charge_rate_max_kw < 0:
        bad("charge_rate_max_kw", f"must be >= 0, got {d.charge_rate_max_kw}")
    if not 0.0 <= d.srf_min <= d.srf_max <= 1.0:
        bad("srf_min", f"need 0 <= srf_min <= srf_max <= 1, got "
            f"[{d.srf_min}, {d.srf_max}]")
    if d.saf_setpoint is not None and not 0.0 <= d.saf_setpoint <= 1.0:
        bad("saf_setpoint", f"must be within [0, 1], got {d.saf_setpoint}")
    if len(d.pv_predicted_kw) != n_intervals:
        bad("pv_predicted_kw", f"expected {n_intervals} entries, "
            f"got {len(d.pv_predicted_kw)}")
    for i, p in enumerate(d.pv_predicted_kw):
        if p < 0 or p > d.inverter_rating_kw:
            bad("pv_predicted_kw", f"entry {i} = {p} outside "
                f"[0, {d.inverter_rating_kw}]")
            break
    return v


def validate_scenario(s: Scenario) -> list[Violation]:
    """Check every type invariant; return all findings, never raise.

    An empty result means the scenario is structurally sound. Soft
    consistency issues live in consistency_warnings() instead.
    """
    v: list[Violation] = []
    if s.interval_hours <= 0:
        v.append(Violation(None, "interval_hours",
                           f"must be > 0, got {s.interval_hours}"))
        return v

    expected = round(24.0 / s.interval_hours)
    if abs(24.0 / s.interval_hours - expected) > 1e-9:
        v.append(Violation(None, "interval_hours",
                           f"{s.interval_hours} does not divide 24 h evenly"))
    if len(s.load_kw) != expected:
        v.append(Violation(None, "load_kw",
                           f"expected {expected} entries, got {len(s.load_kw)}"))
    if len(s.tsrp_kw) != expected:
        v.append(Violation(None, "tsrp_kw",
                           f"expected {expected} entries, got {len(s.tsrp_kw)}"))
    for i, r in enumerate(s.tsrp_kw):
        if r < 0:
            v.append(Violation(None, "tsrp_kw", f"entry {i} = {r} is negative"))
            break

    rc = s.reserve_consumption
    if not 0.0 <= rc.mean_fraction <= 1.0:
        v.append(Violation(None, "reserve_consumption.mean_fraction",
                           f"must be within [0, 1], got {rc.mean_fraction}"))
    if rc.sigma_fraction < 0:
        v.append(Violation(None, "reserve_consumption.sigma_fraction",
                           f"must be >= 0, got {rc.sigma_fraction}"))

    if not s.ders:
        v.append(Violation(None, "ders", "fleet is empty"))
    seen: set[int] = set()
    for d in s.ders:
        if d.id in seen:
            v.append(Violation(d.id, "id", "duplicate unit id"))
        seen.add(d.id)
        v.extend(_validate_der(d, expected))

    u = s.utility_storage
    if u is not None:
        if u.capacity_kwh < 0:
            v.append(Violation(None, "utility_storage.capacity_kwh",
                               f"must be >= 0, got {u.capacity_kwh}"))
        if not 0.0 <= u.soc_min_pct <= u.soc_pct <= 100.0:
            v.append(Violation(None, "utility_storage.soc_pct",
                               f"need 0 <= soc_min <= soc <= 100, got "
                               f"[{u.soc_min_pct}, {u.soc_pct}]"))
        if u.discharge_hours <= 0:
            v.append(Violation(None, "utility_storage.discharge_hours",
                               f"must be > 0, got {u.discharge_hours}"))
        if u.inverter_kw < 0:
            v.append(Violation(None, "utility_storage.inverter_kw",
                               f"must be >= 0, got {u.inverter_kw}"))
    return v


def consistency_warnings(s: Scenario) -> list[Violation]:
    """Soft checks that flag likely data-entry mistakes.

    A unit whose rated discharge limit disagrees with usable span /
    discharge_hours by more than 20% is suspicious but still runnable, so
    this never blocks a run.
    """
    w: list[Violation] = []
    for d in s.ders:
        if d.storage_capacity_kwh <= 0 or d.discharge_rate_max_kw <= 0:
            continue
        implied = (d.soc_max_pct - d.soc_min_pct) / 100.0 \
            * d.storage_capacity_kwh / d.discharge_hours
        if implied <= 0:
            continue
        ratio = d.discharge_rate_max_kw / implied
        if not 0.8 <= ratio <= 1.25:
            w.append(Violation(
                d.id, "discharge_rate_max_kw",
                f"{d.discharge_rate_max_kw} kW differs from usable span / "
                f"discharge_hours = {implied:.4g} kW by more than 20%"))
        if d.discharge_hours < s.interval_hours:
            w.append(Violation(
                d.id, "discharge_hours",
                f"{d.discharge_hours} h is shorter than one interval "
                f"({s.interval_hours} h)"))
    return w
