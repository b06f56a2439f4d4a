"""Operational factors and component sizing.

A unit's availability factor (AF) measures how much of its inverter
rating it could push for the rating envelope: usable battery energy
spread over the discharge envelope, plus predicted PV. AF is deliberately
not clamped here so oversized storage (AF > 1) stays observable; the
dispatch layer clamps when splitting AF into dispatch (DF) and reserve
(SRF) shares.

Factor definitions, all as fractions of inverter rating:

- DF  = unit-committed power / rating        (discharging)
- SRF = spinning reserve power / rating      (discharging)
- SAF = storage charging power / rating      (charging)
- NDF = non-dispatchable PV power / rating   (charging or idle)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .model import OperationalFactors


class ModeExclusivityError(ValueError):
    """Raised when measured powers mix discharge-side and charge-side
    activity in the same interval."""


def _battery_term_kw(soc_pct: float, soc_min_pct: float, esc_kwh: float,
                     discharge_hours: float) -> float:
    if esc_kwh < 0:
        raise ValueError(f"storage capacity must be >= 0, got {esc_kwh}")
    if discharge_hours <= 0:
        raise ValueError(f"discharge_hours must be > 0, got {discharge_hours}")
    if soc_pct < soc_min_pct:
        raise ValueError(f"soc {soc_pct}% is below the floor {soc_min_pct}%")
    return (soc_pct - soc_min_pct) / 100.0 * esc_kwh / discharge_hours


def availability_factor_btm(soc_pct: float, soc_min_pct: float, esc_kwh: float,
                            discharge_hours: float, pv_pred_kw: float,
                            inverter_kw: float) -> float:
    """Availability factor of a single behind-the-meter unit.

    (usable battery power over the discharge envelope + predicted PV),
    normalised by the unit's own inverter rating. Unclamped.
    """
    if inverter_kw <= 0:
        raise ValueError(f"inverter rating must be > 0, got {inverter_kw}")
    if pv_pred_kw < 0:
        raise ValueError(f"predicted PV must be >= 0, got {pv_pred_kw}")
    battery_kw = _battery_term_kw(soc_pct, soc_min_pct, esc_kwh, discharge_hours)
    return (battery_kw + pv_pred_kw) / inverter_kw


def availability_factor_utility(soc_pct: float, soc_min_pct: float,
                                esc_kwh: float, discharge_hours: float,
                                pv_pred_kw: Sequence[float],
                                inverter_kw: Sequence[float],
                                utility_inverter_kw: float) -> float:
    """Availability factor of a utility-scale storage block serving a
    PV fleet.

    The battery term is the utility unit's own usable power; PV and
    inverter ratings aggregate over the attached fleet, and the utility
    inverter adds to the denominator. With a single PV unit and no
    utility inverter this reduces to the behind-the-meter form.
    """
    if not pv_pred_kw or not inverter_kw:
        raise ValueError("fleet PV and inverter lists must be non-empty")
    if utility_inverter_kw < 0:
        raise ValueError(f"utility inverter rating must be >= 0, "
                         f"got {utility_inverter_kw}")
    denom = sum(inverter_kw) + utility_inverter_kw
    if denom <= 0:
        raise ValueError("total inverter rating must be > 0")
    if any(p < 0 for p in pv_pred_kw):
        raise ValueError("predicted PV entries must be >= 0")
    battery_kw = _battery_term_kw(soc_pct, soc_min_pct, esc_kwh, discharge_hours)
    return (battery_kw + sum(pv_pred_kw)) / denom


def factors_from_powers(ucp_kw: float, srp_kw: float, arb_kw: float,
                        nd_kw: float, inverter_kw: float) -> OperationalFactors:
    """Recover the factor snapshot from measured interval powers.

    A unit cannot discharge and charge in the same interval, so positive
    (ucp + srp) together with positive (arb + nd while arb > 0) is a
    caller bug. Availability is not observable from powers and is left
    unset.
    """
    if inverter_kw <= 0:
        raise ValueError(f"inverter rating must be > 0, got {inverter_kw}")
    for name, p in (("ucp_kw", ucp_kw), ("srp_kw", srp_kw),
                    ("arb_kw", arb_kw), ("nd_kw", nd_kw)):
        if p < 0:
            raise ValueError(f"{name} must be >= 0, got {p}")
    if (ucp_kw + srp_kw) > 0 and arb_kw > 0:
        raise ModeExclusivityError(
            f"discharge powers (ucp={ucp_kw}, srp={srp_kw}) and charge power "
            f"(arb={arb_kw}) are both positive")
    return OperationalFactors(
        df=ucp_kw / inverter_kw,
        srf=srp_kw / inverter_kw,
        saf=arb_kw / inverter_kw,
        ndf=nd_kw / inverter_kw,
    )


def size_inverter(pv_max_pred_kw: float, dr_max_kw: float,
                  headroom_fraction: float = 0.0) -> float:
    """Minimum inverter rating: peak predicted PV plus the maximum
    storage discharge rate, with optional fractional headroom."""
    if pv_max_pred_kw < 0 or dr_max_kw < 0:
        raise ValueError("pv_max_pred_kw and dr_max_kw must be >= 0")
    if headroom_fraction < 0:
        raise ValueError(f"headroom_fraction must be >= 0, "
                         f"got {headroom_fraction}")
    return (pv_max_pred_kw + dr_max_kw) * (1.0 + headroom_fraction)


@dataclass(frozen=True)
class SizingInputs:
    """Inputs for battery bank capacity sizing.

    ``pv_size_w`` is the array size in watts and ``ssv_volts`` the
    storage-system voltage; the result comes out in amp-hours. The k/eta
    terms derate for temperature, inverter/charge-controller/wiring
    losses, depth of discharge and design margin.
    """

    k_p: float
    pv_size_w: float
    dr_max_hours: float
    ssv_volts: float
    k_t: float
    eta_s: float
    eta_cc: float
    eta_w: float
    dod: float
    d_t: float


def size_storage_ah(inputs: SizingInputs) -> float:
    """Battery bank size in amp-hours for a PV array of the given wattage."""
    i = inputs
    numer = i.k_p * i.pv_size_w * i.dr_max_hours
    denom = i.ssv_volts * i.k_t * i.eta_s * i.eta_cc * i.eta_w * i.dod * i.d_t
    if denom <= 0:
        raise ValueError(f"sizing denominator must be > 0, got {denom}")
    if numer < 0:
        raise ValueError(f"sizing numerator must be >= 0, got {numer}")
    return numer / denom
