"""Synthetic daily PV and load shapes for the bundled scenarios.

PV is a sine-squared bell between sunrise and sunset, sampled at
interval start times, peaking at solar noon. Load is a flat base plus
Gaussian bumps: a single evening peak in summer, morning and evening
peaks in winter. Values are representative feeder-level magnitudes, not
a reproduction of any measured day.
"""

from __future__ import annotations

import math

PV_WINDOWS = {
    "summer": (5.5, 20.0),
    "winter": (7.0, 17.0),
}

PROFILE_NAMES = ("summer", "winter")


def _times(n_intervals: int, interval_hours: float) -> list[float]:
    return [i * interval_hours for i in range(n_intervals)]


def pv_profile(name: str, peak_kw: float, n_intervals: int = 96,
               interval_hours: float = 0.25) -> tuple[float, ...]:
    """Clear-day PV bell with the given peak, zero outside daylight."""
    if name not in PV_WINDOWS:
        raise ValueError(f"unknown profile {name!r}; expected one of "
                         f"{sorted(PV_WINDOWS)}")
    if peak_kw < 0:
        raise ValueError(f"peak_kw must be >= 0, got {peak_kw}")
    rise, set_ = PV_WINDOWS[name]
    out = []
    for t in _times(n_intervals, interval_hours):
        if rise < t < set_:
            out.append(peak_kw * math.sin(math.pi * (t - rise) / (set_ - rise)) ** 2)
        else:
            out.append(0.0)
    return tuple(out)


def load_profile(name: str, n_intervals: int = 96,
                 interval_hours: float = 0.25) -> tuple[float, ...]:
    """Feeder load in kW: evening-peaked (summer) or double-peaked
    morning/evening (winter)."""
    if name not in PROFILE_NAMES:
        raise ValueError(f"unknown profile {name!r}; expected one of "
                         f"{sorted(PROFILE_NAMES)}")

    def bump(t: float, center: float, width: float, height: float) -> float:
        return height * math.exp(-((t - center) / width) ** 2)

    out = []
    for t in _times(n_intervals, interval_hours):
        if name == "summer":
            val = 1150.0 + bump(t, 18.75, 2.0, 750.0)
        else:
            val = 1100.0 + bump(t, 8.5, 1.2, 550.0) + bump(t, 17.75, 1.5, 700.0)
        out.append(val)
    return tuple(out)
