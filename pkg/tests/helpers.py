"""Shared test fixtures: the reference fleet table and a random
dispatch-instance generator sized so the brute-force oracle stays cheap."""

from __future__ import annotations

import numpy as np

from dersched import DispatchEntry, DispatchProblem

# Reference ten-unit fleet: id -> (inverter_kw, df, srf, saf, soc_init,
# soc_min, esc_kwh, pv_peak_kw). The factor columns are the fleet's
# reference initial operating point used by the consistency tests.
REFERENCE_FLEET = {
    1: (60.0, 0.8, 0.10, 0.4, 65.0, 30.0, 16.0, 45.0),
    2: (75.0, 0.78, 0.0, 0.29, 85.0, 20.0, 20.0, 60.0),
    3: (90.0, 0.88, 0.11, 0.49, 50.0, 20.0, 24.0, 81.0),
    4: (82.5, 0.9, 0.10, 0.52, 90.0, 20.0, 22.0, 75.0),
    5: (45.0, 0.79, 0.0, 0.52, 95.0, 30.0, 12.0, 37.5),
    6: (97.5, 0.75, 0.10, 0.31, 40.0, 35.0, 26.0, 82.5),
    7: (75.0, 0.78, 0.0, 0.36, 80.0, 35.0, 20.0, 66.0),
    8: (52.5, 0.85, 0.12, 0.37, 72.0, 35.0, 14.0, 42.0),
    9: (67.5, 0.68, 0.0, 0.59, 30.0, 30.0, 18.0, 55.5),
    10: (105.0, 0.86, 0.14, 0.51, 90.0, 25.0, 23.0, 90.0),
}

# Per-unit srf-range widths by fleet size, chosen so a 1e-3 grid over the
# cartesian product stays under ~2e6 lattice points.
_WIDTH_BY_N = {1: 0.35, 2: 0.18, 3: 0.07, 4: 0.035}


def random_problem(rng: np.random.Generator) -> DispatchProblem:
    """Random dispatch instance with 1-4 units.

    Construction keeps every per-unit reserve box non-empty (cap at least
    srf_min + 0.05) and places tsrp either comfortably inside the
    aggregate window or beyond it by more than 2.5 grid tolerances, so a
    1e-3-grid oracle and the exact solver must agree on feasibility.
    Availability is kept >= srf_min + 0.3 so the grid tolerance stays
    under 0.5% of the committed-power scale.
    """
    n = int(rng.integers(1, 5))
    width_cap = _WIDTH_BY_N[n]
    entries = []
    for i in range(n):
        inv = float(rng.uniform(20.0, 120.0))
        srf_min = float(rng.uniform(0.0, 0.08))
        srf_max = srf_min + width_cap * float(rng.uniform(0.25, 1.0))
        af_raw = float(rng.uniform(srf_min + 0.3, 1.35))
        af_clamped = min(af_raw, 1.0)
        pv_frac_cap = max(af_clamped - srf_min - 0.05, 0.0)
        pv = inv * pv_frac_cap * float(rng.uniform(0.0, 1.0))
        entries.append(DispatchEntry(
            der_id=i + 1, inverter_kw=inv, af_raw=af_raw,
            af_clamped=af_clamped, pv_pred_kw=pv,
            srf_min=srf_min, srf_max=srf_max))

    lo = sum(e.srf_min * e.inverter_kw for e in entries)
    hi = sum(e.srf_cap * e.inverter_kw for e in entries)
    margin = 2.5 * 1e-3 * sum(e.inverter_kw for e in entries)
    u = float(rng.uniform())
    if u < 0.7 and hi - lo > 2.0 * margin:
        tsrp = float(rng.uniform(lo + margin, hi - margin))
    elif u < 0.85 or lo - margin <= margin:
        tsrp = hi + margin + float(rng.uniform(0.0, 5.0))
    else:
        tsrp = float(rng.uniform(margin, lo - margin))
    return DispatchProblem(entries=tuple(entries), tsrp_kw=tsrp)
