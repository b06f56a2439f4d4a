"""Per-interval dispatch of committed power and spinning reserve.

For every discharging unit the availability factor (clamped at 1) must
split exactly into a dispatch share and a reserve share:

    df_p + srf_p = min(af_p, 1)

subject to df_p * inv_p >= pv_p (committed power must absorb the PV
forecast), srf_min_p <= srf_p <= srf_max_p, and the fleet holding the
requested total reserve: sum srf_p * inv_p = tsrp.

Because the split is exact, total committed power is pinned the moment
tsrp is fixed: sum df*inv = sum min(af,1)*inv - tsrp. Every feasible
point is optimal, so the solver just needs a deterministic feasible one:
it water-fills reserve from each unit's floor in ascending unit order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .model import DerSpec, StorageMode, StorageState

# Grid memory guard for the brute-force oracle: ~2e7 float64 lattice
# points is a few hundred MB of intermediates, the practical ceiling.
_MAX_GRID_POINTS = 2e7


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class DispatchEntry:
    """One discharging unit as seen by the solver."""

    der_id: int
    inverter_kw: float
    af_raw: float
    af_clamped: float
    pv_pred_kw: float
    srf_min: float
    srf_max: float

    @property
    def srf_cap(self) -> float:
        """Largest reserve share that still leaves enough dispatch to
        absorb the PV forecast."""
        return min(self.srf_max,
                   self.af_clamped - self.pv_pred_kw / self.inverter_kw)


@dataclass(frozen=True)
class DispatchProblem:
    entries: tuple[DispatchEntry, ...]
    tsrp_kw: float


@dataclass(frozen=True)
class DerAllocation:
    der_id: int
    df: float
    srf: float
    ucp_kw: float
    srp_kw: float


@dataclass(frozen=True)
class DispatchSolution:
    status: SolveStatus
    allocations: tuple[DerAllocation, ...]
    total_ucp_kw: float
    total_srp_kw: float


def build_problem(
    fleet: Iterable[tuple[DerSpec, StorageState, float, float]],
    tsrp_kw: float,
) -> DispatchProblem:
    """Assemble the interval problem from (spec, state, af_raw, pv_pred)
    tuples. Units not in Discharging mode are dropped; an empty problem
    is legal. Entries are ordered by ascending unit id so the water-fill
    is deterministic."""
    entries = []
    for spec, state, af_raw, pv_pred_kw in fleet:
        if state.mode is not StorageMode.DISCHARGING:
            continue
        entries.append(DispatchEntry(
            der_id=spec.id,
            inverter_kw=spec.inverter_rating_kw,
            af_raw=af_raw,
            af_clamped=min(af_raw, 1.0),
            pv_pred_kw=pv_pred_kw,
            srf_min=spec.srf_min,
            srf_max=spec.srf_max,
        ))
    entries.sort(key=lambda e: e.der_id)
    return DispatchProblem(entries=tuple(entries), tsrp_kw=tsrp_kw)


def feasible_tsrp_range(problem: DispatchProblem) -> tuple[float, float]:
    """Aggregate reserve window [sum srf_min*inv, sum srf_cap*inv].

    (0, 0) for an empty problem. Note a tsrp inside this window can still
    be infeasible if some unit's own box is empty (srf_cap < srf_min);
    solve() checks that per unit.
    """
    lo = sum(e.srf_min * e.inverter_kw for e in problem.entries)
    hi = sum(e.srf_cap * e.inverter_kw for e in problem.entries)
    return lo, hi


def solve(problem: DispatchProblem) -> DispatchSolution:
    """Split each unit's clamped availability into dispatch and reserve.

    Feasible iff every unit's reserve box [srf_min, srf_cap] is non-empty
    and tsrp lies within the aggregate window. Reserve is water-filled
    above the floors in ascending unit order; the resulting total
    committed power equals sum af_clamped*inv - tsrp regardless of how
    the fill is distributed.
    """
    entries = problem.entries
    tsrp = problem.tsrp_kw
    scale = max(1.0, sum(e.inverter_kw for e in entries))
    tol = 1e-9 * scale

    caps = [e.srf_cap for e in entries]
    if any(cap < e.srf_min - 1e-12 for cap, e in zip(caps, entries)):
        return DispatchSolution(SolveStatus.INFEASIBLE, (), 0.0, 0.0)
    lo = sum(e.srf_min * e.inverter_kw for e in entries)
    hi = sum(cap * e.inverter_kw for cap, e in zip(caps, entries))
    if tsrp < lo - tol or tsrp > hi + tol:
        return DispatchSolution(SolveStatus.INFEASIBLE, (), 0.0, 0.0)

    srf = [e.srf_min for e in entries]
    residual = max(tsrp - lo, 0.0)
    for i, e in enumerate(entries):
        if residual <= 0:
            break
        room = max(caps[i] - e.srf_min, 0.0)
        take = min(room, residual / e.inverter_kw)
        srf[i] += take
        residual -= take * e.inverter_kw

    allocations = []
    total_ucp = 0.0
    total_srp = 0.0
    for e, r in zip(entries, srf):
        df = e.af_clamped - r
        ucp = df * e.inverter_kw
        srp = r * e.inverter_kw
        total_ucp += ucp
        total_srp += srp
        allocations.append(DerAllocation(e.der_id, df, r, ucp, srp))
    return DispatchSolution(SolveStatus.OPTIMAL, tuple(allocations),
                            total_ucp, total_srp)


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    """Grid from lo to hi inclusive of both endpoints."""
    n = int(np.floor((hi - lo) / step + 1e-9))
    vals = lo + step * np.arange(n + 1)
    if hi - vals[-1] > 1e-12:
        vals = np.append(vals, hi)
    return vals

def oracle_enumerate(problem: DispatchProblem,
                     grid_step: float) -> tuple[float | None,
                                                dict[int, float] | None]:
    """Brute-force reference: enumerate reserve shares on a grid and keep
    the best total committed power.

    Checks the constraints directly (df from the exact split, PV floor,
    reserve bounds, total reserve within grid_step * sum(inv) of tsrp)
    instead of reusing the solver's reductions, so it can referee
    solve(). Only meant for small instances: at most 4 units and
    grid_step >= 1e-4. Returns (None, None) when no lattice point is
    feasible.
    """
    entries = problem.entries
    if len(entries) > 4:
        raise ValueError(f"oracle handles at most 4 units, got {len(entries)}")
    if grid_step < 1e-4:
        raise ValueError(f"grid_step must be >= 1e-4, got {grid_step}")
    if not entries:
        return (0.0, {}) if abs(problem.tsrp_kw) <= 1e-9 else (None, None)

    axes = []
    for e in entries:
        if e.srf_max < e.srf_min - 1e-12:
            return None, None
        axes.append(_axis(e.srf_min, e.srf_max, grid_step))
    n_points = float(np.prod([len(a) for a in axes]))
    if n_points > _MAX_GRID_POINTS:
        raise ValueError(f"grid of {n_points:.3g} points is too large; "
                         f"shrink the reserve ranges or coarsen grid_step")

    grids = np.meshgrid(*axes, indexing="ij", sparse=True)
    inv = [e.inverter_kw for e in entries]
    af = [e.af_clamped for e in entries]
    pv = [e.pv_pred_kw for e in entries]

    total_srp = sum(g * k for g, k in zip(grids, inv))
    tol_kw = grid_step * sum(inv)
    feasible = np.abs(total_srp - problem.tsrp_kw) <= tol_kw
    for g, a, k, p in zip(grids, af, inv, pv):
        df = a - g
        feasible = feasible & (df * k >= p - 1e-9) & (df >= -1e-12)
    if not feasible.any():
        return None, None

    total_ucp = sum((a - g) * k for g, a, k in zip(grids, af, inv))
    total_ucp = np.broadcast_to(total_ucp, feasible.shape)
    masked = np.where(feasible, total_ucp, -np.inf)
    flat_best = int(np.argmax(masked))
    idx = np.unravel_index(flat_best, feasible.shape)
    best = {e.der_id: float(axes[i][idx[i]]) for i, e in enumerate(entries)}
    return float(masked[idx]), best
