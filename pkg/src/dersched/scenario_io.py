"""Scenario file parsing and result emission.

Scenario files are YAML. Each DER either carries an explicit
``pv_predicted_kw`` series or a scalar ``pv_peak_kw`` that is expanded
through the named PV profile under ``profiles.pv``; ``profiles.load``
is likewise a profile name or an explicit series. ``tsrp`` may be a
scalar (held constant all day) or a full series.

Emitted files use 6 significant digits, '.' decimal separator, no
locale formatting, so identical runs are byte-identical.
"""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

import yaml

from .model import (ChargeSource, DerSpec, ReserveConsumption, Scenario,
                    StorageMode, UtilityStorage, validate_scenario)
from .profiles import PROFILE_NAMES, load_profile, pv_profile
from .simulator import IntervalRecord, ScenarioValidationError

BUILTIN_SCENARIOS = {
    "table1_summer": "table1_summer.yaml",
    "table1_winter": "table1_winter.yaml",
}

_DER_KEYS = {
    "id", "bus_label", "inverter_rating_kw", "pv_peak_kw", "pv_predicted_kw",
    "storage_capacity_kwh", "soc_init_pct", "soc_min_pct", "soc_max_pct",
    "discharge_hours", "discharge_rate_max_kw", "charge_rate_max_kw",
    "srf_min", "srf_max", "saf_setpoint", "initial_mode",
}
_TOP_KEYS = {"ders", "profiles", "tsrp", "reserve_consumption", "options",
             "utility_storage"}

_DER_CSV_FIELDS = ("mode", "soc", "ucp", "nd", "srp", "arb",
                   "af", "df", "srf", "saf", "ndf")


class ScenarioParseError(Exception):
    """Scenario file could not be read or understood."""


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def _require_mapping(obj: Any, where: str) -> Mapping:
    if not isinstance(obj, Mapping):
        raise ScenarioParseError(f"{where}: expected a mapping, "
                                 f"got {type(obj).__name__}")
    return obj


def _check_keys(data: Mapping, allowed: set[str], where: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ScenarioParseError(f"{where}: unknown key(s) "
                                 f"{sorted(unknown)}; allowed: {sorted(allowed)}")


def _num(data: Mapping, key: str, where: str, default: float | None = None) -> float:
    if key not in data:
        if default is None:
            raise ScenarioParseError(f"{where}: missing required key {key!r}")
        return default
    val = data[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioParseError(f"{where}: {key} must be a number, "
                                 f"got {val!r}")
    return float(val)


def _series(val: Any, where: str) -> tuple[float, ...]:
    if not isinstance(val, Sequence) or isinstance(val, (str, bytes)):
        raise ScenarioParseError(f"{where}: expected a list of numbers")
    out = []
    for i, x in enumerate(val):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ScenarioParseError(f"{where}: entry {i} must be a number, "
                                     f"got {x!r}")
        out.append(float(x))
    return tuple(out)


def _parse_der(data: Mapping, where: str, pv_name: str | None,
               n_intervals: int, interval_hours: float) -> DerSpec:
    data = _require_mapping(data, where)
    _check_keys(data, _DER_KEYS, where)
    if "id" not in data or isinstance(data["id"], bool) \
            or not isinstance(data["id"], int):
        raise ScenarioParseError(f"{where}: 'id' must be an integer")

    if "pv_predicted_kw" in data:
        pv = _series(data["pv_predicted_kw"], f"{where}.pv_predicted_kw")
    elif "pv_peak_kw" in data:
        if pv_name is None:
            raise ScenarioParseError(
                f"{where}: pv_peak_kw needs a named profile under "
                f"profiles.pv (one of {sorted(PROFILE_NAMES)})")
        pv = pv_profile(pv_name, _num(data, "pv_peak_kw", where),
                        n_intervals, interval_hours)
    else:
        raise ScenarioParseError(f"{where}: need pv_predicted_kw or pv_peak_kw")

    initial_mode = None
    if data.get("initial_mode") is not None:
        try:
            initial_mode = StorageMode(data["initial_mode"])
        except ValueError:
            raise ScenarioParseError(
                f"{where}: initial_mode must be one of "
                f"{[m.value for m in StorageMode]}, got {data['initial_mode']!r}")

    saf = data.get("saf_setpoint")
    if saf is not None:
        saf = _num(data, "saf_setpoint", where)

    return DerSpec(
        id=data["id"],
        bus_label=str(data.get("bus_label", "")),
        inverter_rating_kw=_num(data, "inverter_rating_kw", where),
        pv_predicted_kw=pv,
        storage_capacity_kwh=_num(data, "storage_capacity_kwh", where),
        soc_init_pct=_num(data, "soc_init_pct", where),
        soc_min_pct=_num(data, "soc_min_pct", where),
        soc_max_pct=_num(data, "soc_max_pct", where, default=100.0),
        discharge_hours=_num(data, "discharge_hours", where),
        discharge_rate_max_kw=_num(data, "discharge_rate_max_kw", where),
        charge_rate_max_kw=_num(data, "charge_rate_max_kw", where),
        srf_min=_num(data, "srf_min", where, default=0.0),
        srf_max=_num(data, "srf_max", where, default=1.0),
        saf_setpoint=saf,
        initial_mode=initial_mode,
    )


def scenario_from_mapping(data: Mapping, source: str = "<mapping>") -> Scenario:
    """Build a Scenario from parsed YAML data. Raises ScenarioParseError
    on structural problems; the result is not yet validated."""
    data = _require_mapping(data, source)
    _check_keys(data, _TOP_KEYS, source)

    options = _require_mapping(data.get("options", {}), f"{source}.options")
    _check_keys(options, {"interval_hours", "charge_source", "rng_seed",
                          "headroom_fraction"}, f"{source}.options")
    # headroom_fraction is a sizing-tool hint; validated, not simulated.
    headroom = _num(options, "headroom_fraction", f"{source}.options",
                    default=0.0)
    if headroom < 0:
        raise ScenarioParseError(f"{source}.options: headroom_fraction must "
                                 f"be >= 0, got {headroom}")
    interval_hours = _num(options, "interval_hours", f"{source}.options",
                          default=0.25)
    if interval_hours <= 0:
        raise ScenarioParseError(f"{source}.options: interval_hours must be "
                                 f"> 0, got {interval_hours}")
    n_intervals = round(24.0 / interval_hours)
    try:
        charge_source = ChargeSource(options.get("charge_source", "pv_only"))
    except ValueError:
        raise ScenarioParseError(
            f"{source}.options: charge_source must be one of "
            f"{[c.value for c in ChargeSource]}, "
            f"got {options.get('charge_source')!r}")

    profiles_block = _require_mapping(data.get("profiles", {}),
                                      f"{source}.profiles")
    _check_keys(profiles_block, {"pv", "load"}, f"{source}.profiles")
    pv_name = profiles_block.get("pv")
    if pv_name is not None and pv_name not in PROFILE_NAMES:
        raise ScenarioParseError(f"{source}.profiles: pv must be one of "
                                 f"{sorted(PROFILE_NAMES)}, got {pv_name!r}")

    load_val = profiles_block.get("load")
    if load_val is None:
        raise ScenarioParseError(f"{source}.profiles: missing 'load' "
                                 f"(profile name or series)")
    if isinstance(load_val, str):
        if load_val not in PROFILE_NAMES:
            raise ScenarioParseError(f"{source}.profiles: load must be one of "
                                     f"{sorted(PROFILE_NAMES)}, got {load_val!r}")
        load = load_profile(load_val, n_intervals, interval_hours)
    else:
        load = _series(load_val, f"{source}.profiles.load")

    if "tsrp" not in data:
        raise ScenarioParseError(f"{source}: missing required key 'tsrp'")
    tsrp_val = data["tsrp"]
    if isinstance(tsrp_val, (int, float)) and not isinstance(tsrp_val, bool):
        tsrp = tuple([float(tsrp_val)] * n_intervals)
    else:
        tsrp = _series(tsrp_val, f"{source}.tsrp")

    ders_val = data.get("ders")
    if not isinstance(ders_val, Sequence) or isinstance(ders_val, (str, bytes)):
        raise ScenarioParseError(f"{source}: 'ders' must be a list of units")
    ders = tuple(
        _parse_der(d, f"{source}.ders[{i}]", pv_name, n_intervals,
                   interval_hours)
        for i, d in enumerate(ders_val))

    rc_block = _require_mapping(data.get("reserve_consumption", {}),
                                f"{source}.reserve_consumption")
    _check_keys(rc_block, {"mean_fraction", "sigma_fraction", "rng_seed"},
                f"{source}.reserve_consumption")
    seed = options.get("rng_seed", rc_block.get("rng_seed", 0))
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioParseError(f"{source}: rng_seed must be an integer, "
                                 f"got {seed!r}")
    rc = ReserveConsumption(
        mean_fraction=_num(rc_block, "mean_fraction",
                           f"{source}.reserve_consumption", default=0.5),
        sigma_fraction=_num(rc_block, "sigma_fraction",
                            f"{source}.reserve_consumption", default=0.1),
        rng_seed=seed,
    )

    utility = None
    if data.get("utility_storage") is not None:
        u = _require_mapping(data["utility_storage"],
                             f"{source}.utility_storage")
        _check_keys(u, {"capacity_kwh", "soc_pct", "soc_min_pct",
                        "discharge_hours", "inverter_kw"},
                    f"{source}.utility_storage")
        w = f"{source}.utility_storage"
        utility = UtilityStorage(
            capacity_kwh=_num(u, "capacity_kwh", w),
            soc_pct=_num(u, "soc_pct", w),
            soc_min_pct=_num(u, "soc_min_pct", w),
            discharge_hours=_num(u, "discharge_hours", w),
            inverter_kw=_num(u, "inverter_kw", w),
        )

    return Scenario(ders=ders, load_kw=load, tsrp_kw=tsrp,
                    interval_hours=interval_hours, reserve_consumption=rc,
                    charge_source=charge_source, utility_storage=utility)


def parse_scenario_text(text: str, source: str = "<string>") -> Scenario:
    """Parse and validate scenario YAML from a string."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ScenarioParseError(f"{source}: not valid YAML: {e}") from e
    scenario = scenario_from_mapping(data, source)
    violations = validate_scenario(scenario)
    if violations:
        raise ScenarioValidationError(violations)
    return scenario


def resolve_scenario_source(name_or_path: str | Path) -> tuple[str, str]:
    """Return (text, label) for a bundled scenario name or a file path."""
    name = str(name_or_path)
    if name in BUILTIN_SCENARIOS:
        res = resources.files("dersched.data") / BUILTIN_SCENARIOS[name]
        return res.read_text(encoding="utf-8"), name
    path = Path(name_or_path)
    if not path.exists():
        raise ScenarioParseError(
            f"{name}: no such file, and not a bundled scenario "
            f"(bundled: {sorted(BUILTIN_SCENARIOS)})")
    try:
        return path.read_text(encoding="utf-8"), str(path)
    except OSError as e:
        raise ScenarioParseError(f"{name}: cannot read: {e}") from e


def parse_scenario(name_or_path: str | Path) -> Scenario:
    """Load a scenario from a YAML file or a bundled scenario name.

    Raises ScenarioParseError for I/O and structure problems and
    ScenarioValidationError (with the full violation list) for invariant
    failures; a returned Scenario is fully validated.
    """
    text, label = resolve_scenario_source(name_or_path)
    return parse_scenario_text(text, label)


def dump_scenario(s: Scenario) -> str:
    """Canonical YAML for a scenario; parse_scenario_text round-trips it
    to an equal Scenario (series written out explicitly)."""
    ders = []
    for d in s.ders:
        entry: dict[str, Any] = {
            "id": d.id,
            "bus_label": d.bus_label,
            "inverter_rating_kw": d.inverter_rating_kw,
            "pv_predicted_kw": list(d.pv_predicted_kw),
            "storage_capacity_kwh": d.storage_capacity_kwh,
            "soc_init_pct": d.soc_init_pct,
            "soc_min_pct": d.soc_min_pct,
            "soc_max_pct": d.soc_max_pct,
            "discharge_hours": d.discharge_hours,
            "discharge_rate_max_kw": d.discharge_rate_max_kw,
            "charge_rate_max_kw": d.charge_rate_max_kw,
            "srf_min": d.srf_min,
            "srf_max": d.srf_max,
        }
        if d.saf_setpoint is not None:
            entry["saf_setpoint"] = d.saf_setpoint
        if d.initial_mode is not None:
            entry["initial_mode"] = d.initial_mode.value
        ders.append(entry)
    data: dict[str, Any] = {
        "ders": ders,
        "profiles": {"load": list(s.load_kw)},
        "tsrp": list(s.tsrp_kw),
        "reserve_consumption": {
            "mean_fraction": s.reserve_consumption.mean_fraction,
            "sigma_fraction": s.reserve_consumption.sigma_fraction,
            "rng_seed": s.reserve_consumption.rng_seed,
        },
        "options": {
            "interval_hours": s.interval_hours,
            "charge_source": s.charge_source.value,
        },
    }
    if s.utility_storage is not None:
        u = s.utility_storage
        data["utility_storage"] = {
            "capacity_kwh": u.capacity_kwh,
            "soc_pct": u.soc_pct,
            "soc_min_pct": u.soc_min_pct,
            "discharge_hours": u.discharge_hours,
            "inverter_kw": u.inverter_kw,
        }
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)


def emit_results(records: Sequence[IntervalRecord],
                 out_dir: str | Path) -> list[Path]:
    """Write intervals.csv, summary.csv and plotdata/ under out_dir.

    intervals.csv: one row per interval; nine fleet columns, then eleven
    columns per unit (d<id>_mode .. d<id>_ndf). plotdata/ carries one
    (time_h, value) file per plottable series. Returns the written paths.
    """
    if not records:
        raise ValueError("no records to emit")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plot_dir = out / "plotdata"
    plot_dir.mkdir(exist_ok=True)
    der_ids = [row.der_id for row in records[0].ders]
    dt = records[1].time_hours - records[0].time_hours if len(records) > 1 \
        else 24.0

    written: list[Path] = []

    intervals_path = out / "intervals.csv"
    header = ["index", "time_h", "load_kw", "feeder_kw", "total_ucp_kw",
              "total_nd_kw", "total_srp_kw", "total_arb_kw",
              "reserve_consumed_kw"]
    for i in der_ids:
        header.extend(f"d{i}_{f}" for f in _DER_CSV_FIELDS)
    with intervals_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in records:
            row = [str(r.index), _fmt(r.time_hours), _fmt(r.load_kw),
                   _fmt(r.feeder_kw), _fmt(r.total_ucp_kw),
                   _fmt(r.total_nd_kw), _fmt(r.total_srp_kw),
                   _fmt(r.total_arb_kw), _fmt(r.reserve_consumed_kw)]
            for u in r.ders:
                row.extend([u.mode.value, _fmt(u.soc_pct), _fmt(u.ucp_kw),
                            _fmt(u.nd_kw), _fmt(u.srp_kw), _fmt(u.arb_kw),
                            _fmt(u.af), _fmt(u.df), _fmt(u.srf),
                            _fmt(u.saf), _fmt(u.ndf)])
            w.writerow(row)
    written.append(intervals_path)

    summary_path = out / "summary.csv"
    energies = {
        "load_kwh": sum(r.load_kw for r in records) * dt,
        "feeder_kwh": sum(r.feeder_kw for r in records) * dt,
        "total_ucp_kwh": sum(r.total_ucp_kw for r in records) * dt,
        "total_nd_kwh": sum(r.total_nd_kw for r in records) * dt,
        "total_srp_kwh": sum(r.total_srp_kw for r in records) * dt,
        "total_arb_kwh": sum(r.total_arb_kw for r in records) * dt,
        "reserve_consumed_kwh": sum(r.reserve_consumed_kw
                                    for r in records) * dt,
    }
    with summary_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["category", "energy_kwh"])
        for k, v in energies.items():
            w.writerow([k, _fmt(v)])
    written.append(summary_path)

    def plot_series(name: str, values: Sequence[float]) -> None:
        p = plot_dir / f"{name}.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_h", "value"])
            for r, v in zip(records, values):
                w.writerow([_fmt(r.time_hours), _fmt(v)])
        written.append(p)

    plot_series("load_kw", [r.load_kw for r in records])
    plot_series("feeder_kw", [r.feeder_kw for r in records])
    plot_series("total_ucp_kw", [r.total_ucp_kw for r in records])
    plot_series("total_nd_kw", [r.total_nd_kw for r in records])
    plot_series("total_srp_kw", [r.total_srp_kw for r in records])
    plot_series("total_arb_kw", [r.total_arb_kw for r in records])
    plot_series("reserve_consumed_kw",
                [r.reserve_consumed_kw for r in records])
    plot_series("der_net_kw",
                [r.total_ucp_kw + r.total_nd_kw + r.reserve_consumed_kw
                 - r.total_arb_kw for r in records])

    focus = min(der_ids)
    pos = der_ids.index(focus)
    focus_rows = [r.ders[pos] for r in records]
    plot_series(f"der{focus}_ucp_kw", [u.ucp_kw for u in focus_rows])
    plot_series(f"der{focus}_nd_kw", [u.nd_kw for u in focus_rows])
    plot_series(f"der{focus}_srp_kw", [u.srp_kw for u in focus_rows])
    plot_series(f"der{focus}_arb_kw", [u.arb_kw for u in focus_rows])
    plot_series(f"der{focus}_soc_pct", [u.soc_pct for u in focus_rows])
    for field in ("af", "df", "srf", "saf", "ndf"):
        plot_series(f"der{focus}_{field}",
                    [getattr(u, field) for u in focus_rows])
    return written
