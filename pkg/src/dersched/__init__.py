"""Day-ahead scheduling engine for fleets of solar-plus-storage DERs.

Computes per-unit operational factors (availability, dispatch, reserve,
arbitrage, non-dispatchable), splits a fleet-wide spinning-reserve
target across discharging units each interval, and simulates a full day
in fixed steps with a two-stage battery charge model and stochastic
reserve consumption.
"""

from .dispatch import (DerAllocation, DispatchEntry, DispatchProblem,
                       DispatchSolution, SolveStatus, build_problem,
                       feasible_tsrp_range, oracle_enumerate, solve)
from .factors import (ModeExclusivityError, SizingInputs,
                      availability_factor_btm, availability_factor_utility,
                      factors_from_powers, size_inverter, size_storage_ah)
from .model import (ChargeSource, DerSpec, OperationalFactors,
                    ReserveConsumption, Scenario, StorageMode, StorageState,
                    UtilityStorage, Violation, consistency_warnings,
                    validate_scenario)
from .scenario_io import (BUILTIN_SCENARIOS, ScenarioParseError,
                          dump_scenario, emit_results, parse_scenario,
                          parse_scenario_text)
from .simulator import (DerInterval, IntervalRecord, ScenarioValidationError,
                        draw_reserve_consumption, feeder_power, run_day_ahead,
                        split_charging_power)
from .storage import (ChargeCurve, RateLimitError, charge_rate, curve_for,
                      decide_mode, discharge_limit_kw, step_soc)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_SCENARIOS", "ChargeCurve", "ChargeSource", "DerAllocation",
    "DerInterval", "DerSpec", "DispatchEntry", "DispatchProblem",
    "DispatchSolution", "IntervalRecord", "ModeExclusivityError",
    "OperationalFactors", "RateLimitError", "ReserveConsumption", "Scenario",
    "ScenarioParseError", "ScenarioValidationError", "SizingInputs",
    "SolveStatus", "StorageMode", "StorageState", "UtilityStorage",
    "Violation", "availability_factor_btm", "availability_factor_utility",
    "build_problem", "charge_rate", "consistency_warnings", "curve_for",
    "decide_mode", "discharge_limit_kw", "draw_reserve_consumption",
    "dump_scenario", "emit_results", "factors_from_powers",
    "feasible_tsrp_range", "feeder_power", "oracle_enumerate",
    "parse_scenario", "parse_scenario_text", "run_day_ahead",
    "size_inverter", "size_storage_ah", "solve", "split_charging_power",
    "step_soc", "validate_scenario",
]
