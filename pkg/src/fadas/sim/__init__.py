from fadas.sim.delays import (
    PROFILE_RANGES,
    DelayClass,
    DelayModel,
    RuntimeSampler,
    ScriptExhausted,
    assign_delay_classes,
    delay_model_from_config,
    load_scripted_runtimes,
    sample_runtime,
)
from fadas.sim.engine import Buffer, InFlight, NonFiniteError, run, run_async, run_sync
from fadas.sim.problem import GlobalEval, Problem, build_problem, global_eval
from fadas.sim.trace import CSV_COLUMNS, RoundRecord, RunTrace, delay_stats, read_csv

__all__ = [
    "Buffer",
    "CSV_COLUMNS",
    "DelayClass",
    "DelayModel",
    "GlobalEval",
    "InFlight",
    "NonFiniteError",
    "PROFILE_RANGES",
    "Problem",
    "RoundRecord",
    "RunTrace",
    "RuntimeSampler",
    "ScriptExhausted",
    "assign_delay_classes",
    "build_problem",
    "delay_model_from_config",
    "delay_stats",
    "global_eval",
    "load_scripted_runtimes",
    "read_csv",
    "run",
    "run_async",
    "run_sync",
    "sample_runtime",
]
