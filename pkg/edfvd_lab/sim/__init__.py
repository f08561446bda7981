"""
离散事件仿真子包：场景、仿真器、轨迹与轨迹检查器。
"""

from edfvd_lab.sim.checker import TraceViolation, ViolationKind, check_trace
from edfvd_lab.sim.scenario import Scenario, ScenarioKind
from edfvd_lab.sim.simulator import EdfVdSimulator, HorizonPolicy, default_horizon, simulate
from edfvd_lab.sim.trace import EventKind, Trace, TraceEvent, dump_trace, load_trace

__all__ = [
    "EdfVdSimulator",
    "EventKind",
    "HorizonPolicy",
    "Scenario",
    "ScenarioKind",
    "Trace",
    "TraceEvent",
    "TraceViolation",
    "ViolationKind",
    "check_trace",
    "default_horizon",
    "dump_trace",
    "load_trace",
    "simulate",
]
