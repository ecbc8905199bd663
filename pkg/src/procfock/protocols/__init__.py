"""Protocol builders: the single-photon two-way protocol and the optical switch."""

from . import counting, dsd, switch
from .counting import CountMode, OperationTrace, OpKind, TraceEntry, count_operations
from .dsd import DsdGuess, DsdInputs, DsdOutcome, Stage, build_dsd, dsd_distribution, dsd_guesses, dsd_intermediate_state, dsd_trace
from .switch import SwitchResult, SwitchSpec, build_switch, switch_distribution, switch_trace

__all__ = [
    "counting",
    "dsd",
    "switch",
    "CountMode",
    "OperationTrace",
    "OpKind",
    "TraceEntry",
    "count_operations",
    "DsdGuess",
    "DsdInputs",
    "DsdOutcome",
    "Stage",
    "build_dsd",
    "dsd_distribution",
    "dsd_guesses",
    "dsd_intermediate_state",
    "dsd_trace",
    "SwitchResult",
    "SwitchSpec",
    "build_switch",
    "switch_distribution",
    "switch_trace",
]
