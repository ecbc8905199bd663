"""Operation traces and the two operation-counting conventions."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..choi import InstrumentCJ, ProcessVector, contract_network

OCCUPATION_TOL = 1e-12


class OpKind(str, enum.Enum):
    PARTICLE = "particle-interaction"
    VACUUM = "vacuum-interaction"
    PREPARATION = "preparation"
    MEASUREMENT = "measurement"


class CountMode(str, enum.Enum):
    VACUUM_INCLUSIVE = "vacuum_inclusive"
    FLAG = "flag"


@dataclass(frozen=True)
class TraceEntry:
    """One gate firing.

    ``agent`` is set for the agent slots (Alice's and Bob's gates) only.
    ``operation`` names the logical operation the firing belongs to; slots
    of a time-delocalised operation share it.
    """

    gate: str
    slot: str
    kind: OpKind
    agent: str | None = None
    operation: str | None = None
    particle_probability: float | None = None


@dataclass(frozen=True)
class OperationTrace:
    protocol: str
    entries: tuple[TraceEntry, ...]

    def __post_init__(self):
        gates = [e.gate for e in self.entries]
        if len(set(gates)) != len(gates):
            raise ValueError("a trace holds one entry per gate")

    def entry(self, gate: str) -> TraceEntry:
        for e in self.entries:
            if e.gate == gate:
                return e
        raise KeyError(gate)

    def agent_entries(self) -> list[TraceEntry]:
        return [e for e in self.entries if e.agent is not None]


def count_operations(trace: OperationTrace, mode: CountMode | str) -> int:
    """Count agent operations in a trace.

    ``vacuum_inclusive`` counts every agent-slot firing, whether it met the
    particle or the vacuum.  ``flag`` counts the logical operations in which
    a particle entered the lab; firings sharing an ``operation`` name count
    once.  Preparations and beam splitters are never counted.
    """
    mode = CountMode(mode)
    agents = trace.agent_entries()
    if mode is CountMode.VACUUM_INCLUSIVE:
        return len(agents)
    hits = {e.operation or e.gate for e in agents if e.kind is OpKind.PARTICLE}
    return len(hits)


def occupation_probability(
    gates_before: Sequence[InstrumentCJ],
    W: ProcessVector,
    label: str,
    vacuum_index: int = 0,
) -> float:
    """Probability that the space ``label`` is not in the vacuum state.

    The listed gates are contracted into the process vector; the result is
    the (unnormalised) state on the open causal cut, from which the marginal
    on ``label`` is read off.
    """
    state = contract_network([g.vector for g in gates_before], W)
    axis = state.labels.index(label)
    probs = np.abs(np.moveaxis(state.tensor, axis, 0)) ** 2
    total = probs.sum()
    if total == 0:
        return 0.0
    return float((total - probs[vacuum_index].sum()) / total)


def kind_from_occupation(p: float) -> OpKind:
    return OpKind.PARTICLE if p > OCCUPATION_TOL else OpKind.VACUUM
