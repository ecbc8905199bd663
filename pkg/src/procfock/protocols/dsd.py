"""
Single-photon two-way communication protocol.

A photon and the vacuum enter a beam splitter ``S``; Alice (``A``) and Bob
(``B``) imprint phases ``(-1)^a`` and ``(-1)^b``; a second beam splitter
``S'`` recombines the arms, and the final gates ``A'`` and ``B'`` record
whether they see the photon.  Every arm space is vacuum ⊕ one photon.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..choi import InstrumentCJ, ProcessVector, Wire, probability_from_vectors, process_vector_from_wiring
from ..fock import (
    FockSpec,
    Statistics,
    creation_matrix,
    embed_in_modes,
    fock_basis,
    fock_transport_vector,
    lift_single_particle_unitary,
    occupation_state,
    vacuum,
)
from ..tensor import LabeledOperator, LabeledSpace, LabeledVector, partial_inner
from .counting import OperationTrace, OpKind, TraceEntry, kind_from_occupation, occupation_probability

ARM_DIM = 2
VACUUM, PHOTON = 0, 1


def _space(label, dim=ARM_DIM):
    return LabeledSpace(label, dim)


SPACES: dict[str, LabeledSpace] = {
    s.label: s
    for s in [
        _space("L_I", 1), _space("L_O"),
        _space("V_I", 1), _space("V_O"),
        _space("S_I^L"), _space("S_I^V"), _space("S_O^A"), _space("S_O^B"),
        _space("A_I"), _space("A_O"),
        _space("B_I"), _space("B_O"),
        _space("S'_I^A"), _space("S'_I^B"), _space("S'_O^A"), _space("S'_O^B"),
        _space("A'_I"), _space("A'_O", 1),
        _space("B'_I"), _space("B'_O", 1),
    ]
}

GATE_SPACES: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "L": (("L_I",), ("L_O",)),
    "V": (("V_I",), ("V_O",)),
    "S": (("S_I^L", "S_I^V"), ("S_O^A", "S_O^B")),
    "A": (("A_I",), ("A_O",)),
    "B": (("B_I",), ("B_O",)),
    "S'": (("S'_I^A", "S'_I^B"), ("S'_O^A", "S'_O^B")),
    "A'": (("A'_I",), ("A'_O",)),
    "B'": (("B'_I",), ("B'_O",)),
}

WIRES: tuple[tuple[str, str], ...] = (
    ("L_O", "S_I^L"),
    ("V_O", "S_I^V"),
    ("S_O^A", "A_I"),
    ("S_O^B", "B_I"),
    ("A_O", "S'_I^A"),
    ("B_O", "S'_I^B"),
    ("S'_O^A", "A'_I"),
    ("S'_O^B", "B'_I"),
)

GATE_ORDER = ("L", "V", "S", "A", "B", "S'", "A'", "B'")
SLOTS = {"L": "t_i", "V": "t_i", "S": "t_1", "A": "t_2", "B": "t_2", "S'": "t_3", "A'": "t_f", "B'": "t_f"}
TIME_RANK = {"t_i": 0, "t_1": 1, "t_2": 2, "t_3": 3, "t_f": 4}
AGENTS = {"A": "Alice", "A'": "Alice", "B": "Bob", "B'": "Bob"}


def _check_bit(name, value):
    if value not in (0, 1):
        raise ValueError(f"{name} must be 0 or 1, got {value!r}")


@dataclass(frozen=True)
class DsdInputs:
    a: int
    b: int

    def __post_init__(self):
        _check_bit("a", self.a)
        _check_bit("b", self.b)

    @property
    def parity(self) -> int:
        return self.a ^ self.b


@dataclass(frozen=True)
class DsdOutcome:
    a_prime: int
    b_prime: int
    probability: float


@dataclass(frozen=True)
class DsdGuess:
    x: int
    y: int
    parity: int
    success: bool


class Stage(str, enum.Enum):
    AFTER_PREP = "after_prep"
    AFTER_S = "after_S"
    AFTER_A = "after_A"
    AFTER_B = "after_B"
    AFTER_SPRIME = "after_Sprime"


_STAGE_GATES = {
    Stage.AFTER_PREP: ("L", "V"),
    Stage.AFTER_S: ("L", "V", "S"),
    Stage.AFTER_A: ("L", "V", "S", "A"),
    Stage.AFTER_B: ("L", "V", "S", "A", "B"),
    Stage.AFTER_SPRIME: ("L", "V", "S", "A", "B", "S'"),
}


def beam_splitter_matrix(flip_sign: bool = False) -> np.ndarray:
    """Hadamard beam splitter on two vacuum/photon arms.

    Basis index is ``2 * first + second``.  A photon on the first input goes
    to ``(|10> + |01>)/√2``, one on the second input to ``(|10> - |01>)/√2``.
    ``|00>`` and ``|11>`` are left alone so the matrix is unitary.
    ``flip_sign`` replaces the minus sign by a plus (fault injection only).
    """
    r = 1 / math.sqrt(2)
    h = np.zeros((4, 4), dtype=complex)
    h[0, 0] = h[3, 3] = 1.0
    h[2, 2] = h[1, 2] = r
    h[2, 1] = r
    h[1, 1] = r if flip_sign else -r
    return h


def phase_matrix(bit: int) -> np.ndarray:
    """``(-1)^bit |1><1| + |0><0|``."""
    return np.diag([1.0, (-1.0) ** bit]).astype(complex)


def _op(gate: str, matrix) -> LabeledOperator:
    ins, outs = GATE_SPACES[gate]
    return LabeledOperator([SPACES[l] for l in ins], [SPACES[l] for l in outs], matrix)


def dsd_wires() -> list[Wire]:
    return [Wire(SPACES[f], SPACES[t]) for f, t in WIRES]


def dsd_process_vector() -> ProcessVector:
    """Tensor product of the eight transport vectors of the circuit."""
    return process_vector_from_wiring(dsd_wires())


def dsd_gates(
    *,
    alice_op: np.ndarray,
    bob_op: np.ndarray,
    splitter: np.ndarray,
    splitter_prime: np.ndarray,
    alice_effect: np.ndarray,
    bob_effect: np.ndarray,
    laser_state: np.ndarray | None = None,
    vacuum_state: np.ndarray | None = None,
    settings: dict | None = None,
) -> list[InstrumentCJ]:
    """Gates of the dSD circuit from explicit matrices.

    ``alice_effect``/``bob_effect`` are the bras measured at ``A'``/``B'``
    (length-2 rows).  Preparations default to one photon and the vacuum.
    """
    settings = settings or {}
    laser = np.array([0, 1] if laser_state is None else laser_state, dtype=complex).reshape(2, 1)
    vac = np.array([1, 0] if vacuum_state is None else vacuum_state, dtype=complex).reshape(2, 1)
    mats = {
        "L": laser,
        "V": vac,
        "S": splitter,
        "A": alice_op,
        "B": bob_op,
        "S'": splitter_prime,
        "A'": np.asarray(alice_effect, dtype=complex).reshape(1, 2),
        "B'": np.asarray(bob_effect, dtype=complex).reshape(1, 2),
    }
    own = {"A": "a", "B": "b", "A'": "a'", "B'": "b'"}
    gates = []
    for g in GATE_ORDER:
        key = own.get(g)
        extra = {key: settings[key]} if key in settings else {}
        gates.append(InstrumentCJ.pure(g, _op(g, mats[g]), **extra))
    return gates


def build_dsd(
    inputs: DsdInputs,
    outcomes: tuple[int, int],
    *,
    splitter: np.ndarray | None = None,
) -> tuple[list[InstrumentCJ], ProcessVector]:
    """Gates L, V, S, A, B, S', A', B' for given bits and outcomes, and the process vector."""
    a_prime, b_prime = outcomes
    _check_bit("a'", a_prime)
    _check_bit("b'", b_prime)
    h = beam_splitter_matrix() if splitter is None else splitter
    gates = dsd_gates(
        alice_op=phase_matrix(inputs.a),
        bob_op=phase_matrix(inputs.b),
        splitter=h,
        splitter_prime=h,
        alice_effect=np.eye(2)[a_prime],
        bob_effect=np.eye(2)[b_prime],
        settings={"a": inputs.a, "b": inputs.b, "a'": a_prime, "b'": b_prime},
    )
    return gates, dsd_process_vector()


OUTCOMES = ((0, 0), (0, 1), (1, 0), (1, 1))


def dsd_distribution(inputs: DsdInputs, *, splitter: np.ndarray | None = None) -> list[DsdOutcome]:
    """p(a', b' | a, b) for all four outcome pairs, one full contraction each."""
    table = []
    for ap, bp in OUTCOMES:
        gates, W = build_dsd(inputs, (ap, bp), splitter=splitter)
        table.append(DsdOutcome(ap, bp, probability_from_vectors(gates, W)))
    return table


def dsd_guesses(inputs: DsdInputs, *, splitter: np.ndarray | None = None, tol: float = 1e-9) -> DsdGuess:
    """Each party's guess of the other's bit, read off the certain outcome.

    Alice sees the photon exactly when the parity is even, so both compute
    ``parity = 1 - a'`` (equivalently ``b'``) and guess ``parity ⊕ own bit``.
    """
    table = dsd_distribution(inputs, splitter=splitter)
    certain = [o for o in table if abs(o.probability - 1.0) <= tol]
    if len(certain) != 1 or certain[0].a_prime ^ certain[0].b_prime != 1:
        return DsdGuess(x=-1, y=-1, parity=-1, success=False)
    parity = 1 - certain[0].a_prime
    x, y = parity ^ inputs.a, parity ^ inputs.b
    return DsdGuess(x=x, y=y, parity=parity, success=(x == inputs.b and y == inputs.a))


def dsd_intermediate_state(inputs: DsdInputs, stage: Stage | str) -> LabeledVector:
    """Partial contraction of the full process vector with the gates up to ``stage``.

    Uses the materialised 2^16-amplitude process vector so the result keeps
    the untouched transport vectors, as in the step-by-step calculation.
    """
    stage = Stage(stage)
    gates, W = build_dsd(inputs, (0, 0))
    by_name = {g.gate: g for g in gates}
    state = W.vector
    for name in _STAGE_GATES[stage]:
        state = partial_inner(by_name[name].vector.squeeze(), state)
    return state


def dsd_trace(inputs: DsdInputs) -> OperationTrace:
    """Operation trace of one run, with photon occupation read from the engine."""
    gates, W = build_dsd(inputs, (0, 0))
    by_name = {g.gate: g for g in gates}
    entries = []
    for name in GATE_ORDER:
        if name in ("L", "V"):
            entries.append(TraceEntry(name, SLOTS[name], OpKind.PREPARATION, operation=name))
            continue
        before = [by_name[g] for g in GATE_ORDER if TIME_RANK[SLOTS[g]] < TIME_RANK[SLOTS[name]]]
        probs = [occupation_probability(before, W, label) for label in GATE_SPACES[name][0]]
        p = max(probs)
        entries.append(
            TraceEntry(name, SLOTS[name], kind_from_occupation(p), agent=AGENTS.get(name), operation=name, particle_probability=p)
        )
    return OperationTrace("dsd", tuple(entries))


# Rebuild through the Fock layer: one bosonic mode per arm, cutoff 1.

ARM_FOCK = FockSpec(1, Statistics.BOSON, 1)
PAIR_FOCK = FockSpec(2, Statistics.BOSON, 1)


def fock_splitter_matrix() -> np.ndarray:
    """Lift of the 2x2 Hadamard to two modes, carried over to the product of arms."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    return embed_in_modes(lift_single_particle_unitary(h, PAIR_FOCK).matrix, PAIR_FOCK)


def dsd_fock_process_vector() -> ProcessVector:
    wires = dsd_wires()
    factors = []
    for w in wires:
        if w.from_space.dim != len(fock_basis(ARM_FOCK)):
            raise ValueError(f"wire {w} does not carry a single-mode space")
        factors.append(fock_transport_vector(ARM_FOCK, w.from_space.label, w.to_space.label))
    return ProcessVector(tuple(wires), tuple(factors))


def build_dsd_fock(inputs: DsdInputs, outcomes: tuple[int, int]) -> tuple[list[InstrumentCJ], ProcessVector]:
    """Same circuit as :func:`build_dsd`, with every ingredient taken from the Fock layer."""
    a_prime, b_prime = outcomes
    _check_bit("a'", a_prime)
    _check_bit("b'", b_prime)
    vac = vacuum(ARM_FOCK).amps
    h = fock_splitter_matrix()

    def phase(bit):
        return lift_single_particle_unitary(np.array([[(-1.0) ** bit]]), ARM_FOCK).matrix

    def effect(n):
        return occupation_state(ARM_FOCK, (n,)).amps.conj()

    gates = dsd_gates(
        alice_op=phase(inputs.a),
        bob_op=phase(inputs.b),
        splitter=h,
        splitter_prime=h,
        alice_effect=effect(a_prime),
        bob_effect=effect(b_prime),
        laser_state=creation_matrix(ARM_FOCK, 1) @ vac,
        vacuum_state=vac,
        settings={"a": inputs.a, "b": inputs.b, "a'": a_prime, "b'": b_prime},
    )
    return gates, dsd_fock_process_vector()


def dsd_distribution_fock(inputs: DsdInputs) -> list[DsdOutcome]:
    table = []
    for ap, bp in OUTCOMES:
        gates, W = build_dsd_fock(inputs, (ap, bp))
        table.append(DsdOutcome(ap, bp, probability_from_vectors(gates, W)))
    return table
