"""
Optical quantum switch.

Each arm space is three-dimensional: the vacuum, or one photon with
horizontal or vertical polarisation (indices 0, 1, 2).  Polarisation thus
exists only on the occupied arm.  Alice applies ``U`` to a photon reaching
``A`` or ``A'``, Bob applies ``V`` at ``B`` or ``B'``; both act trivially on
the vacuum.  The photon goes either ``S -> A -> B' -> S'`` (blue branch,
``V U``) or ``S -> B -> A' -> S'`` (red branch, ``U V``).

Detector convention at ``S'``: it is the same Hadamard as ``S``, with the
port fed by ``A'`` as its first input.  The first output goes to ``D1``,
which therefore receives ``(UV + VU) ψ / 2``; ``D2`` receives
``(UV - VU) ψ / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..choi import InstrumentCJ, ProcessVector, Wire, contract_network, probability_from_vectors, process_vector_from_wiring
from ..errors import NonUnitary
from ..tensor import LabeledOperator, LabeledSpace, LabeledVector
from .counting import OperationTrace, OpKind, TraceEntry, kind_from_occupation, occupation_probability

ARM_DIM = 3
VACUUM = 0
UNITARY_TOL = 1e-10

_LABELS = [
    ("L_I", 1), ("L_O", 3), ("V_I", 1), ("V_O", 3),
    ("S_I^L", 3), ("S_I^V", 3), ("S_O^A", 3), ("S_O^B", 3),
    ("A_I", 3), ("A_O", 3), ("B_I", 3), ("B_O", 3),
    ("A'_I", 3), ("A'_O", 3), ("B'_I", 3), ("B'_O", 3),
    ("S'_I^A", 3), ("S'_I^B", 3), ("S'_O^1", 3), ("S'_O^2", 3),
    ("D1_I", 3), ("D1_O", 1), ("D2_I", 3), ("D2_O", 1),
]
SPACES: dict[str, LabeledSpace] = {l: LabeledSpace(l, d) for l, d in _LABELS}

GATE_SPACES = {
    "L": (("L_I",), ("L_O",)),
    "V": (("V_I",), ("V_O",)),
    "S": (("S_I^L", "S_I^V"), ("S_O^A", "S_O^B")),
    "A": (("A_I",), ("A_O",)),
    "B": (("B_I",), ("B_O",)),
    "A'": (("A'_I",), ("A'_O",)),
    "B'": (("B'_I",), ("B'_O",)),
    "S'": (("S'_I^A", "S'_I^B"), ("S'_O^1", "S'_O^2")),
    "D1": (("D1_I",), ("D1_O",)),
    "D2": (("D2_I",), ("D2_O",)),
}

WIRES = (
    ("L_O", "S_I^L"),
    ("V_O", "S_I^V"),
    ("S_O^A", "A_I"),
    ("S_O^B", "B_I"),
    ("A_O", "B'_I"),
    ("B_O", "A'_I"),
    ("A'_O", "S'_I^A"),
    ("B'_O", "S'_I^B"),
    ("S'_O^1", "D1_I"),
    ("S'_O^2", "D2_I"),
)

GATE_ORDER = ("L", "V", "S", "A", "B", "A'", "B'", "S'", "D1", "D2")
SLOTS = {"L": "t_i", "V": "t_i", "S": "t_1", "A": "t_2", "B": "t_2", "A'": "t_3", "B'": "t_3", "S'": "t_4", "D1": "t_f", "D2": "t_f"}
TIME_RANK = {"t_i": 0, "t_1": 1, "t_2": 2, "t_3": 3, "t_4": 4, "t_f": 5}
AGENTS = {"A": "Alice", "A'": "Alice", "B": "Bob", "B'": "Bob"}
# time-delocalised operations: Alice's U fires at A or A', Bob's V at B or B'
LOGICAL_OPS = {"A": "U", "A'": "U", "B": "V", "B'": "V"}


def _unitary(m, name) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2) or not np.allclose(m.conj().T @ m, np.eye(2), rtol=0.0, atol=UNITARY_TOL):
        raise NonUnitary(f"{name} must be a 2x2 unitary")
    return m


@dataclass(frozen=True, eq=False)
class SwitchSpec:
    u_matrix: np.ndarray
    v_matrix: np.ndarray
    input_polarization: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0], dtype=complex))

    def __post_init__(self):
        object.__setattr__(self, "u_matrix", _unitary(self.u_matrix, "U"))
        object.__setattr__(self, "v_matrix", _unitary(self.v_matrix, "V"))
        pol = np.asarray(self.input_polarization, dtype=complex).reshape(-1)
        if pol.shape != (2,) or abs(np.vdot(pol, pol).real - 1.0) > UNITARY_TOL:
            raise ValueError("input polarization must be a normalized 2-vector")
        object.__setattr__(self, "input_polarization", pol)


def arm_operator(u: np.ndarray) -> np.ndarray:
    """Identity on the vacuum, ``u`` on the photon's polarisation."""
    m = np.eye(ARM_DIM, dtype=complex)
    m[1:, 1:] = u
    return m


def splitter_matrix() -> np.ndarray:
    """Hadamard on the single-photon sector of two polarised arms.

    Basis index ``3 * first + second``.  A photon of polarisation σ on the
    first input goes to ``(|σ,0> + |0,σ>)/√2``; on the second input to
    ``(|σ,0> - |0,σ>)/√2``.  Vacuum and two-photon states pass unchanged.
    """
    r = 1 / math.sqrt(2)
    h = np.eye(ARM_DIM * ARM_DIM, dtype=complex)
    for pol in (1, 2):
        first, second = ARM_DIM * pol, pol
        h[first, first], h[second, first] = r, r
        h[first, second], h[second, second] = r, -r
    return h


def _op(gate: str, matrix) -> LabeledOperator:
    ins, outs = GATE_SPACES[gate]
    return LabeledOperator([SPACES[l] for l in ins], [SPACES[l] for l in outs], matrix)


def switch_wires() -> list[Wire]:
    return [Wire(SPACES[f], SPACES[t]) for f, t in WIRES]


def switch_process_vector() -> ProcessVector:
    return process_vector_from_wiring(switch_wires())


def _gate_matrices(spec: SwitchSpec) -> dict[str, np.ndarray]:
    laser = np.zeros((ARM_DIM, 1), dtype=complex)
    laser[1:, 0] = spec.input_polarization
    vac = np.zeros((ARM_DIM, 1), dtype=complex)
    vac[VACUUM, 0] = 1.0
    u, v = arm_operator(spec.u_matrix), arm_operator(spec.v_matrix)
    h = splitter_matrix()
    return {"L": laser, "V": vac, "S": h, "A": u, "A'": u, "B": v, "B'": v, "S'": h}


def build_switch(
    spec: SwitchSpec,
    outcomes: tuple[int, int] = (0, 0),
    *,
    overrides: dict[str, np.ndarray] | None = None,
) -> tuple[list[InstrumentCJ], ProcessVector]:
    """Gates L, V, S, A, B, A', B', S', D1, D2 and the process vector.

    ``outcomes`` are the basis indices (0 vacuum, 1 h, 2 v) recorded by the
    two detectors.  ``overrides`` replaces individual gate matrices.
    """
    mats = _gate_matrices(spec)
    mats.update(overrides or {})
    for name, k in zip(("D1", "D2"), outcomes):
        if not 0 <= k < ARM_DIM:
            raise ValueError(f"{name} outcome must be in 0..{ARM_DIM - 1}")
        mats[name] = np.eye(ARM_DIM, dtype=complex)[k].reshape(1, ARM_DIM)
    gates = [InstrumentCJ.pure(g, _op(g, mats[g])) for g in GATE_ORDER]
    return gates, switch_process_vector()


@dataclass(frozen=True)
class SwitchResult:
    table: dict[tuple[int, int], float]
    detector_probability: dict[str, float]
    # unnormalised polarisation amplitude reaching each detector
    amplitudes: dict[str, np.ndarray]

    def polarization(self, detector: str) -> np.ndarray | None:
        """Post-selected polarisation state at ``detector`` (None if it never fires)."""
        amp = self.amplitudes[detector]
        n = np.linalg.norm(amp)
        return None if n < 1e-12 else amp / n


def detector_amplitude(spec: SwitchSpec, detector: str) -> np.ndarray:
    """Polarisation amplitude arriving at ``detector`` while the other sees vacuum."""
    if detector not in ("D1", "D2"):
        raise ValueError(f"unknown detector {detector!r}")
    gates, W = build_switch(spec, (0, 0))
    open_gates = [g.vector for g in gates if g.gate != detector]
    state = contract_network(open_gates, W)
    return np.array(state.tensor[1:])


def switch_distribution(spec: SwitchSpec) -> SwitchResult:
    """Joint detector outcome table plus per-detector summaries."""
    table = {}
    for d1, d2 in product(range(ARM_DIM), repeat=2):
        gates, W = build_switch(spec, (d1, d2))
        table[(d1, d2)] = probability_from_vectors(gates, W)
    fires = {
        "D1": sum(p for (d1, d2), p in table.items() if d1 != VACUUM),
        "D2": sum(p for (d1, d2), p in table.items() if d2 != VACUUM),
    }
    amps = {d: detector_amplitude(spec, d) for d in ("D1", "D2")}
    return SwitchResult(table, fires, amps)


BRANCHES = {"blue": "B", "red": "A"}
BRANCH_PORT = {"blue": "S'_I^B", "red": "S'_I^A"}


def branch_state(spec: SwitchSpec, branch: str) -> LabeledVector:
    """State entering ``S'`` with one branch post-selected.

    The blue branch is selected by letting Bob's first gate ``B`` pass only
    the vacuum; the red branch likewise via Alice's ``A``.
    """
    if branch not in BRANCHES:
        raise ValueError(f"branch must be 'blue' or 'red', got {branch!r}")
    vac_filter = np.zeros((ARM_DIM, ARM_DIM), dtype=complex)
    vac_filter[VACUUM, VACUUM] = 1.0
    gates, W = build_switch(spec, overrides={BRANCHES[branch]: vac_filter})
    upto = [g.vector for g in gates if g.gate in ("L", "V", "S", "A", "B", "A'", "B'")]
    return contract_network(upto, W)


def branch_polarization(spec: SwitchSpec, branch: str) -> np.ndarray:
    """Polarisation amplitude carried by the photon in a post-selected branch."""
    state = branch_state(spec, branch)
    port = BRANCH_PORT[branch]
    other = "S'_I^A" if port == "S'_I^B" else "S'_I^B"
    t = state.permuted([port, other]).tensor
    return np.array(t[1:, VACUUM])


def switch_trace(spec: SwitchSpec) -> OperationTrace:
    gates, W = build_switch(spec)
    by_name = {g.gate: g for g in gates}
    entries = []
    for name in GATE_ORDER:
        if name in ("L", "V"):
            entries.append(TraceEntry(name, SLOTS[name], OpKind.PREPARATION, operation=name))
            continue
        if name in ("D1", "D2"):
            entries.append(TraceEntry(name, SLOTS[name], OpKind.MEASUREMENT, operation=name))
            continue
        before = [by_name[g] for g in GATE_ORDER if TIME_RANK[SLOTS[g]] < TIME_RANK[SLOTS[name]]]
        p = max(occupation_probability(before, W, label) for label in GATE_SPACES[name][0])
        entries.append(
            TraceEntry(
                name,
                SLOTS[name],
                kind_from_occupation(p),
                agent=AGENTS.get(name),
                operation=LOGICAL_OPS.get(name, name),
                particle_probability=p,
            )
        )
    return OperationTrace("switch", tuple(entries))
