"""
Line-oriented circuit description files.

Format, one statement per line, ``#`` starts a comment::

    gate NAME in(SPACE:dim, ...) out(SPACE:dim, ...) op=KIND[args]
    wire GATE.SPACE -> GATE.SPACE

``KIND`` is ``prepare[n]`` (basis state ``n`` on the product of outputs),
``unitary[[row], [row], ...]`` (the bracket is the row-major matrix itself,
complex entries written ``re+imi``) or ``measure[n]`` (effect ``<n|`` on the product of inputs).
A bare ``measure`` leaves the outcome open; it is enumerated at run time.
Gate declaration order is the time order: every wire must run forward.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .choi import InstrumentCJ, ProcessVector, Wire, probability_from_vectors, process_vector_from_wiring
from .errors import (
    CausalOrderError,
    CircuitSyntaxError,
    DuplicateSpace,
    DuplicateWire,
    EmptyCircuit,
    InvalidOperation,
    UndeclaredSpace,
    UnwiredSpace,
    WireDimensionMismatch,
)
from .tensor import LabeledOperator, LabeledSpace

UNITARY_TOL = 1e-10
KINDS = ("prepare", "unitary", "measure")

_NAME = re.compile(r"[^\s.,:()\[\]#]+")
_SPACE = re.compile(r"[^\s,:()\[\]#]+")
_WS = re.compile(r"\s*")
_INT = re.compile(r"\d+")
_COMPLEX = re.compile(
    r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
    r"(?:[+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i)?"
)


def parse_complex(text: str) -> complex:
    """Parse ``re``, or ``re+imi`` / ``re-imi``."""
    text = text.strip()
    if not _COMPLEX.fullmatch(text):
        raise ValueError(f"bad complex literal {text!r}")
    value = complex(text[:-1] + "j") if text.endswith("i") else complex(float(text))
    return value


def format_complex(z: complex) -> str:
    """Shortest literal that parses back to exactly ``z``."""
    z = complex(z)
    im = repr(z.imag)
    return f"{z.real!r}{'' if im.startswith('-') else '+'}{im}i"


def parse_matrix(text: str) -> np.ndarray:
    """Parse ``[[a, b], [c, d]]`` (or a flat ``[a, b]`` as a single row)."""
    s = text.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ValueError(f"matrix literal must be bracketed: {text!r}")
    inner = s[1:-1].strip()
    if inner.startswith("["):
        if not inner.endswith("]"):
            raise ValueError(f"unbalanced matrix literal {text!r}")
        rows = re.split(r"\]\s*,\s*\[", inner[1:-1])
    else:
        rows = [inner]
    parsed = [[parse_complex(x) for x in row.split(",")] for row in rows]
    if len({len(r) for r in parsed}) != 1:
        raise ValueError("matrix rows have different lengths")
    return np.array(parsed, dtype=complex)


def format_matrix(m: np.ndarray) -> str:
    m = np.atleast_2d(m)
    return "[" + ", ".join("[" + ", ".join(format_complex(x) for x in row) + "]" for row in m) + "]"


@dataclass(frozen=True)
class SpaceDecl:
    label: str
    dim: int


@dataclass(frozen=True, eq=False)
class GateDecl:
    name: str
    inputs: tuple[SpaceDecl, ...]
    outputs: tuple[SpaceDecl, ...]
    kind: str
    index: int | None = None
    matrix: np.ndarray | None = None
    line: int | None = field(default=None, compare=False)

    @property
    def in_dim(self) -> int:
        return math.prod(s.dim for s in self.inputs)

    @property
    def out_dim(self) -> int:
        return math.prod(s.dim for s in self.outputs)

    def __eq__(self, other):
        if not isinstance(other, GateDecl):
            return NotImplemented
        same_matrix = (self.matrix is None and other.matrix is None) or (
            self.matrix is not None and other.matrix is not None and np.array_equal(self.matrix, other.matrix)
        )
        return (
            (self.name, self.inputs, self.outputs, self.kind, self.index)
            == (other.name, other.inputs, other.outputs, other.kind, other.index)
            and same_matrix
        )


@dataclass(frozen=True)
class WireDecl:
    from_gate: str
    from_space: str
    to_gate: str
    to_space: str
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class CircuitSpec:
    gates: tuple[GateDecl, ...]
    wires: tuple[WireDecl, ...]

    def gate(self, name: str) -> GateDecl:
        for g in self.gates:
            if g.name == name:
                return g
        raise KeyError(name)

    @property
    def open_measurements(self) -> tuple[GateDecl, ...]:
        return tuple(g for g in self.gates if g.kind == "measure" and g.index is None)

    @property
    def output_dims(self) -> list[int]:
        return [s.dim for g in self.gates for s in g.outputs]


class _Cursor:
    """Position-tracking matcher over one line, for located errors."""

    def __init__(self, text: str, line: int):
        self.text, self.line, self.pos = text, line, 0

    def error(self, message: str, pos: int | None = None) -> CircuitSyntaxError:
        return CircuitSyntaxError(message, self.line, (self.pos if pos is None else pos) + 1)

    def skip_ws(self):
        self.pos = _WS.match(self.text, self.pos).end()

    def literal(self, s: str):
        self.skip_ws()
        if not self.text.startswith(s, self.pos):
            raise self.error(f"expected {s!r}")
        self.pos += len(s)

    def token(self, pattern: re.Pattern, what: str) -> tuple[str, int]:
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if not m:
            raise self.error(f"expected {what}")
        self.pos = m.end()
        return m.group(), m.start()

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def _parse_spaces(cur: _Cursor, keyword: str) -> tuple[SpaceDecl, ...]:
    cur.literal(keyword + "(")
    spaces = []
    cur.skip_ws()
    if cur.text.startswith(")", cur.pos):
        cur.pos += 1
        return ()
    while True:
        label, _ = cur.token(_SPACE, "space name")
        cur.literal(":")
        dim_text, dim_pos = cur.token(_INT, "dimension")
        dim = int(dim_text)
        if dim < 1:
            raise cur.error("dimension must be positive", dim_pos)
        spaces.append(SpaceDecl(label, dim))
        cur.skip_ws()
        if cur.text.startswith(",", cur.pos):
            cur.pos += 1
            continue
        cur.literal(")")
        return tuple(spaces)


def _bracket_end(cur: _Cursor, start: int) -> int:
    depth = 0
    for i in range(start, len(cur.text)):
        c = cur.text[i]
        if c == "[":
            depth += 1
        elif c == "]":
            depth -= 1
            if depth == 0:
                return i
    raise cur.error("unbalanced brackets", start)


def _parse_gate(cur: _Cursor) -> GateDecl:
    name, _ = cur.token(_NAME, "gate name")
    inputs = _parse_spaces(cur, "in")
    outputs = _parse_spaces(cur, "out")
    cur.literal("op=")
    kind, kind_pos = cur.token(re.compile(r"[a-z]+"), "operation kind")
    if kind not in KINDS:
        raise cur.error(f"unknown operation kind {kind!r}", kind_pos)
    index = matrix = None
    if cur.pos < len(cur.text) and cur.text[cur.pos] == "[":
        start = cur.pos
        end = _bracket_end(cur, start)
        body = cur.text[start + 1 : end]
        if kind == "unitary":
            try:
                matrix = parse_matrix(cur.text[start : end + 1])
            except ValueError as exc:
                raise cur.error(str(exc), start + 1) from None
        elif _INT.fullmatch(body.strip()):
            index = int(body)
        else:
            raise cur.error("expected a basis index", start + 1)
        cur.pos = end + 1
    elif kind != "measure":
        raise cur.error(f"op={kind} needs an argument in brackets")
    if not cur.at_end():
        raise cur.error("unexpected trailing text")
    gate = GateDecl(name, inputs, outputs, kind, index, matrix, line=cur.line)
    _check_operation(gate, kind_pos + 1)
    return gate


def _check_operation(g: GateDecl, column: int):
    def bad(msg):
        return InvalidOperation(f"gate {g.name}: {msg}", g.line, column)

    if g.kind == "prepare":
        if g.in_dim != 1:
            raise bad("a preparation takes no non-trivial input")
        if not 0 <= g.index < g.out_dim:
            raise bad(f"basis index {g.index} outside 0..{g.out_dim - 1}")
    elif g.kind == "measure":
        if g.out_dim != 1:
            raise bad("a measurement has no non-trivial output")
        if g.index is not None and not 0 <= g.index < g.in_dim:
            raise bad(f"basis index {g.index} outside 0..{g.in_dim - 1}")
    else:
        if g.matrix.shape != (g.out_dim, g.in_dim):
            raise bad(f"matrix is {g.matrix.shape[0]}x{g.matrix.shape[1]}, spaces need {g.out_dim}x{g.in_dim}")
        if not np.allclose(g.matrix.conj().T @ g.matrix, np.eye(g.in_dim), rtol=0.0, atol=UNITARY_TOL):
            raise bad("matrix is not unitary")


_ARROW = re.compile(r"->")


def _parse_wire(cur: _Cursor) -> tuple[WireDecl, tuple[int, int]]:
    src, src_pos = cur.token(re.compile(r"[^\s]+?(?=\s*->)"), "GATE.SPACE before '->'")
    cur.token(_ARROW, "'->'")
    dst, dst_pos = cur.token(re.compile(r"\S+"), "GATE.SPACE after '->'")
    if not cur.at_end():
        raise cur.error("unexpected trailing text")
    ends = []
    for text, pos in ((src, src_pos), (dst, dst_pos)):
        if "." not in text:
            raise cur.error("wire endpoints are written GATE.SPACE", pos)
        ends.extend(text.split(".", 1))
    return WireDecl(*ends, line=cur.line), (src_pos + 1, dst_pos + 1)


def parse_circuit(text: str) -> CircuitSpec:
    """Parse and validate a circuit description."""
    gates: list[GateDecl] = []
    raw_wires: list[tuple[WireDecl, tuple[int, int]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        cur = _Cursor(line, lineno)
        word, pos = cur.token(re.compile(r"[a-z]+"), "'gate' or 'wire'")
        if word == "gate":
            gates.append(_parse_gate(cur))
        elif word == "wire":
            raw_wires.append(_parse_wire(cur))
        else:
            raise cur.error(f"unknown statement {word!r}", pos)
    if not gates:
        raise EmptyCircuit("circuit declares no gates", 1 if not text.strip() else None)
    spec = CircuitSpec(tuple(gates), tuple(w for w, _ in raw_wires))
    _validate(spec, raw_wires)
    return spec


def _validate(spec: CircuitSpec, raw_wires):
    order = {}
    owner: dict[str, tuple[GateDecl, str, SpaceDecl]] = {}
    for i, g in enumerate(spec.gates):
        if g.name in order:
            raise DuplicateSpace(f"gate {g.name!r} declared twice", g.line)
        order[g.name] = i
        for side, spaces in (("out", g.outputs), ("in", g.inputs)):
            for s in spaces:
                if s.label in owner:
                    raise DuplicateSpace(f"space {s.label!r} declared more than once", g.line)
                owner[s.label] = (g, side, s)
    wired: set[str] = set()
    for w, (src_col, dst_col) in raw_wires:
        ends = []
        for gate, label, side, col in ((w.from_gate, w.from_space, "out", src_col), (w.to_gate, w.to_space, "in", dst_col)):
            if gate not in order:
                raise UndeclaredSpace(f"undeclared gate {gate!r}", w.line, col)
            if label not in owner or owner[label][0].name != gate or owner[label][1] != side:
                what = "output" if side == "out" else "input"
                raise UndeclaredSpace(f"{label!r} is not an {what} space of gate {gate!r}", w.line, col)
            if label in wired:
                raise DuplicateWire(f"space {label!r} is already wired", w.line, col)
            ends.append(owner[label][2])
        if ends[0].dim != ends[1].dim:
            raise WireDimensionMismatch(
                f"wire {w.from_gate}.{w.from_space} -> {w.to_gate}.{w.to_space}: dims {ends[0].dim} != {ends[1].dim}",
                w.line,
                dst_col,
            )
        if order[w.to_gate] <= order[w.from_gate]:
            raise CausalOrderError(f"wire into {w.to_gate!r} runs backwards in declaration order", w.line, dst_col)
        wired.update((w.from_space, w.to_space))
    for label, (g, _, s) in owner.items():
        if s.dim > 1 and label not in wired:
            raise UnwiredSpace(f"space {label!r} of gate {g.name!r} is not wired", g.line)


def load_circuit(path: str | Path) -> CircuitSpec:
    return parse_circuit(Path(path).read_text(encoding="utf-8"))


def _format_spaces(spaces) -> str:
    return ", ".join(f"{s.label}:{s.dim}" for s in spaces)


def serialize_circuit(spec: CircuitSpec) -> str:
    lines = []
    for g in spec.gates:
        if g.kind == "unitary":
            op = f"unitary{format_matrix(g.matrix)}"
        elif g.index is None:
            op = g.kind
        else:
            op = f"{g.kind}[{g.index}]"
        lines.append(f"gate {g.name} in({_format_spaces(g.inputs)}) out({_format_spaces(g.outputs)}) op={op}")
    for w in spec.wires:
        lines.append(f"wire {w.from_gate}.{w.from_space} -> {w.to_gate}.{w.to_space}")
    return "\n".join(lines) + "\n"


def _labeled(spaces) -> list[LabeledSpace]:
    return [LabeledSpace(s.label, s.dim) for s in spaces]


def gate_operator(g: GateDecl, outcome: int | None = None) -> LabeledOperator:
    if g.kind == "prepare":
        m = np.zeros((g.out_dim, 1), dtype=complex)
        m[g.index, 0] = 1.0
    elif g.kind == "measure":
        k = g.index if outcome is None else outcome
        if k is None:
            raise ValueError(f"measurement {g.name} needs an outcome")
        m = np.zeros((1, g.in_dim), dtype=complex)
        m[0, k] = 1.0
    else:
        m = g.matrix
    return LabeledOperator(_labeled(g.inputs), _labeled(g.outputs), m)


def circuit_process_vector(spec: CircuitSpec) -> ProcessVector:
    spaces = {s.label: LabeledSpace(s.label, s.dim) for g in spec.gates for s in (*g.inputs, *g.outputs)}
    return process_vector_from_wiring(Wire(spaces[w.from_space], spaces[w.to_space]) for w in spec.wires)


def build_circuit(spec: CircuitSpec, outcomes: dict[str, int] | None = None) -> tuple[list[InstrumentCJ], ProcessVector]:
    """Instruments and process vector; ``outcomes`` fixes open measurements."""
    outcomes = outcomes or {}
    gates = [InstrumentCJ.pure(g.name, gate_operator(g, outcomes.get(g.name))) for g in spec.gates]
    return gates, circuit_process_vector(spec)


def circuit_distribution(spec: CircuitSpec) -> dict[tuple[int, ...], float]:
    """Probabilities of every joint outcome of the open measurements (declaration order)."""
    open_gates = spec.open_measurements
    table = {}
    W = circuit_process_vector(spec)
    for combo in product(*(range(g.in_dim) for g in open_gates)):
        fixed = dict(zip((g.name for g in open_gates), combo))
        gates = [InstrumentCJ.pure(g.name, gate_operator(g, fixed.get(g.name))) for g in spec.gates]
        table[combo] = probability_from_vectors(gates, W)
    return table


def _measurement_index(matrix: np.ndarray) -> int | None:
    """Basis index of a computational-basis effect row, else None."""
    row = np.asarray(matrix).reshape(-1)
    hits = np.flatnonzero(np.abs(row) > 0)
    if len(hits) == 1 and row[hits[0]] == 1:
        return int(hits[0])
    return None


def spec_from_protocol(
    spaces: dict[str, LabeledSpace],
    gate_spaces: dict[str, tuple[tuple[str, ...], tuple[str, ...]]],
    wires,
    matrices: dict[str, np.ndarray],
    order,
    open_measurements=(),
) -> CircuitSpec:
    """Assemble a CircuitSpec from a protocol's tables (used to write the shipped files)."""
    gates = []
    for name in order:
        ins, outs = gate_spaces[name]
        i_decl = tuple(SpaceDecl(l, spaces[l].dim) for l in ins)
        o_decl = tuple(SpaceDecl(l, spaces[l].dim) for l in outs)
        m = np.asarray(matrices.get(name)) if name in matrices else None
        in_dim = math.prod(s.dim for s in i_decl)
        out_dim = math.prod(s.dim for s in o_decl)
        if name in open_measurements:
            gates.append(GateDecl(name, i_decl, o_decl, "measure"))
        elif in_dim == 1:
            gates.append(GateDecl(name, i_decl, o_decl, "prepare", index=_measurement_index(m.T)))
        elif out_dim == 1:
            gates.append(GateDecl(name, i_decl, o_decl, "measure", index=_measurement_index(m)))
        else:
            gates.append(GateDecl(name, i_decl, o_decl, "unitary", matrix=np.asarray(m, dtype=complex)))
    owner = {l: name for name, (ins, outs) in gate_spaces.items() for l in (*ins, *outs)}
    wire_decls = tuple(WireDecl(owner[f], f, owner[t], t) for f, t in wires)
    return CircuitSpec(tuple(gates), wire_decls)


SHIPPED = ("dsd", "switch")


def shipped_circuit_path(name: str) -> Path:
    """Path of a bundled example circuit (``dsd`` or ``switch``)."""
    from importlib.resources import files

    if name not in SHIPPED:
        raise KeyError(f"no shipped circuit {name!r}; choose from {SHIPPED}")
    return Path(str(files("procfock") / "data" / f"{name}.circuit"))
