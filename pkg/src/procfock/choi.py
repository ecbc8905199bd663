"""
Choi–Jamiołkowski representations, process vectors and outcome probabilities.

Conventions
-----------
A linear operation ``op: G_I -> G_O`` is stored as its CJ vector
``sum_i |i>^{G_I} (op* |i>)^{G_O}``.  Contraction against a process vector
goes through :func:`~procfock.tensor.partial_inner`, which conjugates the
bra, so the conjugations cancel and the gate acts as ``op`` itself.

Trivial (dim 1) spaces may appear on gates so that preparations and final
measurements keep the uniform ``G_I -> G_O`` signature; they are dropped
before contracting against a process vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import CoverageError, DimensionMismatch, LabelCollision, LabelMismatch, ShapeError
from .tensor import (
    LabeledOperator,
    LabeledSpace,
    LabeledVector,
    apply_op,
    inner,
    norm_sq,
    partial_inner,
    relabel_op,
    scalar,
    tensor,
)

POSITIVITY_RTOL = 1e-9


@dataclass(frozen=True)
class Wire:
    """An identity channel from a gate output to a gate input."""

    from_space: LabeledSpace
    to_space: LabeledSpace

    def __post_init__(self):
        if self.from_space.dim != self.to_space.dim:
            raise DimensionMismatch(
                f"wire {self.from_space.label} -> {self.to_space.label}: "
                f"dims {self.from_space.dim} != {self.to_space.dim}"
            )
        if self.from_space.label == self.to_space.label:
            raise LabelCollision(f"wire connects {self.from_space.label!r} to itself")


def transport_vector(in_space: LabeledSpace, out_space: LabeledSpace) -> LabeledVector:
    """Unnormalised maximally entangled vector ``sum_i |i>|i>``."""
    if in_space.dim != out_space.dim:
        raise DimensionMismatch(f"transport between dims {in_space.dim} and {out_space.dim}")
    return LabeledVector((in_space, out_space), np.eye(in_space.dim))


def cj_vector(op: LabeledOperator) -> LabeledVector:
    """CJ vector of a linear map, over ``op.in_spaces + op.out_spaces``."""
    n_out = len(op.out_spaces)
    axes = list(range(n_out, op.tensor.ndim)) + list(range(n_out))
    return LabeledVector(op.in_spaces + op.out_spaces, np.transpose(op.tensor.conj(), axes))


def _copy_label(label: str) -> str:
    return label + "\u0000in"


def _check_kraus(kraus: Sequence[LabeledOperator]):
    if not kraus:
        raise ShapeError("a channel needs at least one Kraus term")
    first = kraus[0]
    for k in kraus[1:]:
        if k.in_spaces != first.in_spaces or k.out_spaces != first.out_spaces:
            raise LabelMismatch("Kraus terms act on different spaces")
    if {s.label for s in first.in_spaces} & {s.label for s in first.out_spaces}:
        raise LabelCollision("CJ representation needs distinct input and output labels")


def cj_matrix(kraus: Sequence[LabeledOperator]) -> LabeledOperator:
    """CJ matrix ``[(I ⊗ M)(|1>><<1|)]^T`` of the channel with these Kraus terms.

    Built straight from the definition: the channel is applied to one half
    of a transport vector, the resulting projectors are summed and
    transposed.  The result acts on ``G_I ⊗ G_O`` in that label order.
    """
    _check_kraus(kraus)
    g_in, g_out = kraus[0].in_spaces, kraus[0].out_spaces
    copies = [LabeledSpace(_copy_label(s.label), s.dim) for s in g_in]
    one = scalar(1.0)
    for s, c in zip(g_in, copies):
        one = tensor(one, transport_vector(s, c))
    order = [s.label for s in g_in + g_out]
    n = int(np.prod([s.dim for s in g_in + g_out], dtype=np.int64))
    rho = np.zeros((n, n), dtype=complex)
    for k in kraus:
        k_on_copy = relabel_op(k, {s.label: c.label for s, c in zip(g_in, copies)})
        v = apply_op(k_on_copy, one).permuted(order).amps
        rho += np.outer(v, v.conj())
    spaces = g_in + g_out
    return LabeledOperator(spaces, spaces, rho.T)


@dataclass(frozen=True)
class InstrumentCJ:
    """One gate's (outcome-resolved) operation in CJ form.

    Exactly one of ``vector`` (pure operations) or ``matrix`` is set.
    ``settings`` records classical inputs and outcomes the operation is
    conditioned on, e.g. ``{"a": 1}`` or ``{"a'": 0}``.
    """

    gate: str
    in_spaces: tuple[LabeledSpace, ...]
    out_spaces: tuple[LabeledSpace, ...]
    vector: LabeledVector | None = None
    matrix: LabeledOperator | None = None
    settings: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if (self.vector is None) == (self.matrix is None):
            raise ValueError("InstrumentCJ needs exactly one of vector or matrix")

    @classmethod
    def pure(cls, gate: str, op: LabeledOperator, **settings) -> "InstrumentCJ":
        return cls(gate, op.in_spaces, op.out_spaces, vector=cj_vector(op), settings=settings)

    @classmethod
    def channel(cls, gate: str, kraus: Sequence[LabeledOperator], **settings) -> "InstrumentCJ":
        k0 = kraus[0]
        return cls(gate, k0.in_spaces, k0.out_spaces, matrix=cj_matrix(kraus), settings=settings)

    @property
    def spaces(self) -> tuple[LabeledSpace, ...]:
        return self.in_spaces + self.out_spaces

    @property
    def nontrivial_labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.spaces if s.dim > 1)

    def as_matrix(self) -> "InstrumentCJ":
        """Matrix form ``|v><v|`` of a pure instrument."""
        if self.matrix is not None:
            return self
        v = self.vector
        m = LabeledOperator(v.spaces, v.spaces, np.outer(v.amps, v.amps.conj()))
        return InstrumentCJ(self.gate, self.in_spaces, self.out_spaces, matrix=m, settings=dict(self.settings))


@dataclass(frozen=True)
class ProcessVector:
    """Process vector of a circuit: one transport vector per wire.

    The factors are kept separate so that contraction can proceed wire by
    wire; :attr:`vector` materialises the full tensor product on demand.
    """

    wires: tuple[Wire, ...]
    factors: tuple[LabeledVector, ...]

    @cached_property
    def vector(self) -> LabeledVector:
        return reduce(tensor, self.factors, scalar(1.0))

    @property
    def spaces(self) -> tuple[LabeledSpace, ...]:
        return tuple(s for f in self.factors for s in f.spaces)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.spaces)

    @property
    def norm_sq(self) -> float:
        return float(np.prod([norm_sq(f) for f in self.factors]))

    def rank_one(self) -> "OuterProductSum":
        """``|W>><<W|`` with the vector materialised."""
        return OuterProductSum(((1.0, self.vector),))

    def process_matrix(self) -> "ProductOperator":
        """``|W>><<W|`` as a tensor product of per-wire projectors."""
        return ProductOperator(tuple(OuterProductSum(((1.0, f),)) for f in self.factors))


def process_vector_from_wiring(wires: Iterable[Wire]) -> ProcessVector:
    wires = tuple(wires)
    seen: set[str] = set()
    for w in wires:
        for s in (w.from_space, w.to_space):
            if s.label in seen:
                raise LabelCollision(f"space {s.label!r} appears on more than one wire")
            seen.add(s.label)
    return ProcessVector(wires, tuple(transport_vector(w.from_space, w.to_space) for w in wires))


def _as_factors(W) -> tuple[LabeledVector, ...]:
    if isinstance(W, ProcessVector):
        return W.factors
    if isinstance(W, LabeledVector):
        return (W,)
    raise TypeError(f"expected ProcessVector or LabeledVector, got {type(W).__name__}")


def _check_coverage(gate_labels: Sequence[Sequence[str]], w_spaces: Sequence[LabeledSpace]):
    w_labels = [s.label for s in w_spaces if s.dim > 1]
    flat = [l for labels in gate_labels for l in labels]
    over = sorted({l for l in flat if flat.count(l) > 1})
    if over:
        raise CoverageError(f"spaces claimed by more than one gate: {over}")
    missing = sorted(set(w_labels) - set(flat))
    extra = sorted(set(flat) - set(w_labels))
    if missing or extra:
        raise CoverageError(f"uncovered process spaces {missing}; gate spaces absent from process {extra}")


def contract_network(
    bras: Sequence[LabeledVector],
    W: ProcessVector | LabeledVector,
    *,
    keep_untouched: bool = False,
) -> LabeledVector:
    """Contract gate vectors into a factored process vector, one at a time.

    Each bra pulls in only the wire factors it touches before being
    contracted, so intermediate tensors stay on the current causal cut.
    The result lives on the open legs of the absorbed factors; with
    ``keep_untouched`` the remaining factors are tensored on as well.
    """
    remaining = list(_as_factors(W))
    state = scalar(1.0)
    for bra in bras:
        bra = bra.squeeze()
        need = set(bra.labels) - set(state.labels)
        take = [f for f in remaining if need & set(f.labels)]
        for f in take:
            remaining.remove(f)
            state = tensor(state, f)
        missing = set(bra.labels) - set(state.labels)
        if missing:
            raise CoverageError(f"gate spaces {sorted(missing)} are not open in the process")
        state = partial_inner(bra, state)
    if keep_untouched:
        for f in remaining:
            state = tensor(state, f)
    return state


def amplitude_from_vectors(gates: Sequence[InstrumentCJ], W: ProcessVector | LabeledVector, *, dense: bool = False) -> complex:
    """``(⊗ <<gate*|) |W>>`` for a set of gates covering every process space."""
    if any(g.vector is None for g in gates):
        raise TypeError("vector-form contraction needs pure instruments")
    spaces = W.spaces if isinstance(W, (ProcessVector, LabeledVector)) else ()
    _check_coverage([g.nontrivial_labels for g in gates], spaces)
    if dense:
        state = W.vector if isinstance(W, ProcessVector) else W
        for g in gates:
            state = partial_inner(g.vector.squeeze(), state)
        return state.scalar()
    return contract_network([g.vector for g in gates], W).scalar()


def probability_from_vectors(gates: Sequence[InstrumentCJ], W: ProcessVector | LabeledVector, *, dense: bool = False) -> float:
    """Outcome probability ``||(⊗ <<gate*|) |W>>||^2``.

    With ``dense=True`` the full process vector is materialised and the
    gates are contracted one after another; otherwise the wire factors are
    pulled in lazily (same value, far smaller intermediates).
    """
    amp = amplitude_from_vectors(gates, W, dense=dense)
    return float(abs(amp) ** 2)


# -- process matrices --------------------------------------------------------


@dataclass(frozen=True)
class OuterProductSum:
    """Hermitian operator ``sum_k w_k |v_k><v_k|`` with real weights."""

    terms: tuple[tuple[float, LabeledVector], ...]

    def __post_init__(self):
        if not self.terms:
            raise ShapeError("OuterProductSum needs at least one term")
        first = sorted(self.terms[0][1].labels)
        for _, v in self.terms[1:]:
            if sorted(v.labels) != first:
                raise LabelMismatch("all terms must live on the same spaces")

    @property
    def spaces(self) -> tuple[LabeledSpace, ...]:
        return self.terms[0][1].spaces

    def dense(self) -> LabeledOperator:
        spaces = self.spaces
        order = [s.label for s in spaces]
        n = int(np.prod([s.dim for s in spaces], dtype=np.int64))
        m = np.zeros((n, n), dtype=complex)
        for w, v in self.terms:
            a = v.permuted(order).amps
            m += w * np.outer(a, a.conj())
        return LabeledOperator(spaces, spaces, m)

    def nonzero_spectrum(self) -> np.ndarray:
        """Nonzero eigenvalues via the weighted Gram matrix."""
        order = [s.label for s in self.spaces]
        V = np.stack([v.permuted(order).amps for _, v in self.terms], axis=1)
        w = np.array([t[0] for t in self.terms], dtype=float)
        gram = V.conj().T @ V
        evals, evecs = np.linalg.eigh(gram)
        evals = np.clip(evals, 0.0, None)
        root = evecs @ np.diag(np.sqrt(evals)) @ evecs.conj().T
        core = root @ np.diag(w) @ root
        spec = np.linalg.eigvalsh((core + core.conj().T) / 2)
        scale = max(1.0, float(np.max(np.abs(spec))) if spec.size else 1.0)
        return spec[np.abs(spec) > 1e-12 * scale]

    def trace(self) -> float:
        return float(sum(w * norm_sq(v) for w, v in self.terms))

    def dimension(self) -> int:
        return int(np.prod([s.dim for s in self.spaces], dtype=np.int64))


@dataclass(frozen=True)
class ProductOperator:
    """Tensor product of operators on disjoint spaces."""

    factors: tuple[Union[LabeledOperator, OuterProductSum], ...]

    @property
    def spaces(self) -> tuple[LabeledSpace, ...]:
        out = []
        for f in self.factors:
            out.extend(f.spaces if isinstance(f, OuterProductSum) else f.in_spaces)
        return tuple(out)


ProcessMatrix = Union[LabeledOperator, OuterProductSum, ProductOperator]


def _squeeze_op(op: LabeledOperator) -> LabeledOperator:
    keep_in = [s for s in op.in_spaces if s.dim > 1]
    keep_out = [s for s in op.out_spaces if s.dim > 1]
    if len(keep_in) == len(op.in_spaces) and len(keep_out) == len(op.out_spaces):
        return op
    return LabeledOperator(keep_in, keep_out, op.matrix)


def _trace_with_gates(mats: Sequence[LabeledOperator], W: LabeledOperator) -> complex:
    """``Tr[(⊗ M) W]`` for a dense W, without forming ``⊗ M``."""
    out_labels = [s.label for s in W.out_spaces]
    primed = {s.label: s.label + "\u0000bra" for s in W.in_spaces}
    as_vec = LabeledVector(
        W.out_spaces + tuple(LabeledSpace(primed[s.label], s.dim) for s in W.in_spaces),
        W.tensor,
    )
    for m in mats:
        as_vec = apply_op(m, as_vec)
    for label in out_labels:
        s = as_vec.space(label)
        as_vec = partial_inner(transport_vector(s, LabeledSpace(primed[label], s.dim)), as_vec)
    return as_vec.scalar()


def probability_from_matrices(gates: Sequence[InstrumentCJ], W: ProcessMatrix) -> float:
    """``Tr[(⊗ M_gate) W]`` for CJ matrices and a process matrix."""
    mats = [_squeeze_op(g.as_matrix().matrix) for g in gates]
    if isinstance(W, LabeledOperator):
        if not W.is_square:
            raise ShapeError("process matrix must be square on its spaces")
        spaces = W.in_spaces
    elif isinstance(W, OuterProductSum):
        spaces = W.spaces
    else:
        raise TypeError(f"unsupported process matrix type {type(W).__name__}")
    _check_coverage([[s.label for s in m.in_spaces] for m in mats], spaces)
    if isinstance(W, LabeledOperator):
        value = _trace_with_gates(mats, W)
    else:
        value = 0.0
        for w, v in W.terms:
            mv = v
            for m in mats:
                mv = apply_op(m, mv)
            value += w * inner(v, mv)
    return float(np.real(value))


# -- axioms ------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    positive: bool
    trace_ok: bool
    trace_value: float
    expected_trace: int
    min_eigenvalue: float

    def as_dict(self) -> dict:
        return {
            "positive": self.positive,
            "trace_ok": self.trace_ok,
            "trace_value": self.trace_value,
            "expected_trace": self.expected_trace,
            "min_eigenvalue": self.min_eigenvalue,
        }


def _spectral_summary(W) -> tuple[float, float, float, bool]:
    """(min eigenvalue, max eigenvalue, trace, hermitian) of a process matrix."""
    if isinstance(W, LabeledOperator):
        if not W.is_square:
            raise ShapeError("process matrix must be square on its spaces")
        order = [s.label for s in W.in_spaces]
        m = W.permuted(order, order).matrix
        scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
        hermitian = bool(np.allclose(m, m.conj().T, rtol=0.0, atol=1e-12 * scale))
        evals = np.linalg.eigvalsh((m + m.conj().T) / 2)
        return float(evals.min()), float(evals.max()), float(np.trace(m).real), hermitian
    if isinstance(W, OuterProductSum):
        vals = list(W.nonzero_spectrum())
        if len(vals) < W.dimension():
            vals.append(0.0)
        return float(min(vals)), float(max(vals)), W.trace(), True
    if isinstance(W, ProductOperator):
        # spectrum of a product is all products of factor eigenvalues
        lo, hi, tr, herm = 1.0, 1.0, 1.0, True
        for f in W.factors:
            f_lo, f_hi, f_tr, f_herm = _spectral_summary(f)
            corners = [lo * f_lo, lo * f_hi, hi * f_lo, hi * f_hi]
            lo, hi = min(corners), max(corners)
            tr *= f_tr
            herm = herm and f_herm
        return lo, hi, tr, herm
    raise TypeError(f"unsupported process matrix type {type(W).__name__}")


def check_process_axioms(W: ProcessMatrix, out_space_dims: Sequence[int], *, tol: float = POSITIVITY_RTOL) -> AxiomReport:
    """Check positivity and the trace condition of a process matrix.

    Positivity: smallest eigenvalue >= ``-tol * ||W||`` and W Hermitian.
    Trace: equal to the product of all gate output dimensions, relative
    tolerance ``tol``.  The projector condition is not checked.
    """
    lo, hi, tr, hermitian = _spectral_summary(W)
    norm = max(abs(lo), abs(hi))
    expected = math.prod(int(d) for d in out_space_dims)
    positive = hermitian and lo >= -tol * max(norm, 1e-300)
    trace_ok = abs(tr - expected) <= tol * max(1.0, expected)
    return AxiomReport(bool(positive), bool(trace_ok), float(tr), expected, float(lo))
