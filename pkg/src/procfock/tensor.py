"""
Labeled complex tensors.

Every Hilbert space carries a symbolic label and a dimension.  Vectors and
operators are dense numpy arrays with one axis per space, so contractions can
be expressed purely in terms of labels.  Basis index 0 is the vacuum, index 1
the single excitation.

All values are immutable once built; every function returns a new object.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateLabel,
    IndexOutOfRange,
    InvalidDimension,
    LabelCollision,
    LabelMismatch,
    ShapeError,
)

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class LabeledSpace:
    """A finite-dimensional Hilbert space identified by its label."""

    label: str
    dim: int

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise InvalidDimension(f"space {self.label!r} needs dim >= 1, got {self.dim!r}")

    def __repr__(self):
        return f"LabeledSpace({self.label}, {self.dim})"


class SpaceRegistry:
    """Keeps labels unique within one modelling context."""

    def __init__(self):
        self._spaces: dict[str, LabeledSpace] = {}

    def declare(self, label: str, dim: int) -> LabeledSpace:
        if label in self._spaces:
            raise DuplicateLabel(f"space {label!r} already declared")
        space = LabeledSpace(label, dim)
        self._spaces[label] = space
        return space

    def __getitem__(self, label: str) -> LabeledSpace:
        return self._spaces[label]

    def __contains__(self, label: str) -> bool:
        return label in self._spaces

    def __iter__(self):
        return iter(self._spaces.values())

    def __len__(self):
        return len(self._spaces)


def declare_space(label: str, dim: int, registry: SpaceRegistry | None = None) -> LabeledSpace:
    """Create a space; with a registry, enforce label uniqueness in it."""
    if registry is not None:
        return registry.declare(label, dim)
    return LabeledSpace(label, dim)


def _check_unique(spaces: Sequence[LabeledSpace], what: str = "spaces"):
    labels = [s.label for s in spaces]
    if len(set(labels)) != len(labels):
        dup = sorted({l for l in labels if labels.count(l) > 1})
        raise LabelCollision(f"repeated label(s) {dup} in {what}")


class LabeledVector:
    """Complex amplitudes over an ordered list of labeled spaces.

    Parameters
    ----------
    spaces : sequence of LabeledSpace
        Axis order of the amplitude tensor.  An empty sequence gives a scalar.
    amps : array_like
        Either a flat array of length ``prod(dims)`` (row-major over
        ``spaces``) or an array already shaped ``dims``.
    """

    __slots__ = ("_spaces", "_data")

    def __init__(self, spaces: Iterable[LabeledSpace], amps):
        spaces = tuple(spaces)
        _check_unique(spaces, "vector")
        dims = tuple(s.dim for s in spaces)
        data = np.array(amps, dtype=complex)
        size = int(np.prod(dims, dtype=np.int64))
        if data.size != size:
            raise ShapeError(f"expected {size} amplitudes for dims {dims}, got {data.size}")
        data = data.reshape(dims)
        data.setflags(write=False)
        self._spaces = spaces
        self._data = data

    @property
    def spaces(self) -> tuple[LabeledSpace, ...]:
        return self._spaces

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self._spaces)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self._spaces)

    @property
    def tensor(self) -> np.ndarray:
        """Read-only amplitude tensor, one axis per space."""
        return self._data

    @property
    def amps(self) -> np.ndarray:
        """Flat row-major amplitudes."""
        return self._data.reshape(-1)

    @property
    def is_scalar(self) -> bool:
        return not self._spaces

    def scalar(self) -> complex:
        if self._spaces:
            raise ShapeError(f"vector over {self.labels} is not a scalar")
        return complex(self._data)

    def space(self, label: str) -> LabeledSpace:
        for s in self._spaces:
            if s.label == label:
                return s
        raise LabelMismatch(f"label {label!r} not in {self.labels}")

    def permuted(self, labels: Sequence[str]) -> "LabeledVector":
        """Same vector with its axes reordered to ``labels``."""
        labels = tuple(labels)
        if sorted(labels) != sorted(self.labels):
            raise LabelMismatch(f"cannot reorder {self.labels} as {labels}")
        axes = [self.labels.index(l) for l in labels]
        return LabeledVector([self._spaces[i] for i in axes], np.transpose(self._data, axes))

    def squeeze(self) -> "LabeledVector":
        """Drop trivial (dim 1) spaces."""
        keep = [i for i, s in enumerate(self._spaces) if s.dim > 1]
        if len(keep) == len(self._spaces):
            return self
        return LabeledVector([self._spaces[i] for i in keep], self._data.reshape([self._spaces[i].dim for i in keep]))

    def amplitude(self, index: Mapping[str, int]) -> complex:
        """Amplitude at the basis state given as ``{label: index}``."""
        if set(index) != set(self.labels):
            raise LabelMismatch(f"index keys {sorted(index)} != labels {sorted(self.labels)}")
        return complex(self._data[tuple(index[l] for l in self.labels)])

    def _aligned(self, other: "LabeledVector") -> np.ndarray:
        if sorted(other.labels) != sorted(self.labels):
            raise LabelMismatch(f"label sets differ: {self.labels} vs {other.labels}")
        for s in self._spaces:
            if other.space(s.label).dim != s.dim:
                raise DimensionMismatch(f"space {s.label!r} has dims {s.dim} and {other.space(s.label).dim}")
        return other.permuted(self.labels)._data

    def allclose(self, other: "LabeledVector", atol: float = DEFAULT_TOL) -> bool:
        """Label-order-insensitive comparison."""
        try:
            theirs = self._aligned(other)
        except (LabelMismatch, DimensionMismatch):
            return False
        return bool(np.allclose(self._data, theirs, rtol=0.0, atol=atol))

    def max_abs_diff(self, other: "LabeledVector") -> float:
        theirs = self._aligned(other)
        if self._data.size == 0:
            return 0.0
        return float(np.max(np.abs(self._data - theirs)))

    def __add__(self, other: "LabeledVector") -> "LabeledVector":
        return LabeledVector(self._spaces, self._data + self._aligned(other))

    def __sub__(self, other: "LabeledVector") -> "LabeledVector":
        return LabeledVector(self._spaces, self._data - self._aligned(other))

    def __mul__(self, c) -> "LabeledVector":
        return LabeledVector(self._spaces, self._data * complex(c))

    __rmul__ = __mul__

    def __neg__(self) -> "LabeledVector":
        return LabeledVector(self._spaces, -self._data)

    def __truediv__(self, c) -> "LabeledVector":
        return LabeledVector(self._spaces, self._data / complex(c))

    def __repr__(self):
        nz = int(np.count_nonzero(np.abs(self._data) > 1e-14))
        return f"LabeledVector({list(self.labels)}, dims={self.dims}, nonzero={nz})"


class LabeledOperator:
    """Linear map from ``in_spaces`` to ``out_spaces``.

    ``entries`` is a matrix of shape ``(prod(out dims), prod(in dims))`` or a
    tensor shaped ``out_dims + in_dims``.  Input and output lists may share
    labels (an operator acting in place); each list is unique on its own.
    """

    __slots__ = ("_in", "_out", "_data")

    def __init__(self, in_spaces: Iterable[LabeledSpace], out_spaces: Iterable[LabeledSpace], entries):
        in_spaces, out_spaces = tuple(in_spaces), tuple(out_spaces)
        _check_unique(in_spaces, "operator inputs")
        _check_unique(out_spaces, "operator outputs")
        in_dims = tuple(s.dim for s in in_spaces)
        out_dims = tuple(s.dim for s in out_spaces)
        data = np.array(entries, dtype=complex)
        n_in = int(np.prod(in_dims, dtype=np.int64))
        n_out = int(np.prod(out_dims, dtype=np.int64))
        if data.size != n_in * n_out:
            raise ShapeError(f"expected a {n_out}x{n_in} matrix, got shape {data.shape}")
        if data.ndim == 2 and data.shape != (n_out, n_in):
            raise ShapeError(f"expected a {n_out}x{n_in} matrix, got shape {data.shape}")
        data = data.reshape(out_dims + in_dims)
        data.setflags(write=False)
        self._in, self._out, self._data = in_spaces, out_spaces, data

    @property
    def in_spaces(self) -> tuple[LabeledSpace, ...]:
        return self._in

    @property
    def out_spaces(self) -> tuple[LabeledSpace, ...]:
        return self._out

    @property
    def tensor(self) -> np.ndarray:
        return self._data

    @property
    def matrix(self) -> np.ndarray:
        n_out = int(np.prod([s.dim for s in self._out], dtype=np.int64))
        return self._data.reshape(n_out, -1)

    @property
    def is_square(self) -> bool:
        return sorted((s.label, s.dim) for s in self._in) == sorted((s.label, s.dim) for s in self._out)

    def permuted(self, in_labels: Sequence[str], out_labels: Sequence[str]) -> "LabeledOperator":
        in_l = [s.label for s in self._in]
        out_l = [s.label for s in self._out]
        if sorted(in_labels) != sorted(in_l) or sorted(out_labels) != sorted(out_l):
            raise LabelMismatch("cannot reorder operator to the given labels")
        out_axes = [out_l.index(l) for l in out_labels]
        in_axes = [len(out_l) + in_l.index(l) for l in in_labels]
        return LabeledOperator(
            [self._in[i - len(out_l)] for i in in_axes],
            [self._out[i] for i in out_axes],
            np.transpose(self._data, out_axes + in_axes),
        )

    def dagger(self) -> "LabeledOperator":
        return LabeledOperator(self._out, self._in, self.matrix.conj().T)

    def allclose(self, other: "LabeledOperator", atol: float = DEFAULT_TOL) -> bool:
        try:
            theirs = other.permuted([s.label for s in self._in], [s.label for s in self._out])
        except LabelMismatch:
            return False
        if theirs.in_spaces != self._in or theirs.out_spaces != self._out:
            return False
        return bool(np.allclose(self._data, theirs.tensor, rtol=0.0, atol=atol))

    def __repr__(self):
        return (
            f"LabeledOperator(in={[s.label for s in self._in]}, "
            f"out={[s.label for s in self._out]}, shape={self.matrix.shape})"
        )


def scalar(value: complex) -> LabeledVector:
    return LabeledVector((), value)


def basis_state(space: LabeledSpace, index: int) -> LabeledVector:
    if not 0 <= index < space.dim:
        raise IndexOutOfRange(f"index {index} outside 0..{space.dim - 1} for {space.label!r}")
    amps = np.zeros(space.dim, dtype=complex)
    amps[index] = 1.0
    return LabeledVector((space,), amps)


def product_state(*states: LabeledVector) -> LabeledVector:
    """Tensor product of several vectors, left to right."""
    out = scalar(1.0)
    for s in states:
        out = tensor(out, s)
    return out


def tensor(v: LabeledVector, w: LabeledVector) -> LabeledVector:
    shared = set(v.labels) & set(w.labels)
    if shared:
        raise LabelCollision(f"tensor product of vectors sharing {sorted(shared)}")
    return LabeledVector(v.spaces + w.spaces, np.multiply.outer(v.tensor, w.tensor))


def _shared_axes(bra: LabeledVector, ket: LabeledVector):
    bra_axes, ket_axes = [], []
    ket_labels = ket.labels
    for i, s in enumerate(bra.spaces):
        if s.label not in ket_labels:
            raise LabelMismatch(f"bra label {s.label!r} missing from ket {ket_labels}")
        j = ket_labels.index(s.label)
        if ket.spaces[j].dim != s.dim:
            raise DimensionMismatch(f"space {s.label!r} has dim {s.dim} in bra, {ket.spaces[j].dim} in ket")
        bra_axes.append(i)
        ket_axes.append(j)
    return bra_axes, ket_axes


def partial_inner(bra: LabeledVector, ket: LabeledVector) -> LabeledVector:
    """Contract ``bra`` (conjugated) against the matching spaces of ``ket``.

    ``result[rest] = sum_s conj(bra[s]) * ket[s, rest]``.  The bra is
    conjugated here and nowhere else, so callers pass CJ vectors as-is.
    """
    bra_axes, ket_axes = _shared_axes(bra, ket)
    data = np.tensordot(bra.tensor.conj(), ket.tensor, axes=(bra_axes, ket_axes))
    rest = [s for j, s in enumerate(ket.spaces) if j not in set(ket_axes)]
    return LabeledVector(rest, data)


def inner(bra: LabeledVector, ket: LabeledVector) -> complex:
    """Full inner product; label sets must coincide."""
    if sorted(bra.labels) != sorted(ket.labels):
        raise LabelMismatch(f"inner product needs equal label sets: {bra.labels} vs {ket.labels}")
    return partial_inner(bra, ket).scalar()


def apply_op(op: LabeledOperator, v: LabeledVector) -> LabeledVector:
    """Act with ``op`` on the subsystems of ``v`` named by its inputs.

    Output spaces come first in the result, followed by the untouched
    subsystems in their original order.
    """
    v_axes = []
    for s in op.in_spaces:
        if s.label not in v.labels:
            raise LabelMismatch(f"operator input {s.label!r} not among {v.labels}")
        j = v.labels.index(s.label)
        if v.spaces[j].dim != s.dim:
            raise DimensionMismatch(f"space {s.label!r}: operator dim {s.dim}, vector dim {v.spaces[j].dim}")
        v_axes.append(j)
    rest = [s for j, s in enumerate(v.spaces) if j not in set(v_axes)]
    clash = {s.label for s in op.out_spaces} & {s.label for s in rest}
    if clash:
        raise LabelCollision(f"operator outputs {sorted(clash)} collide with untouched spaces")
    n_out = len(op.out_spaces)
    op_in_axes = list(range(n_out, n_out + len(op.in_spaces)))
    data = np.tensordot(op.tensor, v.tensor, axes=(op_in_axes, v_axes))
    return LabeledVector(op.out_spaces + tuple(rest), data)


def compose(op2: LabeledOperator, op1: LabeledOperator) -> LabeledOperator:
    """``op2 ∘ op1``; the outputs of ``op1`` must equal the inputs of ``op2``."""
    if sorted((s.label, s.dim) for s in op1.out_spaces) != sorted((s.label, s.dim) for s in op2.in_spaces):
        raise LabelMismatch("operators do not chain")
    op2 = op2.permuted([s.label for s in op1.out_spaces], [s.label for s in op2.out_spaces])
    return LabeledOperator(op1.in_spaces, op2.out_spaces, op2.matrix @ op1.matrix)


def identity_op(spaces: Sequence[LabeledSpace]) -> LabeledOperator:
    n = int(np.prod([s.dim for s in spaces], dtype=np.int64))
    return LabeledOperator(spaces, spaces, np.eye(n))


def norm_sq(v: LabeledVector) -> float:
    return float(np.vdot(v.tensor, v.tensor).real)


def conjugate(v: LabeledVector) -> LabeledVector:
    return LabeledVector(v.spaces, v.tensor.conj())


def relabel(v: LabeledVector, mapping: Mapping[str, str]) -> LabeledVector:
    """Rename spaces; amplitudes are untouched."""
    for old in mapping:
        if old not in v.labels:
            raise LabelMismatch(f"cannot relabel missing space {old!r}")
    spaces = [LabeledSpace(mapping.get(s.label, s.label), s.dim) for s in v.spaces]
    _check_unique(spaces, "relabelled vector")
    return LabeledVector(spaces, v.tensor)


def relabel_op(op: LabeledOperator, mapping: Mapping[str, str]) -> LabeledOperator:
    def rename(spaces):
        return [LabeledSpace(mapping.get(s.label, s.label), s.dim) for s in spaces]

    return LabeledOperator(rename(op.in_spaces), rename(op.out_spaces), op.tensor)
