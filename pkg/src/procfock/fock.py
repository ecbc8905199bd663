"""
Truncated second quantisation.

A :class:`FockSpec` fixes the number of modes, the particle statistics and
the total-occupation cutoff.  Basis states are occupation tuples ordered by
total particle number, and within a sector with mode 1 most occupied first,
so the one-particle sector reads ``(1,0,...), (0,1,...), ...`` and a
single-particle matrix ``u`` appears there unchanged.

Fermionic signs follow the Jordan–Wigner ordering by mode index:
``a_i^† |s> = (-1)^(s_1 + ... + s_{i-1}) |s + e_i>``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from itertools import permutations, product
from typing import Sequence

import numpy as np

from .errors import DuplicateSector, IndexOutOfRange, InvalidDimension, NonUnitary, ShapeError
from .tensor import LabeledOperator, LabeledSpace, LabeledVector, apply_op

UNITARY_TOL = 1e-10


class Statistics(str, enum.Enum):
    BOSON = "boson"
    FERMION = "fermion"


@dataclass(frozen=True)
class FockSpec:
    """Modes, statistics and cutoff of a truncated Fock space.

    For fermions the cutoff is clipped to the number of modes; for bosons it
    is mandatory.
    """

    modes: int
    statistics: Statistics = Statistics.BOSON
    cutoff: int | None = None

    def __post_init__(self):
        stats = Statistics(self.statistics)
        object.__setattr__(self, "statistics", stats)
        if self.modes < 1:
            raise InvalidDimension(f"need at least one mode, got {self.modes}")
        cutoff = self.cutoff
        if stats is Statistics.FERMION:
            cutoff = self.modes if cutoff is None else min(cutoff, self.modes)
        elif cutoff is None:
            raise InvalidDimension("bosonic Fock spaces need an occupation cutoff")
        if cutoff < 0:
            raise InvalidDimension(f"cutoff must be >= 0, got {cutoff}")
        object.__setattr__(self, "cutoff", int(cutoff))

    @property
    def is_fermion(self) -> bool:
        return self.statistics is Statistics.FERMION

    @property
    def max_occupation(self) -> int:
        return 1 if self.is_fermion else self.cutoff


@lru_cache(maxsize=None)
def _basis(modes: int, max_occ: int, cutoff: int) -> tuple[tuple[int, ...], ...]:
    states = [s for s in product(range(max_occ + 1), repeat=modes) if sum(s) <= cutoff]
    return tuple(sorted(states, key=lambda s: (sum(s), tuple(-x for x in s))))


def fock_basis(spec: FockSpec) -> tuple[tuple[int, ...], ...]:
    """All occupation tuples with total <= cutoff, by total then mode-1-first."""
    return _basis(spec.modes, spec.max_occupation, spec.cutoff)


def basis_index(spec: FockSpec) -> dict[tuple[int, ...], int]:
    return {s: i for i, s in enumerate(fock_basis(spec))}


def sector(spec: FockSpec, k: int) -> list[int]:
    """Basis positions of the k-particle sector."""
    return [i for i, s in enumerate(fock_basis(spec)) if sum(s) == k]


def fock_space(spec: FockSpec, label: str) -> LabeledSpace:
    return LabeledSpace(label, len(fock_basis(spec)))


def vacuum(spec: FockSpec, label: str = "F") -> LabeledVector:
    space = fock_space(spec, label)
    amps = np.zeros(space.dim, dtype=complex)
    amps[0] = 1.0
    return LabeledVector((space,), amps)


def occupation_state(spec: FockSpec, occupations: Sequence[int], label: str = "F") -> LabeledVector:
    occ = tuple(int(x) for x in occupations)
    index = basis_index(spec)
    if occ not in index:
        raise IndexOutOfRange(f"{occ} is not a basis state of {spec}")
    space = fock_space(spec, label)
    amps = np.zeros(space.dim, dtype=complex)
    amps[index[occ]] = 1.0
    return LabeledVector((space,), amps)


def _check_mode(spec: FockSpec, mode: int):
    if not 1 <= mode <= spec.modes:
        raise IndexOutOfRange(f"mode {mode} outside 1..{spec.modes}")


def creation_matrix(spec: FockSpec, mode: int) -> np.ndarray:
    _check_mode(spec, mode)
    basis = fock_basis(spec)
    index = basis_index(spec)
    i = mode - 1
    m = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, s in enumerate(basis):
        t = list(s)
        t[i] += 1
        t = tuple(t)
        if t not in index:
            continue
        if spec.is_fermion:
            coeff = (-1.0) ** sum(s[:i])
        else:
            coeff = math.sqrt(s[i] + 1)
        m[index[t], col] = coeff
    return m


def creation_op(spec: FockSpec, mode: int, label: str = "F") -> LabeledOperator:
    """``a_mode^†`` on the truncated space (1-based mode index)."""
    space = fock_space(spec, label)
    return LabeledOperator((space,), (space,), creation_matrix(spec, mode))


def annihilation_op(spec: FockSpec, mode: int, label: str = "F") -> LabeledOperator:
    space = fock_space(spec, label)
    return LabeledOperator((space,), (space,), creation_matrix(spec, mode).conj().T)


def _creation_string(spec: FockSpec, occupations: Sequence[int]) -> np.ndarray:
    """``prod_i (a_i^†)^{s_i} / sqrt(s_i!) |0>`` as an amplitude array."""
    vec = np.zeros(len(fock_basis(spec)), dtype=complex)
    vec[0] = 1.0
    # rightmost factor acts first
    for i in reversed(range(spec.modes)):
        s_i = occupations[i]
        if s_i:
            c = creation_matrix(spec, i + 1)
            vec = np.linalg.matrix_power(c, s_i) @ vec / math.sqrt(math.factorial(s_i))
    return vec


def k_transport_vector(spec: FockSpec, k: int, in_label: str = "F_in", out_label: str = "F_out") -> LabeledVector:
    """Sum over occupations with total k of the paired creation strings on the vacuum."""
    if not 0 <= k <= spec.cutoff:
        raise IndexOutOfRange(f"k={k} exceeds cutoff {spec.cutoff}")
    n = len(fock_basis(spec))
    amps = np.zeros((n, n), dtype=complex)
    for s in fock_basis(spec):
        if sum(s) == k:
            v = _creation_string(spec, s)
            amps += np.outer(v, v)
    return LabeledVector((fock_space(spec, in_label), fock_space(spec, out_label)), amps)


def fock_transport_vector(spec: FockSpec, in_label: str = "F_in", out_label: str = "F_out") -> LabeledVector:
    """Transport vector on the truncated Fock space: sum of all k-transport vectors."""
    total = k_transport_vector(spec, 0, in_label, out_label)
    for k in range(1, spec.cutoff + 1):
        total = total + k_transport_vector(spec, k, in_label, out_label)
    return total


def _check_unitary(u: np.ndarray, d: int) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (d, d):
        raise ShapeError(f"expected a {d}x{d} single-particle matrix, got {u.shape}")
    if not np.allclose(u.conj().T @ u, np.eye(d), rtol=0.0, atol=UNITARY_TOL):
        raise NonUnitary("single-particle operator is not unitary")
    return u


def _sector_isometry(spec: FockSpec, k: int) -> np.ndarray:
    """Columns: occupation states of sector k as (anti)symmetrised k-particle vectors."""
    d = spec.modes
    states = [fock_basis(spec)[i] for i in sector(spec, k)]
    iso = np.zeros((d**k, len(states)), dtype=complex)
    for col, s in enumerate(states):
        modes = [m for m in range(d) for _ in range(s[m])]
        norm = math.sqrt(math.factorial(k) * math.prod(math.factorial(x) for x in s))
        for perm in permutations(range(k)):
            idx = 0
            for p in perm:
                idx = idx * d + modes[p]
            sign = _perm_sign(perm) if spec.is_fermion else 1
            iso[idx, col] += sign / norm
    return iso


def _perm_sign(perm: Sequence[int]) -> int:
    sign, seen = 1, [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        j, length = start, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True, eq=False)
class SectorOperator:
    """Operator acting inside the k-particle sector; zero on all other sectors."""

    spec: FockSpec
    k: int
    block: np.ndarray

    def __post_init__(self):
        n = len(sector(self.spec, self.k))
        block = np.asarray(self.block, dtype=complex)
        if block.shape != (n, n):
            raise ShapeError(f"sector {self.k} has dimension {n}, block is {block.shape}")
        object.__setattr__(self, "block", block)

    def full(self) -> np.ndarray:
        n = len(fock_basis(self.spec))
        idx = sector(self.spec, self.k)
        m = np.zeros((n, n), dtype=complex)
        m[np.ix_(idx, idx)] = self.block
        return m


def lift_sectors(u: np.ndarray, spec: FockSpec) -> list[SectorOperator]:
    """Per-sector action of a single-particle unitary, k = 0..cutoff."""
    u = _check_unitary(u, spec.modes)
    out = [SectorOperator(spec, 0, np.ones((1, 1)))]
    for k in range(1, spec.cutoff + 1):
        iso = _sector_isometry(spec, k)
        uk = reduce(np.kron, [u] * k)
        out.append(SectorOperator(spec, k, iso.conj().T @ uk @ iso))
    return out


def lift_single_particle_unitary(
    u: np.ndarray,
    spec: FockSpec,
    in_label: str = "F",
    out_label: str | None = None,
) -> LabeledOperator:
    """Second-quantised lift of ``u``, block diagonal in particle number.

    Each k-particle block is the k-fold action of ``u`` restricted to the
    (anti)symmetric subspace, i.e. the normal-ordered ``U^{⊗k}/k!``.
    """
    n = len(fock_basis(spec))
    m = np.zeros((n, n), dtype=complex)
    for op in lift_sectors(u, spec):
        m += op.full()
    space_in = fock_space(spec, in_label)
    space_out = fock_space(spec, out_label or in_label)
    return LabeledOperator((space_in,), (space_out,), m)


def fock_cj_matrix(
    sector_ops: Sequence[SectorOperator],
    in_label: str = "F_in",
    out_label: str = "F_out",
) -> LabeledOperator:
    """Sum over sectors of ``[(I ⊗ M_k)(|1_k>><<1_k|)]^T`` on ``in ⊗ out``."""
    if not sector_ops:
        raise ShapeError("need at least one sector operator")
    spec = sector_ops[0].spec
    ks = [op.k for op in sector_ops]
    if len(set(ks)) != len(ks):
        raise DuplicateSector(f"sectors given more than once: {sorted(k for k in set(ks) if ks.count(k) > 1)}")
    copy = in_label + "\u0000copy"
    n = len(fock_basis(spec))
    rho = np.zeros((n * n, n * n), dtype=complex)
    for op in sector_ops:
        if op.spec != spec:
            raise ShapeError("sector operators must share one FockSpec")
        ket = k_transport_vector(spec, op.k, in_label, copy)
        m = LabeledOperator((fock_space(spec, copy),), (fock_space(spec, out_label),), op.full())
        v = apply_op(m, ket).permuted([in_label, out_label]).amps
        rho += np.outer(v, v.conj())
    spaces = (fock_space(spec, in_label), fock_space(spec, out_label))
    return LabeledOperator(spaces, spaces, rho.T)


def mode_product_isometry(spec: FockSpec) -> np.ndarray:
    """Embedding of the truncated multi-mode space into a product of single-mode spaces.

    Each mode gets its own space of dimension ``max_occupation + 1``; the
    product index is row-major over modes.
    """
    per = spec.max_occupation + 1
    basis = fock_basis(spec)
    iso = np.zeros((per**spec.modes, len(basis)), dtype=complex)
    for col, s in enumerate(basis):
        idx = 0
        for x in s:
            idx = idx * per + x
        iso[idx, col] = 1.0
    return iso


def embed_in_modes(matrix: np.ndarray, spec: FockSpec) -> np.ndarray:
    """Carry an operator on the truncated space over to the mode product.

    States outside the truncated space are left unchanged.
    """
    iso = mode_product_isometry(spec)
    return iso @ matrix @ iso.conj().T + (np.eye(iso.shape[0]) - iso @ iso.conj().T)


def commutator(x: np.ndarray, y: np.ndarray, anti: bool = False) -> np.ndarray:
    return x @ y + y @ x if anti else x @ y - y @ x


__all__ = [
    "FockSpec",
    "Statistics",
    "SectorOperator",
    "fock_basis",
    "basis_index",
    "sector",
    "fock_space",
    "vacuum",
    "occupation_state",
    "creation_matrix",
    "creation_op",
    "annihilation_op",
    "k_transport_vector",
    "fock_transport_vector",
    "lift_sectors",
    "lift_single_particle_unitary",
    "fock_cj_matrix",
    "mode_product_isometry",
    "embed_in_modes",
    "commutator",
]
