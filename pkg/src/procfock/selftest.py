"""
Built-in invariant suite behind ``procfock selftest``.

Each suite is a function ``(rng, fault) -> detail string`` that raises
``AssertionError`` on failure.  ``fault`` names an injected mutation; only
the suites it is meant to break look at it.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from itertools import product
from typing import Callable

import numpy as np

from .choi import cj_vector, transport_vector, check_process_axioms
from .fock import FockSpec, creation_matrix, lift_single_particle_unitary, sector
from .protocols import dsd, switch
from .protocols.counting import count_operations
from .tensor import LabeledOperator, LabeledSpace, LabeledVector, partial_inner, tensor

DEFAULT_SEED = 20240917
FAULTS = ("flip-hadamard-sign",)
TOL = 1e-10


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str
    elapsed_ms: float

    def as_dict(self) -> dict:
        return asdict(self)


def _lemma1(rng, fault) -> str:
    worst = 0.0
    for n in range(100):
        d = 2 + n % 3
        psi = random_state(d, rng)
        x_o, y_i = LabeledSpace("X_O", d), LabeledSpace("Y_I", d)
        prep = LabeledOperator((), (x_o,), psi.reshape(d, 1))
        out = partial_inner(cj_vector(prep), transport_vector(x_o, y_i))
        worst = max(worst, out.max_abs_diff(LabeledVector((y_i,), psi)))
    assert worst <= TOL, f"max deviation {worst:.3e}"
    return f"100 instances, max deviation {worst:.1e}"


def _lemma2(rng, fault) -> str:
    worst = 0.0
    for n in range(100):
        d = 2 + n % 3
        u, psi = random_unitary(d, rng), random_state(d, rng)
        x_i, x_o, y_i = (LabeledSpace(l, d) for l in ("X_I", "X_O", "Y_I"))
        gate = cj_vector(LabeledOperator((x_i,), (x_o,), u))
        ket = tensor(LabeledVector((x_i,), psi), transport_vector(x_o, y_i))
        out = partial_inner(gate, ket)
        worst = max(worst, out.max_abs_diff(LabeledVector((y_i,), u @ psi)))
    assert worst <= TOL, f"max deviation {worst:.3e}"
    return f"100 instances, max deviation {worst:.1e}"


def _fock_relations(rng, fault) -> str:
    checked = 0
    for d in (1, 2, 3):
        fspec = FockSpec(d, "fermion")
        ops = [creation_matrix(fspec, i) for i in range(1, d + 1)]
        eye = np.eye(len(ops[0]))
        for i, j in product(range(d), repeat=2):
            ad_i, ad_j = ops[i], ops[j]
            a_i = ad_i.conj().T
            assert np.abs(a_i @ ad_j + ad_j @ a_i - (i == j) * eye).max() <= 1e-14
            assert np.abs(ad_i @ ad_j + ad_j @ ad_i).max() <= 1e-14
            checked += 1
        for cutoff in range(1, 5):
            bspec = FockSpec(d, "boson", cutoff)
            ops = [creation_matrix(bspec, i) for i in range(1, d + 1)]
            below = [p for k in range(cutoff) for p in sector(bspec, k)]
            for i, j in product(range(d), repeat=2):
                ad_i, ad_j = ops[i], ops[j]
                a_i = ad_i.conj().T
                comm = (a_i @ ad_j - ad_j @ a_i)[:, below]
                target = (i == j) * np.eye(len(ops[0]))[:, below]
                assert np.abs(comm - target).max() <= 1e-14
                assert np.abs(ad_i @ ad_j - ad_j @ ad_i).max() <= 1e-14
                checked += 1
    return f"{checked} mode pairs"


def expected_dsd(a: int, b: int, a_prime: int, b_prime: int) -> float:
    """Closed-form dSD outcome probability, used as an oracle."""
    s = (-1) ** (a ^ b)
    return (1 + s) / 2 * (a_prime == 1 and b_prime == 0) + (1 - s) / 2 * (a_prime == 0 and b_prime == 1)


def _dsd_distribution(rng, fault) -> str:
    splitter = dsd.beam_splitter_matrix(flip_sign=fault == "flip-hadamard-sign")
    worst = 0.0
    for a, b in product((0, 1), repeat=2):
        for o in dsd.dsd_distribution(dsd.DsdInputs(a, b), splitter=splitter):
            worst = max(worst, abs(o.probability - expected_dsd(a, b, o.a_prime, o.b_prime)))
    assert worst <= 1e-12, f"distribution off by {worst:.3e}"
    return f"16 entries, max deviation {worst:.1e}"


def _process_axioms(rng, fault) -> str:
    W = dsd.dsd_process_vector().process_matrix()
    dims = [dsd.SPACES[l].dim for _, outs in dsd.GATE_SPACES.values() for l in outs]
    report = check_process_axioms(W, dims)
    assert report.positive, f"min eigenvalue {report.min_eigenvalue}"
    assert report.trace_ok, f"trace {report.trace_value} != {report.expected_trace}"
    return f"trace {report.trace_value:g}, positive"


def _fock_lift(rng, fault) -> str:
    for n in range(20):
        d = 1 + n % 3
        stats = "boson" if n % 2 else "fermion"
        fspec = FockSpec(d, stats, 3)
        u1, u2 = random_unitary(d, rng), random_unitary(d, rng)
        m1 = lift_single_particle_unitary(u1, fspec).matrix
        m2 = lift_single_particle_unitary(u2, fspec).matrix
        m12 = lift_single_particle_unitary(u2 @ u1, fspec).matrix
        one = sector(fspec, 1)
        assert np.array_equal(m1[np.ix_(one, one)], u1), "one-particle sector differs from u"
        assert np.abs(m2 @ m1 - m12).max() <= TOL, "lift is not a homomorphism"
        assert np.abs(m1.conj().T @ m1 - np.eye(len(m1))).max() <= TOL, "lift is not unitary"
    return "20 random unitaries"


def _switch_branches(rng, fault) -> str:
    worst = 0.0
    for _ in range(10):
        u, v = random_unitary(2, rng), random_unitary(2, rng)
        psi = random_state(2, rng)
        spec = switch.SwitchSpec(u, v, psi)
        blue = switch.branch_polarization(spec, "blue")
        red = switch.branch_polarization(spec, "red")
        worst = max(worst, np.abs(blue - v @ u @ psi / np.sqrt(2)).max(), np.abs(red - u @ v @ psi / np.sqrt(2)).max())
    assert worst <= 1e-12, f"branch deviation {worst:.3e}"
    return f"10 random (U, V), max deviation {worst:.1e}"


def _operation_counts(rng, fault) -> str:
    for a, b in product((0, 1), repeat=2):
        trace = dsd.dsd_trace(dsd.DsdInputs(a, b))
        assert count_operations(trace, "vacuum_inclusive") == 4
        assert count_operations(trace, "flag") == 3
    sw = switch.switch_trace(switch.SwitchSpec(random_unitary(2, rng), random_unitary(2, rng)))
    assert count_operations(sw, "flag") == 2
    return "dSD 4/3, switch flag 2"


def _reduction(rng, fault) -> str:
    for a, b in product((0, 1), repeat=2):
        inputs = dsd.DsdInputs(a, b)
        direct = [o.probability for o in dsd.dsd_distribution(inputs)]
        via_fock = [o.probability for o in dsd.dsd_distribution_fock(inputs)]
        assert np.abs(np.subtract(direct, via_fock)).max() <= 1e-12
    return "Fock rebuild matches for all (a, b)"


SUITES: dict[str, Callable] = {
    "lemma1": _lemma1,
    "lemma2": _lemma2,
    "fock_relations": _fock_relations,
    "dsd_distribution": _dsd_distribution,
    "process_axioms": _process_axioms,
    "fock_lift": _fock_lift,
    "switch_branches": _switch_branches,
    "operation_counts": _operation_counts,
    "reduction": _reduction,
}


def run_selftest(seed: int = DEFAULT_SEED, inject_fault: str | None = None) -> list[SuiteResult]:
    if inject_fault is not None and inject_fault not in FAULTS:
        raise ValueError(f"unknown fault {inject_fault!r}")
    results = []
    for name, suite in SUITES.items():
        rng = np.random.default_rng([seed, len(results)])
        start = time.perf_counter()
        try:
            detail, passed = suite(rng, inject_fault), True
        except AssertionError as exc:
            detail, passed = str(exc) or "assertion failed", False
        results.append(SuiteResult(name, passed, detail, (time.perf_counter() - start) * 1e3))
    return results
