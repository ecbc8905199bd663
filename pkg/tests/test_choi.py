import numpy as np
import pytest

from procfock.choi import (
    InstrumentCJ,
    OuterProductSum,
    ProductOperator,
    Wire,
    amplitude_from_vectors,
    check_process_axioms,
    cj_matrix,
    cj_vector,
    contract_network,
    probability_from_matrices,
    probability_from_vectors,
    process_vector_from_wiring,
    transport_vector,
)
from procfock.errors import CoverageError, DimensionMismatch, LabelCollision
from procfock.protocols import dsd
from procfock.tensor import LabeledOperator, LabeledSpace, LabeledVector

from conftest import haar, rand_state


def _sp(label, d):
    return LabeledSpace(label, d)


def test_transport_vector():
    v = transport_vector(_sp("X", 3), _sp("Y", 3))
    assert np.array_equal(v.tensor, np.eye(3))
    with pytest.raises(DimensionMismatch):
        transport_vector(_sp("X", 2), _sp("Y", 3))


def test_cj_vector_convention(rng):
    x_i, x_o = _sp("X_I", 2), _sp("X_O", 3)
    m = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    v = cj_vector(LabeledOperator((x_i,), (x_o,), m))
    assert v.labels == ("X_I", "X_O")
    for i in range(2):
        for o in range(3):
            assert v.tensor[i, o] == np.conj(m[o, i])


def test_cj_matrix_sums_kraus_projectors(rng):
    x_i, x_o = _sp("X_I", 2), _sp("X_O", 2)
    p = 0.3
    kraus = [np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * np.diag([1, -1])]
    ops = [LabeledOperator((x_i,), (x_o,), k) for k in kraus]
    m = cj_matrix(ops)
    expect = sum(np.outer(cj_vector(o).amps, cj_vector(o).amps.conj()) for o in ops)
    assert np.abs(m.matrix - expect).max() < 1e-12
    assert np.linalg.eigvalsh(m.matrix).min() > -1e-12
    # trace-preserving channel: partial trace over the output is the identity
    pt = np.einsum("iojo->ij", m.matrix.reshape(2, 2, 2, 2))
    assert np.abs(pt - np.eye(2)).max() < 1e-12


def test_wire_validation():
    with pytest.raises(DimensionMismatch):
        Wire(_sp("A", 2), _sp("B", 3))
    with pytest.raises(LabelCollision):
        Wire(_sp("A", 2), _sp("A", 2))
    w = Wire(_sp("A", 2), _sp("B", 2))
    with pytest.raises(LabelCollision):
        process_vector_from_wiring([w, Wire(_sp("A", 2), _sp("C", 2))])


def _two_gate(psi, u):
    """Preparation P -> unitary G -> measurement M, as a small dense test circuit."""
    p_o, g_i, g_o, m_i = (_sp(l, 2) for l in ("P_O", "G_I", "G_O", "M_I"))
    W = process_vector_from_wiring([Wire(p_o, g_i), Wire(g_o, m_i)])
    gates = [
        InstrumentCJ.pure("P", LabeledOperator((), (p_o,), psi.reshape(2, 1))),
        InstrumentCJ.pure("G", LabeledOperator((g_i,), (g_o,), u)),
    ]
    return gates, W, m_i


def test_vector_rule_matches_direct(rng):
    psi, u = rand_state(2, rng), haar(2, rng)
    gates, W, m_i = _two_gate(psi, u)
    for k in range(2):
        meas = InstrumentCJ.pure("M", LabeledOperator((m_i,), (), np.eye(2)[k].reshape(1, 2)))
        p = probability_from_vectors(gates + [meas], W)
        assert abs(p - abs((u @ psi)[k]) ** 2) < 1e-12
        assert abs(p - probability_from_vectors(gates + [meas], W, dense=True)) < 1e-14


def test_matrix_rule_matches_vector_rule(rng):
    psi, u = rand_state(2, rng), haar(2, rng)
    gates, W, m_i = _two_gate(psi, u)
    meas = InstrumentCJ.pure("M", LabeledOperator((m_i,), (), np.array([[1, 0]])))
    gates = gates + [meas]
    p_vec = probability_from_vectors(gates, W)
    dense = W.rank_one().dense()
    assert abs(probability_from_matrices(gates, dense) - p_vec) < 1e-12
    assert abs(probability_from_matrices(gates, W.rank_one()) - p_vec) < 1e-12


def test_channel_gate_in_dsd():
    # fully dephasing one arm destroys the interference: both detectors at 1/2
    gates, W = dsd.build_dsd(dsd.DsdInputs(0, 0), (1, 0))
    a = gates[3]
    kraus = [LabeledOperator(a.in_spaces, a.out_spaces, np.diag(e)) for e in ([1, 0], [0, 1])]
    gates[3] = InstrumentCJ.channel("A", kraus)
    p = probability_from_matrices(gates, W.rank_one())
    assert abs(p - 0.5) < 1e-12


def test_coverage_errors():
    gates, W = dsd.build_dsd(dsd.DsdInputs(0, 0), (1, 0))
    with pytest.raises(CoverageError):
        probability_from_vectors(gates[:-1], W)
    with pytest.raises(CoverageError):
        probability_from_vectors(gates + [gates[0]], W)


def test_contract_network_keep_untouched():
    gates, W = dsd.build_dsd(dsd.DsdInputs(0, 0), (1, 0))
    state = contract_network([gates[0].vector, gates[1].vector], W, keep_untouched=True)
    assert sorted(state.labels) == sorted(l for l in W.labels if l not in ("L_O", "V_O"))


def test_amplitude_dense_equals_lazy():
    for a in (0, 1):
        gates, W = dsd.build_dsd(dsd.DsdInputs(a, 1), (0, 1))
        assert abs(amplitude_from_vectors(gates, W) - amplitude_from_vectors(gates, W, dense=True)) < 1e-14


def test_outer_product_sum_spectrum(rng):
    x = _sp("X", 3)
    v1, v2 = LabeledVector((x,), rand_state(3, rng)), LabeledVector((x,), rand_state(3, rng))
    ops = OuterProductSum(((0.5, v1), (2.0, v2)))
    dense = ops.dense().matrix
    ev = np.sort(np.linalg.eigvalsh(dense))
    nz = np.sort(ops.nonzero_spectrum())
    assert np.abs(ev[-2:] - nz[-2:]).max() < 1e-12
    assert abs(ops.trace() - np.trace(dense).real) < 1e-12


def test_axioms_single_wire():
    W = process_vector_from_wiring([Wire(_sp("A_O", 3), _sp("B_I", 3))])
    report = check_process_axioms(W.process_matrix(), [3, 1])
    assert report.positive and report.trace_ok and report.trace_value == 3


def test_axioms_detect_bad_matrix():
    x = _sp("X", 2)
    bad = LabeledOperator((x,), (x,), np.diag([3.0, -1.0]))
    report = check_process_axioms(bad, [1])
    assert not report.positive and not report.trace_ok


def test_product_operator_trace_multiplies():
    W = dsd.dsd_process_vector().process_matrix()
    assert isinstance(W, ProductOperator)
    report = check_process_axioms(W, [2] * 8)
    assert report.trace_value == 256


def test_transport_is_cj_of_identity():
    x, y = _sp("X", 3), _sp("Y", 3)
    assert np.array_equal(transport_vector(x, y).tensor, cj_vector(LabeledOperator((x,), (y,), np.eye(3))).tensor)


def test_wiring_order_invariant():
    wires = dsd.dsd_wires()
    a = process_vector_from_wiring(wires).vector
    b = process_vector_from_wiring(wires[::-1]).vector
    assert a.allclose(b, atol=0)


def test_matrix_and_vector_rules_agree_on_dsd(rng):
    W = dsd.dsd_process_vector()
    rank_one = W.rank_one()
    worst = 0.0
    for _ in range(50):
        ph = np.exp(1j * rng.uniform(0, 2 * np.pi, size=4))
        a, b = rng.integers(0, 2, size=2)
        gates = dsd.dsd_gates(
            alice_op=np.diag([1, ph[0]]),
            bob_op=np.diag([1, ph[1]]),
            splitter=np.diag([1, 1, ph[2], 1]) @ dsd.beam_splitter_matrix(),
            splitter_prime=dsd.beam_splitter_matrix() @ np.diag([1, ph[3], 1, 1]),
            alice_effect=np.eye(2)[a],
            bob_effect=np.eye(2)[b],
        )
        worst = max(worst, abs(probability_from_matrices(gates, rank_one) - probability_from_vectors(gates, W)))
    assert worst < 1e-10
