from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from procfock.choi import transport_vector
from procfock.errors import DuplicateSector, IndexOutOfRange, InvalidDimension, NonUnitary, ShapeError
from procfock.fock import (
    FockSpec,
    SectorOperator,
    annihilation_op,
    basis_index,
    creation_matrix,
    creation_op,
    embed_in_modes,
    fock_basis,
    fock_cj_matrix,
    fock_space,
    fock_transport_vector,
    k_transport_vector,
    lift_sectors,
    lift_single_particle_unitary,
    occupation_state,
    sector,
)
from procfock.tensor import apply_op

from conftest import haar
from fock_oracles import lift_by_substitution, lift_element


def test_basis_examples():
    assert fock_basis(FockSpec(1, "boson", 2)) == ((0,), (1,), (2,))
    assert fock_basis(FockSpec(2, "fermion")) == ((0, 0), (1, 0), (0, 1), (1, 1))
    assert len(fock_basis(FockSpec(2, "boson", 2))) == 6


@pytest.mark.parametrize("d,n", [(1, 3), (2, 2), (3, 2), (3, 4)])
def test_boson_basis_size(d, n):
    brute = [s for s in product(range(n + 1), repeat=d) if sum(s) <= n]
    assert sorted(fock_basis(FockSpec(d, "boson", n))) == sorted(brute)


def test_fermion_cutoff_clipped():
    assert FockSpec(2, "fermion", 5).cutoff == 2
    assert len(fock_basis(FockSpec(3, "fermion"))) == 8


def test_spec_validation():
    with pytest.raises(InvalidDimension):
        FockSpec(0, "boson", 1)
    with pytest.raises(InvalidDimension):
        FockSpec(2, "boson")
    with pytest.raises(ValueError):
        FockSpec(2, "anyon", 1)


def test_boson_creation_entries():
    a = creation_op(FockSpec(1, "boson", 2), 1).matrix
    assert a[1, 0] == 1 and abs(a[2, 1] - np.sqrt(2)) < 1e-15
    assert np.count_nonzero(a) == 2


def test_fermion_anticommute_on_vacuum():
    spec = FockSpec(2, "fermion")
    a1, a2 = creation_matrix(spec, 1), creation_matrix(spec, 2)
    vac = np.eye(4)[0]
    assert np.array_equal(a1 @ a2 @ vac, -(a2 @ a1 @ vac))
    assert np.array_equal(a1 @ a1, np.zeros((4, 4)))


def test_mode_range():
    with pytest.raises(IndexOutOfRange):
        creation_op(FockSpec(2, "boson", 1), 3)
    with pytest.raises(IndexOutOfRange):
        annihilation_op(FockSpec(2, "boson", 1), 0)


def test_annihilation_is_adjoint():
    spec = FockSpec(2, "boson", 3)
    assert np.array_equal(annihilation_op(spec, 2).matrix, creation_op(spec, 2).matrix.conj().T)


def test_boson_cutoff_edge():
    # the canonical commutator fails exactly on the top sector
    spec = FockSpec(1, "boson", 2)
    ad = creation_matrix(spec, 1)
    comm = ad.conj().T @ ad - ad @ ad.conj().T
    assert np.allclose(np.diag(comm), [1, 1, -2])


def test_k_transport_examples():
    v0 = k_transport_vector(FockSpec(1, "boson", 2), 0)
    assert v0.tensor[0, 0] == 1 and np.count_nonzero(v0.tensor) == 1
    v2 = k_transport_vector(FockSpec(1, "boson", 2), 2)
    assert abs(v2.tensor[2, 2] - 1) < 1e-15 and np.count_nonzero(np.abs(v2.tensor) > 1e-15) == 1
    v1 = k_transport_vector(FockSpec(2, "boson", 1), 1)
    assert np.array_equal(v1.tensor, np.diag([0, 1, 1]))


@settings(max_examples=20, deadline=None)
@given(d=st.integers(1, 3), n=st.integers(0, 3), fermion=st.booleans())
def test_k_transport_norm_is_sector_dim(d, n, fermion):
    spec = FockSpec(d, "fermion" if fermion else "boson", n)
    for k in range(spec.cutoff + 1):
        v = k_transport_vector(spec, k)
        assert abs(np.vdot(v.amps, v.amps).real - len(sector(spec, k))) < 1e-12


def test_fock_transport_reduces_to_plain_transport():
    spec = FockSpec(1, "boson", 1)
    f = fock_transport_vector(spec, "X", "Y")
    plain = transport_vector(fock_space(spec, "X"), fock_space(spec, "Y"))
    assert np.array_equal(f.tensor, plain.tensor)
    assert np.array_equal(fock_transport_vector(FockSpec(1, "boson", 2)).tensor, np.eye(3))
    assert np.array_equal(fock_transport_vector(FockSpec(1, "fermion")).tensor, np.eye(2))


def test_fock_transport_is_identity_pairing():
    for spec in (FockSpec(2, "boson", 3), FockSpec(3, "fermion")):
        assert np.abs(fock_transport_vector(spec).tensor - np.eye(len(fock_basis(spec)))).max() < 1e-12


def test_lift_identity():
    spec = FockSpec(3, "boson", 2)
    assert np.abs(lift_single_particle_unitary(np.eye(3), spec).matrix - np.eye(10)).max() < 1e-14


def test_lift_rejects_nonunitary():
    with pytest.raises(NonUnitary):
        lift_single_particle_unitary(np.array([[1, 1], [0, 1]]), FockSpec(2, "boson", 1))
    with pytest.raises(ShapeError):
        lift_single_particle_unitary(np.eye(3), FockSpec(2, "boson", 1))


def test_lift_hadamard_two_photons():
    # Hong-Ou-Mandel: |11> never survives a balanced splitter
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    spec = FockSpec(2, "boson", 2)
    m = lift_single_particle_unitary(h, spec).matrix
    idx = basis_index(spec)
    out = m[:, idx[(1, 1)]]
    assert abs(out[idx[(1, 1)]]) < 1e-15
    assert abs(abs(out[idx[(2, 0)]]) ** 2 - 0.5) < 1e-14


@pytest.mark.parametrize("stats", ["boson", "fermion"])
def test_lift_matches_permanent_oracle(stats, rng):
    for d in (2, 3):
        spec = FockSpec(d, stats, 3)
        u = haar(d, rng)
        m = lift_single_particle_unitary(u, spec).matrix
        basis = fock_basis(spec)
        expect = np.array([[lift_element(u, t, s, stats == "fermion") for s in basis] for t in basis])
        assert np.abs(m - expect).max() < 1e-10


@pytest.mark.parametrize("stats", ["boson", "fermion"])
def test_lift_matches_ladder_substitution(stats, rng):
    for d in (1, 2, 3):
        spec = FockSpec(d, stats, 2)
        u = haar(d, rng)
        m = lift_single_particle_unitary(u, spec).matrix
        assert np.abs(m - lift_by_substitution(u, spec)).max() < 1e-10


@settings(max_examples=25, deadline=None)
@given(d=st.integers(1, 3), n=st.integers(1, 3), fermion=st.booleans(), seed=st.integers(0, 2**32 - 1))
def test_lift_homomorphism_and_unitarity(d, n, fermion, seed):
    rng = np.random.default_rng(seed)
    spec = FockSpec(d, "fermion" if fermion else "boson", n)
    u1, u2 = haar(d, rng), haar(d, rng)
    m1 = lift_single_particle_unitary(u1, spec).matrix
    m2 = lift_single_particle_unitary(u2, spec).matrix
    assert np.abs(m2 @ m1 - lift_single_particle_unitary(u2 @ u1, spec).matrix).max() < 1e-10
    assert np.abs(m1.conj().T @ m1 - np.eye(len(m1))).max() < 1e-10
    # number conservation: no amplitude between different sectors
    totals = np.array([sum(s) for s in fock_basis(spec)])
    assert np.abs(m1[totals[:, None] != totals[None, :]]).max(initial=0) == 0


def test_lift_labels():
    spec = FockSpec(2, "boson", 1)
    op = lift_single_particle_unitary(np.eye(2), spec, "F_I", "F_O")
    out = apply_op(op, occupation_state(spec, (1, 0), "F_I"))
    assert out.labels == ("F_O",)


def test_sector_operator_shape_check():
    with pytest.raises(ShapeError):
        SectorOperator(FockSpec(2, "boson", 2), 1, np.eye(3))


def test_cj_vacuum_sector_is_rank_one():
    spec = FockSpec(2, "boson", 2)
    m = fock_cj_matrix([SectorOperator(spec, 0, np.ones((1, 1)))]).matrix
    assert m[0, 0] == 1 and np.count_nonzero(m) == 1


def test_cj_of_identity_lift_is_sum_of_sector_projectors():
    spec = FockSpec(2, "boson", 2)
    m = fock_cj_matrix(lift_sectors(np.eye(2), spec)).matrix
    expect = sum(
        np.outer(v.amps, v.amps.conj()) for v in (k_transport_vector(spec, k) for k in range(3))
    ).T
    assert np.abs(m - expect).max() < 1e-14


def test_cj_phase_independent_diagonal():
    spec = FockSpec(1, "boson", 1)
    diags = []
    for phi in (0.0, 0.7, 2.1):
        ops = lift_sectors(np.array([[np.exp(1j * phi)]]), spec)
        diags.append(np.diag(fock_cj_matrix(ops).matrix))
    assert np.abs(diags[0] - diags[1]).max() < 1e-15 and np.abs(diags[0] - diags[2]).max() < 1e-15


def test_cj_duplicate_sector():
    spec = FockSpec(1, "boson", 1)
    op = SectorOperator(spec, 1, np.eye(1))
    with pytest.raises(DuplicateSector):
        fock_cj_matrix([op, op])


def test_embed_two_modes_single_photon():
    spec = FockSpec(2, "boson", 1)
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    big = embed_in_modes(lift_single_particle_unitary(h, spec).matrix, spec)
    assert big.shape == (4, 4)
    assert big[3, 3] == 1 and big[0, 0] == 1
    assert np.abs(big.conj().T @ big - np.eye(4)).max() < 1e-15
