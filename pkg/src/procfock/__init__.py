"""Process-matrix simulation with labeled tensors and a truncated Fock-space layer."""

from .choi import (
    AxiomReport,
    InstrumentCJ,
    OuterProductSum,
    ProcessVector,
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
from .errors import ProcessError
from .fock import (
    FockSpec,
    SectorOperator,
    annihilation_op,
    creation_op,
    fock_basis,
    fock_cj_matrix,
    fock_transport_vector,
    k_transport_vector,
    lift_single_particle_unitary,
)
from .tensor import (
    LabeledOperator,
    LabeledSpace,
    LabeledVector,
    apply_op,
    basis_state,
    declare_space,
    inner,
    partial_inner,
    tensor,
)

__version__ = "0.1.0"

__all__ = [
    "AxiomReport",
    "InstrumentCJ",
    "OuterProductSum",
    "ProcessVector",
    "ProductOperator",
    "Wire",
    "amplitude_from_vectors",
    "check_process_axioms",
    "cj_matrix",
    "cj_vector",
    "contract_network",
    "probability_from_matrices",
    "probability_from_vectors",
    "process_vector_from_wiring",
    "transport_vector",
    "ProcessError",
    "FockSpec",
    "SectorOperator",
    "annihilation_op",
    "creation_op",
    "fock_basis",
    "fock_cj_matrix",
    "fock_transport_vector",
    "k_transport_vector",
    "lift_single_particle_unitary",
    "LabeledOperator",
    "LabeledSpace",
    "LabeledVector",
    "apply_op",
    "basis_state",
    "declare_space",
    "inner",
    "partial_inner",
    "tensor",
]
