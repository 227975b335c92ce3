"""Hamiltonian simulation for dense Hermitian matrices by a linear combination of quantum walks."""

from .evolve import apply_unitary_via_embedding, estimate_resources, evolve
from .linalg import HermitianOperator, matrix_exponential, validate_hermitian

__all__ = [
    "HermitianOperator",
    "apply_unitary_via_embedding",
    "estimate_resources",
    "evolve",
    "matrix_exponential",
    "validate_hermitian",
]
