from functools import reduce
from itertools import product
from typing import Dict, List, Optional

import numpy as np
from cachetools import LRUCache, cached
from pydantic import BaseModel, ConfigDict, field_validator

from errors import DimensionError

# Dense complex 2^n x 2^n matrix; Hamiltonians, unitaries and deviation states.
OperatorMatrix = np.ndarray

PAULI_LABELS = "EXYZ"

PAULI_MATRICES: Dict[str, np.ndarray] = {
    "E": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class PauliString(BaseModel):
    """
    Labeled tensor product of single-qubit {E, X, Y, Z} with a real coefficient.

    labels[0] acts on qubit 1, the most significant Kronecker factor,
    so "XZ" is X_1 (x) Z_2.
    """
    model_config = ConfigDict(frozen=True)

    labels: str
    coefficient: float = 1.0

    @field_validator("labels")
    @classmethod
    def _check_labels(cls, value: str) -> str:
        value = value.upper()
        if not value:
            raise ValueError("Pauli string needs at least one label")
        bad = [c for c in value if c not in PAULI_LABELS]
        if bad:
            raise ValueError(f"Unknown Pauli labels {bad}. Allowed: {list(PAULI_LABELS)}")
        return value

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def is_identity(self) -> bool:
        """The all-E string; the only string with nonzero trace."""
        return set(self.labels) == {"E"}

    @property
    def support(self) -> List[int]:
        """1-based qubits carrying a non-identity factor."""
        return [i + 1 for i, c in enumerate(self.labels) if c != "E"]

    @classmethod
    def from_sites(cls, n_qubits: int, sites: Dict[int, str], coefficient: float = 1.0) -> "PauliString":
        """Build a string from {qubit: label} with identities elsewhere (1-based qubits)."""
        labels = ["E"] * n_qubits
        for qubit, label in sites.items():
            if not 1 <= qubit <= n_qubits:
                raise DimensionError(f"Qubit {qubit} outside register of {n_qubits} qubits")
            labels[qubit - 1] = label
        return cls(labels="".join(labels), coefficient=coefficient)

    def __str__(self) -> str:
        return f"{self.coefficient:+.6g}*{self.labels}"


def pauli_to_matrix(p: PauliString, n_qubits: Optional[int] = None) -> OperatorMatrix:
    """coefficient x Kronecker product of the single-qubit matrices in qubit order."""
    if n_qubits is not None and p.n_qubits != n_qubits:
        raise DimensionError(
            f"Pauli string '{p.labels}' has {p.n_qubits} labels, register has {n_qubits} qubits"
        )
    mat = reduce(np.kron, (PAULI_MATRICES[c] for c in p.labels))
    return p.coefficient * mat


def site_operator(n_qubits: int, sites: Dict[int, str], coefficient: float = 1.0) -> OperatorMatrix:
    """Matrix of a Pauli string given as {qubit: label}."""
    return pauli_to_matrix(PauliString.from_sites(n_qubits, sites, coefficient))


def pauli_labels(n_qubits: int) -> List[str]:
    """All 4^n label strings in lexicographic E < X < Y < Z order."""
    return ["".join(t) for t in product(PAULI_LABELS, repeat=n_qubits)]


@cached(cache=LRUCache(maxsize=8))
def pauli_stack(n_qubits: int) -> np.ndarray:
    """All 4^n Pauli matrices stacked as (4^n, 2^n, 2^n), in pauli_labels order."""
    return np.stack([pauli_to_matrix(PauliString(labels=lab)) for lab in pauli_labels(n_qubits)])


def register_size(m: OperatorMatrix) -> int:
    """Number of qubits of a square 2^n matrix."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"Expected a square matrix, got shape {m.shape}")
    dim = m.shape[0]
    n = dim.bit_length() - 1
    if dim < 2 or 2 ** n != dim:
        raise DimensionError(f"Matrix dimension {dim} is not a power of two")
    return n


def pauli_coefficients(m: OperatorMatrix) -> np.ndarray:
    """Complex coefficients Tr(P^dagger m) / 2^n for every Pauli string P."""
    n = register_size(m)
    paulis = pauli_stack(n)
    # Tr(P^dagger m) = sum_ij conj(P_ij) m_ij
    return np.einsum("pij,ij->p", paulis.conj(), np.asarray(m, dtype=complex)) / 2 ** n


def matrix_to_pauli(m: OperatorMatrix, cutoff: float = 1e-10) -> List[PauliString]:
    """
    Decompose a Hermitian matrix into Pauli strings.

    Args:
        m: square 2^n matrix.
        cutoff: strings with |c_p| <= cutoff are dropped.

    Returns:
        PauliStrings with real coefficients, in lexicographic label order.
    """
    coeffs = pauli_coefficients(m)
    keep = np.flatnonzero(np.abs(coeffs) > cutoff)
    if keep.size and np.max(np.abs(coeffs[keep].imag)) > max(cutoff, 1e-9 * np.max(np.abs(coeffs))):
        raise ValueError("Matrix is not Hermitian; Pauli coefficients are complex")
    labels = pauli_labels(register_size(m))
    return [PauliString(labels=labels[i], coefficient=float(coeffs[i].real)) for i in keep]


def strings_to_matrix(strings: List[PauliString], n_qubits: int) -> OperatorMatrix:
    """Sum of Pauli strings as one matrix."""
    out = np.zeros((2 ** n_qubits, 2 ** n_qubits), dtype=complex)
    for s in strings:
        out += pauli_to_matrix(s, n_qubits)
    return out
