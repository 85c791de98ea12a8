from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg as la
from pydantic import BaseModel, ConfigDict, model_validator

from errors import ConfigurationError
from spins.pauli import OperatorMatrix, site_operator

# (coefficient, {qubit: label}) terms of a Hermitian generator
GeneratorTerms = List[Tuple[float, Dict[int, str]]]


class GateTarget(BaseModel):
    """Full-register target unitary U = exp(i G) with identity on all other qubits."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    unitary: np.ndarray
    generator: Optional[np.ndarray] = None
    qubits: Tuple[int, ...] = ()
    theta: Optional[float] = None
    phase_insensitive: bool = True

    @model_validator(mode="after")
    def _check_unitary(self) -> "GateTarget":
        u = self.unitary
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError(f"Target unitary must be square, got shape {u.shape}")
        if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-10:
            raise ValueError(f"Target '{self.name}' is not unitary")
        return self

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    @classmethod
    def from_generator(cls, name: str, generator: OperatorMatrix, **kwargs) -> "GateTarget":
        return cls(name=name, unitary=la.expm(1j * generator), generator=generator, **kwargs)


class Gate(ABC):
    """
    Abstract base class for target-register gates U = exp(i G(theta)).
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Unique identifier (e.g. 'Uxy')."""
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        pass

    @property
    @abstractmethod
    def n_qubits(self) -> int:
        """Number of target qubits the gate acts on."""
        pass

    @property
    def default_theta(self) -> float:
        return 0.0

    @property
    def sweep_frequency(self) -> int:
        """f such that transformed states oscillate as cos(f theta), sin(f theta)."""
        return 1

    @abstractmethod
    def generator_terms(self, theta: float, qubits: Tuple[int, ...]) -> GeneratorTerms:
        """Hermitian generator G with U = exp(i G), as Pauli terms on `qubits`."""
        pass

    def validate_qubits(self, qubits: Tuple[int, ...]) -> Tuple[int, ...]:
        qubits = tuple(int(q) for q in qubits)
        if len(qubits) != self.n_qubits:
            raise ConfigurationError(
                f"Gate '{self.name}' acts on {self.n_qubits} qubit(s), got {list(qubits)}"
            )
        if len(set(qubits)) != len(qubits):
            raise ConfigurationError(f"Gate '{self.name}' needs distinct qubits, got {list(qubits)}")
        return qubits

    def generator(self, theta: float, qubits: Tuple[int, ...], n_qubits: int) -> OperatorMatrix:
        qubits = self.validate_qubits(qubits)
        terms = self.generator_terms(theta, qubits)
        dim = 2 ** n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for coeff, sites in terms:
            out += site_operator(n_qubits, sites, coeff)
        return out

    def block_unitary(self, theta: Optional[float] = None) -> OperatorMatrix:
        """The gate on its own qubits only (2^k x 2^k)."""
        theta = self.default_theta if theta is None else theta
        qubits = tuple(range(1, self.n_qubits + 1))
        return la.expm(1j * self.generator(theta, qubits, self.n_qubits))

    def target(self, theta: Optional[float], qubits: Tuple[int, ...], n_qubits: int) -> GateTarget:
        theta = self.default_theta if theta is None else float(theta)
        qubits = self.validate_qubits(qubits)
        return GateTarget.from_generator(
            name=self.name,
            generator=self.generator(theta, qubits, n_qubits),
            qubits=qubits,
            theta=theta,
        )
