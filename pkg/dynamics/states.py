import re
from functools import reduce
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from errors import ConfigurationError, DimensionError, StateParseError
from spins.pauli import PAULI_MATRICES, OperatorMatrix, register_size
from spins.system import SpinSystem

# Product-operator symbols; 0 and 1 are the projectors (E + Z)/2 and (E - Z)/2.
STATE_SYMBOLS: Dict[str, np.ndarray] = {
    **PAULI_MATRICES,
    "0": np.diag([1.0, 0.0]).astype(complex),
    "1": np.diag([0.0, 1.0]).astype(complex),
}

_COEFFICIENT = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\s*\*")


class DeviationState(BaseModel):
    """Traceless Hermitian deviation density matrix with an optional expression label."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray
    label: Optional[str] = None

    @model_validator(mode="after")
    def _check(self) -> "DeviationState":
        m = self.matrix
        register_size(m)
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValueError("Deviation state must be Hermitian")
        if abs(np.trace(m)) > 1e-9:
            raise ValueError(f"Deviation state must be traceless, trace = {np.trace(m)}")
        return self

    @property
    def n_qubits(self) -> int:
        return register_size(self.matrix)

    @property
    def norm(self) -> float:
        """Hilbert-Schmidt norm."""
        return float(np.linalg.norm(self.matrix))

    def __neg__(self) -> "DeviationState":
        label = None if self.label is None else f"-({self.label})"
        return DeviationState(matrix=-self.matrix, label=label)


def _traceless(m: OperatorMatrix) -> OperatorMatrix:
    d = m.shape[0]
    return m - (np.trace(m) / d) * np.eye(d)


def parse_state(expr: str, n_qubits: int) -> DeviationState:
    """
    Parse a signed sum of product-operator strings such as "EYE+EEY",
    "-1Y0" or "0.5*10X" into its deviation (traceless) matrix.

    Raises:
        StateParseError: bad length or unknown symbol, with the offending position.
    """
    dim = 2 ** n_qubits
    total = np.zeros((dim, dim), dtype=complex)
    pos, n_terms = 0, 0
    text = expr

    def skip_blanks(p: int) -> int:
        while p < len(text) and text[p].isspace():
            p += 1
        return p

    pos = skip_blanks(pos)
    if pos == len(text):
        raise StateParseError("Empty state expression", pos)
    while pos < len(text):
        sign = 1.0
        if text[pos] in "+-":
            sign = -1.0 if text[pos] == "-" else 1.0
            pos = skip_blanks(pos + 1)
        elif n_terms:
            raise StateParseError(f"Expected '+' or '-' before term, got '{text[pos]}'", pos)

        coefficient = 1.0
        match = _COEFFICIENT.match(text, pos)
        if match:
            coefficient = float(match.group(0).rstrip("* \t"))
            pos = skip_blanks(match.end())

        start = pos
        factors = []
        while pos < len(text) and not text[pos].isspace() and text[pos] not in "+-":
            symbol = text[pos].upper()
            if symbol not in STATE_SYMBOLS:
                raise StateParseError(
                    f"Unknown symbol '{text[pos]}'. Allowed: {list(STATE_SYMBOLS)}", pos
                )
            factors.append(STATE_SYMBOLS[symbol])
            pos += 1
        if len(factors) != n_qubits:
            raise StateParseError(
                f"Term '{text[start:pos]}' has {len(factors)} symbols, register has {n_qubits} qubits", start
            )
        total += sign * coefficient * reduce(np.kron, factors)
        n_terms += 1
        pos = skip_blanks(pos)
    return DeviationState(matrix=_traceless(total), label=expr.replace(" ", ""))


def apply_gate(state: DeviationState, u: OperatorMatrix) -> DeviationState:
    """U rho U^dagger."""
    u = np.asarray(u)
    if u.shape != state.matrix.shape:
        raise DimensionError(f"Gate shape {u.shape} does not match state shape {state.matrix.shape}")
    out = u @ state.matrix @ u.conj().T
    # re-symmetrize against round-off
    return DeviationState(matrix=_traceless(0.5 * (out + out.conj().T)))


class StateBasis(BaseModel):
    """Named, pairwise orthogonal deviation states spanning the states a gate family produces."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    names: Tuple[str, ...]
    states: Tuple[DeviationState, ...]

    @model_validator(mode="after")
    def _check(self) -> "StateBasis":
        if len(self.names) != len(self.states) or not self.states:
            raise ValueError("StateBasis needs one name per state and at least one state")
        for name, s in zip(self.names, self.states):
            if s.norm == 0.0:
                raise ConfigurationError(f"Basis state '{name}' has zero norm")
        mats = np.stack([s.matrix for s in self.states])
        gram = np.einsum("iab,jab->ij", mats.conj(), mats).real
        off = gram - np.diag(np.diag(gram))
        if np.max(np.abs(off)) > 1e-9 * max(1.0, np.max(np.diag(gram))):
            raise ValueError("Basis states are not pairwise orthogonal")
        return self

    @classmethod
    def from_expressions(cls, exprs: Sequence[str], n_qubits: int) -> "StateBasis":
        exprs = [e.replace(" ", "") for e in exprs]
        return cls(names=tuple(exprs), states=tuple(parse_state(e, n_qubits) for e in exprs))

    @property
    def n_qubits(self) -> int:
        return self.states[0].n_qubits

    def __len__(self) -> int:
        return len(self.states)


def overlap_coeffs(state: DeviationState, basis: StateBasis) -> np.ndarray:
    """c_i = Tr(B_i rho) / Tr(B_i B_i) for every basis state."""
    if state.matrix.shape != basis.states[0].matrix.shape:
        raise DimensionError(
            f"State shape {state.matrix.shape} does not match basis shape {basis.states[0].matrix.shape}"
        )
    coeffs = []
    for name, b in zip(basis.names, basis.states):
        norm2 = float(np.vdot(b.matrix, b.matrix).real)
        if norm2 == 0.0:
            raise ConfigurationError(f"Basis state '{name}' has zero norm")
        coeffs.append(float(np.vdot(b.matrix, state.matrix).real) / norm2)
    return np.asarray(coeffs)


def readout_expressions(n_qubits: int, pair: Tuple[int, int], spectator: str = "0") -> List[str]:
    """
    The four readout states of a target pair (a, b):
    S0_aX_b, -S0_aY_b, SX_a0_b, -SY_a0_b with projector S on every other qubit.
    """
    a, b = pair
    if spectator not in ("0", "1"):
        raise ConfigurationError(f"Spectator must be '0' or '1', got '{spectator}'")
    if a == b or not (1 <= a <= n_qubits and 1 <= b <= n_qubits):
        raise DimensionError(f"Invalid qubit pair {pair} for a {n_qubits}-qubit register")

    def build(sign: str, on_a: str, on_b: str) -> str:
        labels = [spectator] * n_qubits
        labels[a - 1], labels[b - 1] = on_a, on_b
        return sign + "".join(labels)

    return [build("", "0", "X"), build("-", "0", "Y"), build("", "X", "0"), build("-", "Y", "0")]


def readout_basis(n_qubits: int, pair: Tuple[int, int], spectator: str = "0") -> StateBasis:
    return StateBasis.from_expressions(readout_expressions(n_qubits, pair, spectator), n_qubits)


def register_readout_basis(sys: SpinSystem, pair: Optional[Tuple[int, int]] = None) -> StateBasis:
    """Readout basis on the register's first two targets (or `pair`) with its configured spectator."""
    if pair is None:
        if len(sys.targets) < 2:
            raise ConfigurationError(f"'{sys.name}' has fewer than two target qubits")
        pair = (sys.targets[0], sys.targets[1])
    return readout_basis(sys.n_qubits, pair, sys.readout_spectator)


def transverse_input(sys: SpinSystem) -> str:
    """Sum of Y_k over the target qubits, e.g. "EYE+EEY"."""
    terms = []
    for t in sys.targets:
        labels = ["E"] * sys.n_qubits
        labels[t - 1] = "Y"
        terms.append("".join(labels))
    return "+".join(terms)


def reduced_purity(psi: np.ndarray, keep: Sequence[int], n_qubits: int) -> float:
    """Tr(rho_keep^2) of a pure state vector after tracing out all qubits not in `keep` (1-based)."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != 2 ** n_qubits:
        raise DimensionError(f"State vector of length {psi.size} does not fit {n_qubits} qubits")
    keep = sorted(set(int(q) for q in keep))
    rest = [q for q in range(1, n_qubits + 1) if q not in keep]
    tensor = psi.reshape((2,) * n_qubits).transpose([q - 1 for q in keep + rest])
    mat = tensor.reshape(2 ** len(keep), 2 ** len(rest))
    rho = mat @ mat.conj().T
    rho = rho / np.trace(rho).real
    return float(np.real(np.trace(rho @ rho)))
