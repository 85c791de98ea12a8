import logging
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from errors import AlgebraError, DimensionError
from spins.pauli import OperatorMatrix, register_size

logger = logging.getLogger(__name__)


class AlgebraBasis(BaseModel):
    """
    Orthonormal basis of a matrix Lie algebra.

    elements are skew-Hermitian (i x Hermitian) and orthonormal under the
    Hilbert-Schmidt inner product <A, B> = Tr(A^dagger B).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n_qubits: int
    elements: np.ndarray
    tol: float
    generator_count: int

    @property
    def dim(self) -> int:
        return int(self.elements.shape[0])

    def vectors(self) -> np.ndarray:
        """Real (dim, 2 d^2) representation; dot products equal Tr(A^dagger B)."""
        return _to_vectors(self.elements)

    def gram(self) -> np.ndarray:
        vecs = self.vectors()
        return vecs @ vecs.T


def _to_vectors(mats: np.ndarray) -> np.ndarray:
    mats = np.asarray(mats)
    flat = mats.reshape(mats.shape[0], -1)
    return np.concatenate([flat.real, flat.imag], axis=1)


def _from_vector(vec: np.ndarray, dim: int) -> np.ndarray:
    half = dim * dim
    return (vec[:half] + 1j * vec[half:]).reshape(dim, dim)


def as_skew_hermitian(op: OperatorMatrix, atol: float = 1e-10) -> np.ndarray:
    """Return op if skew-Hermitian, i*op if Hermitian; otherwise raise AlgebraError."""
    op = np.asarray(op, dtype=complex)
    scale = max(np.linalg.norm(op), 1.0)
    if np.linalg.norm(op + op.conj().T) <= atol * scale:
        return op
    if np.linalg.norm(op - op.conj().T) <= atol * scale:
        return 1j * op
    raise AlgebraError("Generator is neither Hermitian nor skew-Hermitian")


class _GramSchmidt:
    """Incremental Hilbert-Schmidt orthonormalisation with relative-norm rejection."""

    def __init__(self, dim: int, capacity: int, tol: float):
        self.dim = dim
        self.capacity = capacity
        self.tol = tol
        self.basis = np.zeros((capacity, 2 * dim * dim))
        self.elements: List[np.ndarray] = []

    @property
    def size(self) -> int:
        return len(self.elements)

    def residuals(self, vecs: np.ndarray) -> np.ndarray:
        b = self.basis[: self.size]
        return vecs - (vecs @ b.T) @ b

    def add(self, mat: np.ndarray, abs_tol: float) -> bool:
        vec = _to_vectors(mat[None])[0]
        norm = np.linalg.norm(vec)
        if norm <= abs_tol:
            return False
        res = self.residuals(vec[None])[0]
        # second pass keeps the basis orthonormal to machine precision
        res = self.residuals(res[None])[0]
        res_norm = np.linalg.norm(res)
        if res_norm <= self.tol * norm:
            return False
        if self.size >= self.capacity:
            raise AlgebraError(
                f"Algebra dimension exceeds the bound {self.capacity} for a "
                f"{self.dim}-dimensional Hilbert space"
            )
        element = _from_vector(res / res_norm, self.dim)
        element = 0.5 * (element - element.conj().T)
        element /= np.linalg.norm(element)
        self.basis[self.size] = _to_vectors(element[None])[0]
        self.elements.append(element)
        return True


def closure(generators: Sequence[OperatorMatrix], tol: float = 1e-8) -> AlgebraBasis:
    """
    Smallest matrix Lie algebra containing the generators.

    Hermitian generators are multiplied by i. Commutators are expanded in a
    fixed order: every new basis element is bracketed with all earlier ones,
    and a candidate is kept when its residual after projection exceeds
    tol x its norm. Generators whose norm is below tol x the largest generator
    norm are ignored.
    """
    if not generators:
        raise AlgebraError("closure needs at least one generator")
    if tol <= 0:
        raise AlgebraError(f"Tolerance must be positive, got {tol}")
    shapes = {np.shape(g) for g in generators}
    if len(shapes) != 1:
        raise DimensionError(f"Generators have mismatched shapes {sorted(shapes)}")
    n = register_size(generators[0])
    dim = 2 ** n

    skew = [as_skew_hermitian(g) for g in generators]
    traceless = all(abs(np.trace(g)) <= 1e-9 * max(np.linalg.norm(g), 1.0) for g in skew)
    capacity = 4 ** n - 1 if traceless else 4 ** n

    scale = max(np.linalg.norm(g) for g in skew)
    gs = _GramSchmidt(dim, capacity, tol)
    for g in skew:
        gs.add(g / scale, abs_tol=tol)

    p = 1
    while p < gs.size:
        current = gs.elements[p]
        earlier = np.stack(gs.elements[:p])
        brackets = current @ earlier - earlier @ current
        vecs = _to_vectors(brackets)
        norms = np.linalg.norm(vecs, axis=1)
        res_norms = np.linalg.norm(gs.residuals(vecs), axis=1)
        for idx in np.flatnonzero((norms > tol) & (res_norms > tol * norms)):
            gs.add(brackets[idx], abs_tol=tol)
        if p % 50 == 0:
            logger.debug("closure: processed %d elements, dimension %d", p, gs.size)
        p += 1

    logger.info("Lie closure of %d generators on %d qubits: dimension %d", len(generators), n, gs.size)
    return AlgebraBasis(
        n_qubits=n,
        elements=np.stack(gs.elements) if gs.elements else np.zeros((0, dim, dim), dtype=complex),
        tol=tol,
        generator_count=len(generators),
    )


def membership(op: OperatorMatrix, basis: AlgebraBasis, tol: float = 1e-6) -> Tuple[bool, float]:
    """
    Relative distance of op from span(basis).

    Returns:
        (in_algebra, residual) with residual = |op - P op| / |op|.
    """
    op = np.asarray(op, dtype=complex)
    dim = 2 ** basis.n_qubits
    if op.shape != (dim, dim):
        raise DimensionError(f"Operator shape {op.shape} does not match algebra dimension {dim}")
    skew = as_skew_hermitian(op)
    vec = _to_vectors(skew[None])[0]
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        return True, 0.0
    if basis.dim == 0:
        return False, 1.0
    b = basis.vectors()
    residual = float(np.linalg.norm(vec - b.T @ (b @ vec)) / norm)
    return residual < tol, residual


def ideal_closure(
    drift: OperatorMatrix, generators: Sequence[OperatorMatrix], tol: float = 1e-8
) -> AlgebraBasis:
    """
    Smallest ideal of closure([drift, *generators]) that contains the generators.

    The span of the generators is first made invariant under ad(drift)
    (repeated brackets [drift, .] until no new direction appears) and then
    closed. It has codimension 0 or 1 in the full algebra, and at a fixed
    duration only one coset of its group is reachable.
    """
    if not generators:
        raise AlgebraError("ideal_closure needs at least one generator")
    skew = [as_skew_hermitian(g) for g in generators]
    n = register_size(skew[0])
    dim = 2 ** n
    h = as_skew_hermitian(drift)
    h_norm = np.linalg.norm(h)
    if h_norm > 0:
        h = h / h_norm

    scale = max(np.linalg.norm(g) for g in skew)
    gs = _GramSchmidt(dim, 4 ** n, tol)
    for g in skew:
        gs.add(g / scale, abs_tol=tol)
    p = 0
    while h_norm > 0 and p < gs.size:
        current = gs.elements[p]
        gs.add(h @ current - current @ h, abs_tol=tol)
        p += 1
    logger.debug("ad(drift)-invariant span of %d generators: dimension %d", len(generators), gs.size)
    return closure(gs.elements, tol)
