from typing import Optional, Sequence

import numpy as np

from dynamics.states import DeviationState
from errors import ConfigurationError, DimensionError


def check_t2(t2_s: Sequence[float], n_qubits: int) -> np.ndarray:
    t2 = np.asarray(t2_s, dtype=float)
    if t2.shape != (n_qubits,):
        raise DimensionError(f"Need {n_qubits} T2 times, got {t2.size}")
    if np.any(~(t2 > 0)):
        raise ConfigurationError(f"T2 times must be positive, got {list(t2_s)}")
    return t2


def dephasing_mask(n_qubits: int, t2_s: Sequence[float], duration_s: float) -> np.ndarray:
    """
    Entrywise damping factors for transverse dephasing.

    Entry (a, b) decays with exp(-t/T2_q) for every qubit q whose bit differs
    between a and b. On Pauli strings this scales each X/Y factor by
    exp(-t/T2_q) and leaves E/Z untouched. T2 = inf disables a qubit.
    """
    if duration_s < 0:
        raise ConfigurationError(f"Dephasing duration must be nonnegative, got {duration_s}")
    t2 = check_t2(t2_s, n_qubits)
    idx = np.arange(2 ** n_qubits)
    mask = np.ones((idx.size, idx.size))
    for q in range(1, n_qubits + 1):
        bits = (idx >> (n_qubits - q)) & 1
        flips = bits[:, None] != bits[None, :]
        mask = np.where(flips, mask * np.exp(-duration_s / t2[q - 1]), mask)
    return mask


def apply_dephasing(
    state: DeviationState,
    t2_s: Sequence[float],
    duration_s: float,
    mask: Optional[np.ndarray] = None,
) -> DeviationState:
    """Per-qubit transverse decay of a deviation state over `duration_s`; the label is kept."""
    if mask is None:
        mask = dephasing_mask(state.n_qubits, t2_s, duration_s)
    elif mask.shape != state.matrix.shape:
        raise DimensionError(f"Mask shape {mask.shape} does not match state shape {state.matrix.shape}")
    return DeviationState(matrix=state.matrix * mask, label=state.label)
