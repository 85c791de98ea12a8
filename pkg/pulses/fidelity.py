from typing import Union

import numpy as np

from errors import DimensionError
from gates.base import GateTarget
from spins.pauli import OperatorMatrix


def trace_overlap(u: OperatorMatrix, target_unitary: OperatorMatrix) -> complex:
    """Tr(U_target^dagger U)."""
    u = np.asarray(u)
    if u.shape != target_unitary.shape:
        raise DimensionError(f"Propagator shape {u.shape} does not match target shape {target_unitary.shape}")
    return complex(np.vdot(target_unitary, u))


def fidelity(u: OperatorMatrix, target: Union[GateTarget, OperatorMatrix], phase_insensitive: bool = True) -> float:
    """
    Normalised gate overlap.

    phase-insensitive: |Tr(U_t^dagger U)|^2 / d^2
    phase-sensitive:   max(0, Re Tr(U_t^dagger U) / d)
    """
    if isinstance(target, GateTarget):
        target_unitary, phase_insensitive = target.unitary, target.phase_insensitive
    else:
        target_unitary = np.asarray(target)
    d = target_unitary.shape[0]
    g = trace_overlap(u, target_unitary)
    if phase_insensitive:
        value = abs(g) ** 2 / d ** 2
    else:
        value = max(0.0, g.real / d)
    return float(min(1.0, value))
