from typing import Optional, Tuple

import numpy as np
import scipy.linalg as la

from errors import ConfigurationError
from pulses.fidelity import fidelity
from spins.pauli import site_operator
from spins.system import SpinSystem


def _pair(sys: SpinSystem, pair: Optional[Tuple[int, int]]) -> Tuple[int, int]:
    if pair is not None:
        return pair
    if len(sys.targets) < 2:
        raise ConfigurationError(f"'{sys.name}' has fewer than two target qubits")
    return sys.targets[0], sys.targets[1]


def commensurate_fidelity(sys: SpinSystem, m: float, pair: Optional[Tuple[int, int]] = None) -> float:
    """
    Phase-forgiving overlap between exp(i pi tau (-nu_a Z_a - nu_b Z_b + D Z_a Z_b))
    and exp(-i pi tau (nu_a Z_a + nu_b Z_b)) on the target pair, with tau = m / D.
    """
    a, b = _pair(sys, pair)
    d_hz = sys.dipolar_matrix[a - 1, b - 1]
    if d_hz == 0.0:
        raise ConfigurationError(f"Qubits {a} and {b} have no dipolar coupling")
    tau = m / d_hz
    nu_a, nu_b = sys.shifts_hz[a - 1], sys.shifts_hz[b - 1]
    za, zb = site_operator(2, {1: "Z"}), site_operator(2, {2: "Z"})
    zz = site_operator(2, {1: "Z", 2: "Z"})
    coupled = la.expm(1j * np.pi * tau * (-nu_a * za - nu_b * zb + d_hz * zz))
    shifts_only = la.expm(-1j * np.pi * tau * (nu_a * za + nu_b * zb))
    return fidelity(coupled, shifts_only)


def commensurate_check(
    sys: SpinSystem, m: float, pair: Optional[Tuple[int, int]] = None, tol: float = 1e-9
) -> bool:
    """True when the coupling evolution at tau = m / D reduces to a global phase."""
    return commensurate_fidelity(sys, m, pair) >= 1.0 - tol
