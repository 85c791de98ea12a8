from typing import Tuple, Union

import numpy as np

from errors import DimensionError
from pulses.sequence import PulseSequence
from spins.pauli import OperatorMatrix
from spins.system import ControlMode, ControlModel, SpinSystem


def as_control_model(system: Union[SpinSystem, ControlModel], mode: ControlMode = "selective") -> ControlModel:
    if isinstance(system, ControlModel):
        return system
    return ControlModel.from_system(system, mode)


def check_channels(model: ControlModel, pulse: PulseSequence) -> None:
    if pulse.n_channels != model.n_channels:
        raise DimensionError(
            f"Pulse has {pulse.n_channels} channels, control model has {model.n_channels} ({list(model.labels)})"
        )


def segment_hamiltonians(model: ControlModel, amplitudes_hz: np.ndarray) -> np.ndarray:
    """H_drift + sum_k pi u_jk H_k for every segment, shape (N, d, d)."""
    controls = np.stack(model.controls)
    return model.drift[None] + np.pi * np.einsum("nk,kab->nab", amplitudes_hz, controls)


def segment_eigensystems(hamiltonians: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Batched Hermitian eigendecomposition: energies (N, d), vectors (N, d, d)."""
    return np.linalg.eigh(hamiltonians)


def propagators_from_eig(energies: np.ndarray, vectors: np.ndarray, dt_s: float) -> np.ndarray:
    """exp(-i H dt) = V diag(exp(-i E dt)) V^dagger per segment."""
    phases = np.exp(-1j * dt_s * energies)
    return np.einsum("nij,nj,nkj->nik", vectors, phases, vectors.conj())


def expm_derivative_weights(energies: np.ndarray, dt_s: float) -> np.ndarray:
    """
    Divided differences Phi_ab of exp(-i E dt) in the eigenbasis; the exact
    directional derivative of exp(-i H dt) along G is V ((V^dagger G V) * Phi) V^dagger.
    """
    ea = energies[:, :, None]
    eb = energies[:, None, :]
    diff = ea - eb
    exp_a = np.exp(-1j * dt_s * ea)
    exp_b = np.exp(-1j * dt_s * eb)
    scale = 1e-9 * (1.0 + np.max(np.abs(energies), axis=1))[:, None, None]
    degenerate = np.abs(diff) <= scale
    safe = np.where(degenerate, 1.0, diff)
    limit = -1j * dt_s * np.exp(-1j * dt_s * 0.5 * (ea + eb))
    return np.where(degenerate, limit, (exp_a - exp_b) / safe)


def segment_propagators(
    system: Union[SpinSystem, ControlModel], pulse: PulseSequence, mode: ControlMode = "selective"
) -> np.ndarray:
    model = as_control_model(system, mode)
    check_channels(model, pulse)
    energies, vectors = segment_eigensystems(segment_hamiltonians(model, pulse.amplitudes_hz))
    return propagators_from_eig(energies, vectors, pulse.dt_s)


def chain(propagators: np.ndarray) -> OperatorMatrix:
    """U_N ... U_2 U_1 for a (N, d, d) stack."""
    total = np.eye(propagators.shape[1], dtype=complex)
    for u in propagators:
        total = u @ total
    return total


def propagate(
    system: Union[SpinSystem, ControlModel], pulse: PulseSequence, mode: ControlMode = "selective"
) -> OperatorMatrix:
    """Total propagator of a piecewise-constant pulse under drift plus controls."""
    return chain(segment_propagators(system, pulse, mode))
