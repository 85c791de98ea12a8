from abc import ABC, abstractmethod
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as la

from dynamics.relaxation import dephasing_mask
from dynamics.states import DeviationState, apply_gate
from errors import ConfigurationError
from gates.base import GateTarget
from pulses.propagate import as_control_model, chain, segment_propagators
from pulses.sequence import PulseSequence
from spins.pauli import OperatorMatrix
from spins.system import ControlMode, ControlModel, SpinSystem


class GateRealization(ABC):
    """
    A way of carrying out a gate on a deviation state, optionally under
    per-qubit transverse dephasing acting for the realization's duration.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        pass

    @property
    @abstractmethod
    def duration_s(self) -> float:
        pass

    @property
    @abstractmethod
    def unitary(self) -> OperatorMatrix:
        """Overall unitary without dephasing."""
        pass

    @property
    def driven_qubits(self) -> Tuple[int, ...]:
        """Qubits the realization drives directly besides the gate's own."""
        return ()

    @abstractmethod
    def scaled(self, factor: float) -> "GateRealization":
        """Copy with drive strength multiplied by `factor`."""
        pass

    @abstractmethod
    def apply(self, state: DeviationState, t2_s: Optional[Sequence[float]] = None) -> DeviationState:
        pass

    def evolve(self, matrices: np.ndarray, t2_s: Optional[Sequence[float]] = None) -> np.ndarray:
        """`apply` on a (m, d, d) stack of deviation matrices."""
        return np.stack([self.apply(DeviationState(matrix=m), t2_s).matrix for m in matrices])


def _evolve_stack(rho: np.ndarray, steps: np.ndarray, t2_s: Sequence[float], dt_s: float) -> np.ndarray:
    """Apply each step unitary followed by dephasing over dt_s to a (..., d, d) stack."""
    d = rho.shape[-1]
    mask = dephasing_mask(int(np.log2(d)), t2_s, dt_s)
    for u in steps:
        rho = (u @ rho @ u.conj().T) * mask
    rho = 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
    trace = np.trace(rho, axis1=-2, axis2=-1)[..., None, None]
    return rho - trace / d * np.eye(d)


def _conjugate(u: OperatorMatrix, rho: np.ndarray) -> np.ndarray:
    return u @ rho @ u.conj().T


def _sliced_evolution(
    state: DeviationState, steps: np.ndarray, t2_s: Sequence[float], dt_s: float
) -> DeviationState:
    """Apply each step unitary followed by dephasing over dt_s."""
    return DeviationState(matrix=_evolve_stack(state.matrix, steps, t2_s, dt_s))


class ExactRealization(GateRealization):
    """
    The ideal gate exp(iG), spread over `duration_s` as n_slices steps of
    exp(iG/N) when dephasing is applied.
    """

    def __init__(
        self,
        target: GateTarget,
        duration_s: float = 0.0,
        n_slices: int = 100,
        generator: Optional[OperatorMatrix] = None,
    ):
        if generator is None and target.generator is None:
            raise ConfigurationError(f"Target '{target.name}' carries no generator")
        if duration_s < 0:
            raise ConfigurationError(f"Duration must be nonnegative, got {duration_s}")
        if n_slices < 1:
            raise ConfigurationError(f"n_slices must be positive, got {n_slices}")
        self.target = target
        self.generator = target.generator if generator is None else np.asarray(generator)
        self._duration_s = float(duration_s)
        self.n_slices = n_slices

    @property
    def name(self) -> str:
        return f"exact:{self.target.name}"

    @property
    def duration_s(self) -> float:
        return self._duration_s

    @property
    def unitary(self) -> OperatorMatrix:
        return la.expm(1j * self.generator)

    def scaled(self, factor: float) -> "ExactRealization":
        """Over- or under-rotated copy, G -> factor * G."""
        return ExactRealization(self.target, self._duration_s, self.n_slices, generator=factor * self.generator)

    def apply(self, state: DeviationState, t2_s: Optional[Sequence[float]] = None) -> DeviationState:
        if t2_s is None or self._duration_s == 0.0:
            return apply_gate(state, self.unitary)
        step = la.expm(1j * self.generator / self.n_slices)
        steps = np.broadcast_to(step, (self.n_slices,) + step.shape)
        return _sliced_evolution(state, steps, t2_s, self._duration_s / self.n_slices)

    def evolve(self, matrices: np.ndarray, t2_s: Optional[Sequence[float]] = None) -> np.ndarray:
        if t2_s is None or self._duration_s == 0.0:
            return _conjugate(self.unitary, matrices)
        step = la.expm(1j * self.generator / self.n_slices)
        steps = np.broadcast_to(step, (self.n_slices,) + step.shape)
        return _evolve_stack(matrices, steps, t2_s, self._duration_s / self.n_slices)


class PulseRealization(GateRealization):
    """A piecewise-constant pulse under drift plus actuator controls."""

    def __init__(
        self,
        system: Union[SpinSystem, ControlModel],
        pulse: PulseSequence,
        mode: ControlMode = "selective",
        name: str = "pulse",
    ):
        self.model = as_control_model(system, mode)
        self.pulse = pulse
        self._name = name
        self._steps = segment_propagators(self.model, pulse)

    @property
    def name(self) -> str:
        return self._name

    @property
    def duration_s(self) -> float:
        return self.pulse.duration_s

    @property
    def driven_qubits(self) -> Tuple[int, ...]:
        return self.model.actuators

    @property
    def unitary(self) -> OperatorMatrix:
        return chain(self._steps)

    def scaled(self, factor: float) -> "PulseRealization":
        """Same pulse with every amplitude multiplied by `factor`."""
        return PulseRealization(self.model, self.pulse.scaled(factor), name=self._name)

    def apply(self, state: DeviationState, t2_s: Optional[Sequence[float]] = None) -> DeviationState:
        if t2_s is None:
            return apply_gate(state, self.unitary)
        return _sliced_evolution(state, self._steps, t2_s, self.pulse.dt_s)

    def evolve(self, matrices: np.ndarray, t2_s: Optional[Sequence[float]] = None) -> np.ndarray:
        if t2_s is None:
            return _conjugate(self.unitary, matrices)
        return _evolve_stack(matrices, self._steps, t2_s, self.pulse.dt_s)
