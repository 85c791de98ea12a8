import logging
from abc import ABC, abstractmethod
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type, Union

import numpy as np
from pydantic import BaseModel

from dynamics.states import DeviationState
from gates.base import GateTarget
from pulses.fidelity import fidelity
from pulses.realization import GateRealization, PulseRealization
from pulses.sequence import PulseSequence
from spins.pauli import register_size, site_operator
from spins.system import ControlMode, ControlModel, SpinSystem

logger = logging.getLogger(__name__)


def pauli_inputs(n_qubits: int, qubits: Sequence[int]) -> List[DeviationState]:
    """Every non-identity Pauli string supported on `qubits`, identity elsewhere."""
    inputs = []
    for labels in product("EXYZ", repeat=len(qubits)):
        if set(labels) == {"E"}:
            continue
        sites = dict(zip(qubits, labels))
        inputs.append(DeviationState(matrix=site_operator(n_qubits, sites), label="".join(labels)))
    return inputs


def input_support(realization: GateRealization, target: GateTarget) -> Tuple[int, ...]:
    """The gate's qubits plus every qubit the realization drives."""
    n = register_size(target.unitary)
    own = target.qubits or tuple(range(1, n + 1))
    return tuple(sorted(set(own) | set(realization.driven_qubits)))


def state_fidelity(
    realization: GateRealization,
    target: GateTarget,
    t2_s: Optional[Sequence[float]] = None,
    qubits: Optional[Sequence[int]] = None,
) -> float:
    """
    Mean over Pauli inputs P of Tr(rho_ideal rho_out) / Tr(rho_ideal^2),
    with rho_ideal = U_t P U_t^dagger. Inputs cover `qubits`, by default the
    gate's qubits and the actuators a pulse drives, so actuator action left
    over at the end of a pulse lowers the score.
    """
    n = register_size(target.unitary)
    u_t = target.unitary
    support = tuple(qubits) if qubits is not None else input_support(realization, target)
    inputs = np.stack([p.matrix for p in pauli_inputs(n, support)])
    ideal = u_t @ inputs @ u_t.conj().T
    out = realization.evolve(inputs, t2_s)
    scores = np.sum(ideal.conj() * out, axis=(1, 2)).real / np.sum(np.abs(ideal) ** 2, axis=(1, 2))
    return float(np.mean(scores))


class Perturbation(ABC):
    """
    Abstract base class for error models applied to a gate realization.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        pass

    @abstractmethod
    def evaluate(self, realization: GateRealization, target: GateTarget) -> float:
        """Gate performance under the perturbation."""
        pass


class NoPerturbation(Perturbation):
    @property
    def name(self) -> str:
        return "none"

    @property
    def description(self) -> str:
        return "Unitary fidelity of the realization as given"

    def evaluate(self, realization: GateRealization, target: GateTarget) -> float:
        return fidelity(realization.unitary, target)


class AmplitudeScale(Perturbation):
    """All drive amplitudes multiplied by (1 + epsilon)."""

    def __init__(self, epsilon: float = 0.0):
        self.epsilon = float(epsilon)

    @property
    def name(self) -> str:
        return "amplitude_scale"

    @property
    def description(self) -> str:
        return "Unitary fidelity with every amplitude multiplied by (1 + epsilon)"

    def evaluate(self, realization: GateRealization, target: GateTarget) -> float:
        if self.epsilon == 0.0:
            return fidelity(realization.unitary, target)
        return fidelity(realization.scaled(1.0 + self.epsilon).unitary, target)


class Dephasing(Perturbation):
    """Per-qubit transverse dephasing interleaved with the realization's segments."""

    def __init__(self, t2_s: Sequence[float] = ()):
        self.t2_s = tuple(float(t) for t in t2_s)

    @property
    def name(self) -> str:
        return "dephasing"

    @property
    def description(self) -> str:
        return "Input-averaged state fidelity with transverse dephasing at the given T2 times"

    def evaluate(self, realization: GateRealization, target: GateTarget) -> float:
        return state_fidelity(realization, target, self.t2_s)


class PerturbationRegistry:
    def __init__(self):
        self._perturbations: Dict[str, Type[Perturbation]] = {}
        self._descriptions: Dict[str, str] = {}

        self.register("none", NoPerturbation)
        self.register("amplitude_scale", AmplitudeScale)
        self.register("dephasing", Dephasing)

    def register(self, name: str, perturbation_cls: Type[Perturbation]):
        """Register a new perturbation class."""
        self._perturbations[name] = perturbation_cls
        self._descriptions[name] = perturbation_cls().description

    def create(self, name: str, **params: Any) -> Perturbation:
        """Build a perturbation instance by name."""
        if name not in self._perturbations:
            raise ValueError(f"Perturbation '{name}' not found. Available: {list(self._perturbations.keys())}")
        return self._perturbations[name](**params)

    def list_perturbations(self) -> List[Dict[str, Any]]:
        return [{"name": name, "description": desc} for name, desc in self._descriptions.items()]


# Global registry instance
perturbation_registry = PerturbationRegistry()


def perturbed_fidelity(
    system: Union[SpinSystem, ControlModel],
    pulse: PulseSequence,
    target: GateTarget,
    perturbation: Union[Perturbation, str] = "none",
    mode: ControlMode = "selective",
    **params: Any,
) -> float:
    """Fidelity of `pulse` for `target` under a named or prebuilt perturbation."""
    if isinstance(perturbation, str):
        perturbation = perturbation_registry.create(perturbation, **params)
    return perturbation.evaluate(PulseRealization(system, pulse, mode), target)


class ErrorBudget(BaseModel):
    """Fidelity losses attributed to imperfect control, dephasing and amplitude miscalibration."""
    gate_fidelity: float
    gate_loss: float
    dephasing_loss: float
    miscalibration_loss: float
    t2_s: List[float]
    epsilon: float
    duration_s: float

    def as_rows(self) -> List[Dict[str, Any]]:
        return [
            {"component": "control", "loss": self.gate_loss},
            {"component": "dephasing", "loss": self.dephasing_loss},
            {"component": "miscalibration", "loss": self.miscalibration_loss},
        ]


def error_budget(
    realization: GateRealization,
    target: GateTarget,
    t2_s: Sequence[float],
    epsilon: float,
) -> ErrorBudget:
    """
    Three loss components for one gate realization:
    control loss 1 - F, the drop in input-averaged state fidelity once
    dephasing is switched on, and F - min(F(1+eps), F(1-eps)).
    """
    f = NoPerturbation().evaluate(realization, target)
    coherent = state_fidelity(realization, target)
    dephased = Dephasing(t2_s).evaluate(realization, target)
    worst = min(AmplitudeScale(epsilon).evaluate(realization, target),
                AmplitudeScale(-epsilon).evaluate(realization, target))
    budget = ErrorBudget(
        gate_fidelity=f,
        gate_loss=1.0 - f,
        dephasing_loss=coherent - dephased,
        miscalibration_loss=f - worst,
        t2_s=[float(t) for t in t2_s],
        epsilon=float(epsilon),
        duration_s=realization.duration_s,
    )
    logger.info(
        "Error budget for %s: control %.4f, dephasing %.4f, miscalibration %.4f",
        target.name, budget.gate_loss, budget.dephasing_loss, budget.miscalibration_loss,
    )
    return budget
