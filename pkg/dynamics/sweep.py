import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel

from dynamics.states import DeviationState, StateBasis, apply_gate, overlap_coeffs, parse_state
from errors import ConfigurationError
from gates.base import GateTarget
from gates.registry import gate_library, gate_registry
from pulses.realization import ExactRealization, GateRealization
from spins.system import SpinSystem

logger = logging.getLogger(__name__)

Realizer = Callable[[GateTarget], GateRealization]


class SweepResult(BaseModel):
    """Stay/transfer coefficients over a theta grid and their cos/sin fits."""
    gate: str
    qubits: Tuple[int, ...]
    input_expr: str
    frequency: int
    thetas: List[float]
    stay: List[float]
    transfer: List[float]
    amplitude_stay: float
    amplitude_transfer: float
    residual_stay: float
    residual_transfer: float

    def to_frame(self) -> pd.DataFrame:
        th = np.asarray(self.thetas)
        f = self.frequency
        return pd.DataFrame({
            "theta_rad": th,
            "coeff_stay": self.stay,
            "coeff_transfer": self.transfer,
            "fit_stay": self.amplitude_stay * np.cos(f * th),
            "fit_transfer": self.amplitude_transfer * np.sin(f * th),
            "residual_stay": np.asarray(self.stay) - self.amplitude_stay * np.cos(f * th),
            "residual_transfer": np.asarray(self.transfer) - self.amplitude_transfer * np.sin(f * th),
        })


def fit_amplitude(values: np.ndarray, basis: np.ndarray) -> Tuple[float, float]:
    """Single-parameter least squares values ~ A * basis; returns (A, rms residual)."""
    denom = float(basis @ basis)
    if denom == 0.0:
        raise ConfigurationError("Theta grid gives a degenerate fit basis; choose other angles")
    amp = float(values @ basis) / denom
    return amp, float(np.sqrt(np.mean((values - amp * basis) ** 2)))


def theta_sweep(
    system: SpinSystem,
    gate: str,
    input_expr: str,
    thetas: Sequence[float],
    qubits: Optional[Sequence[int]] = None,
    realize: Optional[Realizer] = None,
    t2_s: Optional[Sequence[float]] = None,
) -> SweepResult:
    """
    Apply gate(theta) to the input state for every theta and fit
    A cos(f theta) to the overlap with the input and B sin(f theta) to the
    overlap with the fully transferred state (ideal gate at theta = pi/(2f)).

    `realize` turns a target into a realization (exact by default, or a
    stored/synthesized pulse); `t2_s` enables dephasing.
    """
    thetas = np.asarray(list(thetas), dtype=float)
    if thetas.size < 2:
        raise ConfigurationError(f"A theta sweep needs at least 2 points for fitting, got {thetas.size}")
    family = gate_registry.get_gate(gate)
    if qubits is None:
        qubits = system.targets[: family.n_qubits]
    qubits = tuple(qubits)
    realize = realize or (lambda target: ExactRealization(target))

    state = parse_state(input_expr, system.n_qubits)
    f = family.sweep_frequency
    full = gate_library(gate, np.pi / (2 * f), qubits, system)
    transferred = apply_gate(state, full.unitary)
    basis = StateBasis(
        names=(state.label, f"{gate}[pi/{2 * f}]({state.label})"),
        states=(state, DeviationState(matrix=transferred.matrix)),
    )

    stay, transfer = [], []
    for theta in thetas:
        target = gate_library(gate, theta, qubits, system)
        out = realize(target).apply(state, t2_s)
        c = overlap_coeffs(out, basis)
        stay.append(float(c[0]))
        transfer.append(float(c[1]))
    stay_arr, transfer_arr = np.asarray(stay), np.asarray(transfer)
    amp_a, res_a = fit_amplitude(stay_arr, np.cos(f * thetas))
    amp_b, res_b = fit_amplitude(transfer_arr, np.sin(f * thetas))
    logger.info("Sweep %s on %s: A=%.4f B=%.4f", gate, state.label, amp_a, amp_b)
    return SweepResult(
        gate=gate,
        qubits=qubits,
        input_expr=state.label,
        frequency=f,
        thetas=thetas.tolist(),
        stay=stay,
        transfer=transfer,
        amplitude_stay=amp_a,
        amplitude_transfer=amp_b,
        residual_stay=res_a,
        residual_transfer=res_b,
    )
