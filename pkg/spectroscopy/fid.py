from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from dynamics.relaxation import check_t2
from dynamics.states import DeviationState
from errors import ConfigurationError, DimensionError
from spins.pauli import site_operator
from spins.system import SpinSystem, build_drift


class Fid(BaseModel):
    """
    Free-induction decay: complex transverse signal sampled every dwell_s.

    The detection operator is sum_k (Y_k + i X_k) / 2^n over observed qubits:
    y-magnetization is the real part and x-magnetization the imaginary part,
    so a single Y spin at shift nu gives exp(+i 2 pi nu t).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dwell_s: float
    samples: np.ndarray
    observed_species: str
    label: Optional[str] = None

    @model_validator(mode="after")
    def _check(self) -> "Fid":
        if not self.dwell_s > 0:
            raise ValueError(f"Dwell time must be positive, got {self.dwell_s}")
        if self.samples.ndim != 1 or self.samples.size < 2:
            raise ValueError(f"FID needs at least 2 samples, got shape {self.samples.shape}")
        return self

    @property
    def times_s(self) -> np.ndarray:
        return np.arange(self.samples.size) * self.dwell_s

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t_s": self.times_s, "real": self.samples.real, "imag": self.samples.imag})


def observed_qubits(sys: SpinSystem, species: str) -> List[int]:
    qubits = [q for q in range(1, sys.n_qubits + 1) if sys.species[q - 1] == species]
    if not qubits:
        raise ConfigurationError(f"Species '{species}' not in '{sys.name}'. Available: {sorted(set(sys.species))}")
    return qubits


def simulate_fid(
    sys: SpinSystem,
    state: DeviationState,
    species: str,
    n_points: int = 2048,
    dwell_s: float = 1e-4,
    t2_s: Optional[Sequence[float]] = None,
) -> Fid:
    """
    Evolve `state` under the drift and record the quadrature signal of the
    observed species, with a per-qubit exp(-t/T2_k) envelope when t2_s is given.
    """
    if n_points < 2:
        raise ConfigurationError(f"n_points must be at least 2, got {n_points}")
    if not dwell_s > 0:
        raise ConfigurationError(f"Dwell time must be positive, got {dwell_s}")
    if state.n_qubits != sys.n_qubits:
        raise DimensionError(f"State has {state.n_qubits} qubits, register '{sys.name}' has {sys.n_qubits}")
    t2 = None if t2_s is None else check_t2(t2_s, sys.n_qubits)

    energies, vectors = np.linalg.eigh(build_drift(sys))
    rho = vectors.conj().T @ state.matrix @ vectors
    # one dwell of free evolution multiplies rho_ab by exp(-i (E_a - E_b) dwell)
    step = np.exp(-1j * dwell_s * (energies[:, None] - energies[None, :]))
    times = np.arange(n_points) * dwell_s
    samples = np.zeros(n_points, dtype=complex)
    for k in observed_qubits(sys, species):
        det = site_operator(sys.n_qubits, {k: "Y"}) + 1j * site_operator(sys.n_qubits, {k: "X"})
        weights = rho * (vectors.conj().T @ det @ vectors).T
        signal = np.empty(n_points, dtype=complex)
        for j in range(n_points):
            signal[j] = weights.sum()
            weights = weights * step
        if t2 is not None:
            signal *= np.exp(-times / t2[k - 1])
        samples += signal
    return Fid(dwell_s=dwell_s, samples=samples / sys.dim, observed_species=species, label=state.label)
