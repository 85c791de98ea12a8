import logging
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from dynamics.states import DeviationState, parse_state, transverse_input
from gates.registry import gate_library
from pulses.realization import ExactRealization, GateRealization
from spectroscopy.fid import simulate_fid
from spectroscopy.fitting import FitResult, fit_overlap
from spectroscopy.spectrum import Spectrum, to_spectrum
from spins.system import SpinSystem

logger = logging.getLogger(__name__)


class AcquisitionConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_points: int = Field(2048, ge=2)
    dwell_s: float = Field(1e-4, gt=0)
    zero_fill_factor: int = Field(2, ge=1)
    # None: matched to the shortest observed T2 when dephasing is on, else 0
    apodization_hz: Optional[float] = Field(None, ge=0)
    observed_species: Optional[str] = None

    def species_for(self, sys: SpinSystem) -> str:
        return self.observed_species or sys.species[sys.targets[0] - 1]

    def apodization_for(self, sys: SpinSystem, t2_s: Optional[Sequence[float]]) -> float:
        if self.apodization_hz is not None:
            return self.apodization_hz
        if t2_s is None:
            return 0.0
        species = self.species_for(sys)
        observed = [t for q, t in enumerate(t2_s) if sys.species[q] == species]
        return float(1.0 / (np.pi * min(observed))) if observed and np.isfinite(min(observed)) else 0.0


class OverlapReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    realization: str
    input_expr: str
    predicted_expr: str
    fit: FitResult
    reference: Spectrum
    result: Spectrum
    duration_s: float

    @property
    def coefficient(self) -> float:
        return self.fit.coefficients[0]


def acquire(
    sys: SpinSystem, state, acq: AcquisitionConfig, t2_s: Optional[Sequence[float]] = None
) -> Spectrum:
    fid = simulate_fid(sys, state, acq.species_for(sys), acq.n_points, acq.dwell_s, t2_s)
    return to_spectrum(fid, acq.zero_fill_factor, acq.apodization_for(sys, t2_s))


def overlap_experiment(
    sys: SpinSystem,
    realization: GateRealization,
    input_expr: str,
    predicted: Union[str, DeviationState],
    t2_s: Optional[Sequence[float]] = None,
    acq: Optional[AcquisitionConfig] = None,
) -> OverlapReport:
    """
    Apply the realization to the input state, acquire its spectrum and fit it
    against the reference spectrum of the independently prepared predicted state.
    """
    acq = acq or AcquisitionConfig()
    if isinstance(predicted, str):
        predicted = parse_state(predicted, sys.n_qubits)
    output = realization.apply(parse_state(input_expr, sys.n_qubits), t2_s)
    reference = acquire(sys, predicted, acq, t2_s)
    result = acquire(sys, output, acq, t2_s)
    fit = fit_overlap(result, [reference], names=[predicted.label or "predicted"])
    logger.info(
        "Overlap of %s(%s) with %s: %+.4f +/- %.4f",
        realization.name, input_expr, predicted.label, fit.coefficients[0], fit.stderr[0],
    )
    return OverlapReport(
        realization=realization.name,
        input_expr=input_expr,
        predicted_expr=predicted.label or "predicted",
        fit=fit,
        reference=reference,
        result=result,
        duration_s=realization.duration_s,
    )


def inversion_experiment(
    sys: SpinSystem,
    realization: Optional[GateRealization] = None,
    t2_s: Optional[Sequence[float]] = None,
    acq: Optional[AcquisitionConfig] = None,
) -> OverlapReport:
    """
    Transverse target magnetization through Uz_pair(-pi); the fitted
    coefficient against the unrotated reference is -1 for a perfect gate.
    """
    if realization is None:
        target = gate_library("Uz_pair", None, sys.targets[:2], sys)
        realization = ExactRealization(target)
    expr = transverse_input(sys)
    return overlap_experiment(sys, realization, expr, expr, t2_s, acq)
