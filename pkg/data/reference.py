from pathlib import Path
from typing import Dict, List, Optional

from cachetools import cached
from pydantic import BaseModel

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

REFERENCE_FILE = Path(__file__).parent / "reference_data.toml"


class MeasuredOverlap(BaseModel):
    gate: str
    register: str
    input: str
    value: float
    stderr: float


class SweepAmplitudes(BaseModel):
    input: str
    a: float
    a_err: float
    b: float
    b_err: float


class InversionReference(BaseModel):
    coefficient: float
    stderr: float


class ReferenceData(BaseModel):
    """Experimental comparison values; reported next to simulated results, never asserted."""
    fidelity: Dict[str, float]
    inversion: InversionReference
    t2_ms: Dict[str, float]
    error_budget: Dict[str, float]
    overlaps: List[MeasuredOverlap]
    sweep: List[SweepAmplitudes]

    def sweep_for(self, input_expr: str) -> Optional[SweepAmplitudes]:
        return next((s for s in self.sweep if s.input == input_expr), None)

    def fidelity_for(self, gate: str, n_qubits: int) -> Optional[float]:
        """Reported gate fidelity for a gate on the 3- or 5-qubit register."""
        return self.fidelity.get(f"{gate.lower()}_{n_qubits}q")

    def overlap_for(self, gate_label: str, n_qubits: int, input_label: str) -> Optional[MeasuredOverlap]:
        """Measured overlap row, matched on gate label ('Uz_single_a', 'Uxy', ...) and input ('X_a0_b', ...)."""
        register = f"{n_qubits}q"
        return next(
            (o for o in self.overlaps if o.gate == gate_label and o.register == register and o.input == input_label),
            None,
        )


@cached(cache={})
def load_reference(path: Path = REFERENCE_FILE) -> ReferenceData:
    with open(path, "rb") as f:
        return ReferenceData.model_validate(tomllib.load(f))
