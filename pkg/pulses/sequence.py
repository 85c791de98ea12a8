from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator


class PulseSequence(BaseModel):
    """
    Piecewise-constant control amplitudes in Hz, shape (n_segments, n_channels).
    Channel k contributes pi * amplitude * H_k to the segment Hamiltonian.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dt_s: float
    amplitudes_hz: np.ndarray
    max_rf_hz: Optional[float] = None

    @model_validator(mode="after")
    def _check(self) -> "PulseSequence":
        amps = self.amplitudes_hz
        if amps.ndim != 2 or amps.shape[0] < 1:
            raise ValueError(f"Amplitudes must be a nonempty (segments, channels) array, got shape {amps.shape}")
        if not self.dt_s > 0:
            raise ValueError(f"Segment duration must be positive, got {self.dt_s}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("Amplitudes must be finite")
        if self.max_rf_hz is not None and np.max(np.abs(amps), initial=0.0) > self.max_rf_hz * (1 + 1e-12):
            raise ValueError(f"Amplitude {np.max(np.abs(amps))} Hz exceeds max_rf_hz={self.max_rf_hz}")
        return self

    @property
    def n_segments(self) -> int:
        return int(self.amplitudes_hz.shape[0])

    @property
    def n_channels(self) -> int:
        return int(self.amplitudes_hz.shape[1])

    @property
    def duration_s(self) -> float:
        return self.n_segments * self.dt_s

    def scaled(self, factor: float) -> "PulseSequence":
        """Amplitudes multiplied by factor; the RF bound is dropped."""
        return PulseSequence(dt_s=self.dt_s, amplitudes_hz=self.amplitudes_hz * factor)

    @classmethod
    def zeros(cls, n_segments: int, n_channels: int, dt_s: float) -> "PulseSequence":
        return cls(dt_s=dt_s, amplitudes_hz=np.zeros((n_segments, n_channels)))
