from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from errors import ConfigurationError
from spectroscopy.fid import Fid


class Spectrum(BaseModel):
    """Complex spectrum on a rotating-frame offset axis symmetric about 0 Hz."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    freqs_hz: np.ndarray
    values: np.ndarray
    label: Optional[str] = None
    apodization_hz: float = 0.0
    zero_fill_factor: int = 1

    @model_validator(mode="after")
    def _check(self) -> "Spectrum":
        f = self.freqs_hz
        if f.ndim != 1 or f.shape != self.values.shape:
            raise ValueError(f"Axis shape {f.shape} does not match values shape {self.values.shape}")
        if np.any(np.diff(f) <= 0):
            raise ValueError("Frequency axis must be strictly increasing")
        if not np.allclose(f, -f[::-1], atol=1e-9 * max(1.0, np.max(np.abs(f)))):
            raise ValueError("Frequency axis must be symmetric about 0")
        return self

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def bin_hz(self) -> float:
        return float(self.freqs_hz[1] - self.freqs_hz[0])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "freq_hz": self.freqs_hz,
            "real": self.values.real,
            "imag": self.values.imag,
            "magnitude": self.magnitude,
        })


def to_spectrum(fid: Fid, zero_fill_factor: int = 2, apodization_hz: float = 0.0) -> Spectrum:
    """
    Exponential apodization exp(-pi lb t), zero-filling to an odd length of
    about zero_fill_factor x n points, then a shifted DFT scaled by dwell_s.
    """
    if zero_fill_factor < 1:
        raise ConfigurationError(f"zero_fill_factor must be at least 1, got {zero_fill_factor}")
    if apodization_hz < 0:
        raise ConfigurationError(f"Apodization must be nonnegative, got {apodization_hz}")
    samples = fid.samples * np.exp(-np.pi * apodization_hz * fid.times_s)
    n_fft = zero_fill_factor * samples.size
    if n_fft % 2 == 0:
        n_fft += 1
    values = np.fft.fftshift(np.fft.fft(samples, n=n_fft)) * fid.dwell_s
    freqs = np.fft.fftshift(np.fft.fftfreq(n_fft, d=fid.dwell_s))
    return Spectrum(
        freqs_hz=freqs,
        values=values,
        label=fid.label,
        apodization_hz=apodization_hz,
        zero_fill_factor=zero_fill_factor,
    )
