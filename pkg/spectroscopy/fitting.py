from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from errors import FitError
from spectroscopy.spectrum import Spectrum


class FitResult(BaseModel):
    """Real overlap coefficients of a spectrum on a set of reference spectra."""
    names: List[str]
    coefficients: List[float]
    stderr: List[float]
    residual_norm: float
    condition_number: float

    def summary(self) -> str:
        lines = [f"{n}: {c:+.6f} +/- {e:.6f}" for n, c, e in zip(self.names, self.coefficients, self.stderr)]
        lines.append(f"residual: {self.residual_norm:.6e}")
        lines.append(f"condition number: {self.condition_number:.6e}")
        return "\n".join(lines)


def fit_overlap(
    measured: Spectrum,
    references: Sequence[Spectrum],
    names: Optional[Sequence[str]] = None,
) -> FitResult:
    """
    Least squares measured ~ sum_i c_i reference_i over real c_i, using the
    real and imaginary parts jointly. Standard errors come from the residual
    variance and the normal-equations inverse.

    Raises:
        FitError: mismatched axes or rank-deficient references.
    """
    if not references:
        raise FitError("At least one reference spectrum is required")
    for ref in references:
        if ref.freqs_hz.shape != measured.freqs_hz.shape or not np.allclose(ref.freqs_hz, measured.freqs_hz):
            raise FitError("Reference and measured spectra have different frequency axes")
    names = list(names) if names is not None else [r.label or f"ref{i}" for i, r in enumerate(references)]

    design = np.stack([np.concatenate([r.values.real, r.values.imag]) for r in references], axis=1)
    target = np.concatenate([measured.values.real, measured.values.imag])
    n_obs, n_refs = design.shape
    coeffs, _, rank, sing = np.linalg.lstsq(design, target, rcond=None)
    if rank < n_refs:
        raise FitError(f"Reference spectra are linearly dependent (rank {rank} of {n_refs})")

    residual = target - design @ coeffs
    dof = n_obs - n_refs
    sigma2 = float(residual @ residual) / dof if dof > 0 else 0.0
    cov = sigma2 * np.linalg.inv(design.T @ design)
    return FitResult(
        names=names,
        coefficients=coeffs.tolist(),
        stderr=np.sqrt(np.clip(np.diag(cov), 0.0, None)).tolist(),
        residual_norm=float(np.linalg.norm(residual)),
        condition_number=float(sing[0] / sing[-1]),
    )


def with_noise(spectrum: Spectrum, relative_sigma: float, seed: int) -> Spectrum:
    """Copy with complex Gaussian noise of standard deviation relative_sigma x peak magnitude."""
    rng = np.random.default_rng(seed)
    sigma = relative_sigma * float(np.max(spectrum.magnitude))
    noise = sigma * (rng.standard_normal(spectrum.values.shape) + 1j * rng.standard_normal(spectrum.values.shape))
    return spectrum.model_copy(update={"values": spectrum.values + noise})
