"""
Duration selection for actuator-only synthesis.

Drift and controls generate an algebra L; the controls alone generate an
ideal L' of codimension 0 or 1. The drift component h_c orthogonal to L' is
central in L, so every pulse of duration T produces exp(-i T h_c) times an
element of exp(L'). Which gates are reachable therefore depends on T, and a
gate whose generator has a component along h_c (the z-rotations of the target
pair) is only reachable at durations where that central phase lines up.
"""
import logging
import time
from typing import List, Optional, Union

import numpy as np
import scipy.linalg as la
from pydantic import BaseModel, ConfigDict, Field, model_validator

from gates.base import GateTarget
from lie.closure import AlgebraBasis, ideal_closure
from pulses.grape import GrapeConfig, GrapeResult, grape_optimize
from pulses.propagate import as_control_model
from spins.system import ControlMode, ControlModel, SpinSystem

logger = logging.getLogger(__name__)


class DurationSearch(BaseModel):
    """Scan window and candidate policy for `synthesize`."""
    model_config = ConfigDict(frozen=True)

    min_duration_s: float = Field(4e-3, gt=0)
    max_duration_s: float = Field(30e-3, gt=0)
    resolution_s: float = Field(1e-6, gt=0)
    score_goal: float = Field(0.999, gt=0, le=1)
    candidates: int = Field(3, ge=1)
    min_separation_s: float = Field(2.5e-4, ge=0)

    @model_validator(mode="after")
    def _check_window(self) -> "DurationSearch":
        if self.max_duration_s < self.min_duration_s:
            raise ValueError(
                f"max_duration_s {self.max_duration_s} is below min_duration_s {self.min_duration_s}"
            )
        return self


class DurationChoice(BaseModel):
    duration_s: float
    n_segments: int
    dt_s: float
    score: float

    def apply_to(self, cfg: GrapeConfig) -> GrapeConfig:
        return cfg.model_copy(update={"n_segments": self.n_segments, "dt_s": self.dt_s})


class CosetScan(BaseModel):
    """
    Lower bound on the best fidelity reachable at duration T:
    F(exp(-i T h_c) B, U) with B = exp(i G') and G' the part of the target
    generator inside the ideal.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    ideal_dim: int
    central: np.ndarray
    in_ideal_unitary: np.ndarray
    eigenvalues: np.ndarray
    weights: np.ndarray
    phase_insensitive: bool
    outside_fraction: float

    @property
    def dim(self) -> int:
        return self.central.shape[0]

    def scores(self, durations_s: np.ndarray) -> np.ndarray:
        g = np.exp(-1j * np.outer(np.atleast_1d(durations_s), self.eigenvalues)) @ self.weights
        if self.phase_insensitive:
            return np.minimum(1.0, np.abs(g) ** 2 / self.dim ** 2)
        return np.clip(g.real / self.dim, 0.0, 1.0)


def _project(skew: np.ndarray, basis: AlgebraBasis) -> np.ndarray:
    coeffs = np.real(np.einsum("kab,ab->k", basis.elements.conj(), skew))
    return np.tensordot(coeffs, basis.elements, axes=1)


def coset_scan(
    model: ControlModel, target: GateTarget, ideal: Optional[AlgebraBasis] = None, tol: float = 1e-8
) -> CosetScan:
    if ideal is None:
        ideal = ideal_closure(model.drift, model.controls, tol)
    drift_skew = 1j * np.asarray(model.drift, dtype=complex)
    central_skew = drift_skew - _project(drift_skew, ideal)
    central = -1j * central_skew
    central = 0.5 * (central + central.conj().T)

    u = target.unitary
    if target.generator is not None:
        generator = np.asarray(target.generator, dtype=complex)
    else:
        generator = -1j * la.logm(u)
        generator = 0.5 * (generator + generator.conj().T)
    g_skew = 1j * generator
    g_ideal = _project(g_skew, ideal)
    rest = g_skew - g_ideal
    c_norm = np.linalg.norm(central_skew)
    if c_norm > tol:
        c_hat = central_skew / c_norm
        rest = rest - np.real(np.vdot(c_hat, rest)) * c_hat
    g_norm = np.linalg.norm(g_skew)
    outside = float(np.linalg.norm(rest) / g_norm) if g_norm > 0 else 0.0
    if outside > 1e-6:
        logger.warning(
            "Target '%s' has %.3g of its generator outside the dynamical algebra; no duration reaches it exactly",
            target.name, outside,
        )

    in_ideal = la.expm(g_ideal)
    eigenvalues, vectors = np.linalg.eigh(central)
    weights = np.einsum("ak,ab,bk->k", vectors.conj(), in_ideal @ u.conj().T, vectors)
    return CosetScan(
        ideal_dim=ideal.dim,
        central=central,
        in_ideal_unitary=in_ideal,
        eigenvalues=eigenvalues,
        weights=weights,
        phase_insensitive=target.phase_insensitive,
        outside_fraction=outside,
    )


def _choice(duration_s: float, score: float, cfg: GrapeConfig) -> DurationChoice:
    n = max(1, int(round(duration_s / cfg.dt_s)))
    return DurationChoice(duration_s=float(duration_s), n_segments=n, dt_s=float(duration_s) / n, score=float(score))


def duration_candidates(scan: CosetScan, cfg: GrapeConfig, search: DurationSearch) -> List[DurationChoice]:
    """
    Durations to try, best first: the peak of every run of grid points whose
    score reaches score_goal, in increasing duration, then the remaining
    points by decreasing score, thinned to min_separation_s.
    """
    grid = np.arange(search.min_duration_s, search.max_duration_s + 0.5 * search.resolution_s, search.resolution_s)
    scores = scan.scores(grid)
    qualified = np.flatnonzero(scores >= search.score_goal)
    runs = np.split(qualified, np.flatnonzero(np.diff(qualified) > 1) + 1) if qualified.size else []
    peaks = [int(run[np.argmax(scores[run])]) for run in runs]
    picked: List[int] = []
    for i in [*peaks, *np.argsort(-scores, kind="stable")]:
        if i in picked:
            continue
        if all(abs(grid[i] - grid[j]) >= search.min_separation_s for j in picked):
            picked.append(int(i))
            if len(picked) == search.candidates:
                break
    return [_choice(grid[i], scores[i], cfg) for i in picked]


class DurationAttempt(BaseModel):
    choice: DurationChoice
    fidelity: float
    seconds: float


class SynthesisResult(BaseModel):
    result: GrapeResult
    duration: DurationChoice
    attempts: List[DurationAttempt]
    ideal_dim: int


def synthesize(
    system: Union[SpinSystem, ControlModel],
    target: GateTarget,
    cfg: Optional[GrapeConfig] = None,
    mode: ControlMode = "selective",
    search: Optional[DurationSearch] = None,
    ideal: Optional[AlgebraBasis] = None,
    accept: Optional[float] = None,
) -> SynthesisResult:
    """
    GRAPE at the durations whose reachable coset lies closest to the target.

    Candidates from `duration_candidates` are tried in order until one reaches
    `accept` (default cfg.fidelity_goal); the best pulse overall is returned.
    cfg.time_limit_s bounds the whole search; cfg.n_segments is replaced so
    that each segment stays close to cfg.dt_s.
    """
    cfg = cfg or GrapeConfig()
    search = search or DurationSearch()
    accept = cfg.fidelity_goal if accept is None else accept
    model = as_control_model(system, mode)
    scan = coset_scan(model, target, ideal)
    deadline = None if cfg.time_limit_s is None else time.monotonic() + cfg.time_limit_s

    best: Optional[SynthesisResult] = None
    attempts: List[DurationAttempt] = []
    for choice in duration_candidates(scan, cfg, search):
        run_cfg = choice.apply_to(cfg)
        if deadline is not None:
            remaining = deadline - time.monotonic()
            if attempts and remaining <= 0:
                logger.warning("Duration search stopped by the time limit after %d candidates", len(attempts))
                break
            run_cfg = run_cfg.model_copy(update={"time_limit_s": max(remaining, 1e-3)})
        result = grape_optimize(model, target, run_cfg)
        attempts.append(DurationAttempt(choice=choice, fidelity=result.fidelity, seconds=result.elapsed_s))
        logger.info(
            "Duration %.3f ms (bound %.6f): fidelity %.6f in %.1f s",
            choice.duration_s * 1e3, choice.score, result.fidelity, result.elapsed_s,
        )
        if best is None or result.fidelity > best.result.fidelity:
            best = SynthesisResult(result=result, duration=choice, attempts=[], ideal_dim=scan.ideal_dim)
        if result.fidelity >= accept:
            break
    return best.model_copy(update={"attempts": attempts})
