import logging
import time
from typing import List, Literal, NamedTuple, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from errors import ConfigurationError, DimensionError
from gates.base import GateTarget
from pulses.fidelity import fidelity
from pulses.propagate import (
    propagate,
    as_control_model,
    expm_derivative_weights,
    propagators_from_eig,
    segment_eigensystems,
    segment_hamiltonians,
)
from pulses.sequence import PulseSequence
from spins.system import ControlMode, ControlModel, SpinSystem

logger = logging.getLogger(__name__)


class _Segments(NamedTuple):
    energies: np.ndarray
    vectors: np.ndarray
    props: np.ndarray
    forward: np.ndarray
    overlap: complex


class GrapeConfig(BaseModel):
    """Optimizer settings; durations and limits are artifact defaults, all overridable."""
    model_config = ConfigDict(frozen=True)

    n_segments: int = Field(200, gt=0)
    dt_s: float = Field(4e-5, gt=0)
    max_rf_hz: float = Field(10_000.0, gt=0)
    max_iters: int = Field(2000, ge=0)
    fidelity_goal: float = Field(0.999, gt=0, le=1)
    seed: int = 1234
    restarts: int = Field(5, ge=1)
    initial_scale: float = Field(0.1, gt=0, le=1)
    line_search: bool = True
    direction: Literal["steepest", "conjugate"] = "conjugate"
    initial_step_hz: Optional[float] = None
    fixed_step_hz: float = Field(20.0, gt=0)
    min_step_hz: float = Field(1e-6, gt=0)
    time_limit_s: Optional[float] = Field(None, gt=0)

    @property
    def duration_s(self) -> float:
        return self.n_segments * self.dt_s


class TracePoint(BaseModel):
    iteration: int
    fidelity: float
    step_size: float


class GrapeResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    pulse: PulseSequence
    fidelity: float
    trace: List[TracePoint]
    seed: int
    restart: int
    iterations: int
    converged: bool
    restart_seconds: List[float] = []
    timed_out: bool = False

    @property
    def elapsed_s(self) -> float:
        return float(sum(self.restart_seconds))

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame([p.model_dump() for p in self.trace], columns=["iteration", "fidelity", "step_size"])


class GrapeOptimizer:
    """
    Gradient ascent on piecewise-constant amplitudes.

    Gradients are exact: each segment propagator's derivative comes from the
    eigendecomposition of its Hamiltonian (divided differences of exp(-i E dt)).
    """

    def __init__(self, model: ControlModel, target: GateTarget, cfg: GrapeConfig):
        if target.dim != model.drift.shape[0]:
            raise DimensionError(f"Target dimension {target.dim} does not match register dimension {model.drift.shape[0]}")
        u = target.unitary
        if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-10:
            raise ConfigurationError(f"Target '{target.name}' is not unitary")
        self.model = model
        self.target = target
        self.cfg = cfg
        self.dim = u.shape[0]
        self._controls = np.stack(model.controls)

    def _objective(self, g: complex) -> float:
        if self.target.phase_insensitive:
            return abs(g) ** 2 / self.dim ** 2
        return g.real / self.dim

    def _propagate(self, amplitudes_hz: np.ndarray) -> Tuple[float, _Segments]:
        energies, vectors = segment_eigensystems(segment_hamiltonians(self.model, amplitudes_hz))
        props = propagators_from_eig(energies, vectors, self.cfg.dt_s)
        # forward[j] = U_{j-1} ... U_0
        forward = np.empty_like(props)
        acc = np.eye(self.dim, dtype=complex)
        for j in range(props.shape[0]):
            forward[j] = acc
            acc = props[j] @ acc
        g = complex(np.vdot(self.target.unitary, acc))
        return self._objective(g), _Segments(energies, vectors, props, forward, g)

    def _gradient(self, seg: _Segments) -> np.ndarray:
        dt = self.cfg.dt_s
        # backward[j] = (U_{N-1} ... U_{j+1})^dagger U_target
        backward = np.empty_like(seg.props)
        acc = self.target.unitary.astype(complex)
        for j in range(seg.props.shape[0] - 1, -1, -1):
            backward[j] = acc
            acc = seg.props[j].conj().T @ acc

        vectors = seg.vectors
        vh = np.conj(np.swapaxes(vectors, 1, 2))
        m = vh @ seg.forward @ np.conj(np.swapaxes(backward, 1, 2)) @ vectors
        q = vectors @ (expm_derivative_weights(seg.energies, dt) * m) @ vh
        dg = np.pi * np.einsum("kab,nba->nk", self._controls, q)

        if self.target.phase_insensitive:
            return 2.0 * np.real(np.conj(seg.overlap) * dg) / self.dim ** 2
        return np.real(dg) / self.dim

    def fidelity_and_gradient(self, amplitudes_hz: np.ndarray) -> Tuple[float, np.ndarray]:
        """Objective value and its gradient with respect to every amplitude (per Hz)."""
        value, seg = self._propagate(amplitudes_hz)
        return value, self._gradient(seg)

    def _clip(self, amplitudes_hz: np.ndarray) -> np.ndarray:
        return np.clip(amplitudes_hz, -self.cfg.max_rf_hz, self.cfg.max_rf_hz)

    def initial_amplitudes(self, rng: np.random.Generator) -> np.ndarray:
        shape = (self.cfg.n_segments, self.model.n_channels)
        return self.cfg.initial_scale * self.cfg.max_rf_hz * rng.uniform(-1.0, 1.0, size=shape)

    def run_single(
        self, amplitudes_hz: np.ndarray, deadline: Optional[float] = None
    ) -> Tuple[np.ndarray, float, List[TracePoint], int]:
        cfg = self.cfg
        step = cfg.initial_step_hz or 0.05 * cfg.max_rf_hz
        amps = self._clip(amplitudes_hz)
        value, grad = self.fidelity_and_gradient(amps)
        trace = [TracePoint(iteration=0, fidelity=self._report(value), step_size=0.0)]
        prev_grad: Optional[np.ndarray] = None
        direction = np.zeros_like(grad)
        iteration = 0
        while iteration < cfg.max_iters and self._report(value) < cfg.fidelity_goal:
            if deadline is not None and time.monotonic() > deadline:
                logger.warning("GRAPE time limit reached after %d iterations", iteration)
                break
            direction = self._direction(grad, prev_grad, direction)
            peak = np.max(np.abs(direction))
            if peak == 0.0:
                break
            unit = direction / peak
            if not cfg.line_search:
                amps = self._clip(amps + cfg.fixed_step_hz * unit)
                prev_grad = grad
                value, grad = self.fidelity_and_gradient(amps)
                iteration += 1
                trace.append(TracePoint(iteration=iteration, fidelity=self._report(value), step_size=cfg.fixed_step_hz))
                continue

            accepted = False
            while step >= cfg.min_step_hz:
                trial = self._clip(amps + step * unit)
                trial_value, trial_seg = self._propagate(trial)
                if trial_value > value:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                if cfg.direction == "conjugate" and prev_grad is not None:
                    # restart from the steepest direction before giving up
                    prev_grad = None
                    step = cfg.initial_step_hz or 0.05 * cfg.max_rf_hz
                    continue
                break
            prev_grad = grad
            amps, value, grad = trial, trial_value, self._gradient(trial_seg)
            iteration += 1
            trace.append(TracePoint(iteration=iteration, fidelity=self._report(value), step_size=step))
            step *= 1.5
        return amps, value, trace, iteration

    def _direction(self, grad: np.ndarray, prev_grad: Optional[np.ndarray], prev_dir: np.ndarray) -> np.ndarray:
        if self.cfg.direction == "steepest" or prev_grad is None:
            return grad
        # Polak-Ribiere with automatic reset
        denom = np.sum(prev_grad * prev_grad)
        beta = max(0.0, float(np.sum(grad * (grad - prev_grad)) / denom)) if denom > 0 else 0.0
        return grad + beta * prev_dir

    def _report(self, value: float) -> float:
        return float(min(1.0, max(0.0, value)))

    def run(self) -> GrapeResult:
        started = time.monotonic()
        deadline = None if self.cfg.time_limit_s is None else started + self.cfg.time_limit_s
        best: Optional[GrapeResult] = None
        seconds: List[float] = []
        for restart in range(self.cfg.restarts):
            seed = self.cfg.seed + restart
            rng = np.random.default_rng(seed)
            t0 = time.monotonic()
            amps, value, trace, iterations = self.run_single(self.initial_amplitudes(rng), deadline)
            seconds.append(time.monotonic() - t0)
            result = GrapeResult(
                pulse=PulseSequence(dt_s=self.cfg.dt_s, amplitudes_hz=amps, max_rf_hz=self.cfg.max_rf_hz),
                fidelity=self._report(value),
                trace=trace,
                seed=seed,
                restart=restart,
                iterations=iterations,
                converged=self._report(value) >= self.cfg.fidelity_goal,
            )
            logger.info(
                "GRAPE restart %d (seed %d): fidelity %.6f after %d iterations in %.1f s",
                restart, seed, result.fidelity, iterations, seconds[-1],
            )
            if best is None or result.fidelity > best.fidelity:
                best = result
            if result.converged:
                break
            if deadline is not None and time.monotonic() > deadline:
                break
        timed_out = deadline is not None and time.monotonic() > deadline and not best.converged
        return best.model_copy(update={"restart_seconds": seconds, "timed_out": timed_out})


def grape_optimize(
    system: Union[SpinSystem, ControlModel],
    target: GateTarget,
    cfg: Optional[GrapeConfig] = None,
    mode: ControlMode = "selective",
) -> GrapeResult:
    """
    Synthesize an actuator-only pulse for `target`.

    Returns the best restart: pulse, achieved fidelity (checked against an
    independent propagation) and the per-iteration fidelity trace.
    """
    cfg = cfg or GrapeConfig()
    model = as_control_model(system, mode)
    result = GrapeOptimizer(model, target, cfg).run()

    achieved = fidelity(propagate(model, result.pulse), target)
    if abs(achieved - result.fidelity) > 1e-8:
        logger.warning("GRAPE fidelity %.10f differs from re-propagated %.10f", result.fidelity, achieved)
    return result.model_copy(update={"fidelity": achieved})
