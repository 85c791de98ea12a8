import numpy as np
import pytest

from errors import DimensionError
from gates.base import GateTarget
from gates.registry import gate_library
from pulses.grape import GrapeConfig, GrapeOptimizer, grape_optimize
from pulses.propagate import propagate
from pulses.fidelity import fidelity
from spins.pauli import PAULI_MATRICES, site_operator
from spins.system import ControlModel

X, Z = PAULI_MATRICES["X"], PAULI_MATRICES["Z"]


@pytest.fixture
def x90_target():
    return GateTarget.from_generator("X90", -np.pi / 4 * X, qubits=(1,))


@pytest.fixture
def detuned_model():
    return ControlModel(
        n_qubits=1,
        drift=-np.pi * 150.0 * Z,
        controls=(PAULI_MATRICES["X"], PAULI_MATRICES["Y"]),
        labels=("X1", "Y1"),
    )


def test_gradient_matches_finite_differences(detuned_model, x90_target):
    cfg = GrapeConfig(n_segments=5, dt_s=1e-4, max_rf_hz=1e4)
    opt = GrapeOptimizer(detuned_model, x90_target, cfg)
    amps = np.random.default_rng(7).uniform(-800.0, 800.0, size=(5, 2))
    value, grad = opt.fidelity_and_gradient(amps)
    h = 1e-3
    numeric = np.zeros_like(amps)
    for idx in np.ndindex(amps.shape):
        up, down = amps.copy(), amps.copy()
        up[idx] += h
        down[idx] -= h
        numeric[idx] = (opt.fidelity_and_gradient(up)[0] - opt.fidelity_and_gradient(down)[0]) / (2 * h)
    np.testing.assert_allclose(grad, numeric, rtol=1e-4, atol=1e-9)
    assert 0.0 <= value <= 1.0


def test_single_qubit_rotation_converges(one_qubit_model, x90_target):
    cfg = GrapeConfig(n_segments=20, dt_s=1e-5, max_rf_hz=1e4, max_iters=300, restarts=2, fidelity_goal=0.999)
    result = grape_optimize(one_qubit_model, x90_target, cfg)
    assert result.fidelity >= 0.999
    assert np.max(np.abs(result.pulse.amplitudes_hz)) <= 1e4
    assert result.fidelity == pytest.approx(fidelity(propagate(one_qubit_model, result.pulse), x90_target))
    trace = [p.fidelity for p in result.trace]
    assert all(b >= a for a, b in zip(trace, trace[1:]))
    assert list(result.trace_frame().columns) == ["iteration", "fidelity", "step_size"]


def test_steepest_direction_improves(detuned_model, x90_target):
    cfg = GrapeConfig(n_segments=10, dt_s=2e-5, max_iters=40, restarts=1, direction="steepest")
    result = grape_optimize(detuned_model, x90_target, cfg)
    assert result.trace[-1].fidelity > result.trace[0].fidelity
    assert result.iterations <= 40


def test_fixed_step_mode_records_every_iteration(detuned_model, x90_target):
    cfg = GrapeConfig(n_segments=10, dt_s=2e-5, max_iters=15, restarts=1, line_search=False, fixed_step_hz=50.0)
    result = grape_optimize(detuned_model, x90_target, cfg)
    assert len(result.trace) == result.iterations + 1
    assert all(p.step_size == 50.0 for p in result.trace[1:])


def test_zero_iterations_returns_initial_guess(one_qubit_model, x90_target):
    cfg = GrapeConfig(n_segments=4, dt_s=1e-5, max_iters=0, restarts=1)
    result = grape_optimize(one_qubit_model, x90_target, cfg)
    assert result.iterations == 0
    assert len(result.trace) == 1
    assert not result.converged


def test_same_seed_same_pulse(one_qubit_model, x90_target):
    cfg = GrapeConfig(n_segments=8, dt_s=1e-5, max_iters=20, restarts=1, seed=42)
    a = grape_optimize(one_qubit_model, x90_target, cfg)
    b = grape_optimize(one_qubit_model, x90_target, cfg)
    np.testing.assert_array_equal(a.pulse.amplitudes_hz, b.pulse.amplitudes_hz)
    assert a.seed == 42


def test_target_dimension_mismatch(one_qubit_model):
    target = GateTarget.from_generator("XX", site_operator(2, {1: "X", 2: "X"}))
    with pytest.raises(DimensionError):
        grape_optimize(one_qubit_model, target, GrapeConfig(n_segments=2, max_iters=1, restarts=1))


def test_config_validation():
    with pytest.raises(ValueError):
        GrapeConfig(n_segments=0)
    with pytest.raises(ValueError):
        GrapeConfig(direction="newton")


@pytest.mark.slow
def test_three_qubit_uxy_synthesis(fig1a_system):
    target = gate_library("Uxy", np.pi / 4, (2, 3), fig1a_system)
    result = grape_optimize(fig1a_system, target, GrapeConfig())
    assert result.fidelity >= 0.99


def test_time_limit_stops_restarts(detuned_model, x90_target):
    cfg = GrapeConfig(n_segments=10, dt_s=2e-5, max_iters=500, restarts=3, time_limit_s=1e-6)
    result = grape_optimize(detuned_model, x90_target, cfg)
    assert result.timed_out
    assert result.iterations == 0
    assert len(result.restart_seconds) == 1
    assert result.elapsed_s == pytest.approx(result.restart_seconds[0])


def test_restart_seconds_recorded_per_restart(detuned_model, x90_target):
    cfg = GrapeConfig(n_segments=6, dt_s=2e-5, max_iters=3, restarts=3, fidelity_goal=1.0)
    result = grape_optimize(detuned_model, x90_target, cfg)
    assert len(result.restart_seconds) == 3
    assert all(s >= 0.0 for s in result.restart_seconds)
    assert not result.timed_out


def test_three_qubit_gradient_matches_finite_differences(fig1a_system):
    target = gate_library("Uxy", np.pi / 4, (2, 3), fig1a_system)
    model = ControlModel.from_system(fig1a_system)
    opt = GrapeOptimizer(model, target, GrapeConfig(n_segments=6, dt_s=4e-5))
    amps = np.random.default_rng(3).uniform(-2000.0, 2000.0, size=(6, model.n_channels))
    _, grad = opt.fidelity_and_gradient(amps)
    h = 1e-3
    numeric = np.zeros_like(amps)
    for idx in np.ndindex(amps.shape):
        up, down = amps.copy(), amps.copy()
        up[idx] += h
        down[idx] -= h
        numeric[idx] = (opt.fidelity_and_gradient(up)[0] - opt.fidelity_and_gradient(down)[0]) / (2 * h)
    np.testing.assert_allclose(grad, numeric, rtol=1e-4, atol=1e-9)
