import logging
import time

import numpy as np
import pytest
import scipy.linalg as la

from cache import global_cache
from gates.base import GateTarget
from gates.registry import gate_library
from lie.closure import ideal_closure
from pulses.duration import DurationSearch, coset_scan, duration_candidates, synthesize
from pulses.fidelity import fidelity
from pulses.grape import GrapeConfig
from pulses.perturbations import error_budget
from pulses.propagate import propagate
from pulses.realization import PulseRealization
from spins.pauli import PAULI_MATRICES, site_operator
from spins.system import ControlModel

X, Y = PAULI_MATRICES["X"], PAULI_MATRICES["Y"]

SHIFT_HZ = 100.0


def _spectator_model(j_hz: float) -> ControlModel:
    """Qubit 1 driven, qubit 2 undriven at SHIFT_HZ and coupled by j_hz."""
    drift = np.pi * SHIFT_HZ * site_operator(2, {2: "Z"}) + np.pi * j_hz * site_operator(2, {1: "Z", 2: "Z"})
    return ControlModel(
        n_qubits=2,
        drift=drift,
        controls=(site_operator(2, {1: "X"}), site_operator(2, {1: "Y"})),
        labels=("X1", "Y1"),
        actuators=(1,),
    )


def _z2_rotation(phi: float) -> GateTarget:
    return GateTarget.from_generator("Z2", phi * site_operator(2, {2: "Z"}), qubits=(2,))


def test_undriven_shift_is_the_central_drift():
    model = _spectator_model(j_hz=50.0)
    ideal = ideal_closure(model.drift, model.controls)
    assert ideal.dim == 6
    scan = coset_scan(model, _z2_rotation(-np.pi / 4), ideal)
    np.testing.assert_allclose(scan.central, np.pi * SHIFT_HZ * site_operator(2, {2: "Z"}), atol=1e-8)
    assert scan.outside_fraction == pytest.approx(0.0, abs=1e-9)


def test_scores_follow_free_precession_of_the_spectator():
    model = _spectator_model(j_hz=0.0)
    scan = coset_scan(model, _z2_rotation(-np.pi / 4))
    durations = np.linspace(0.0, 20e-3, 41)
    expected = np.cos(np.pi * SHIFT_HZ * durations - np.pi / 4) ** 2
    np.testing.assert_allclose(scan.scores(durations), expected, atol=1e-10)


def test_scores_match_direct_fidelity_of_the_coset(fig1a_system):
    model = ControlModel.from_system(fig1a_system)
    target = gate_library("Uz_single", None, (2,), fig1a_system)
    scan = coset_scan(model, target, global_cache.ideal_for(fig1a_system))
    for t in (4e-3, 6.5e-3, 11.2e-3):
        direct = fidelity(la.expm(-1j * t * scan.central) @ scan.in_ideal_unitary, target)
        assert scan.scores(np.array([t]))[0] == pytest.approx(direct, abs=1e-10)
    scores = scan.scores(np.linspace(4e-3, 30e-3, 500))
    assert np.all((scores >= 0.0) & (scores <= 1.0))


def test_three_qubit_control_ideal_misses_one_central_direction(fig1a_system):
    ideal = global_cache.ideal_for(fig1a_system)
    assert ideal.dim == global_cache.closure_for(fig1a_system).dim - 1 == 21
    scan = coset_scan(ControlModel.from_system(fig1a_system), gate_library("Uz_pair", None, (2, 3), fig1a_system), ideal)
    central = scan.central
    assert np.linalg.norm(central) > 1.0
    for element in ideal.elements:
        assert np.linalg.norm(central @ element - element @ central) < 1e-8 * np.linalg.norm(central)


def test_candidates_start_at_the_shortest_reachable_duration():
    model = _spectator_model(j_hz=0.0)
    scan = coset_scan(model, _z2_rotation(-np.pi / 4))
    search = DurationSearch(min_duration_s=1e-3, max_duration_s=25e-3, candidates=3, min_separation_s=1e-3)
    choices = duration_candidates(scan, GrapeConfig(dt_s=1e-5), search)
    # exp(-i pi nu T Z) matches exp(-i pi/4 Z) up to phase at T = 1/(4 nu) + k/nu
    assert [c.duration_s for c in choices][0] == pytest.approx(2.5e-3, abs=1e-6)
    assert all(c.score >= 0.999 for c in choices)
    durations = [c.duration_s for c in choices]
    assert min(abs(a - b) for i, a in enumerate(durations) for b in durations[i + 1:]) >= 1e-3 - 1e-12
    for c in choices:
        assert c.n_segments * c.dt_s == pytest.approx(c.duration_s)


def test_unreachable_durations_fall_back_to_best_score():
    model = _spectator_model(j_hz=0.0)
    scan = coset_scan(model, _z2_rotation(-np.pi / 4))
    # window [3, 4] ms: the best bound sits at its lower edge
    search = DurationSearch(min_duration_s=3e-3, max_duration_s=4e-3, candidates=1)
    [choice] = duration_candidates(scan, GrapeConfig(), search)
    assert choice.duration_s == pytest.approx(3e-3, abs=1e-9)
    assert choice.score < 0.999


def test_generator_outside_the_algebra_is_reported(caplog):
    model = _spectator_model(j_hz=0.0)
    target = GateTarget.from_generator("X2", 0.3 * site_operator(2, {2: "X"}), qubits=(2,))
    with caplog.at_level(logging.WARNING, logger="pulses.duration"):
        scan = coset_scan(model, target)
    assert scan.outside_fraction == pytest.approx(1.0)
    assert "outside the dynamical algebra" in caplog.text


def test_window_must_be_ordered():
    with pytest.raises(ValueError):
        DurationSearch(min_duration_s=5e-3, max_duration_s=4e-3)


def test_synthesize_picks_a_reachable_duration():
    model = _spectator_model(j_hz=0.0)
    cfg = GrapeConfig(dt_s=5e-5, max_rf_hz=2000.0, max_iters=300, restarts=2)
    search = DurationSearch(min_duration_s=1e-3, max_duration_s=15e-3)
    synthesis = synthesize(model, _z2_rotation(-np.pi / 4), cfg, search=search)
    assert synthesis.ideal_dim == 3
    assert synthesis.duration.duration_s == pytest.approx(2.5e-3, abs=1e-6)
    assert synthesis.result.pulse.duration_s == pytest.approx(2.5e-3, abs=1e-6)
    assert synthesis.result.fidelity >= 0.999
    assert len(synthesis.attempts) == 1


def test_synthesize_with_zero_drift_uses_the_shortest_window_edge(one_qubit_model):
    target = GateTarget.from_generator("X90", -np.pi / 4 * X, qubits=(1,))
    cfg = GrapeConfig(dt_s=1e-5, max_rf_hz=1e4, max_iters=300, restarts=2)
    search = DurationSearch(min_duration_s=2e-4, max_duration_s=1e-3, min_separation_s=1e-4)
    synthesis = synthesize(one_qubit_model, target, cfg, search=search)
    assert synthesis.duration.duration_s == pytest.approx(2e-4)
    assert synthesis.duration.n_segments == 20
    assert synthesis.result.fidelity >= 0.999


@pytest.mark.slow
@pytest.mark.parametrize("gate,targets", [("Uz_single", (2,)), ("Uz_single", (3,)), ("Uz_pair", (2, 3))])
def test_three_qubit_z_gates_reach_099(fig1a_system, gate, targets):
    target = gate_library(gate, None, targets, fig1a_system)
    cfg = GrapeConfig(time_limit_s=1200.0)
    synthesis = synthesize(fig1a_system, target, cfg, ideal=global_cache.ideal_for(fig1a_system))
    assert synthesis.result.fidelity >= 0.99


@pytest.fixture(scope="module")
def five_qubit_uxy(fig1c_system):
    target = gate_library("Uxy", np.pi / 4, (4, 5), fig1c_system)
    model = ControlModel.from_system(fig1c_system)
    started = time.monotonic()
    synthesis = synthesize(
        model, target, GrapeConfig(time_limit_s=1500.0),
        search=DurationSearch(max_duration_s=20e-3), ideal=global_cache.ideal_for(fig1c_system),
    )
    return model, target, synthesis, time.monotonic() - started


@pytest.mark.slow
def test_five_qubit_uxy_reaches_0987_within_budget(five_qubit_uxy):
    model, target, synthesis, seconds = five_qubit_uxy
    assert seconds < 1800.0
    assert synthesis.result.fidelity >= 0.987
    assert fidelity(propagate(model, synthesis.result.pulse), target) == pytest.approx(synthesis.result.fidelity)


@pytest.mark.slow
def test_five_qubit_control_loss_is_one_minus_fidelity(five_qubit_uxy, fig1c_system):
    model, target, synthesis, _ = five_qubit_uxy
    budget = error_budget(PulseRealization(model, synthesis.result.pulse), target, fig1c_system.default_t2_s, 0.05)
    assert budget.gate_loss == pytest.approx(1.0 - synthesis.result.fidelity, abs=1e-9)
