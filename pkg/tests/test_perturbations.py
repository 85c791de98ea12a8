import numpy as np
import pytest

from gates.base import GateTarget
from gates.registry import gate_library
from pulses.perturbations import (
    AmplitudeScale,
    Dephasing,
    NoPerturbation,
    error_budget,
    perturbation_registry,
    perturbed_fidelity,
    pauli_inputs,
    input_support,
    state_fidelity,
)
from pulses.realization import ExactRealization, PulseRealization
from pulses.sequence import PulseSequence
from spins.pauli import PAULI_MATRICES, site_operator
from spins.system import ControlModel

X = PAULI_MATRICES["X"]


@pytest.fixture
def x90_pulse():
    amps = np.zeros((20, 2))
    amps[:, 0] = 1250.0
    return PulseSequence(dt_s=1e-5, amplitudes_hz=amps)


@pytest.fixture
def x90_target():
    return GateTarget.from_generator("X90", -np.pi / 4 * X, qubits=(1,))


def test_registry_catalog():
    names = [p["name"] for p in perturbation_registry.list_perturbations()]
    assert names == ["none", "amplitude_scale", "dephasing"]
    with pytest.raises(ValueError, match="not found"):
        perturbation_registry.create("crosstalk")


def test_exact_pulse_has_unit_fidelity(one_qubit_model, x90_pulse, x90_target):
    assert perturbed_fidelity(one_qubit_model, x90_pulse, x90_target) == pytest.approx(1.0)


def test_amplitude_miscalibration(one_qubit_model, x90_pulse, x90_target):
    value = perturbed_fidelity(one_qubit_model, x90_pulse, x90_target, "amplitude_scale", epsilon=0.05)
    assert value == pytest.approx(np.cos(0.05 * np.pi / 4) ** 2)


def test_infinite_t2_leaves_state_fidelity_at_one(one_qubit_model, x90_pulse, x90_target):
    realization = PulseRealization(one_qubit_model, x90_pulse)
    assert Dephasing([np.inf]).evaluate(realization, x90_target) == pytest.approx(1.0)
    assert Dephasing([1e-3]).evaluate(realization, x90_target) < 1.0


def test_pauli_inputs_cover_gate_qubits():
    inputs = pauli_inputs(3, (2, 3))
    assert len(inputs) == 15
    assert all(abs(np.trace(p.matrix)) < 1e-12 for p in inputs)


def test_exact_realization_state_fidelity(fig1a_system):
    target = gate_library("Uxy", np.pi / 4, (2, 3), fig1a_system)
    assert state_fidelity(ExactRealization(target), target) == pytest.approx(1.0)


def test_error_budget_of_exact_gate(fig1a_system):
    target = gate_library("Uxy", np.pi / 4, (2, 3), fig1a_system)
    budget = error_budget(ExactRealization(target), target, fig1a_system.default_t2_s, 0.05)
    expected = 1.0 - ((1.0 + np.cos(0.05 * np.pi / 2)) / 2) ** 2
    assert budget.gate_loss == pytest.approx(0.0, abs=1e-12)
    assert budget.dephasing_loss == pytest.approx(0.0, abs=1e-12)
    assert budget.miscalibration_loss == pytest.approx(expected, rel=1e-6)
    assert [r["component"] for r in budget.as_rows()] == ["control", "dephasing", "miscalibration"]


def test_error_budget_dephasing_grows_with_duration(fig1a_system):
    target = gate_library("Uxy", np.pi / 4, (2, 3), fig1a_system)
    t2 = fig1a_system.default_t2_s
    short = error_budget(ExactRealization(target, duration_s=1e-3, n_slices=20), target, t2, 0.05)
    long = error_budget(ExactRealization(target, duration_s=8e-3, n_slices=20), target, t2, 0.05)
    assert 0.0 < short.dephasing_loss < long.dephasing_loss < 1.0
    assert long.duration_s == pytest.approx(8e-3)


def test_no_perturbation_matches_unitary_fidelity(one_qubit_model, x90_pulse, x90_target):
    realization = PulseRealization(one_qubit_model, x90_pulse)
    assert NoPerturbation().evaluate(realization, x90_target) == pytest.approx(
        AmplitudeScale(0.0).evaluate(realization, x90_target)
    )


def test_leftover_actuator_rotation_lowers_state_fidelity(x90_pulse):
    model = ControlModel(
        n_qubits=2,
        drift=np.zeros((4, 4), dtype=complex),
        controls=(site_operator(2, {1: "X"}), site_operator(2, {1: "Y"})),
        labels=("X1", "Y1"),
        actuators=(1,),
    )
    identity_on_2 = GateTarget.from_generator("I2", 0.0 * site_operator(2, {2: "Z"}), qubits=(2,))
    realization = PulseRealization(model, x90_pulse)
    assert input_support(realization, identity_on_2) == (1, 2)
    # Pauli inputs with Y or Z on the actuator are rotated away: 7 of 15 survive
    assert state_fidelity(realization, identity_on_2) == pytest.approx(7 / 15)
    assert state_fidelity(realization, identity_on_2, qubits=(2,)) == pytest.approx(1.0)


def test_exact_realization_drives_nothing(fig1a_system):
    target = gate_library("Uz_single", None, (2,), fig1a_system)
    assert input_support(ExactRealization(target), target) == (2,)
