import numpy as np
import pytest

from dynamics.states import apply_gate, parse_state, reduced_purity
from errors import ConfigurationError
from gates.base import GateTarget
from gates.registry import gate_library, gate_registry


def assert_state(state, expr, n):
    np.testing.assert_allclose(state.matrix, parse_state(expr, n).matrix, atol=1e-10)


def test_registry_lists_gates():
    gates = {g["name"]: g for g in gate_registry.list_gates()}
    assert set(gates) == {"Uz_single", "Uz_pair", "Uxy"}
    assert gates["Uxy"]["sweep_frequency"] == 2
    assert gates["Uz_pair"]["default_theta"] == pytest.approx(-np.pi)


def test_unknown_gate():
    with pytest.raises(ValueError, match="not found"):
        gate_registry.get_gate("CNOT")


def test_uz_single_rotates_x_into_y(fig1a_system):
    target = gate_library("Uz_single", -np.pi / 2, (2,), fig1a_system)
    assert_state(apply_gate(parse_state("EXE", 3), target.unitary), "EYE", 3)
    # qubit 3 untouched
    assert_state(apply_gate(parse_state("EEX", 3), target.unitary), "EEX", 3)


def test_uz_pair_inverts_transverse_targets(fig1a_system):
    target = gate_library("Uz_pair", None, (2, 3), fig1a_system)
    assert target.theta == pytest.approx(-np.pi)
    out = apply_gate(parse_state("EYE+EEY", 3), target.unitary)
    assert_state(out, "-EYE-EEY", 3)


def test_uxy_quarter_pi_swaps_readout_states(fig1a_system):
    target = gate_library("Uxy", np.pi / 4, (2, 3), fig1a_system)
    assert_state(apply_gate(parse_state("10X", 3), target.unitary), "1Y0", 3)


def test_generator_exponentiates_to_unitary(fig1c_system):
    target = gate_library("Uxy", np.pi / 8, (4, 5), fig1c_system)
    assert target.dim == 32
    np.testing.assert_allclose(target.unitary.conj().T @ target.unitary, np.eye(32), atol=1e-10)
    assert target.generator is not None


def test_gate_qubit_validation(fig1a_system):
    with pytest.raises(ConfigurationError):
        gate_library("Uxy", None, (1, 2), fig1a_system)
    with pytest.raises(ConfigurationError):
        gate_library("Uxy", None, (2,), fig1a_system)
    with pytest.raises(ConfigurationError):
        gate_library("Uxy", None, (2, 2), fig1a_system)


def test_target_must_be_unitary():
    with pytest.raises(ValueError):
        GateTarget(name="bad", unitary=np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_uxy_quarter_pi_is_swap_times_phases():
    u = gate_registry.get_gate("Uxy").block_unitary(np.pi / 4)
    swap = np.eye(4)[[0, 2, 1, 3]]
    d = u @ swap.conj().T
    np.testing.assert_allclose(d, np.diag(np.diag(d)), atol=1e-12)
    np.testing.assert_allclose(np.abs(np.diag(d)), 1.0, atol=1e-12)


def test_uxy_eighth_pi_maximally_entangles():
    u = gate_registry.get_gate("Uxy").block_unitary(np.pi / 8)
    psi = u @ np.array([0.0, 1.0, 0.0, 0.0])
    assert reduced_purity(psi, [1], 2) == pytest.approx(0.5)


def _pair_state(sys, a_symbol, b_symbol):
    symbols = [sys.readout_spectator] * sys.n_qubits
    a, b = sys.targets[-2:]
    symbols[a - 1], symbols[b - 1] = a_symbol, b_symbol
    return parse_state("".join(symbols), sys.n_qubits).matrix


@pytest.mark.parametrize("register", ["fig1a_system", "fig1c_system"])
def test_uxy_transfer_law_for_random_angles(register, request):
    sys = request.getfixturevalue(register)
    x_a0_b, y_a0_b = _pair_state(sys, "X", "0"), _pair_state(sys, "Y", "0")
    o_ax_b, o_ay_b = _pair_state(sys, "0", "X"), _pair_state(sys, "0", "Y")
    for theta in np.random.default_rng(13).uniform(-np.pi, np.pi, 200):
        u = gate_library("Uxy", theta, sys.targets[-2:], sys).unitary
        c, s = np.cos(2 * theta), np.sin(2 * theta)
        np.testing.assert_allclose(u @ x_a0_b @ u.conj().T, c * x_a0_b + s * o_ay_b, atol=1e-9)
        np.testing.assert_allclose(u @ y_a0_b @ u.conj().T, c * y_a0_b - s * o_ax_b, atol=1e-9)
