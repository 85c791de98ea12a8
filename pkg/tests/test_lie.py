import numpy as np
import pytest

from cache import global_cache
from errors import AlgebraError, DimensionError
from lie.analysis import algebra_generators, closure_report, listed_elements, subsystem_full_control
from lie.closure import as_skew_hermitian, closure, membership
from spins.pauli import PAULI_MATRICES, site_operator

X, Y, Z = (PAULI_MATRICES[c] for c in "XYZ")


def test_single_qubit_closure_is_su2():
    basis = closure([X, Y])
    assert basis.dim == 3
    inside, residual = membership(Z, basis)
    assert inside and residual < 1e-10


def test_commuting_generators_close_immediately():
    assert closure([Z]).dim == 1
    assert closure([site_operator(2, {1: "Z"}), site_operator(2, {2: "Z"})]).dim == 2


def test_two_qubit_full_control():
    gens = [site_operator(2, {q: c}) for q in (1, 2) for c in "XY"] + [site_operator(2, {1: "Z", 2: "Z"})]
    basis = closure(gens)
    assert basis.dim == 15
    assert subsystem_full_control(basis, [1, 2])


def test_basis_is_orthonormal_and_skew_hermitian(fig1a_system):
    basis = global_cache.closure_for(fig1a_system)
    np.testing.assert_allclose(basis.gram(), np.eye(basis.dim), atol=1e-9)
    for e in basis.elements:
        np.testing.assert_allclose(e, -e.conj().T, atol=1e-12)


def test_three_qubit_register_dimension(fig1a_system):
    basis = global_cache.closure_for(fig1a_system)
    assert basis.dim == 22
    report = closure_report(basis, fig1a_system)
    assert report["actuator_full_control"] is True
    assert report["target_full_control"] is False
    assert report["identity_in_labels"] is False


def test_listed_elements_span_the_algebra(fig1a_system):
    basis = global_cache.closure_for(fig1a_system)
    listed = listed_elements(fig1a_system)
    assert len(listed) == 22
    for name, m in listed:
        inside, residual = membership(m, basis)
        assert inside, f"{name} outside the algebra (residual {residual:.2e})"


def test_target_pauli_not_reachable(fig1a_system):
    basis = global_cache.closure_for(fig1a_system)
    inside, residual = membership(site_operator(3, {2: "X"}), basis)
    assert not inside
    assert residual > 1e-3


@pytest.mark.slow
def test_five_qubit_register_dimension(fig1c_system):
    basis = closure(algebra_generators(fig1c_system))
    assert basis.dim == 382
    assert len(listed_elements(fig1c_system)) == 382
    assert subsystem_full_control(basis, fig1c_system.actuators)
    assert not subsystem_full_control(basis, fig1c_system.targets)


def test_closure_input_errors():
    with pytest.raises(AlgebraError):
        closure([])
    with pytest.raises(AlgebraError):
        closure([np.array([[0, 1], [0, 0]], dtype=complex)])
    with pytest.raises(DimensionError):
        closure([X, site_operator(2, {1: "X"})])
    with pytest.raises(AlgebraError):
        closure([X], tol=0.0)


def test_as_skew_hermitian():
    np.testing.assert_allclose(as_skew_hermitian(X), 1j * X)
    np.testing.assert_allclose(as_skew_hermitian(1j * X), 1j * X)


def test_membership_shape_mismatch():
    with pytest.raises(DimensionError):
        membership(site_operator(2, {1: "X"}), closure([X, Y]))


@pytest.mark.parametrize("sites", [{2: "Y"}, {3: "X"}, {3: "Y"}])
def test_bare_transverse_target_paulis_not_reachable(fig1a_system, sites):
    inside, residual = membership(site_operator(3, sites), global_cache.closure_for(fig1a_system))
    assert not inside
    assert residual > 1e-3


def test_closure_is_idempotent(fig1a_system):
    basis = global_cache.closure_for(fig1a_system)
    again = closure(list(basis.elements))
    assert again.dim == basis.dim
    for element in basis.elements:
        assert membership(element, again)[0]


def test_closure_dimension_invariant_under_conjugation(fig1a_system):
    rng = np.random.default_rng(5)
    w, _ = np.linalg.qr(rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))
    rotated = [w @ g @ w.conj().T for g in algebra_generators(fig1a_system)]
    assert closure(rotated).dim == 22
