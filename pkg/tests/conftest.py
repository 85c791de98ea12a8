import os
import sys

import numpy as np
import pytest

# Add project root to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from data.molecule_loader import load_molecule
from spins.pauli import PAULI_MATRICES
from spins.system import ControlModel, SpinSystem


@pytest.fixture(scope="session")
def fig1a_system() -> SpinSystem:
    return load_molecule("fig1a_like")


@pytest.fixture(scope="session")
def fig1c_system() -> SpinSystem:
    return load_molecule("fig1c_like")


@pytest.fixture
def one_qubit_model() -> ControlModel:
    """A bare qubit with X/Y drive and no drift."""
    return ControlModel(
        n_qubits=1,
        drift=np.zeros((2, 2), dtype=complex),
        controls=(PAULI_MATRICES["X"], PAULI_MATRICES["Y"]),
        labels=("X1", "Y1"),
    )


@pytest.fixture
def two_spin_system() -> SpinSystem:
    """Uncoupled F/H pair; the proton sits 300 Hz off resonance."""
    return SpinSystem.from_couplings(species=["F", "H"], shifts_hz=[0.0, 300.0], actuators=[1])
