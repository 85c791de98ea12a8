from typing import Tuple

import numpy as np

from gates.base import Gate, GeneratorTerms


class UzSingle(Gate):
    """
    Qubit-specific z-rotation exp(i theta Z_k / 2).
    theta = -pi/2 gives exp(-i pi/4 Z_k), which maps X_k -> Y_k -> -X_k.
    """

    @property
    def name(self) -> str:
        return "Uz_single"

    @property
    def description(self) -> str:
        return "z-rotation of one target qubit, exp(i*theta*Z_k/2)"

    @property
    def n_qubits(self) -> int:
        return 1

    @property
    def default_theta(self) -> float:
        return -np.pi / 2

    def generator_terms(self, theta: float, qubits: Tuple[int, ...]) -> GeneratorTerms:
        (k,) = qubits
        return [(theta / 2, {k: "Z"})]


class UzPair(Gate):
    """
    Joint z-rotation exp(i theta (Z_a + Z_b) / 2); the default theta = -pi
    is exp(-i pi/2 (Z_a + Z_b)), which inverts transverse target spins.
    """

    @property
    def name(self) -> str:
        return "Uz_pair"

    @property
    def description(self) -> str:
        return "z-rotation of a target pair, exp(i*theta*(Z_a+Z_b)/2), default theta=-pi"

    @property
    def n_qubits(self) -> int:
        return 2

    @property
    def default_theta(self) -> float:
        return -np.pi

    def generator_terms(self, theta: float, qubits: Tuple[int, ...]) -> GeneratorTerms:
        a, b = qubits
        return [(theta / 2, {a: "Z"}), (theta / 2, {b: "Z"})]


class Uxy(Gate):
    """
    XY-interaction exp(i theta (X_aX_b + Y_aY_b)).
    theta = pi/4 is SWAP up to a phase gate; theta = pi/8 entangles.
    """

    @property
    def name(self) -> str:
        return "Uxy"

    @property
    def description(self) -> str:
        return "XY interaction exp(i*theta*(X_aX_b+Y_aY_b)); pi/4 ~ SWAP, pi/8 entangling"

    @property
    def n_qubits(self) -> int:
        return 2

    @property
    def default_theta(self) -> float:
        return np.pi / 4

    @property
    def sweep_frequency(self) -> int:
        return 2

    def generator_terms(self, theta: float, qubits: Tuple[int, ...]) -> GeneratorTerms:
        a, b = qubits
        return [(theta, {a: "X", b: "X"}), (theta, {a: "Y", b: "Y"})]
