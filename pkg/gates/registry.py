from typing import Any, Dict, List, Optional, Sequence, Type

from errors import ConfigurationError
from gates.base import Gate, GateTarget
from gates.library import UzPair, UzSingle, Uxy
from spins.system import SpinSystem


class GateRegistry:
    def __init__(self):
        self._gates: Dict[str, Type[Gate]] = {}
        self._instances: Dict[str, Gate] = {}

        self.register(UzSingle)
        self.register(UzPair)
        self.register(Uxy)

    def register(self, gate_cls: Type[Gate]):
        """Register a new gate class."""
        instance = gate_cls()
        self._gates[instance.name] = gate_cls
        self._instances[instance.name] = instance

    def get_gate(self, name: str) -> Gate:
        """Get a gate instance by name."""
        if name not in self._instances:
            raise ValueError(f"Gate '{name}' not found. Available: {list(self._instances.keys())}")
        return self._instances[name]

    def list_gates(self) -> List[Dict[str, Any]]:
        """List all available gates with metadata."""
        return [
            {
                "name": gate.name,
                "description": gate.description,
                "n_qubits": gate.n_qubits,
                "default_theta": gate.default_theta,
                "sweep_frequency": gate.sweep_frequency,
            }
            for gate in self._instances.values()
        ]


# Global registry instance
gate_registry = GateRegistry()


def gate_library(
    name: str,
    theta: Optional[float],
    target_qubits: Sequence[int],
    register: SpinSystem,
) -> GateTarget:
    """
    Build a named gate on target qubits of `register`, identity elsewhere.

    Raises:
        ValueError: unknown gate name.
        ConfigurationError: qubits outside the register's target set.
    """
    gate = gate_registry.get_gate(name)
    outside = [q for q in target_qubits if q not in register.targets]
    if outside:
        raise ConfigurationError(
            f"Qubits {outside} are not target qubits of '{register.name}' (targets: {list(register.targets)})"
        )
    return gate.target(theta, tuple(target_qubits), register.n_qubits)
