from typing import Any, Dict, List

from data.molecule_loader import list_presets
from gates.registry import gate_registry
from pulses.perturbations import perturbation_registry


def list_gates_tool() -> List[Dict[str, Any]]:
    """
    List the target gates with their qubit count, default angle and sweep frequency.
    """
    return gate_registry.list_gates()


def list_perturbations_tool() -> List[Dict[str, Any]]:
    return perturbation_registry.list_perturbations()


def list_molecules_tool() -> List[str]:
    """Names of the shipped molecule presets."""
    return list_presets()
