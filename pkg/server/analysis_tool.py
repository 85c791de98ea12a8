import logging
from typing import Any, Dict, List, Optional

from cache import global_cache
from data.molecule_loader import load_molecule
from dynamics.states import apply_gate, overlap_coeffs, parse_state, readout_basis
from gates.registry import gate_library, gate_registry
from lie.analysis import closure_report
from pulses.realization import ExactRealization
from spectroscopy.experiments import overlap_experiment

logger = logging.getLogger(__name__)


def controllability_tool(molecule: str, mode: str = "selective", tol: float = 1e-8) -> Dict[str, Any]:
    """
    Lie-algebra closure of a molecule's drift and actuator controls.

    Args:
        molecule: Preset name (e.g. 'fig1a_like') or path to a molecule TOML file.
        mode: 'selective' (X_k, Y_k per actuator) or 'collective' (one pair per species).
        tol: Gram-Schmidt independence tolerance.

    Returns:
        Dimension, full-control verdicts and the Pauli labels of the basis.
    """
    try:
        sys = load_molecule(molecule)
    except ValueError as e:
        return {"error": str(e), "molecule": molecule}

    params = {"system": sys.fingerprint(), "mode": mode, "tol": float(tol)}
    cached = global_cache.get_report("controllability", params)
    if cached is not None:
        return cached

    basis = global_cache.closure_for(sys, mode, tol)
    report = closure_report(basis, sys)
    result = {
        "molecule": sys.name,
        "mode": mode,
        "dim": report["dim"],
        "actuator_full_control": report["actuator_full_control"],
        "target_full_control": report["target_full_control"],
        "elements": [" ".join(terms) for terms in report["elements"]],
    }
    global_cache.set_report("controllability", params, result)
    return result


def simulation_tool(
    molecule: str,
    gate: str,
    input_state: str,
    theta: Optional[float] = None,
    targets: Optional[List[int]] = None,
    t2_ms: Optional[List[float]] = None,
    duration_ms: float = 0.0,
) -> Dict[str, Any]:
    """
    Apply an exact gate to a deviation state and read it out spectroscopically.

    Args:
        molecule: Preset name or path to a molecule TOML file.
        gate: Gate name ('Uz_single', 'Uz_pair', 'Uxy').
        input_state: State expression, e.g. 'EYE+EEY' or '1X0'.
        theta: Gate angle in radians (gate default when omitted).
        targets: 1-based target qubits (first targets of the molecule when omitted).
        t2_ms: Per-qubit T2 in milliseconds; no dephasing when omitted.
        duration_ms: Gate duration over which dephasing acts.

    Returns:
        Readout-state overlaps and the fitted overlap with the predicted final state.
    """
    try:
        sys = load_molecule(molecule)
        n_gate = gate_registry.get_gate(gate).n_qubits
        target = gate_library(gate, theta, targets or sys.targets[:n_gate], sys)
        state = parse_state(input_state, sys.n_qubits)
        t2_s = None if t2_ms is None else [t * 1e-3 for t in t2_ms]
        realization = ExactRealization(target, duration_s=duration_ms * 1e-3)
        predicted = apply_gate(state, target.unitary).model_copy(update={"label": "predicted"})
        report = overlap_experiment(sys, realization, state.label, predicted, t2_s)
        output = realization.apply(state, t2_s)
    except ValueError as e:
        return {"error": str(e), "molecule": molecule, "gate": gate}

    result: Dict[str, Any] = {
        "molecule": sys.name,
        "gate": gate,
        "theta": target.theta,
        "targets": list(target.qubits),
        "input": state.label,
        "overlap": report.fit.coefficients[0],
        "overlap_stderr": report.fit.stderr[0],
    }
    if len(target.qubits) == 2:
        basis = readout_basis(sys.n_qubits, tuple(target.qubits), sys.readout_spectator)
        result["readout"] = dict(zip(basis.names, overlap_coeffs(output, basis).tolist()))
    return result
