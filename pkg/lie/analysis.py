from itertools import product
from typing import Dict, Iterable, List, Tuple

import numpy as np

from errors import ConfigurationError, DimensionError
from lie.closure import AlgebraBasis, membership
from spins.pauli import OperatorMatrix, PauliString, matrix_to_pauli, site_operator
from spins.system import ControlMode, SpinSystem, build_controls, build_drift


def algebra_generators(sys: SpinSystem, mode: ControlMode = "selective") -> List[OperatorMatrix]:
    """Drift followed by the control Hamiltonians; input to closure()."""
    return [build_drift(sys)] + [m for _, m in build_controls(sys, mode)]


def subsystem_full_control(basis: AlgebraBasis, qubits: Iterable[int], tol: float = 1e-6) -> bool:
    """
    True iff every traceless Pauli string supported on `qubits` (identity
    elsewhere) lies in the algebra.
    """
    qubits = sorted(set(qubits))
    if not qubits:
        raise ConfigurationError("subsystem_full_control needs a nonempty qubit set")
    n = basis.n_qubits
    if qubits[0] < 1 or qubits[-1] > n:
        raise DimensionError(f"Qubits {qubits} outside register of {n} qubits")
    for labels in product("EXYZ", repeat=len(qubits)):
        if set(labels) == {"E"}:
            continue
        op = site_operator(n, dict(zip(qubits, labels)))
        inside, _ = membership(op, basis, tol)
        if not inside:
            return False
    return True


def label_basis(basis: AlgebraBasis, cutoff: float = 1e-10) -> List[List[PauliString]]:
    """Pauli decomposition of every basis element (as the Hermitian -i * element)."""
    return [matrix_to_pauli(-1j * e, cutoff=cutoff) for e in basis.elements]


def algebra_structure(
    labels: List[List[PauliString]], sys: SpinSystem
) -> Dict[Tuple[str, ...], List[Tuple[str, ...]]]:
    """
    Group labelled elements by actuator factor.

    Returns:
        {sorted actuator substrings: [sorted target substrings of each element]}
    """
    act = [q - 1 for q in sys.actuators]
    tgt = [q - 1 for q in sys.targets]
    groups: Dict[Tuple[str, ...], List[Tuple[str, ...]]] = {}
    for strings in labels:
        act_parts = tuple(sorted({"".join(s.labels[i] for i in act) for s in strings}))
        tgt_parts = tuple(sorted({"".join(s.labels[i] for i in tgt) for s in strings}))
        groups.setdefault(act_parts, []).append(tgt_parts)
    return groups


def listed_elements(sys: SpinSystem) -> List[Tuple[str, OperatorMatrix]]:
    """
    Readable spanning set for a register with one actuator block and a target pair:
    (all actuator Pauli strings) x {E, Z_a, Z_b, Y_aX_b - X_aY_b, X_aX_b + Y_aY_b, Z_aZ_b}
    plus E x {Y_aX_b - X_aY_b, X_aX_b + Y_aY_b, Z_a - Z_b, -nu_a Z_a - nu_b Z_b + D_ab Z_aZ_b}.
    """
    if len(sys.targets) != 2:
        raise ConfigurationError(f"Listed elements need exactly two target qubits, got {list(sys.targets)}")
    n = sys.n_qubits
    a, b = sys.targets
    nu_a, nu_b = sys.shifts_hz[a - 1], sys.shifts_hz[b - 1]
    # effective ZZ weight of the pair in units of pi
    zz_ab = sys.dipolar_matrix[a - 1, b - 1] + sys.scalar_matrix[a - 1, b - 1] / 2

    def op(sites: Dict[int, str]) -> OperatorMatrix:
        return site_operator(n, sites)

    def times(act: Dict[int, str], tgt_terms: List[Tuple[float, Dict[int, str]]]) -> OperatorMatrix:
        return sum(c * op({**act, **sites}) for c, sites in tgt_terms)

    target_factors = [
        ("E", [(1.0, {})]),
        (f"Z{a}", [(1.0, {a: "Z"})]),
        (f"Z{b}", [(1.0, {b: "Z"})]),
        (f"Y{a}X{b}-X{a}Y{b}", [(1.0, {a: "Y", b: "X"}), (-1.0, {a: "X", b: "Y"})]),
        (f"X{a}X{b}+Y{a}Y{b}", [(1.0, {a: "X", b: "X"}), (1.0, {a: "Y", b: "Y"})]),
        (f"Z{a}Z{b}", [(1.0, {a: "Z", b: "Z"})]),
    ]
    identity_factors = [
        target_factors[3],
        target_factors[4],
        (f"Z{a}-Z{b}", [(1.0, {a: "Z"}), (-1.0, {b: "Z"})]),
        (
            f"-nu{a}Z{a}-nu{b}Z{b}+D{a}{b}Z{a}Z{b}",
            [(-nu_a, {a: "Z"}), (-nu_b, {b: "Z"}), (zz_ab, {a: "Z", b: "Z"})],
        ),
    ]

    out: List[Tuple[str, OperatorMatrix]] = []
    for labels in product("EXYZ", repeat=len(sys.actuators)):
        if set(labels) == {"E"}:
            continue
        act = dict(zip(sys.actuators, labels))
        act_name = "".join(f"{c}{q}" for q, c in act.items() if c != "E")
        for name, terms in target_factors:
            out.append((f"{act_name}*{name}", times(act, terms)))
    for name, terms in identity_factors:
        out.append((f"E*{name}", times({}, terms)))
    return out


def closure_report(basis: AlgebraBasis, sys: SpinSystem, cutoff: float = 1e-10) -> Dict:
    """Dimension, labels, grouped structure and subsystem verdicts as plain data."""
    labels = label_basis(basis, cutoff)
    structure = algebra_structure(labels, sys)
    return {
        "dim": basis.dim,
        "tolerance": basis.tol,
        "label_cutoff": cutoff,
        "actuator_full_control": subsystem_full_control(basis, sys.actuators),
        "target_full_control": subsystem_full_control(basis, sys.targets),
        "identity_in_labels": any(s.is_identity for strings in labels for s in strings),
        "elements": [[str(s) for s in strings] for strings in labels],
        "structure": {
            "*".join(k) or "E": sorted({"+".join(t) for t in v}) for k, v in structure.items()
        },
        "max_trace": float(max((abs(np.trace(e)) for e in basis.elements), default=0.0)),
    }
