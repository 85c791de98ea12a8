import hashlib
import logging
from itertools import combinations
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from errors import ConfigurationError, DimensionError
from spins.pauli import OperatorMatrix, site_operator

logger = logging.getLogger(__name__)

ControlMode = Literal["selective", "collective"]


class SpinSystem(BaseModel):
    """
    Spin-1/2 register: species, chemical shifts, couplings and the
    actuator/target partition. Qubit indices are 1-based everywhere.
    """
    model_config = ConfigDict(frozen=True)

    name: str = "register"
    n_qubits: int
    species: Tuple[str, ...]
    shifts_hz: Tuple[float, ...]
    dipolar_hz: Tuple[Tuple[float, ...], ...]
    scalar_hz: Tuple[Tuple[float, ...], ...]
    actuators: Tuple[int, ...]
    targets: Tuple[int, ...]
    t2_s: Optional[Tuple[float, ...]] = None
    readout_spectator: Literal["0", "1"] = "0"

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        n = data.get("n_qubits")
        if n is not None and data.get("scalar_hz") is None:
            data["scalar_hz"] = tuple(tuple(0.0 for _ in range(n)) for _ in range(n))
        if n is not None and data.get("targets") is None and data.get("actuators") is not None:
            data["targets"] = tuple(q for q in range(1, n + 1) if q not in set(data["actuators"]))
        for key in ("actuators", "targets"):
            if data.get(key) is not None:
                data[key] = tuple(sorted(data[key]))
        return data

    @model_validator(mode="after")
    def _check_invariants(self) -> "SpinSystem":
        n = self.n_qubits
        if n < 1:
            raise ValueError("n_qubits must be positive")
        for field in ("species", "shifts_hz"):
            if len(getattr(self, field)) != n:
                raise ValueError(f"{field} needs {n} entries, got {len(getattr(self, field))}")
        for field in ("dipolar_hz", "scalar_hz"):
            mat = np.asarray(getattr(self, field), dtype=float)
            if mat.shape != (n, n):
                raise ValueError(f"{field} must be {n}x{n}, got shape {mat.shape}")
            if not np.allclose(mat, mat.T, rtol=0.0, atol=1e-12):
                raise ValueError(f"{field} is not symmetric")
            if np.any(np.diag(mat) != 0.0):
                raise ValueError(f"{field} must have a zero diagonal")
        act, tgt = set(self.actuators), set(self.targets)
        if not act:
            raise ValueError("At least one actuator qubit is required")
        if not tgt:
            raise ValueError("At least one target qubit is required")
        if act & tgt:
            raise ValueError(f"Qubits {sorted(act & tgt)} are both actuator and target")
        if act | tgt != set(range(1, n + 1)):
            raise ValueError(f"Actuators {sorted(act)} and targets {sorted(tgt)} must partition 1..{n}")
        if self.t2_s is not None:
            if len(self.t2_s) != n:
                raise ValueError(f"t2_s needs {n} entries, got {len(self.t2_s)}")
            if any(t <= 0 for t in self.t2_s):
                raise ValueError("T2 times must be positive")
        return self

    @classmethod
    def from_couplings(
        cls,
        species: List[str],
        shifts_hz: List[float],
        actuators: List[int],
        dipolar_hz: Optional[Dict[Tuple[int, int], float]] = None,
        scalar_hz: Optional[Dict[Tuple[int, int], float]] = None,
        **kwargs,
    ) -> "SpinSystem":
        """Build a system from sparse {(i, j): value} coupling maps (1-based)."""
        n = len(species)

        def dense(pairs: Optional[Dict[Tuple[int, int], float]]) -> Tuple[Tuple[float, ...], ...]:
            mat = np.zeros((n, n))
            for (i, j), value in (pairs or {}).items():
                mat[i - 1, j - 1] = mat[j - 1, i - 1] = value
            return tuple(tuple(float(v) for v in row) for row in mat)

        return cls(
            n_qubits=n,
            species=tuple(species),
            shifts_hz=tuple(float(v) for v in shifts_hz),
            dipolar_hz=dense(dipolar_hz),
            scalar_hz=dense(scalar_hz),
            actuators=tuple(actuators),
            **kwargs,
        )

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def dipolar_matrix(self) -> np.ndarray:
        return np.asarray(self.dipolar_hz, dtype=float)

    @property
    def scalar_matrix(self) -> np.ndarray:
        return np.asarray(self.scalar_hz, dtype=float)

    @property
    def default_t2_s(self) -> Optional[Tuple[float, ...]]:
        """Per-qubit T2 from the molecule file, used when no --t2 is given."""
        return self.t2_s

    def is_homonuclear(self, i: int, j: int) -> bool:
        return self.species[i - 1] == self.species[j - 1]

    def fingerprint(self) -> str:
        """Stable hash of every field; used as a cache and manifest key."""
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()[:16]


def _pair_coupling(n: int, i: int, j: int, homonuclear: bool, d_hz: float, j_hz: float) -> OperatorMatrix:
    zz = site_operator(n, {i: "Z", j: "Z"})
    out = np.zeros_like(zz)
    if d_hz:
        if homonuclear:
            xx = site_operator(n, {i: "X", j: "X"})
            yy = site_operator(n, {i: "Y", j: "Y"})
            out += (np.pi * d_hz / 2) * (2 * zz - xx - yy)
        else:
            out += np.pi * d_hz * zz
    if j_hz:
        if homonuclear:
            xx = site_operator(n, {i: "X", j: "X"})
            yy = site_operator(n, {i: "Y", j: "Y"})
            out += (np.pi * j_hz / 2) * (xx + yy + zz)
        else:
            out += (np.pi * j_hz / 2) * zz
    return out


def build_drift(sys: SpinSystem) -> OperatorMatrix:
    """
    Static Hamiltonian in rad/s:
    sum_i -pi nu_i Z_i plus the secular dipolar and scalar pair couplings
    (full form within a species, truncated ZZ form across species).
    """
    n = sys.n_qubits
    h = np.zeros((sys.dim, sys.dim), dtype=complex)
    for q, nu in enumerate(sys.shifts_hz, start=1):
        if nu:
            h += site_operator(n, {q: "Z"}, -np.pi * nu)
    dip, sca = sys.dipolar_matrix, sys.scalar_matrix
    for i, j in combinations(range(1, n + 1), 2):
        d_hz, j_hz = dip[i - 1, j - 1], sca[i - 1, j - 1]
        if d_hz or j_hz:
            h += _pair_coupling(n, i, j, sys.is_homonuclear(i, j), d_hz, j_hz)
    return h


def build_controls(sys: SpinSystem, mode: ControlMode = "selective") -> List[Tuple[str, OperatorMatrix]]:
    """
    Control Hamiltonians with unit coefficient.

    selective: X_k, Y_k for every actuator k.
    collective: sum of X_k (resp. Y_k) over same-species actuators, one pair per species.
    """
    if not sys.actuators:
        raise ConfigurationError("Control Hamiltonians need at least one actuator qubit")
    n = sys.n_qubits
    if mode == "selective":
        controls = []
        for k in sys.actuators:
            controls.append((f"X{k}", site_operator(n, {k: "X"})))
            controls.append((f"Y{k}", site_operator(n, {k: "Y"})))
        return controls
    if mode == "collective":
        groups: Dict[str, List[int]] = {}
        for k in sys.actuators:
            groups.setdefault(sys.species[k - 1], []).append(k)
        controls = []
        for sp, qubits in groups.items():
            controls.append((f"X[{sp}]", sum(site_operator(n, {k: "X"}) for k in qubits)))
            controls.append((f"Y[{sp}]", sum(site_operator(n, {k: "Y"}) for k in qubits)))
        return controls
    raise ConfigurationError(f"Unknown control mode '{mode}'. Available: ['selective', 'collective']")


class ControlModel(BaseModel):
    """Drift plus control channels; what propagation and GRAPE operate on."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n_qubits: int
    drift: np.ndarray
    controls: Tuple[np.ndarray, ...]
    labels: Tuple[str, ...]
    actuators: Tuple[int, ...] = ()

    @model_validator(mode="after")
    def _check_shapes(self) -> "ControlModel":
        dim = 2 ** self.n_qubits
        if self.drift.shape != (dim, dim):
            raise DimensionError(f"Drift must be {dim}x{dim}, got {self.drift.shape}")
        if len(self.controls) != len(self.labels):
            raise DimensionError(f"{len(self.controls)} control matrices but {len(self.labels)} labels")
        for label, c in zip(self.labels, self.controls):
            if c.shape != (dim, dim):
                raise DimensionError(f"Control '{label}' must be {dim}x{dim}, got {c.shape}")
        return self

    @classmethod
    def from_system(cls, sys: SpinSystem, mode: ControlMode = "selective") -> "ControlModel":
        controls = build_controls(sys, mode)
        return cls(
            n_qubits=sys.n_qubits,
            drift=build_drift(sys),
            controls=tuple(m for _, m in controls),
            labels=tuple(label for label, _ in controls),
            actuators=sys.actuators,
        )

    @property
    def n_channels(self) -> int:
        return len(self.controls)


def detect_degeneracies(sys: SpinSystem, rel_tol: float = 1e-6) -> List[str]:
    """
    Parameter coincidences that can shrink the dynamical Lie algebra.

    Reports equal shifts within a species, equal-magnitude couplings from one
    qubit to two others, and targets with no coupling to any actuator.
    """
    def close(a: float, b: float) -> bool:
        return abs(a - b) <= rel_tol * max(abs(a), abs(b), 1.0)

    warnings: List[str] = []
    n = sys.n_qubits
    for i, j in combinations(range(1, n + 1), 2):
        if sys.is_homonuclear(i, j) and close(sys.shifts_hz[i - 1], sys.shifts_hz[j - 1]):
            warnings.append(f"qubits {i} and {j} ({sys.species[i - 1]}) share the chemical shift {sys.shifts_hz[i - 1]} Hz")
    total = sys.dipolar_matrix + sys.scalar_matrix
    for q in range(1, n + 1):
        others = [o for o in range(1, n + 1) if o != q]
        for a, b in combinations(others, 2):
            ca, cb = total[q - 1, a - 1], total[q - 1, b - 1]
            if ca and close(abs(ca), abs(cb)):
                warnings.append(f"qubit {q} couples equally to qubits {a} and {b} ({ca} Hz vs {cb} Hz)")
    for t in sys.targets:
        if not any(total[t - 1, a - 1] for a in sys.actuators):
            warnings.append(f"target qubit {t} has no coupling to any actuator")
    for w in warnings:
        logger.warning("Degenerate parameters: %s", w)
    return warnings
