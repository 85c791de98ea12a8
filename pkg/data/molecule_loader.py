import logging
from pathlib import Path
from typing import ClassVar, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from errors import ConfigurationError
from spins.system import SpinSystem

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger(__name__)

MOLECULES_DIR = Path(__file__).parent / "molecules"

CouplingEntry = Tuple[int, int, float]


class MoleculeConfig(BaseModel):
    """
    Molecule file contents. Couplings are upper-triangular [i, j, value]
    lists with 1-based qubit indices; each unordered pair appears at most once.
    """
    model_config = ConfigDict(extra="forbid")

    REQUIRED_KEYS: ClassVar[Tuple[str, ...]] = ("n_qubits", "species", "shifts_hz", "actuators")

    name: str = "molecule"
    n_qubits: int
    species: List[str]
    shifts_hz: List[float]
    dipolar_hz: List[CouplingEntry] = []
    scalar_hz: List[CouplingEntry] = []
    actuators: List[int]
    t2_ms: Optional[List[float]] = None
    readout_spectator: Literal["0", "1"] = "0"

    @model_validator(mode="after")
    def _check_couplings(self) -> "MoleculeConfig":
        n = self.n_qubits
        for field in ("dipolar_hz", "scalar_hz"):
            seen = {}
            for i, j, value in getattr(self, field):
                if not (1 <= i <= n and 1 <= j <= n):
                    raise ValueError(f"{field}: pair ({i}, {j}) outside qubits 1..{n}")
                if i == j:
                    raise ValueError(f"{field}: diagonal pair ({i}, {j}) is not allowed")
                key = (min(i, j), max(i, j))
                if key in seen:
                    if seen[key] != value:
                        raise ValueError(f"{field}: asymmetric values {seen[key]} and {value} for pair {key}")
                    raise ValueError(f"{field}: duplicate pair {key}")
                seen[key] = value
        bad = [q for q in self.actuators if not 1 <= q <= n]
        if bad:
            raise ValueError(f"actuators {bad} outside qubits 1..{n}")
        return self

    def to_system(self) -> SpinSystem:
        return SpinSystem.from_couplings(
            species=self.species,
            shifts_hz=self.shifts_hz,
            actuators=self.actuators,
            dipolar_hz={(i, j): v for i, j, v in self.dipolar_hz},
            scalar_hz={(i, j): v for i, j, v in self.scalar_hz},
            name=self.name,
            t2_s=None if self.t2_ms is None else tuple(t * 1e-3 for t in self.t2_ms),
            readout_spectator=self.readout_spectator,
        )


def list_presets() -> List[str]:
    return sorted(p.stem for p in MOLECULES_DIR.glob("*.toml"))


def resolve_molecule_path(path_or_preset: Union[str, Path]) -> Path:
    """A file path, or the name of a shipped preset ('fig1a_like' or 'fig1a-like')."""
    path = Path(path_or_preset)
    if path.is_file():
        return path
    preset = MOLECULES_DIR / f"{str(path_or_preset).replace('-', '_')}.toml"
    if preset.is_file():
        return preset
    raise ConfigurationError(f"Molecule '{path_or_preset}' not found. Available presets: {list_presets()}")


def parse_molecule(data: dict, source: str = "<dict>") -> SpinSystem:
    missing = [key for key in MoleculeConfig.REQUIRED_KEYS if key not in data]
    if missing:
        raise ConfigurationError(f"{source}: missing required keys {missing}")
    try:
        config = MoleculeConfig.model_validate(data)
        system = config.to_system()
    except ValidationError as e:
        raise ConfigurationError(f"{source}: {e}") from e
    logger.debug("Loaded molecule '%s' (%d qubits) from %s", system.name, system.n_qubits, source)
    return system


def load_molecule(path_or_preset: Union[str, Path]) -> SpinSystem:
    """Read and validate a TOML molecule file into a SpinSystem."""
    path = resolve_molecule_path(path_or_preset)
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"{path}: invalid TOML ({e})") from e
    data.setdefault("name", path.stem)
    return parse_molecule(data, str(path))
