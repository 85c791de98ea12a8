import pytest

from data.molecule_loader import list_presets, load_molecule, parse_molecule
from errors import ConfigurationError

BASE = {
    "n_qubits": 3,
    "species": ["F", "H", "H"],
    "shifts_hz": [100.0, 200.0, -300.0],
    "actuators": [1],
}


def test_presets():
    assert list_presets() == ["fig1a_like", "fig1c_like"]


def test_three_qubit_preset(fig1a_system):
    assert fig1a_system.name == "fig1a_like"
    assert fig1a_system.n_qubits == 3
    assert fig1a_system.species == ("F", "H", "H")
    assert fig1a_system.dipolar_matrix[1, 2] == fig1a_system.dipolar_matrix[2, 1] == 1370.0
    assert fig1a_system.default_t2_s == pytest.approx((0.040, 0.014, 0.036))
    assert fig1a_system.readout_spectator == "1"


def test_five_qubit_preset(fig1c_system):
    assert fig1c_system.actuators == (1, 2, 3)
    assert fig1c_system.scalar_matrix[3, 4] == 20.5


def test_dash_alias():
    assert load_molecule("fig1a-like").n_qubits == 3


def test_unknown_molecule():
    with pytest.raises(ConfigurationError, match="Available presets"):
        load_molecule("benzene")


def test_load_from_file(tmp_path):
    path = tmp_path / "pair.toml"
    path.write_text(
        'n_qubits = 2\nspecies = ["F", "H"]\nshifts_hz = [0.0, 300.0]\nactuators = [1]\n'
        "dipolar_hz = [[1, 2, 150.0]]\n"
    )
    sys = load_molecule(path)
    assert sys.name == "pair"
    assert sys.targets == (2,)
    assert sys.t2_s is None


def test_invalid_toml(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("n_qubits = \n")
    with pytest.raises(ConfigurationError):
        load_molecule(path)


@pytest.mark.parametrize(
    "extra",
    [
        {"dipolar_hz": [[1, 2, 10.0], [2, 1, 12.0]]},
        {"dipolar_hz": [[1, 2, 10.0], [1, 2, 10.0]]},
        {"dipolar_hz": [[2, 2, 10.0]]},
        {"scalar_hz": [[1, 4, 10.0]]},
        {"actuators": [4]},
        {"shifts_hz": [0.0, 1.0]},
        {"t2_ms": [10.0, -1.0, 5.0]},
    ],
)
def test_invalid_molecules(extra):
    with pytest.raises(ConfigurationError):
        parse_molecule({**BASE, **extra})


def test_missing_keys():
    data = dict(BASE)
    del data["species"]
    with pytest.raises(ConfigurationError, match="species"):
        parse_molecule(data)


def test_misspelled_key_is_rejected():
    with pytest.raises(ConfigurationError, match="dipolar"):
        parse_molecule({**BASE, "dipolar": [[1, 2, 150.0]]})
