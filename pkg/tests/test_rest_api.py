from fastapi.testclient import TestClient
import sys
import os

# Add project root to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from main import app

client = TestClient(app)

def test_health_check():
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok", "service": "spin-engine"}

def test_list_gates():
    response = client.get("/gates")
    assert response.status_code == 200
    assert {g["name"] for g in response.json()} == {"Uz_single", "Uz_pair", "Uxy"}

def test_list_perturbations():
    response = client.get("/perturbations")
    assert response.status_code == 200
    assert [p["name"] for p in response.json()] == ["none", "amplitude_scale", "dephasing"]

def test_list_molecules():
    response = client.get("/molecules")
    assert response.status_code == 200
    assert response.json() == ["fig1a_like", "fig1c_like"]

def test_controllability():
    response = client.post("/controllability", params={"molecule": "fig1a_like"})
    assert response.status_code == 200
    data = response.json()
    assert data["dim"] == 22
    assert data["actuator_full_control"] is True
    assert data["target_full_control"] is False

def test_simulation_matches_prediction():
    response = client.post(
        "/simulations",
        params={"molecule": "fig1a_like", "gate": "Uz_pair", "input_state": "EYE+EEY"},
    )
    assert response.status_code == 200
    data = response.json()
    # output matches the independently predicted inverted state
    assert abs(data["overlap"] - 1.0) < 1e-8
    assert data["targets"] == [2, 3]

def test_unknown_molecule_reports_error():
    response = client.post("/controllability", params={"molecule": "benzene"})
    assert response.status_code == 200
    assert "not found" in response.json()["error"]
