from typing import Optional

from fastapi import APIRouter
from mcp.server.fastmcp import FastMCP
from .gates_tool import list_gates_tool, list_molecules_tool, list_perturbations_tool
from .analysis_tool import controllability_tool, simulation_tool

# Initialize FastMCP server
mcp = FastMCP("Spin Register Control Engine")

# Initialize FastAPI Router
router = APIRouter()

# --- Registry ---

@router.get("/gates")
@mcp.tool()
def list_gates() -> list[dict]:
    """Catalog of the target gates (Uz_single, Uz_pair, Uxy) and their parameters."""
    return list_gates_tool()

@router.get("/perturbations")
@mcp.tool()
def list_perturbations() -> list[dict]:
    """Catalog of the perturbations a pulse can be evaluated under."""
    return list_perturbations_tool()

@router.get("/molecules")
@mcp.tool()
def list_molecules() -> list[str]:
    """Names of the shipped molecule presets."""
    return list_molecules_tool()

# --- Analysis ---

@router.post("/controllability")
@mcp.tool()
def controllability(molecule: str, mode: str = "selective", tol: float = 1e-8) -> dict:
    """
    Dynamical Lie algebra of a molecule under actuator-only control.

    Args:
        molecule: Preset name (e.g. 'fig1a_like') or molecule TOML path.
        mode: 'selective' or 'collective' actuator controls.
        tol: Linear-independence tolerance of the closure.
    """
    return controllability_tool(molecule=molecule, mode=mode, tol=tol)

@router.post("/simulations")
@mcp.tool()
def simulate(
    molecule: str,
    gate: str,
    input_state: str,
    theta: Optional[float] = None,
    targets: Optional[list[int]] = None,
    t2_ms: Optional[list[float]] = None,
    duration_ms: float = 0.0,
) -> dict:
    """
    Apply an exact target gate to a deviation state and fit its simulated spectrum.

    Args:
        molecule: Preset name or molecule TOML path.
        gate: 'Uz_single', 'Uz_pair' or 'Uxy'.
        input_state: State expression such as 'EYE+EEY'.
        theta: Gate angle in radians.
        targets: 1-based target qubits.
        t2_ms: Per-qubit T2 in ms.
        duration_ms: Gate duration under dephasing.
    """
    return simulation_tool(
        molecule=molecule,
        gate=gate,
        input_state=input_state,
        theta=theta,
        targets=targets,
        t2_ms=t2_ms,
        duration_ms=duration_ms,
    )

# For standalone MCP execution
if __name__ == "__main__":
    mcp.run()
