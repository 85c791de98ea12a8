import logging
import uvicorn
import argparse
import sys
from fastapi import FastAPI
from server.server import router as api_router
from server.server import mcp
from cli.commands import EXIT_USAGE, run_command

app = FastAPI(title="Spin Register Control Engine")

# Include the unified router (REST endpoints)
app.include_router(api_router)

# Mount MCP Server (SSE)
app.mount("/mcp", mcp.sse_app())

@app.get("/health")
def health_check():
    return {"status": "ok", "service": "spin-engine"}

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler()
    ]
)


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with the configuration exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, gate: bool = True):
    p.add_argument("--molecule", required=True, help="Preset name (fig1a_like, fig1c_like) or TOML path")
    p.add_argument("--mode", choices=["selective", "collective"], default="selective", help="Actuator control mode")
    p.add_argument("--out", default="out", help="Output directory")
    p.add_argument("--verbose", action="store_true", help="Debug logging")
    if gate:
        p.add_argument("--gate", required=True, help="Uz_single, Uz_pair or Uxy")
        p.add_argument("--targets", help="Comma-separated 1-based target qubits (default: first targets)")


def _theta(p: argparse.ArgumentParser):
    p.add_argument("--theta", type=float, help="Gate angle in radians (gate default when omitted)")


def _grape(p: argparse.ArgumentParser):
    p.add_argument("--segments", type=int, default=200, help="Number of piecewise-constant segments")
    p.add_argument("--dt-us", type=float, default=40.0, help="Segment length in microseconds")
    p.add_argument("--max-rf-hz", type=float, default=10_000.0, help="Amplitude bound per channel")
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--fidelity-goal", type=float, default=0.999)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--direction", choices=["steepest", "conjugate"], default="conjugate")
    p.add_argument("--fixed-step", action="store_true", help="Disable the line search")
    p.add_argument("--fixed-duration", action="store_true",
                   help="Use --segments x --dt-us as given instead of searching for a reachable duration")
    p.add_argument("--min-duration-ms", type=float, default=4.0, help="Shortest duration the search considers")
    p.add_argument("--max-duration-ms", type=float, default=30.0, help="Longest duration the search considers")
    p.add_argument("--duration-candidates", type=int, default=3, help="Durations tried by GRAPE, best bound first")
    p.add_argument("--time-limit-min", type=float, default=25.0, help="Wall-clock budget per gate (0 for none)")


def _realization(p: argparse.ArgumentParser):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--pulse", help="Pulse file written by 'optimize'")
    group.add_argument("--exact", action="store_true", help="Use the exact target unitary (default)")
    p.add_argument("--duration-ms", type=float, default=0.0, help="Duration of an exact gate under dephasing")
    p.add_argument("--t2", help="Per-qubit T2 in ms, comma-separated ('inf' allowed), or 'molecule'")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(description="Spin Register Control Engine")
    subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)

    # Server command (REST + SSE)
    server_parser = subparsers.add_parser("server", help="Run the unified REST/MCP server")
    server_parser.add_argument("--port", type=int, default=8001, help="Port to run on")
    server_parser.add_argument("--host", type=str, default="0.0.0.0", help="Host to run on")

    # MCP Stdio command
    subparsers.add_parser("mcp-server", help="Run the MCP server in stdio mode")

    p = subparsers.add_parser("controllability", help="Lie-algebra closure and full-control verdicts")
    _common(p, gate=False)
    p.add_argument("--tol", type=float, default=1e-8, help="Closure independence tolerance")

    p = subparsers.add_parser("optimize", help="GRAPE pulse synthesis for a target gate")
    _common(p)
    _theta(p)
    _grape(p)
    p.add_argument("--min-fidelity", type=float, default=0.99, help="Exit with 1 below this fidelity")

    p = subparsers.add_parser("simulate", help="Apply a gate to a state and simulate the spectra")
    _common(p)
    _theta(p)
    _realization(p)
    p.add_argument("--input", required=True, help="Input state expression, e.g. EYE+EEY")
    p.add_argument("--points", type=int, default=2048, help="FID samples")
    p.add_argument("--dwell-us", type=float, default=100.0, help="FID dwell time in microseconds")
    p.add_argument("--zero-fill", type=int, default=2, help="Zero-fill factor")

    p = subparsers.add_parser("sweep", help="Theta sweep with cos/sin amplitude fits")
    _common(p)
    _grape(p)
    p.add_argument("--theta-min", type=float, default=-3.14159265358979)
    p.add_argument("--theta-max", type=float, default=3.14159265358979)
    p.add_argument("--theta-points", type=int, default=21)
    p.add_argument("--inputs", help="';'-separated input states (default: the four readout states)")
    p.add_argument("--t2", help="Per-qubit T2 in ms, comma-separated, or 'molecule'")
    p.add_argument("--duration-ms", type=float, default=0.0)
    source = p.add_mutually_exclusive_group()
    source.add_argument("--synthesize", action="store_true", help="Run GRAPE for every theta")
    source.add_argument("--pulse-dir", help="Directory of stored per-theta pulses")

    p = subparsers.add_parser("error-budget", help="Control, dephasing and miscalibration losses")
    _common(p)
    _theta(p)
    _realization(p)
    p.add_argument("--epsilon", type=float, default=0.05, help="Relative amplitude miscalibration")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if getattr(args, "verbose", False):
        logging.getLogger().setLevel(logging.DEBUG)

    if args.command == "server":
        uvicorn.run(app, host=args.host, port=args.port)
    elif args.command == "mcp-server":
        mcp.run()
    elif args.command is None:
        parser.print_help()
        return EXIT_USAGE
    else:
        return run_command(args)
    return 0

if __name__ == "__main__":
    sys.exit(main())
