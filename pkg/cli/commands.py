import argparse
import logging
import re
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from cache import global_cache
from cli.manifest import RunManifest
from cli.reports import write_csv, write_text
from data.molecule_loader import load_molecule
from data.pulse_io import read_pulse, write_pulse
from data.reference import load_reference
from dynamics.states import (
    apply_gate,
    overlap_coeffs,
    parse_state,
    readout_basis,
    register_readout_basis,
)
from dynamics.sweep import theta_sweep
from errors import ConfigurationError, DimensionError, FitError, StateParseError
from gates.base import GateTarget
from gates.registry import gate_library, gate_registry
from lie.analysis import closure_report, listed_elements
from lie.closure import membership
from pulses.duration import DurationSearch, SynthesisResult, synthesize
from pulses.grape import GrapeConfig, GrapeResult, grape_optimize
from pulses.perturbations import error_budget
from pulses.realization import ExactRealization, GateRealization, PulseRealization
from spectroscopy.experiments import AcquisitionConfig, acquire, overlap_experiment
from spectroscopy.fitting import FitResult
from spins.system import ControlModel, SpinSystem, detect_degeneracies

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN_FAILURE = 1
EXIT_USAGE = 2


def parse_t2(value: Optional[str], sys: SpinSystem) -> Optional[Tuple[float, ...]]:
    """'--t2 14,36,20' in ms, 'inf' allowed; '--t2 molecule' takes the molecule file's values."""
    if value is None:
        return None
    if value.strip() == "molecule":
        if sys.default_t2_s is None:
            raise ConfigurationError(f"Molecule '{sys.name}' defines no T2 times")
        return sys.default_t2_s
    try:
        t2 = tuple(float(v) * 1e-3 for v in value.split(","))
    except ValueError as e:
        raise ConfigurationError(f"Bad --t2 list '{value}'") from e
    if len(t2) != sys.n_qubits:
        raise ConfigurationError(f"--t2 needs {sys.n_qubits} values, got {len(t2)}")
    return t2


def parse_targets(value: Optional[str], sys: SpinSystem, gate: str) -> Tuple[int, ...]:
    if value:
        try:
            return tuple(int(v) for v in value.split(","))
        except ValueError as e:
            raise ConfigurationError(f"Bad --targets list '{value}'") from e
    return sys.targets[: gate_registry.get_gate(gate).n_qubits]


def grape_config(args: argparse.Namespace) -> GrapeConfig:
    return GrapeConfig(
        n_segments=args.segments,
        dt_s=args.dt_us * 1e-6,
        max_rf_hz=args.max_rf_hz,
        max_iters=args.max_iters,
        fidelity_goal=args.fidelity_goal,
        seed=args.seed,
        restarts=args.restarts,
        direction=args.direction,
        line_search=not args.fixed_step,
        time_limit_s=args.time_limit_min * 60.0 if args.time_limit_min > 0 else None,
    )


def duration_search(args: argparse.Namespace) -> Optional[DurationSearch]:
    if args.fixed_duration:
        return None
    return DurationSearch(
        min_duration_s=args.min_duration_ms * 1e-3,
        max_duration_s=args.max_duration_ms * 1e-3,
        candidates=args.duration_candidates,
        score_goal=args.fidelity_goal,
    )


def run_grape(
    args: argparse.Namespace, sys: SpinSystem, model: ControlModel, target: GateTarget, cfg: GrapeConfig
) -> Tuple[GrapeResult, Optional[SynthesisResult]]:
    """GRAPE over the searched durations, or at the fixed --segments x --dt-us with --fixed-duration."""
    search = duration_search(args)
    if search is None:
        return grape_optimize(model, target, cfg), None
    synthesis = synthesize(model, target, cfg, search=search, ideal=global_cache.ideal_for(sys, args.mode))
    return synthesis.result, synthesis


def load_realization(
    args: argparse.Namespace, sys: SpinSystem, target: GateTarget
) -> GateRealization:
    """Stored pulse when --pulse is given, otherwise the exact gate over --duration-ms."""
    if getattr(args, "pulse", None):
        pulse, labels = read_pulse(args.pulse)
        model = ControlModel.from_system(sys, args.mode)
        if tuple(labels) != model.labels:
            raise DimensionError(f"Pulse channels {labels} do not match control channels {list(model.labels)}")
        return PulseRealization(model, pulse, name=f"pulse:{Path(args.pulse).name}")
    return ExactRealization(target, duration_s=args.duration_ms * 1e-3)


def pulse_filename(gate: str, theta: float) -> str:
    return f"{gate}_theta_{theta:+.6f}.txt"


_SINGLE_TERM = re.compile(r"^(-?)([EXYZ01]+)$")


def table_labels(gate: str, targets: Sequence[int], sys: SpinSystem, expr: str) -> Optional[Tuple[str, str]]:
    """
    Labels of the measured-overlap table for a single-term readout input,
    e.g. ('Uxy', '-Y_a0_b') for Uxy on '-1Y0'. Actuator symbols are dropped.
    """
    match = _SINGLE_TERM.match(expr.replace(" ", ""))
    if match is None or len(match.group(2)) != sys.n_qubits or len(sys.targets) != 2:
        return None
    sign, symbols = match.groups()
    a, b = (symbols[q - 1] for q in sys.targets)
    if gate == "Uxy":
        gate_label = "Uxy"
    elif gate == "Uz_single":
        gate_label = "Uz_single_a" if targets[0] == sys.targets[0] else "Uz_single_b"
    else:
        return None
    return gate_label, f"{sign}{a}_a{b}_b"


def base_manifest(command: str, args: argparse.Namespace, sys: SpinSystem, **inputs) -> RunManifest:
    return RunManifest(
        command=command,
        config_paths={"molecule": str(args.molecule)},
        inputs={"system": sys.fingerprint(), "mode": args.mode, **inputs},
    )


def cmd_controllability(args: argparse.Namespace) -> int:
    sys = load_molecule(args.molecule)
    out = Path(args.out)
    warnings = detect_degeneracies(sys)
    basis = global_cache.closure_for(sys, args.mode, args.tol)
    report = closure_report(basis, sys)
    manifest = base_manifest("controllability", args, sys)
    manifest.tolerances = {"closure": args.tol, "membership": 1e-6}

    lines = [
        f"system: {sys.name} ({sys.n_qubits} qubits, actuators {list(sys.actuators)}, targets {list(sys.targets)})",
        f"control mode: {args.mode}",
        f"Lie algebra dimension: {report['dim']}",
        f"full control of actuators {list(sys.actuators)}: {report['actuator_full_control']}",
        f"full control of targets {list(sys.targets)}: {report['target_full_control']}",
    ]
    if len(sys.targets) == 2:
        listed = listed_elements(sys)
        inside = sum(membership(m, basis)[0] for _, m in listed)
        lines.append(f"listed elements in algebra: {inside}/{len(listed)}")
    lines += [f"warning: {w}" for w in warnings]
    lines.append("structure (actuator factor: target factors):")
    lines += [f"  {k}: {', '.join(v)}" for k, v in report["structure"].items()]
    print("\n".join(lines))

    rows = [{"index": i, "terms": " ".join(terms)} for i, terms in enumerate(report["elements"])]
    write_csv(out, "basis.csv", pd.DataFrame(rows, columns=["index", "terms"]), manifest)
    write_text(out, "summary.txt", "\n".join(lines), manifest)
    manifest.write(out)
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    sys = load_molecule(args.molecule)
    out = Path(args.out)
    targets = parse_targets(args.targets, sys, args.gate)
    target = gate_library(args.gate, args.theta, targets, sys)
    cfg = grape_config(args)
    model = ControlModel.from_system(sys, args.mode)
    result, synthesis = run_grape(args, sys, model, target, cfg)

    manifest = base_manifest("optimize", args, sys, gate=args.gate, theta=target.theta, targets=list(targets),
                             grape=cfg.model_dump())
    manifest.seeds = [cfg.seed + r for r in range(cfg.restarts)]
    manifest.tolerances = {"min_fidelity": args.min_fidelity, "fidelity_goal": cfg.fidelity_goal}
    if synthesis is not None:
        # wall times stay out of the manifest so run_id is reproducible
        manifest.inputs["duration_search"] = [
            {**a.choice.model_dump(), "fidelity": a.fidelity} for a in synthesis.attempts
        ]
    write_pulse(out / "pulse.txt", result.pulse, model.labels, manifest.reference)
    manifest.outputs.append("pulse.txt")
    write_csv(out, "trace.csv", result.trace_frame(), manifest)

    pulse = result.pulse
    lines = [
        f"gate: {args.gate}(theta={target.theta:.6f}) on qubits {list(targets)}",
        f"duration: {pulse.duration_s * 1e3:.3f} ms in {pulse.n_segments} segments",
    ]
    if synthesis is not None:
        lines.append(f"duration search: control ideal of dimension {synthesis.ideal_dim}, "
                     f"reachability bound {synthesis.duration.score:.6f} at the chosen duration")
        lines += [f"  tried {a.choice.duration_s * 1e3:.3f} ms: fidelity {a.fidelity:.6f} in {a.seconds:.1f} s"
                  for a in synthesis.attempts]
    lines += [
        f"best restart: {result.restart} (seed {result.seed}), iterations {result.iterations}",
        f"restart wall time: {', '.join(f'{s:.1f}' for s in result.restart_seconds)} s",
        f"achieved fidelity: {result.fidelity:.6f}",
    ]
    if result.timed_out:
        lines.append(f"stopped by the {args.time_limit_min:g} min time limit")
    reported = load_reference().fidelity_for(args.gate, sys.n_qubits)
    if reported is not None:
        lines.append(f"reported experimental fidelity: {reported:.3f}")
    write_text(out, "summary.txt", "\n".join(lines) + "\n", manifest)
    manifest.write(out)
    print("\n".join(lines))
    if result.fidelity < args.min_fidelity:
        logger.error("Fidelity %.6f below required %.6f", result.fidelity, args.min_fidelity)
        return EXIT_DOMAIN_FAILURE
    return EXIT_OK


def reference_lines(
    gate: str, targets: Sequence[int], sys: SpinSystem, expr: str, overlap: float, input_fit: FitResult
) -> List[str]:
    """Simulated numbers next to the published experimental ones, when a matching entry exists."""
    reference = load_reference()
    lines = []
    labels = table_labels(gate, targets, sys, expr)
    row = reference.overlap_for(labels[0], sys.n_qubits, labels[1]) if labels else None
    if row is not None:
        lines.append(
            f"measured overlap {row.gate} {row.input} ({row.register}): {row.value:+.2f} +/- {row.stderr:.2f}, "
            f"simulated {overlap:+.4f}"
        )
    if gate == "Uz_pair":
        inv = reference.inversion
        lines.append(
            f"inversion coefficient: simulated {input_fit.coefficients[0]:+.4f} +/- {input_fit.stderr[0]:.4f}, "
            f"measured {inv.coefficient:+.2f} +/- {inv.stderr:.2f}"
        )
    return ["reference comparison:", *lines] if lines else []


def cmd_simulate(args: argparse.Namespace) -> int:
    sys = load_molecule(args.molecule)
    out = Path(args.out)
    targets = parse_targets(args.targets, sys, args.gate)
    target = gate_library(args.gate, args.theta, targets, sys)
    realization = load_realization(args, sys, target)
    t2 = parse_t2(args.t2, sys)
    acq = AcquisitionConfig(n_points=args.points, dwell_s=args.dwell_us * 1e-6, zero_fill_factor=args.zero_fill)

    state = parse_state(args.input, sys.n_qubits)
    predicted = apply_gate(state, target.unitary)
    report = overlap_experiment(sys, realization, state.label, predicted.model_copy(update={"label": "predicted"}),
                                t2, acq)
    output = realization.apply(state, t2)
    basis = (
        readout_basis(sys.n_qubits, targets, sys.readout_spectator)
        if len(targets) == 2 else register_readout_basis(sys)
    )
    coeffs = overlap_coeffs(output, basis)
    input_fit = overlap_experiment(sys, realization, state.label, state, t2, acq).fit

    manifest = base_manifest("simulate", args, sys, gate=args.gate, theta=target.theta, targets=list(targets),
                             input=state.label, realization=realization.name,
                             t2_s=None if t2 is None else list(t2), acquisition=acq.model_dump())
    if args.pulse:
        manifest.config_paths["pulse"] = str(args.pulse)
    write_csv(out, "overlaps.csv", pd.DataFrame({"state": basis.names, "coefficient": coeffs}), manifest)
    write_csv(out, "reference_spectrum.csv", report.reference.to_frame(), manifest)
    write_csv(out, "result_spectrum.csv", report.result.to_frame(), manifest)
    write_csv(out, "input_spectrum.csv", acquire(sys, state, acq, t2).to_frame(), manifest)
    lines = [
        f"realization: {realization.name} ({realization.duration_s * 1e3:.3f} ms)",
        f"input: {state.label}",
        "overlaps with readout states:",
        *[f"  {n}: {c:+.6f}" for n, c in zip(basis.names, coeffs)],
        "spectral fit against the predicted final state:",
        report.fit.summary(),
        "spectral fit against the input state:",
        input_fit.summary(),
        *reference_lines(args.gate, targets, sys, state.label, report.coefficient, input_fit),
    ]
    write_text(out, "summary.txt", "\n".join(lines), manifest)
    manifest.write(out)
    print("\n".join(lines))
    return EXIT_OK


def sweep_realizer(
    args: argparse.Namespace, sys: SpinSystem, out: Path, manifest: RunManifest
) -> Callable[[GateTarget], GateRealization]:
    """Exact gates, per-theta stored pulses (--pulse-dir) or per-theta GRAPE (--synthesize)."""
    if args.pulse_dir:
        model = ControlModel.from_system(sys, args.mode)

        def from_files(target: GateTarget) -> GateRealization:
            pulse, _ = read_pulse(Path(args.pulse_dir) / pulse_filename(target.name, target.theta))
            return PulseRealization(model, pulse, name=f"pulse:{target.name}")

        return from_files
    if args.synthesize:
        cfg = grape_config(args)
        model = ControlModel.from_system(sys, args.mode)
        pulse_dir = out / "pulses"
        pulse_dir.mkdir(parents=True, exist_ok=True)
        manifest.seeds = [cfg.seed + r for r in range(cfg.restarts)]
        synthesized: Dict[float, PulseRealization] = {}

        def from_grape(target: GateTarget) -> GateRealization:
            if target.theta not in synthesized:
                result, _ = run_grape(args, sys, model, target, cfg)
                name = pulse_filename(target.name, target.theta)
                write_pulse(pulse_dir / name, result.pulse, model.labels, manifest.reference)
                logger.info("theta %.4f: synthesized fidelity %.6f", target.theta, result.fidelity)
                synthesized[target.theta] = PulseRealization(model, result.pulse, name=f"grape:{target.name}")
            return synthesized[target.theta]

        return from_grape
    return lambda target: ExactRealization(target, duration_s=args.duration_ms * 1e-3)


def cmd_sweep(args: argparse.Namespace) -> int:
    sys = load_molecule(args.molecule)
    out = Path(args.out)
    targets = parse_targets(args.targets, sys, args.gate)
    thetas = np.linspace(args.theta_min, args.theta_max, args.theta_points)
    if thetas.size < 2:
        raise ConfigurationError(f"A theta sweep needs at least 2 points for fitting, got {thetas.size}")
    t2 = parse_t2(args.t2, sys)
    inputs = args.inputs.split(";") if args.inputs else readout_basis(
        sys.n_qubits, targets if len(targets) == 2 else sys.targets[:2], sys.readout_spectator
    ).names

    manifest = base_manifest("sweep", args, sys, gate=args.gate, targets=list(targets), inputs=list(inputs),
                             thetas=thetas.tolist(), t2_s=None if t2 is None else list(t2),
                             synthesize=bool(args.synthesize), pulse_dir=args.pulse_dir,
                             duration_ms=args.duration_ms)
    if args.synthesize:
        manifest.inputs["grape"] = grape_config(args).model_dump()
    realize = sweep_realizer(args, sys, out, manifest)
    reference = load_reference()
    rows = []
    for i, expr in enumerate(inputs):
        result = theta_sweep(sys, args.gate, expr, thetas, targets, realize, t2)
        write_csv(out, f"sweep_{i}.csv", result.to_frame(), manifest)
        ref = reference.sweep_for(result.input_expr)
        rows.append({
            "input": result.input_expr,
            "A": result.amplitude_stay,
            "B": result.amplitude_transfer,
            "residual_A": result.residual_stay,
            "residual_B": result.residual_transfer,
            "measured_A": ref.a if ref else None,
            "measured_B": ref.b if ref else None,
        })
    fits = pd.DataFrame(rows)
    write_csv(out, "fits.csv", fits, manifest)
    manifest.write(out)
    print(fits.to_string(index=False))
    return EXIT_OK


def cmd_error_budget(args: argparse.Namespace) -> int:
    sys = load_molecule(args.molecule)
    out = Path(args.out)
    targets = parse_targets(args.targets, sys, args.gate)
    target = gate_library(args.gate, args.theta, targets, sys)
    realization = load_realization(args, sys, target)
    t2 = parse_t2(args.t2, sys) or sys.default_t2_s
    if t2 is None:
        raise ConfigurationError("The error budget needs T2 times (--t2 or the molecule file)")
    budget = error_budget(realization, target, t2, args.epsilon)

    manifest = base_manifest("error-budget", args, sys, gate=args.gate, theta=target.theta, targets=list(targets),
                             realization=realization.name, t2_s=list(t2))
    manifest.tolerances = {"epsilon": args.epsilon}
    if args.pulse:
        manifest.config_paths["pulse"] = str(args.pulse)
    reference = load_reference()
    measured = reference.error_budget
    frame = pd.DataFrame(budget.as_rows())
    frame["measured_uxy_5q"] = [measured["control"], measured["dephasing"], measured["miscalibration"]]
    write_csv(out, "error_budget.csv", frame, manifest)
    manifest.write(out)
    print(f"realization: {realization.name}, fidelity {budget.gate_fidelity:.6f}")
    print(f"T2 used: {', '.join(f'{t * 1e3:g}' for t in t2)} ms "
          f"(measured range {reference.t2_ms['min']:g} to {reference.t2_ms['max']:g} ms)")
    print(frame.to_string(index=False))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "controllability": cmd_controllability,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "error-budget": cmd_error_budget,
}


def run_command(args: argparse.Namespace) -> int:
    """Dispatch a subcommand and map failures to exit codes."""
    try:
        return COMMANDS[args.command](args)
    except FitError as e:
        logger.error("Fit failed: %s", e)
        return EXIT_DOMAIN_FAILURE
    except (ConfigurationError, StateParseError, DimensionError, ValidationError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except ValueError as e:
        logger.error("%s", e)
        return EXIT_USAGE
