from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import ConfigurationError
from pulses.sequence import PulseSequence


def write_pulse(
    path: Union[str, Path],
    pulse: PulseSequence,
    labels: Sequence[str],
    manifest_ref: Optional[str] = None,
) -> Path:
    """
    Plain-text pulse file: optional '#' comment lines, a header
    "n_segments dt_s label1 label2 ...", then one row of amplitudes (Hz) per segment.
    """
    if len(labels) != pulse.n_channels:
        raise ConfigurationError(f"{len(labels)} labels for a pulse with {pulse.n_channels} channels")
    path = Path(path)
    with open(path, "w") as f:
        if manifest_ref:
            f.write(f"# manifest: {manifest_ref}\n")
        f.write(f"{pulse.n_segments} {pulse.dt_s!r} {' '.join(labels)}\n")
        np.savetxt(f, pulse.amplitudes_hz, fmt="%.12e")
    return path


def read_pulse(path: Union[str, Path], max_rf_hz: Optional[float] = None) -> Tuple[PulseSequence, List[str]]:
    """Parse a pulse file; returns the sequence and its channel labels."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Pulse file '{path}' not found")
    with open(path) as f:
        lines = [line.strip() for line in f]
    body = [line for line in lines if line and not line.startswith("#")]
    if not body:
        raise ConfigurationError(f"{path}: missing header line")
    header = body[0].split()
    if len(header) < 3:
        raise ConfigurationError(f"{path}: header needs n_segments, dt_s and at least one channel label")
    try:
        n_segments, dt_s = int(header[0]), float(header[1])
    except ValueError as e:
        raise ConfigurationError(f"{path}: bad header '{body[0]}'") from e
    labels = header[2:]
    try:
        amps = np.loadtxt(body[1:], ndmin=2) if len(body) > 1 else np.zeros((0, len(labels)))
    except ValueError as e:
        raise ConfigurationError(f"{path}: non-numeric amplitude row ({e})") from e
    if amps.shape != (n_segments, len(labels)):
        raise ConfigurationError(
            f"{path}: expected {n_segments} rows x {len(labels)} columns, got {amps.shape[0]} x {amps.shape[1]}"
        )
    try:
        pulse = PulseSequence(dt_s=dt_s, amplitudes_hz=amps, max_rf_hz=max_rf_hz)
    except ValueError as e:
        raise ConfigurationError(f"{path}: {e}") from e
    return pulse, labels
