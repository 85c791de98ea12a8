import logging
from pathlib import Path

import pandas as pd

from cli.manifest import RunManifest

logger = logging.getLogger(__name__)


def manifest_line(manifest: RunManifest) -> str:
    return f"# manifest: {manifest.reference}\n"


def write_csv(out_dir: Path, name: str, frame: pd.DataFrame, manifest: RunManifest) -> Path:
    """CSV preceded by a manifest reference line; floats written with 12 significant digits."""
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    with open(path, "w", newline="") as f:
        f.write(manifest_line(manifest))
        frame.to_csv(f, index=False, float_format="%.12g", lineterminator="\n")
    manifest.outputs.append(name)
    logger.info("Wrote %s", path)
    return path


def write_text(out_dir: Path, name: str, text: str, manifest: RunManifest) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(manifest_line(manifest) + text.rstrip("\n") + "\n")
    manifest.outputs.append(name)
    logger.info("Wrote %s", path)
    return path
