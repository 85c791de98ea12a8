import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List

from pydantic import BaseModel, Field

TOOL_VERSION = "0.1.0"
MANIFEST_NAME = "manifest.json"


class RunManifest(BaseModel):
    """
    Everything that determines a command's outputs. run_id hashes all fields
    except the timestamp, so identical invocations share it.
    """
    command: str
    config_paths: Dict[str, str] = {}
    inputs: Dict[str, Any] = {}
    seeds: List[int] = []
    tolerances: Dict[str, float] = {}
    tool_version: str = TOOL_VERSION
    timestamp: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    outputs: List[str] = []

    @property
    def run_id(self) -> str:
        payload = self.model_dump(exclude={"timestamp", "outputs"})
        blob = json.dumps(payload, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def reference(self) -> str:
        return f"{MANIFEST_NAME} run_id={self.run_id}"

    def write(self, out_dir: Path) -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / MANIFEST_NAME
        data = self.model_dump()
        data["run_id"] = self.run_id
        path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")
        return path
