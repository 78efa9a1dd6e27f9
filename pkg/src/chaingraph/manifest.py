"""Reproducibility manifests written beside every command's outputs.

A manifest pins everything needed to rerun a command byte-identically:
the subcommand, its flags, content hashes of the input files, the
master seed, and the tool version. Timestamps record the run itself,
so manifests are the one output excluded from byte-identity checks.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

MANIFEST_NAME = "run_manifest.json"


def tool_version() -> str:
    try:
        return metadata.version("chaingraph")
    except metadata.PackageNotFoundError:
        return "0.0.0+local"


def file_fingerprint(path) -> str:
    """Hex sha256 of a file's bytes."""
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class RunManifest:
    subcommand: str
    flags: dict
    input_hashes: dict
    seed: int
    version: str
    started_at: str
    finished_at: str = ""

    def finish(self) -> None:
        self.finished_at = utc_now()

    def write(self, out_dir) -> Path:
        if not self.finished_at:
            self.finish()
        path = Path(out_dir) / MANIFEST_NAME
        with path.open("w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path
