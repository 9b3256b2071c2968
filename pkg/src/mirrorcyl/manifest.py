"""Run manifests and the files written next to them.

A manifest records everything needed to regenerate a run.  Its ``manifest_hash``
is the SHA-256 of the canonical JSON of the reproducibility fields only, so two
runs of the same configuration share a hash even though their wall-clock times
differ.  Each output is listed with its own SHA-256, and JSON outputs also embed
the manifest hash, which lets ``check_outputs`` detect files from different runs.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from . import __version__
from .rng import GENERATOR_NAME

SCHEMA_ID = "mirrorcyl.manifest/1"
MANIFEST_NAME = "manifest.json"
OUTPUT_DIR_ENV = "MIRRORCYL_OUTPUT_DIR"

# fields excluded from the hash: they describe the execution, not the result
_VOLATILE = ("wall_clock_seconds", "threads", "outputs", "censor_count", "manifest_hash", "created_by")


class ManifestMismatch(ValueError):
    pass


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def dump_json(obj: Any) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n").encode("utf-8")


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "mirrorcyl-out"))


@dataclass
class RunManifest:
    command: str
    config: dict
    wall_clock_seconds: float = 0.0
    censor_count: Optional[int] = None
    threads: Optional[int] = None
    outputs: dict = field(default_factory=dict)
    tool_version: str = __version__

    @property
    def manifest_hash(self) -> str:
        core = {"schema": SCHEMA_ID, "command": self.command, "tool_version": self.tool_version,
                "rng": GENERATOR_NAME, **self.config}
        return sha256_bytes(canonical_json(core).encode("utf-8"))

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA_ID,
            "command": self.command,
            "tool_version": self.tool_version,
            "rng": GENERATOR_NAME,
            **self.config,
            "wall_clock_seconds": self.wall_clock_seconds,
            "censor_count": self.censor_count,
            "threads": self.threads,
            "outputs": dict(sorted(self.outputs.items())),
            "manifest_hash": self.manifest_hash,
        }
        return out

    @classmethod
    def from_dict(cls, data: dict) -> RunManifest:
        if data.get("schema") != SCHEMA_ID:
            raise ManifestMismatch(f"unsupported manifest schema {data.get('schema')!r}")
        fixed = {"schema", "command", "tool_version", "rng", *_VOLATILE}
        config = {k: v for k, v in data.items() if k not in fixed}
        m = cls(
            command=data["command"],
            config=config,
            wall_clock_seconds=data.get("wall_clock_seconds", 0.0),
            censor_count=data.get("censor_count"),
            threads=data.get("threads"),
            outputs=dict(data.get("outputs", {})),
            tool_version=data.get("tool_version", ""),
        )
        if data.get("manifest_hash") not in (None, m.manifest_hash):
            raise ManifestMismatch("manifest_hash does not match the manifest's configuration")
        return m


def load_manifest(path: Path) -> RunManifest:
    return RunManifest.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def write_outputs(out_dir: Path, manifest: RunManifest, files: dict[str, bytes]) -> Path:
    """Write ``files`` and the manifest into ``out_dir``; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, data in files.items():
        (out_dir / name).write_bytes(data)
        manifest.outputs[name] = sha256_bytes(data)
    path = out_dir / MANIFEST_NAME
    path.write_bytes(dump_json(manifest.to_dict()))
    return path


def check_outputs(out_dir: Path) -> RunManifest:
    """Raise ``ManifestMismatch`` unless every listed output matches the manifest."""
    out_dir = Path(out_dir)
    manifest = load_manifest(out_dir / MANIFEST_NAME)
    if manifest.tool_version != __version__:
        raise ManifestMismatch("manifest written by a different version")
    for name, digest in manifest.outputs.items():
        target = out_dir / name
        if not target.exists():
            raise ManifestMismatch(f"missing output {name}")
        data = target.read_bytes()
        if sha256_bytes(data) != digest:
            raise ManifestMismatch(f"{name} does not belong to this manifest")
        if name.endswith(".json"):
            embedded = json.loads(data).get("manifest_hash")
            if embedded != manifest.manifest_hash:
                raise ManifestMismatch(f"{name} carries manifest hash {embedded!r}")
    return manifest
