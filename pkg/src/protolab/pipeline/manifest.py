"""Run manifests: what a run was configured with and what it produced.

Manifests carry no timestamps, so two runs of the same config write identical files.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import yaml
from pydantic import BaseModel, Field, ValidationError

from protolab.exceptions import ConfigInvalidError, StorageIOError


class ArtifactEntry(BaseModel):
    kind: str
    path: str                 # relative to the run directory
    sha256: str


class RunManifest(BaseModel):
    config_hash: str
    seeds: dict[str, int]
    phases: list[str]
    artifacts: list[ArtifactEntry] = Field(default_factory=list)
    inputs: dict[str, str] = Field(default_factory=dict)
    config_text: str

    def artifact(self, kind: str) -> list[ArtifactEntry]:
        return [a for a in self.artifacts if a.kind == kind]


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                digest.update(chunk)
    except OSError as e:
        raise StorageIOError(f"cannot hash {path}: {e}") from e
    return digest.hexdigest()


def write_manifest(manifest: RunManifest, path: str | Path) -> Path:
    path = Path(path)
    text = yaml.dump(
        manifest.model_dump(), default_flow_style=False, sort_keys=False, allow_unicode=True,
    )
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise StorageIOError(f"cannot write manifest {path}: {e}") from e
    return path


def read_manifest(path: str | Path) -> RunManifest:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise StorageIOError(f"cannot read manifest {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigInvalidError([f"manifest: not valid YAML ({e})"]) from e
    if not isinstance(data, dict):
        raise ConfigInvalidError(["manifest: expected a mapping at the top level"])
    try:
        return RunManifest.model_validate(data)
    except ValidationError as e:
        raise ConfigInvalidError([
            f"manifest.{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
            for err in e.errors()
        ]) from e
