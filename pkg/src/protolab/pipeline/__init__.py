"""Phase orchestration and run manifests."""

from protolab.pipeline.manifest import (
    ArtifactEntry,
    RunManifest,
    file_sha256,
    read_manifest,
    write_manifest,
)
from protolab.pipeline.runner import (
    MANIFEST_NAME,
    PipelineResult,
    RunState,
    rerun_manifest,
    run_directory,
    run_pipeline,
)

__all__ = [
    "MANIFEST_NAME",
    "ArtifactEntry",
    "PipelineResult",
    "RunManifest",
    "RunState",
    "file_sha256",
    "read_manifest",
    "rerun_manifest",
    "run_directory",
    "run_pipeline",
    "write_manifest",
]
