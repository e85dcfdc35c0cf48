"""End-to-end pipeline runs and manifests."""

from __future__ import annotations

from pathlib import Path

import pytest

from protolab.config import RunConfig, config_hash, with_overrides
from protolab.exceptions import (
    ConfigInvalidError,
    InsufficientDataError,
    PhaseError,
    StorageIOError,
)
from protolab.pipeline import (
    MANIFEST_NAME,
    file_sha256,
    read_manifest,
    rerun_manifest,
    run_directory,
    run_pipeline,
)


def test_empty_phase_list(tmp_path: Path, tiny_run_config: RunConfig) -> None:
    config = with_overrides(tiny_run_config, phases=[])
    result = run_pipeline(config, run_root=tmp_path)
    assert result.manifest.artifacts == []
    assert result.manifest.phases == []
    assert (result.run_dir / MANIFEST_NAME).exists()


def test_full_run_artifacts(tmp_path: Path, tiny_run_config: RunConfig) -> None:
    result = run_pipeline(tiny_run_config, run_root=tmp_path)
    manifest = result.manifest
    assert result.run_dir == run_directory(tiny_run_config, tmp_path)
    assert manifest.phases == ["collect", "pretrain", "train", "metrics"]
    assert manifest.config_hash == config_hash(tiny_run_config)
    assert set(manifest.seeds) == {"collect", "ssl", "rl", "eval"}
    assert [a.path for a in manifest.artifact("buffer")] == [
        "buffers/pendulum.crptbuf", "buffers/point_mass.crptbuf",
    ]
    assert len(manifest.artifact("encoder")) == 1
    assert [a.path for a in manifest.artifact("eval_log")] == ["downstream/pendulum/eval_log.csv"]
    assert len(manifest.artifact("baseline_log")) == 1
    assert len(manifest.artifact("coverage")) == 1 and len(manifest.artifact("pca")) == 1
    # 60-frame buffers are below the probe's minimum
    assert manifest.artifact("probe") == []
    for art in manifest.artifacts:
        assert (result.run_dir / art.path).exists()
    assert read_manifest(result.run_dir / MANIFEST_NAME) == manifest


def test_reruns_are_identical(tmp_path: Path, tiny_run_config: RunConfig) -> None:
    config = with_overrides(tiny_run_config, phases=["collect", "pretrain"])
    first = run_pipeline(config, run_root=tmp_path / "a")
    second = run_pipeline(config, run_root=tmp_path / "b")
    text_a = (first.run_dir / MANIFEST_NAME).read_text()
    text_b = (second.run_dir / MANIFEST_NAME).read_text()
    assert text_a == text_b
    encoder = first.manifest.artifact("encoder")[0]
    assert encoder.sha256 == second.manifest.artifact("encoder")[0].sha256


def test_rerun_from_manifest(tmp_path: Path, tiny_run_config: RunConfig) -> None:
    config = with_overrides(tiny_run_config, phases=["collect"])
    first = run_pipeline(config, run_root=tmp_path / "a")
    again = rerun_manifest(first.run_dir / MANIFEST_NAME, run_root=tmp_path / "b")
    assert again.manifest == first.manifest


def test_later_phases_reuse_earlier_artifacts(
    tmp_path: Path, tiny_run_config: RunConfig,
) -> None:
    collected = run_pipeline(with_overrides(tiny_run_config, phases=["collect"]), run_root=tmp_path)
    pretrained = run_pipeline(
        with_overrides(tiny_run_config, phases=["pretrain"]), run_root=tmp_path,
    )
    assert pretrained.run_dir == collected.run_dir
    buffers = {a.path: a.sha256 for a in collected.manifest.artifact("buffer")}
    assert pretrained.manifest.inputs == buffers
    assert len(pretrained.manifest.artifact("encoder")) == 1


def test_finetune_phase(tmp_path: Path, tiny_run_config: RunConfig) -> None:
    config = with_overrides(
        tiny_run_config,
        phases=["collect", "pretrain", "finetune"],
        finetune_domain="cartpole",
        ssl__finetune_steps=2,
    )
    result = run_pipeline(config, run_root=tmp_path)
    paths = [a.path for a in result.manifest.artifact("buffer")]
    assert "buffers/cartpole.crptbuf" in paths
    assert [a.path for a in result.manifest.artifact("encoder")] == [
        "encoder.ckpt", "encoder_finetuned.ckpt",
    ]
    assert len(result.manifest.artifact("finetune_log")) == 1


def test_phase_error_names_phase(tmp_path: Path, tiny_run_config: RunConfig) -> None:
    config = with_overrides(tiny_run_config, phases=["pretrain"])
    with pytest.raises(PhaseError) as info:
        run_pipeline(config, run_root=tmp_path)
    assert info.value.phase == "pretrain"
    assert isinstance(info.value.cause, InsufficientDataError)
    assert "[pretrain]" in str(info.value)


def test_bad_manifest(tmp_path: Path) -> None:
    path = tmp_path / MANIFEST_NAME
    path.write_text("config_hash: abc\nphases: [collect\n")
    with pytest.raises(ConfigInvalidError):
        read_manifest(path)
    path.write_text("config_hash: abc\n")
    with pytest.raises(ConfigInvalidError):
        read_manifest(path)


def test_missing_manifest(tmp_path: Path) -> None:
    with pytest.raises(StorageIOError):
        read_manifest(tmp_path / "nope.yaml")


def test_file_sha256(tmp_path: Path) -> None:
    path = tmp_path / "blob"
    path.write_bytes(b"abc")
    assert file_sha256(path) == (
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    )


def test_run_directory_ignores_phase_selection(tmp_path: Path, tiny_run_config: RunConfig) -> None:
    only_collect = with_overrides(tiny_run_config, phases=["collect"])
    assert run_directory(only_collect, tmp_path) == run_directory(tiny_run_config, tmp_path)
    other_seed = with_overrides(tiny_run_config, seed=1)
    assert run_directory(other_seed, tmp_path) != run_directory(tiny_run_config, tmp_path)
