"""CLI integration tests."""

from __future__ import annotations

from pathlib import Path

import pytest
from typer.testing import CliRunner

from protolab.cli.main import app
from protolab.collect import load_buffer
from protolab.config import RunConfig, serialize_config
from protolab.protolearn import load_encoder

runner = CliRunner()


@pytest.fixture
def config_file(tmp_path: Path, tiny_run_config: RunConfig) -> Path:
    path = tmp_path / "tiny.cfg"
    path.write_text(serialize_config(tiny_run_config))
    return path


@pytest.fixture
def buffer_files(tmp_path: Path, config_file: Path) -> list[Path]:
    paths = []
    for domain in ("pendulum", "point_mass"):
        out = tmp_path / f"{domain}.crptbuf"
        result = runner.invoke(
            app, ["collect", "--domain", domain, "--out", str(out), "--config", str(config_file)],
        )
        assert result.exit_code == 0, result.output
        paths.append(out)
    return paths


@pytest.fixture
def encoder_file(tmp_path: Path, config_file: Path, buffer_files: list[Path]) -> Path:
    out = tmp_path / "encoder.ckpt"
    args = [
        "pretrain", "--out", str(out), "--config", str(config_file),
        "--log", str(tmp_path / "log.csv"),
    ]
    for path in buffer_files:
        args += ["--buffers", str(path)]
    result = runner.invoke(app, args)
    assert result.exit_code == 0, result.output
    return out


class TestConfigCommands:
    def test_show_defaults(self) -> None:
        result = runner.invoke(app, ["config", "show"])
        assert result.exit_code == 0
        assert "ssl.prototypes = 64" in result.output
        assert "# hash" in result.output

    def test_show_paper_preset(self) -> None:
        result = runner.invoke(app, ["config", "show", "--preset", "paper"])
        assert result.exit_code == 0
        assert "ssl.prototypes = 512" in result.output

    def test_validate_good_file(self, config_file: Path) -> None:
        result = runner.invoke(app, ["config", "validate", str(config_file)])
        assert result.exit_code == 0
        assert "valid" in result.output

    def test_validate_bad_file(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.cfg"
        path.write_text("ssl.intrinsic_weight = 1.0\nfoo = 1\n")
        result = runner.invoke(app, ["config", "validate", str(path)])
        assert result.exit_code == 1

    def test_validate_missing_file(self, tmp_path: Path) -> None:
        result = runner.invoke(app, ["config", "validate", str(tmp_path / "nope.cfg")])
        assert result.exit_code == 1


class TestStages:
    def test_collect_writes_buffer(self, buffer_files: list[Path]) -> None:
        buffer = load_buffer(buffer_files[0])
        assert buffer.domain == "pendulum"
        assert len(buffer) == 60

    def test_collect_steps_override(self, tmp_path: Path, config_file: Path) -> None:
        out = tmp_path / "short.crptbuf"
        result = runner.invoke(app, [
            "collect", "-d", "cartpole", "-o", str(out), "-c", str(config_file), "--steps", "12",
        ])
        assert result.exit_code == 0, result.output
        assert len(load_buffer(out)) == 12

    def test_pretrain_writes_encoder(self, tmp_path: Path, encoder_file: Path) -> None:
        stack, bank = load_encoder(encoder_file)
        assert bank.count == 8
        assert stack.spec.latent_dim == 6
        assert (tmp_path / "log.csv").read_text().startswith("step,buffer")

    def test_finetune(self, tmp_path: Path, encoder_file: Path, buffer_files: list[Path],
                      config_file: Path) -> None:
        out = tmp_path / "tuned.ckpt"
        result = runner.invoke(app, [
            "finetune", "-e", str(encoder_file), "-b", str(buffer_files[1]),
            "-o", str(out), "-c", str(config_file),
        ])
        assert result.exit_code == 0, result.output
        assert out.exists()

    def test_train_with_baseline(self, tmp_path: Path, encoder_file: Path,
                                 config_file: Path) -> None:
        out_dir = tmp_path / "downstream"
        result = runner.invoke(app, [
            "train", "-d", "pendulum", "-e", str(encoder_file), "-o", str(out_dir),
            "-c", str(config_file), "--baseline",
        ])
        assert result.exit_code == 0, result.output
        assert (out_dir / "eval_log.csv").exists()
        assert (out_dir / "agent.ckpt").exists()
        assert (out_dir / "random_baseline.csv").exists()

    def test_train_defaults_to_run_directory(
        self, tmp_path: Path, encoder_file: Path, config_file: Path,
        monkeypatch: pytest.MonkeyPatch,
    ) -> None:
        monkeypatch.setenv("PROTOLAB_RUN_ROOT", str(tmp_path / "runs"))
        result = runner.invoke(app, [
            "train", "-d", "pendulum", "-e", str(encoder_file), "-c", str(config_file),
        ])
        assert result.exit_code == 0, result.output
        (run_dir,) = (tmp_path / "runs").iterdir()
        assert (run_dir / "downstream" / "pendulum" / "eval_log.csv").exists()
        assert (run_dir / "downstream" / "pendulum" / "agent.ckpt").exists()

    def test_metrics_coverage(self, tmp_path: Path, encoder_file: Path) -> None:
        out = tmp_path / "coverage.csv"
        result = runner.invoke(app, ["metrics", "coverage", "--ckpt", str(encoder_file),
                                     "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "ANE" in result.output
        assert out.read_text().startswith("label,ane,kne,k")

    def test_metrics_coverage_defaults_to_run_directory(
        self, tmp_path: Path, encoder_file: Path, config_file: Path,
        monkeypatch: pytest.MonkeyPatch,
    ) -> None:
        monkeypatch.setenv("PROTOLAB_RUN_ROOT", str(tmp_path / "runs"))
        result = runner.invoke(app, ["metrics", "coverage", "--ckpt", str(encoder_file),
                                     "-c", str(config_file)])
        assert result.exit_code == 0, result.output
        written = list((tmp_path / "runs").glob("*/metrics/coverage.csv"))
        assert len(written) == 1
        assert written[0].read_text().startswith("label,ane,kne,k")

    def test_metrics_pca(self, tmp_path: Path, encoder_file: Path, buffer_files: list[Path],
                         config_file: Path) -> None:
        out = tmp_path / "pca.csv"
        args = ["metrics", "pca", "--ckpt", str(encoder_file), "-n", "2", "--per-domain", "20",
                "--out", str(out), "-c", str(config_file)]
        for path in buffer_files:
            args += ["--buffers", str(path)]
        result = runner.invoke(app, args)
        assert result.exit_code == 0, result.output
        assert len(out.read_text().splitlines()) == 42


class TestExitCodes:
    def test_bad_config_exits_1(self, tmp_path: Path) -> None:
        path = tmp_path / "bad.cfg"
        path.write_text("ssl.temperature = -1\n")
        result = runner.invoke(app, [
            "collect", "-d", "pendulum", "-o", str(tmp_path / "x.crptbuf"), "-c", str(path),
        ])
        assert result.exit_code == 1

    def test_unknown_domain_exits_2(self, tmp_path: Path, config_file: Path) -> None:
        result = runner.invoke(app, [
            "collect", "-d", "walker", "-o", str(tmp_path / "x.crptbuf"), "-c", str(config_file),
        ])
        assert result.exit_code == 2

    def test_missing_buffer_exits_2(self, tmp_path: Path, config_file: Path) -> None:
        result = runner.invoke(app, [
            "pretrain", "-b", str(tmp_path / "missing.crptbuf"), "-o", str(tmp_path / "e.ckpt"),
            "-c", str(config_file),
        ])
        assert result.exit_code == 2

    def test_probe_on_small_buffer_exits_2(self, encoder_file: Path,
                                           buffer_files: list[Path]) -> None:
        result = runner.invoke(app, [
            "metrics", "probe", "--ckpt", str(encoder_file), "-b", str(buffer_files[0]),
        ])
        assert result.exit_code == 2

    def test_invalid_argument_exits_2(self, tmp_path: Path, encoder_file: Path,
                                      buffer_files: list[Path]) -> None:
        result = runner.invoke(app, [
            "metrics", "pca", "--ckpt", str(encoder_file), "-b", str(buffer_files[0]),
            "-n", "0", "-o", str(tmp_path / "pca.csv"),
        ])
        assert result.exit_code == 2

    def test_pipeline_sources_are_exclusive(self, tmp_path: Path, config_file: Path) -> None:
        result = runner.invoke(app, [
            "pipeline", "-c", str(config_file), "--manifest", str(tmp_path / "manifest.yaml"),
        ])
        assert result.exit_code == 1
