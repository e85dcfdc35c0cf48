"""Coverage, PCA and linear-probe diagnostics."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import pytest

from protolab.collect import DomainBuffer
from protolab.exceptions import InsufficientDataError, RankDeficientError, TooFewPrototypesError
from protolab.metrics import (
    ProbeResult,
    coverage,
    linear_probe,
    pca_buffers,
    pca_project,
    principal_components,
    ridge_probe,
    write_coverage_csv,
    write_pca_csv,
    write_probe_csv,
)


def _read(path: Path) -> list[list[str]]:
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestCoverage:
    def test_antipodal(self) -> None:
        report = coverage(np.array([[1.0, 0.0], [-2.0, 0.0]]), k=1)
        assert report.ane == pytest.approx(-1.0)
        assert report.kne == pytest.approx(-1.0)

    def test_identical(self) -> None:
        report = coverage(np.array([[0.0, 3.0], [0.0, 3.0]]), k=1)
        assert report.ane == pytest.approx(1.0) and report.kne == pytest.approx(1.0)

    def test_orthonormal(self) -> None:
        report = coverage(np.eye(4), k=1)
        assert report.ane == 0.0 and report.kne == 0.0

    def test_kne_uses_kth_most_similar(self) -> None:
        protos = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
        # cosines per row, most similar first: (0, -1), (0, 0), (0, -1)
        assert coverage(protos, k=1).kne == pytest.approx(0.0)
        assert coverage(protos, k=2).kne == pytest.approx(-2.0 / 3.0)

    def test_accepts_bank(self, small_models) -> None:
        _, bank = small_models
        report = coverage(bank, k=3)
        assert -1.0 <= report.ane <= report.kne + 1.0
        assert -1.0 <= report.kne <= 1.0 and report.k == 3

    def test_too_few_prototypes(self) -> None:
        with pytest.raises(TooFewPrototypesError):
            coverage(np.eye(2), k=2)


class TestPca:
    def test_axis_aligned_ratios(self) -> None:
        data = np.array([[2.0, 0.0], [-2.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        result = principal_components(data, 2)
        np.testing.assert_allclose(result.ratios, [0.8, 0.2], atol=1e-12)

    def test_projection_variances_match_spectrum(self, rng: np.random.Generator) -> None:
        data = rng.standard_normal((200, 5)) @ rng.standard_normal((5, 5))
        result = principal_components(data, 3)
        assert np.all(np.diff(result.ratios) <= 0) and result.ratios.sum() <= 1.0
        np.testing.assert_allclose(
            result.projections.var(axis=0, ddof=1), result.explained_variance, atol=1e-9,
        )

    def test_more_components_than_dimensions(self) -> None:
        data = np.array([[2.0, 0.0], [-2.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0]])
        with pytest.raises(RankDeficientError):
            principal_components(data, 3)
        with pytest.raises(ValueError):
            principal_components(data, 0)

    def test_identical_frames(self, small_models, pendulum_buffer: DomainBuffer) -> None:
        stack, _ = small_models
        frames = np.repeat(pendulum_buffer.stacked(np.array([3]), 3), 10, axis=0)
        with pytest.raises(RankDeficientError):
            pca_project(frames, stack, 2)

    def test_buffers_tagged_by_domain(
        self,
        small_models,
        pendulum_buffer: DomainBuffer,
        point_mass_buffer: DomainBuffer,
        tmp_path: Path,
    ) -> None:
        stack, _ = small_models
        result = pca_buffers([pendulum_buffer, point_mass_buffer], stack, 2, per_domain=30)
        assert result.projections.shape == (60, 2)
        assert result.domains == ["pendulum"] * 30 + ["point_mass"] * 30

        rows = _read(write_pca_csv(result, tmp_path / "pca.csv"))
        assert rows[0] == ["domain", "pc1", "pc2"]
        assert len(rows) == 62
        assert rows[-1][0] == "explained_variance_ratio"


class TestProbe:
    def test_identity_features(self, rng: np.random.Generator) -> None:
        targets = rng.standard_normal((250, 3))
        assert ridge_probe(targets, targets, ridge=1e-12).mse < 1e-10

    def test_constant_features_predict_training_mean(self, rng: np.random.Generator) -> None:
        targets = rng.standard_normal((250, 2))
        result = ridge_probe(np.ones((250, 4)), targets, seed=3)
        order = np.random.default_rng(3).permutation(250)
        train, test = order[:200], order[200:]
        expected = np.mean((targets[test] - targets[train].mean(axis=0)) ** 2)
        assert result.mse == pytest.approx(expected, rel=1e-9)
        assert (result.n_train, result.n_test) == (200, 50)

    def test_split_is_seeded(self, rng: np.random.Generator) -> None:
        x, y = rng.standard_normal((100, 4)), rng.standard_normal(100)
        assert ridge_probe(x, y, seed=1) == ridge_probe(x, y, seed=1)

    def test_needs_labeled_frames(self, small_models, pendulum_buffer: DomainBuffer) -> None:
        stack, _ = small_models
        with pytest.raises(InsufficientDataError):
            linear_probe(pendulum_buffer, stack)


class TestReports:
    def test_coverage_csv(self, tmp_path: Path) -> None:
        rows = _read(write_coverage_csv(coverage(np.eye(4), k=1), tmp_path / "c.csv", "enc"))
        assert rows == [["label", "ane", "kne", "k"], ["enc", "0.0", "0.0", "1"]]

    def test_probe_csv(self, tmp_path: Path) -> None:
        results = [ProbeResult(0.5, 160, 40, "pendulum"), ProbeResult(0.25, 160, 40, "cartpole")]
        rows = _read(write_probe_csv(results, tmp_path / "p.csv"))
        assert rows[0] == ["label", "domain", "mse", "n_train", "n_test"]
        assert rows[2] == ["", "cartpole", "0.25", "160", "40"]
