"""CSV output for the diagnostics."""

from __future__ import annotations

import csv
from collections.abc import Sequence
from pathlib import Path

from protolab.exceptions import StorageIOError
from protolab.metrics.coverage import CoverageReport
from protolab.metrics.pca import PcaResult
from protolab.metrics.probe import ProbeResult


def _write_rows(path: str | Path, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise StorageIOError(f"cannot write {path}: {e}") from e
    return path


def write_coverage_csv(report: CoverageReport, path: str | Path, label: str = "") -> Path:
    rows = [(label, report.ane, report.kne, report.k)]
    return _write_rows(path, ("label", "ane", "kne", "k"), rows)


def write_pca_csv(result: PcaResult, path: str | Path) -> Path:
    """One row per frame tagged by domain, then an ``explained_variance_ratio`` row."""
    components = result.projections.shape[1]
    header = ("domain", *(f"pc{i + 1}" for i in range(components)))
    tags = result.domains or [""] * len(result.projections)
    rows: list[Sequence] = [
        (tag, *(repr(float(v)) for v in coords))
        for tag, coords in zip(tags, result.projections, strict=True)
    ]
    rows.append(("explained_variance_ratio", *(repr(float(r)) for r in result.ratios)))
    return _write_rows(path, header, rows)


def write_probe_csv(results: Sequence[ProbeResult], path: str | Path, label: str = "") -> Path:
    return _write_rows(
        path,
        ("label", "domain", "mse", "n_train", "n_test"),
        [(label, r.domain, repr(r.mse), r.n_train, r.n_test) for r in results],
    )
