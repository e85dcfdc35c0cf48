"""Diagnostics: prototype coverage, PCA of embeddings and a linear state probe."""

from protolab.metrics.coverage import CoverageReport, coverage
from protolab.metrics.pca import PcaResult, pca_buffers, pca_project, principal_components
from protolab.metrics.probe import ProbeResult, linear_probe, ridge_probe
from protolab.metrics.reports import write_coverage_csv, write_pca_csv, write_probe_csv

__all__ = [
    "CoverageReport",
    "PcaResult",
    "ProbeResult",
    "coverage",
    "linear_probe",
    "pca_buffers",
    "pca_project",
    "principal_components",
    "ridge_probe",
    "write_coverage_csv",
    "write_pca_csv",
    "write_probe_csv",
]
