"""Bundled example datasets (published GWAS p-value tables)."""

from __future__ import annotations

from importlib import resources

from .data import StudyPairData
from .dataio import parse_pvalue_csv


def _load(name: str) -> StudyPairData:
    with resources.as_file(
        resources.files("replicability.fixtures").joinpath(name)
    ) as path:
        return parse_pvalue_csv(path)


def load_hippocampal_volume() -> StudyPairData:
    """Five SNPs followed up out of 2.5 million screened for association
    with hippocampal volume. Small enough for FWER-level analysis."""
    return _load("hippocampal_volume.csv")


def load_crohns_disease() -> StudyPairData:
    """The 36 published replicability discoveries from a Crohn's disease
    GWAS (635,547 SNPs screened, 126 followed up). The declared overrides
    carry the true family and follow-up sizes."""
    return _load("crohns_disease.csv")
