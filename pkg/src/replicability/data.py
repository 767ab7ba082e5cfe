"""Core domain types: per-hypothesis p-value pairs, study datasets,
truth assignments for simulations, and discovery reports.

All types are immutable value objects after construction and safe to share
across threads. Hypothesis order is preserved from the input everywhere;
set-valued outputs are reported in input order for determinism.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DataError

TRUTH_LABELS = ("I00", "I01", "I10", "I11")


@dataclass(frozen=True)
class HypothesisRecord:
    """One hypothesis: its label, primary-study p-value, and (optionally)
    its follow-up-study p-value. A missing follow-up value means the
    hypothesis was not followed up; it is never encoded as a number."""

    id: str
    p1: float
    p2: float | None = None


@dataclass(frozen=True)
class StudyPairData:
    """A family of hypotheses tested in a primary and a follow-up study.

    ``m_declared`` overrides the family size when the dataset lists only a
    subset of the tested hypotheses (e.g. only the ones followed up out of
    millions screened). ``r1_declared`` likewise overrides the follow-up
    set size when only a subset of followed-up rows is available.
    """

    records: tuple[HypothesisRecord, ...]
    m_declared: int | None = None
    r1_declared: int | None = None

    def __init__(
        self,
        records: Iterable[HypothesisRecord],
        m_declared: int | None = None,
        r1_declared: int | None = None,
    ):
        object.__setattr__(self, "records", tuple(records))
        object.__setattr__(self, "m_declared", m_declared)
        object.__setattr__(self, "r1_declared", r1_declared)

    @property
    def m(self) -> int:
        """Effective family size."""
        return self.m_declared if self.m_declared is not None else len(self.records)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.records)

    def p1_array(self) -> np.ndarray:
        return np.array([r.p1 for r in self.records], dtype=float)

    def p2_array(self) -> np.ndarray:
        """Follow-up p-values with NaN standing in for absent rows.

        Internal convenience only; the public record type keeps absence
        explicit as ``None``.
        """
        return np.array(
            [np.nan if r.p2 is None else r.p2 for r in self.records], dtype=float
        )

    def followed_up_ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.records if r.p2 is not None)

    @property
    def r1_listed(self) -> int:
        """Number of rows carrying a follow-up p-value."""
        return sum(1 for r in self.records if r.p2 is not None)

    def swap_studies(self) -> "StudyPairData":
        """Exchange the roles of the two studies. Requires complete data."""
        swapped = []
        for r in self.records:
            if r.p2 is None:
                raise DataError(
                    f"cannot swap study roles: record {r.id!r} has no follow-up p-value"
                )
            swapped.append(HypothesisRecord(r.id, r.p2, r.p1))
        return StudyPairData(swapped, m_declared=self.m_declared)

    def require_complete(self, what: str) -> None:
        missing = [r.id for r in self.records if r.p2 is None]
        if missing:
            raise DataError(
                f"{what} requires follow-up p-values for every hypothesis; "
                f"missing for {len(missing)} record(s), first: {missing[0]!r}"
            )
        if self.m_declared is not None and self.m_declared != len(self.records):
            raise DataError(
                f"{what} requires the full family; dataset lists "
                f"{len(self.records)} rows but declares m={self.m_declared}"
            )


@dataclass(frozen=True)
class TruthAssignment:
    """Which of the four truth states each hypothesis is in.

    State names follow the convention (primary, follow-up): I00 null in
    both studies, I10 non-null only in the primary, I01 non-null only in
    the follow-up, I11 non-null in both (the replicable signals).
    """

    labels: tuple[str, ...]

    def __post_init__(self):
        bad = [x for x in self.labels if x not in TRUTH_LABELS]
        if bad:
            raise ValueError(f"unknown truth label {bad[0]!r}")

    @property
    def m(self) -> int:
        return len(self.labels)

    def counts(self) -> dict[str, int]:
        out = {k: 0 for k in TRUTH_LABELS}
        for x in self.labels:
            out[x] += 1
        return out

    def codes(self) -> np.ndarray:
        """Labels as uint8 codes, indexing into TRUTH_LABELS."""
        lut = {k: i for i, k in enumerate(TRUTH_LABELS)}
        return np.array([lut[x] for x in self.labels], dtype=np.uint8)


@dataclass(frozen=True)
class ValidationIssue:
    where: str
    message: str


@dataclass(frozen=True)
class ValidationResult:
    issues: tuple[ValidationIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues

    def messages(self) -> list[str]:
        return [f"{i.where}: {i.message}" for i in self.issues]


def validate_dataset(data: StudyPairData) -> ValidationResult:
    """Check ranges, id uniqueness, and override consistency.

    Diagnostic only: always returns a result, never raises.
    """
    issues: list[ValidationIssue] = []
    seen: set[str] = set()
    for i, rec in enumerate(data.records):
        where = f"record {i} ({rec.id!r})"
        if not rec.id:
            issues.append(ValidationIssue(where, "empty id"))
        elif rec.id in seen:
            issues.append(ValidationIssue(where, "duplicate id"))
        seen.add(rec.id)
        if not np.isfinite(rec.p1) or not 0.0 <= rec.p1 <= 1.0:
            issues.append(ValidationIssue(where, f"p1 out of range: {rec.p1!r}"))
        if rec.p2 is not None and (not np.isfinite(rec.p2) or not 0.0 <= rec.p2 <= 1.0):
            issues.append(ValidationIssue(where, f"p2 out of range: {rec.p2!r}"))
    n = len(data.records)
    if data.m_declared is not None:
        if data.m_declared < 1:
            issues.append(ValidationIssue("m override", "must be positive"))
        elif data.m_declared < n:
            issues.append(
                ValidationIssue(
                    "m override",
                    f"declared family size {data.m_declared} is smaller than "
                    f"the {n} rows listed",
                )
            )
    if data.r1_declared is not None:
        if data.r1_declared < 1:
            issues.append(ValidationIssue("r1 override", "must be positive"))
        elif data.r1_declared < data.r1_listed:
            issues.append(
                ValidationIssue(
                    "r1 override",
                    f"declared follow-up count {data.r1_declared} is smaller than "
                    f"the {data.r1_listed} follow-up rows listed",
                )
            )
    if data.m_declared is not None and data.r1_declared is not None:
        if data.r1_declared > data.m_declared:
            issues.append(
                ValidationIssue("overrides", "r1 override exceeds m override")
            )
    return ValidationResult(tuple(issues))


@dataclass(frozen=True)
class HypothesisScore:
    """Per-hypothesis output of a procedure run: the two-study statistic
    and the adjusted p-value (both on the run's effective scale)."""

    id: str
    z_value: float
    adjusted_p: float


@dataclass(frozen=True)
class DiscoveryReport:
    """Outcome of a replicability procedure run.

    ``rejected_ids`` is in input order and is always a subset of the
    followed-up hypotheses. ``primary_threshold`` / ``followup_threshold``
    are the realized cut-offs actually applied to p1 / p2. When the dataset
    lists only part of the follow-up set, ``adjusted_is_upper_bound`` marks
    the per-hypothesis adjusted values as upper-bound estimates.
    """

    procedure: str
    rejected_ids: tuple[str, ...]
    r1: int
    primary_threshold: float
    followup_threshold: float
    per_hypothesis: tuple[HypothesisScore, ...] = field(default_factory=tuple)
    adjusted_is_upper_bound: bool = False

    @property
    def r2(self) -> int:
        return len(self.rejected_ids)
