"""Ranked tables of replicability adjusted p-values.

Builds the reporting layer on top of the adjustment operations: one row
per followed-up hypothesis with its two-study statistic and adjusted
value, optionally alongside the dependence-corrected variant computed
from harmonically rescaled p-values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import StudyPairData
from .errors import DataError
from .numeric import harmonic, solve_q1_tilde_thresholded
from .procedures import Dependence, _gather_selected, _stepup_adjust, _zvalues
from .selection import SelectionRule


@dataclass(frozen=True)
class AdjustedRow:
    id: str
    p1: float
    p2: float
    z_value: float
    adjusted_p: float
    adjusted_p_modified: float | None = None


@dataclass(frozen=True)
class AdjustedTable:
    """Rows sorted ascending by adjusted value (ties by id)."""

    rows: tuple[AdjustedRow, ...]
    m: int
    r1: int
    c: float
    flavor: str
    mode: Dependence
    adjusted_is_upper_bound: bool = False


def _adjust_columns(
    p1: np.ndarray, p2: np.ndarray, m: int, r1: int, c: float, flavor: str
) -> tuple[np.ndarray, np.ndarray]:
    z = _zvalues(p1, p2, m, r1, c)
    if flavor == "bonferroni":
        return z, np.minimum(z, 1.0)
    if flavor == "fdr":
        return z, _stepup_adjust(z)
    raise ValueError(f"unknown adjustment flavor {flavor!r}")


def build_adjusted_table(
    data: StudyPairData,
    c: float,
    flavor: str = "fdr",
    mode: Dependence = Dependence.INDEPENDENT,
    t: float | None = None,
    q: float | None = None,
) -> AdjustedTable:
    """Adjusted p-value table over the followed-up hypotheses.

    For the dependence-corrected modes an extra column is added, computed
    with p1 replaced by min(H_m * p1, 1) (and p2 by min(H_R1 * p2, 1) when
    both studies are dependence-corrected). The thresholded mode rescales
    p1 by q1/q1_tilde instead, which depends on the run level: it needs
    ``q`` (so q1 = c*q) and the selection threshold ``t``.

    Rescaled p-values are capped at 1 before the statistic is formed; an
    adjusted value above 1 is meaningless, so only hopeless rows are
    affected.
    """
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    mode = Dependence(mode)
    idx, p1, p2, r1 = _gather_selected(data, SelectionRule.followed_up(), "adjust")
    m = data.m
    z, adjusted = _adjust_columns(p1, p2, m, r1, c, flavor) if idx.size else (
        np.zeros(0),
        np.zeros(0),
    )
    modified: np.ndarray | None = None
    if idx.size and mode not in (Dependence.INDEPENDENT, Dependence.PRDS_FOLLOWUP):
        if mode is Dependence.ARBITRARY_PRIMARY_ITEM2:
            if q is None or t is None:
                raise DataError(
                    "the thresholded mode rescales p1 by q1/q1_tilde, which "
                    "requires both q (so q1 = c*q) and the selection threshold t"
                )
            scale1 = c * q / solve_q1_tilde_thresholded(c * q, m, t)
        else:
            scale1 = harmonic(m)
        p1_mod = np.minimum(scale1 * p1, 1.0)
        p2_mod = p2
        if mode is Dependence.ARBITRARY_BOTH:
            p2_mod = np.minimum(harmonic(r1) * p2, 1.0)
        _, modified = _adjust_columns(p1_mod, p2_mod, m, r1, c, flavor)
    ids = data.ids
    rows = [
        AdjustedRow(
            id=ids[i],
            p1=float(p1[j]),
            p2=float(p2[j]),
            z_value=float(z[j]),
            adjusted_p=float(min(adjusted[j], 1.0)),
            adjusted_p_modified=(
                float(min(modified[j], 1.0)) if modified is not None else None
            ),
        )
        for j, i in enumerate(idx)
    ]
    rows.sort(key=lambda r: (r.adjusted_p, r.id))
    return AdjustedTable(
        rows=tuple(rows),
        m=m,
        r1=r1,
        c=c,
        flavor=flavor,
        mode=mode,
        adjusted_is_upper_bound=r1 > idx.size,
    )
