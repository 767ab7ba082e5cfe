"""File formats: the p-value CSV, discovery and adjusted-table output,
and the flat key = value scenario files driving the simulation engine.

Numbers are serialized in shortest round-trip decimal form unless a
fixed-precision table format is requested, and every output file ends
with a trailing newline.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .adjust import AdjustedTable
from .data import DiscoveryReport, HypothesisRecord, StudyPairData
from .errors import DataError
from .procedures import Dependence
from .selection import SelectionRule
from .sim import SimEstimate, SimProcedure, SimScenario, SimSelection

PVALUE_HEADER = "id,p1,p2"
DISCOVERY_HEADER = "id,p1,p2,z,adjusted_p,rejected"
SIM_HEADER = "point,avg_fdp,fdp_se,avg_power,power_se,avg_rejections"

_DIRECTIVE = re.compile(r"^#\s*(m|r1)\s*=\s*(\d+)\s*$")


def fmt(x: float | None, full: bool = True) -> str:
    """Shortest round-trip form, or 4 significant digits for table output.
    Absent values serialize as the empty field."""
    if x is None:
        return ""
    return repr(float(x)) if full else f"{float(x):.4g}"


def _parse_float(text: str, where: str, name: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataError(f"{where}: cannot parse {name} value {text!r}") from None


def parse_pvalue_csv(path) -> StudyPairData:
    """Read a ``id,p1,p2`` CSV into a dataset.

    An empty p2 field means the hypothesis was not followed up. Comment
    lines start with ``#``; the directives ``# m=<int>`` and ``# r1=<int>``
    declare the true family and follow-up sizes when the file lists only a
    subset of rows.
    """
    path = Path(path)
    m_declared: int | None = None
    r1_declared: int | None = None
    records: list[HypothesisRecord] = []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            where = f"{path}:{lineno}"
            if not line:
                continue
            if line.startswith("#"):
                hit = _DIRECTIVE.match(line)
                if hit:
                    if hit.group(1) == "m":
                        m_declared = int(hit.group(2))
                    else:
                        r1_declared = int(hit.group(2))
                continue
            if not header_seen:
                if line != PVALUE_HEADER:
                    raise DataError(
                        f"{where}: expected header {PVALUE_HEADER!r}, got {line!r}"
                    )
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise DataError(f"{where}: expected 3 fields, got {len(parts)}")
            rid, p1_text, p2_text = (p.strip() for p in parts)
            if not rid:
                raise DataError(f"{where}: empty id")
            p1 = _parse_float(p1_text, where, "p1")
            p2 = None if p2_text == "" else _parse_float(p2_text, where, "p2")
            records.append(HypothesisRecord(rid, p1, p2))
    if not header_seen:
        raise DataError(f"{path}: missing header line {PVALUE_HEADER!r}")
    return StudyPairData(records, m_declared=m_declared, r1_declared=r1_declared)


def write_pvalue_csv(data: StudyPairData, path) -> None:
    lines = []
    if data.m_declared is not None:
        lines.append(f"# m={data.m_declared}")
    if data.r1_declared is not None:
        lines.append(f"# r1={data.r1_declared}")
    lines.append(PVALUE_HEADER)
    for rec in data.records:
        if "," in rec.id:
            raise DataError(f"id {rec.id!r} cannot contain a comma")
        lines.append(f"{rec.id},{fmt(rec.p1)},{fmt(rec.p2)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_discoveries_csv(
    data: StudyPairData, report: DiscoveryReport, path, full: bool = True
) -> None:
    """One row per scored (followed-up) hypothesis, flagging rejections."""
    by_id = {rec.id: rec for rec in data.records}
    rejected = set(report.rejected_ids)
    lines = [DISCOVERY_HEADER]
    for score in report.per_hypothesis:
        rec = by_id[score.id]
        lines.append(
            ",".join(
                (
                    score.id,
                    fmt(rec.p1, full),
                    fmt(rec.p2, full),
                    fmt(score.z_value, full),
                    fmt(score.adjusted_p, full),
                    "1" if score.id in rejected else "0",
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_adjusted_csv(table: AdjustedTable, path, full: bool = False) -> None:
    header = "id,p1,p2,z,adjusted_p"
    has_modified = any(r.adjusted_p_modified is not None for r in table.rows)
    if has_modified:
        header += ",adjusted_p_modified"
    lines = [header]
    for row in table.rows:
        fields = [
            row.id,
            fmt(row.p1, full),
            fmt(row.p2, full),
            fmt(row.z_value, full),
            fmt(row.adjusted_p, full),
        ]
        if has_modified:
            fields.append(fmt(row.adjusted_p_modified, full))
        lines.append(",".join(fields))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def summary_text(report: DiscoveryReport, data: StudyPairData, params: dict) -> str:
    lines = [f"procedure: {report.procedure}"]
    for key, value in params.items():
        if value is not None:
            lines.append(f"{key}: {value}")
    lines.extend(
        [
            f"m: {data.m}",
            f"r1: {report.r1}",
            f"r2: {report.r2}",
            f"primary_threshold: {fmt(report.primary_threshold)}",
            f"followup_threshold: {fmt(report.followup_threshold)}",
            f"rejected: {' '.join(report.rejected_ids) if report.rejected_ids else '-'}",
        ]
    )
    if report.adjusted_is_upper_bound:
        lines.append(
            "note: dataset lists only part of the follow-up set; adjusted "
            "p-values are upper-bound estimates"
        )
    return "\n".join(lines) + "\n"


def sim_csv_text(rows: list[tuple[float, SimEstimate]]) -> str:
    lines = [SIM_HEADER]
    for point, est in rows:
        lines.append(
            ",".join(
                (
                    fmt(point),
                    fmt(est.avg_fdp),
                    fmt(est.fdp_se),
                    fmt(est.avg_power),
                    fmt(est.power_se),
                    fmt(est.avg_rejections),
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_sim_csv(rows: list[tuple[float, SimEstimate]], path) -> None:
    Path(path).write_text(sim_csv_text(rows), encoding="utf-8")


_DEPENDENCE_ALIASES = {
    "independent": Dependence.INDEPENDENT,
    "prds": Dependence.PRDS_FOLLOWUP,
    "prds_followup": Dependence.PRDS_FOLLOWUP,
    "item1": Dependence.ARBITRARY_PRIMARY_ITEM1,
    "arbitrary_primary_item1": Dependence.ARBITRARY_PRIMARY_ITEM1,
    "item2": Dependence.ARBITRARY_PRIMARY_ITEM2,
    "arbitrary_primary_item2": Dependence.ARBITRARY_PRIMARY_ITEM2,
    "both": Dependence.ARBITRARY_BOTH,
    "arbitrary_both": Dependence.ARBITRARY_BOTH,
}


def parse_dependence(text: str) -> Dependence:
    try:
        return _DEPENDENCE_ALIASES[text.strip().lower()]
    except KeyError:
        raise DataError(
            f"unknown dependence mode {text!r}; expected one of "
            f"{sorted(set(_DEPENDENCE_ALIASES))}"
        ) from None


def parse_rule_spec(spec: str) -> SelectionRule:
    """Selection rule specs: ``followup``, ``bh:LEVEL``, ``bonferroni:LEVEL``,
    ``top:K``, ``threshold:T``."""
    spec = spec.strip()
    if spec == "followup":
        return SelectionRule.followed_up()
    kind, _, arg = spec.partition(":")
    try:
        if kind == "bh":
            return SelectionRule.bh_at_level(float(arg))
        if kind == "bonferroni":
            return SelectionRule.bonferroni_threshold(float(arg))
        if kind == "top":
            return SelectionRule.top_k(int(arg))
        if kind == "threshold":
            return SelectionRule.fixed_threshold(float(arg))
    except ValueError as exc:
        raise DataError(f"bad selection spec {spec!r}: {exc}") from None
    raise DataError(
        f"unknown selection spec {spec!r}; expected followup, bh:LEVEL, "
        "bonferroni:LEVEL, top:K, or threshold:T"
    )


def parse_sim_selection(spec: str) -> SimSelection:
    """Scenario-file selection specs; ``bh`` alone tracks the primary-stage
    level of whichever direction is running."""
    spec = spec.strip()
    kind, _, arg = spec.partition(":")
    try:
        if kind == "bh":
            return SimSelection("bh", level=float(arg) if arg else None)
        if kind == "bonferroni":
            return SimSelection("bonferroni", level=float(arg) if arg else None)
        if kind == "top":
            return SimSelection("top_k", k=int(arg))
        if kind == "threshold":
            return SimSelection("fixed_threshold", threshold=float(arg))
    except ValueError as exc:
        raise DataError(f"bad selection spec {spec!r}: {exc}") from None
    raise DataError(
        f"unknown selection spec {spec!r}; expected bh[:LEVEL], "
        "bonferroni[:LEVEL], top:K, or threshold:T"
    )


@dataclass(frozen=True)
class ScenarioFile:
    scenario: SimScenario
    sweep_axis: str | None = None
    sweep_grid: tuple[float, ...] | None = None


_SCENARIO_KEYS = {
    "m", "f00", "f01", "f10", "f11", "mu1", "mu2",
    "sigma1", "sigma2", "sigma", "zeta", "N",
    "procedure", "q1", "q", "alpha1", "alpha", "w1",
    "dependence", "t", "method", "primary", "selection",
    "reps", "seed", "sweep_axis", "sweep_grid",
}


def parse_scenario_file(path) -> ScenarioFile:
    """Flat ``key = value`` scenario format, ``#`` comments allowed."""
    path = Path(path)
    raw: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            key, eq, value = text.partition("=")
            key = key.strip()
            if not eq or not key:
                raise DataError(f"{path}:{lineno}: expected 'key = value'")
            if key not in _SCENARIO_KEYS:
                raise DataError(f"{path}:{lineno}: unknown key {key!r}")
            raw[key] = value.strip()

    def get_float(key: str, default: float | None = None) -> float | None:
        if key not in raw:
            return default
        return _parse_float(raw[key], str(path), key)

    def get_int(key: str, default: int | None = None) -> int | None:
        if key not in raw:
            return default
        try:
            return int(raw[key])
        except ValueError:
            raise DataError(f"{path}: cannot parse {key} value {raw[key]!r}") from None

    for key in ("m", "f00", "f01", "f10", "f11", "mu1", "mu2"):
        if key not in raw:
            raise DataError(f"{path}: missing required key {key!r}")
    q1 = get_float("q1", get_float("alpha1"))
    q = get_float("q", get_float("alpha", 0.05))
    procedure = SimProcedure(
        kind=raw.get("procedure", "fdr"),
        q1=q1,
        q=q,
        w1=get_float("w1", 1.0),
        mode=parse_dependence(raw["dependence"]) if "dependence" in raw else Dependence.INDEPENDENT,
        t=get_float("t"),
        fwer_method=raw.get("method", "bonferroni"),
        primary=get_int("primary", 1),
        selection=parse_sim_selection(raw["selection"]) if "selection" in raw else SimSelection(),
    )
    scenario = SimScenario(
        m=get_int("m"),
        f00=get_float("f00"),
        f01=get_float("f01"),
        f10=get_float("f10"),
        f11=get_float("f11"),
        mu1=get_float("mu1"),
        mu2=get_float("mu2"),
        sigma1=get_float("sigma1"),
        sigma2=get_float("sigma2"),
        sigma=get_float("sigma"),
        zeta=get_float("zeta"),
        n_total=get_float("N"),
        procedure=procedure,
        reps=get_int("reps", 1000),
        seed=get_int("seed", 0),
    )
    axis = raw.get("sweep_axis")
    grid = None
    if "sweep_grid" in raw:
        if axis is None:
            raise DataError(f"{path}: sweep_grid given without sweep_axis")
        try:
            grid = tuple(float(x) for x in raw["sweep_grid"].split(",") if x.strip())
        except ValueError:
            raise DataError(f"{path}: cannot parse sweep_grid") from None
        if not grid:
            raise DataError(f"{path}: empty sweep_grid")
    elif axis is not None:
        raise DataError(f"{path}: sweep_axis given without sweep_grid")
    return ScenarioFile(scenario=scenario, sweep_axis=axis, sweep_grid=grid)
