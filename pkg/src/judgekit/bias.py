"""Cross-evaluate a curated run set under every judge and quantify bias.

Every system run is scored under each judge's qrels and under the human
qrels (the reserved row id "human"). From that matrix the report derives:
- self-preference: for a judge with a declared own system, the system's
  rank under the human row minus its rank under the judge's row
  (positive means the judge places its own system higher than humans do),
  plus the raw value delta;
- family deltas: mean value delta (and mean rank delta) against the human
  row, grouped by (judge family, system family);
- baseline overestimation: per judge, the baseline system's value under
  the judge minus its value under the human row.

Rank-delta and value-delta are this toolkit's operationalizations of
"prefers its own system"; they are labelled as such in the report output.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

from .errors import UnknownJudge, UnknownSystem
from .metrics import MetricSpec, evaluate_run
from .trec_io import BinaryQrels, Run

HUMAN_ROW = "human"


@dataclass(frozen=True)
class SystemInfo:
    family: str
    display: str

    def __post_init__(self):
        if not self.family:
            raise ValueError("system family must be non-empty")


@dataclass(frozen=True)
class JudgeInfo:
    family: str
    own_system: str | None = None

    def __post_init__(self):
        if not self.family:
            raise ValueError("judge family must be non-empty")


@dataclass(frozen=True)
class SystemCatalog:
    """Which family each system/judge belongs to, and each judge's own system."""

    systems: Mapping[str, SystemInfo]
    judges: Mapping[str, JudgeInfo]

    def __post_init__(self):
        if HUMAN_ROW in self.judges:
            raise ValueError(f"judge id {HUMAN_ROW!r} is reserved for the human row")
        for judge, info in self.judges.items():
            if info.own_system is not None and info.own_system not in self.systems:
                raise ValueError(f"judge {judge!r} names unknown own system {info.own_system!r}")

    @classmethod
    def from_dict(cls, data: Mapping) -> "SystemCatalog":
        systems = {
            system_id: SystemInfo(family=entry["family"], display=entry.get("display", system_id))
            for system_id, entry in data.get("systems", {}).items()
        }
        judges = {
            judge_id: JudgeInfo(family=entry["family"], own_system=entry.get("system"))
            for judge_id, entry in data.get("judges", {}).items()
        }
        return cls(systems=systems, judges=judges)

    @classmethod
    def load(cls, path) -> "SystemCatalog":
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


@dataclass(frozen=True)
class BiasMatrix:
    """Mean metric value per (judge row, system), plus evaluable-topic counts."""

    metric: MetricSpec
    rows: Mapping[str, Mapping[str, float]]
    counts: Mapping[str, Mapping[str, int]]

    def judge_ids(self) -> list[str]:
        return sorted(judge for judge in self.rows if judge != HUMAN_ROW)

    def system_ids(self) -> list[str]:
        return sorted(self.rows[HUMAN_ROW])


@dataclass(frozen=True)
class SelfPreference:
    judge: str
    system: str
    judge_rank: float
    human_rank: float
    rank_delta: float
    value_delta: float


@dataclass(frozen=True)
class FamilyDelta:
    judge_family: str
    system_family: str
    value_delta: float
    rank_delta: float


@dataclass(frozen=True)
class BaselineDelta:
    judge: str
    delta: float


@dataclass(frozen=True)
class ScatterRow:
    judge: str
    system: str
    family: str
    human_value: float
    judge_value: float
    human_rank: float
    judge_rank: float


@dataclass(frozen=True)
class BiasReport:
    metric: MetricSpec
    self_preference: tuple[SelfPreference, ...]
    family_deltas: tuple[FamilyDelta, ...]
    baseline_system: str | None
    baseline_deltas: tuple[BaselineDelta, ...]


def cross_evaluate(
    runs: Mapping[str, Run],
    judge_qrels: Mapping[str, BinaryQrels],
    human_qrels: BinaryQrels,
    spec: MetricSpec,
    *,
    max_workers: int = 1,
) -> BiasMatrix:
    """Score every run under every judge's qrels and the human qrels.

    Cells with no evaluable topic get value 0 and count 0 (the flag).
    Cells are independent, so they may be computed over ``max_workers``
    threads; rows/columns are assembled in sorted order regardless.
    """
    if HUMAN_ROW in judge_qrels:
        raise ValueError(f"judge id {HUMAN_ROW!r} is reserved for the human row")
    system_ids = sorted(runs)
    row_ids = [HUMAN_ROW] + sorted(judge_qrels)
    qrels_by_row = {HUMAN_ROW: human_qrels, **judge_qrels}
    cells = [(row, system) for row in row_ids for system in system_ids]

    def evaluate_cell(cell: tuple[str, str]):
        row, system = cell
        return evaluate_run(runs[system], qrels_by_row[row], spec)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            evaluations = list(pool.map(evaluate_cell, cells))
    else:
        evaluations = [evaluate_cell(cell) for cell in cells]

    rows: dict[str, dict[str, float]] = {row: {} for row in row_ids}
    counts: dict[str, dict[str, int]] = {row: {} for row in row_ids}
    for (row, system), evaluation in zip(cells, evaluations):
        rows[row][system] = evaluation.mean
        counts[row][system] = evaluation.evaluable_topics
    return BiasMatrix(metric=spec, rows=rows, counts=counts)


def rank_systems(row: Mapping[str, float]) -> dict[str, float]:
    """Rank 1 = largest value; exact ties share the average rank.

    Average-rank ties keep the rank sum at n(n+1)/2 whatever the
    insertion order, so rankings are permutation-invariant.
    """
    if not row:
        raise ValueError("cannot rank an empty row")
    ordered = sorted(row.items(), key=lambda item: item[0])
    ordered.sort(key=lambda item: item[1], reverse=True)
    ranks: dict[str, float] = {}
    start = 0
    while start < len(ordered):
        stop = start
        while stop < len(ordered) and ordered[stop][1] == ordered[start][1]:
            stop += 1
        shared = ((start + 1) + stop) / 2
        for index in range(start, stop):
            ranks[ordered[index][0]] = shared
        start = stop
    return ranks


def _ranks_by_row(matrix: BiasMatrix) -> dict[str, dict[str, float]]:
    return {row: rank_systems(values) for row, values in matrix.rows.items()}


def self_preference(matrix: BiasMatrix, catalog: SystemCatalog) -> tuple[tuple[SelfPreference, ...], tuple[FamilyDelta, ...]]:
    """Per-judge own-system deltas plus (judge family, system family) aggregates.

    Judges without a declared own system are skipped for the per-judge
    deltas but still contribute to the family aggregates. Positive deltas
    mean the judge rates/ranks the system more favorably than the human row.
    """
    for judge in matrix.judge_ids():
        if judge not in catalog.judges:
            raise UnknownJudge(f"judge {judge!r} has no catalog entry")
    ranks = _ranks_by_row(matrix)
    human_values = matrix.rows[HUMAN_ROW]
    human_ranks = ranks[HUMAN_ROW]

    own: list[SelfPreference] = []
    for judge in matrix.judge_ids():
        own_system = catalog.judges[judge].own_system
        if own_system is None:
            continue
        if own_system not in human_values:
            raise UnknownSystem(f"judge {judge!r} owns system {own_system!r}, which is not in the matrix")
        own.append(
            SelfPreference(
                judge=judge,
                system=own_system,
                judge_rank=ranks[judge][own_system],
                human_rank=human_ranks[own_system],
                rank_delta=human_ranks[own_system] - ranks[judge][own_system],
                value_delta=matrix.rows[judge][own_system] - human_values[own_system],
            )
        )

    grouped: dict[tuple[str, str], tuple[list[float], list[float]]] = {}
    for judge in matrix.judge_ids():
        judge_family = catalog.judges[judge].family
        for system in matrix.system_ids():
            if system not in catalog.systems:
                raise UnknownSystem(f"system {system!r} has no catalog entry")
            key = (judge_family, catalog.systems[system].family)
            value_deltas, rank_deltas = grouped.setdefault(key, ([], []))
            value_deltas.append(matrix.rows[judge][system] - human_values[system])
            rank_deltas.append(human_ranks[system] - ranks[judge][system])
    families = tuple(
        FamilyDelta(
            judge_family=judge_family,
            system_family=system_family,
            value_delta=sum(value_deltas) / len(value_deltas),
            rank_delta=sum(rank_deltas) / len(rank_deltas),
        )
        for (judge_family, system_family), (value_deltas, rank_deltas) in sorted(grouped.items())
    )
    return tuple(own), families


def baseline_overestimation(matrix: BiasMatrix, baseline: str) -> tuple[BaselineDelta, ...]:
    """Per judge: baseline system's value under the judge minus under humans."""
    if baseline not in matrix.rows[HUMAN_ROW]:
        raise UnknownSystem(f"baseline system {baseline!r} is not in the matrix")
    human_value = matrix.rows[HUMAN_ROW][baseline]
    return tuple(
        BaselineDelta(judge=judge, delta=matrix.rows[judge][baseline] - human_value)
        for judge in matrix.judge_ids()
    )


def scatter_data(matrix: BiasMatrix, catalog: SystemCatalog) -> list[ScatterRow]:
    """One row per (judge, system): the data behind judge-vs-human scatter plots."""
    ranks = _ranks_by_row(matrix)
    human_values = matrix.rows[HUMAN_ROW]
    human_ranks = ranks[HUMAN_ROW]
    rows: list[ScatterRow] = []
    for judge in matrix.judge_ids():
        for system in matrix.system_ids():
            if system not in catalog.systems:
                raise UnknownSystem(f"system {system!r} has no catalog entry")
            rows.append(
                ScatterRow(
                    judge=judge,
                    system=system,
                    family=catalog.systems[system].family,
                    human_value=human_values[system],
                    judge_value=matrix.rows[judge][system],
                    human_rank=human_ranks[system],
                    judge_rank=ranks[judge][system],
                )
            )
    return rows


def bias_report(matrix: BiasMatrix, catalog: SystemCatalog, baseline: str | None = None) -> BiasReport:
    """Bundle self-preference, family and baseline statistics for one matrix."""
    own, families = self_preference(matrix, catalog)
    deltas = baseline_overestimation(matrix, baseline) if baseline is not None else ()
    return BiasReport(
        metric=matrix.metric,
        self_preference=own,
        family_deltas=families,
        baseline_system=baseline,
        baseline_deltas=deltas,
    )
