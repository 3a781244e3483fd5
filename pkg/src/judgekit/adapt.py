"""Adapt score tables into binary judgments, plus threshold sweep and transfer.

Two adaptation strategies:
- direct generation: read each record's generated token through a token
  map (default: "true" -> 1, "false" -> 0);
- score thresholding: label 1 iff score >= theta (inclusive boundary).

The sweep evaluates a threshold grid against gold qrels under a chosen
objective (kappa against the gold labels, or tau between system
orderings) and selects the best theta, breaking ties toward the
smallest. Transfer plans move selected thetas across datasets.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import isfinite
from typing import Mapping, Sequence

from .agreement import OrderingPair, cohen_kappa, confusion, kendall_tau_b
from .errors import (
    EmptyGrid,
    MissingPrediction,
    MissingScore,
    MissingSource,
    MissingToken,
    UnknownToken,
)
from .metrics import MetricSpec, evaluate_run
from .trec_io import BinaryQrels, Run, ScoreTable

DEFAULT_TOKENS = {"true": 1, "false": 0}


@dataclass(frozen=True)
class TokenMap:
    """Maps generated tokens to binary labels; multiple tokens per label are fine."""

    entries: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_TOKENS))

    def __post_init__(self):
        if not self.entries:
            raise ValueError("token map must not be empty")
        for token, label in self.entries.items():
            if not token or any(ch.isspace() for ch in token):
                raise ValueError(f"token must be a non-empty whitespace-free token, got {token!r}")
            if isinstance(label, bool) or label not in (0, 1):
                raise ValueError(f"label for token {token!r} must be 0 or 1, got {label!r}")


@dataclass(frozen=True)
class ThresholdGrid:
    """Strictly increasing candidate thresholds."""

    thetas: tuple[float, ...]

    def __post_init__(self):
        if not self.thetas:
            raise EmptyGrid("threshold grid is empty")
        for theta in self.thetas:
            if not isfinite(theta):
                raise ValueError(f"grid thresholds must be finite, got {theta!r}")
        for left, right in zip(self.thetas, self.thetas[1:]):
            if not left < right:
                raise ValueError(f"grid must be strictly increasing, got {left} before {right}")

    @classmethod
    def unit(cls) -> "ThresholdGrid":
        """101 points over [0, 1] in steps of 0.01, for probability-valued scorers."""
        return cls(tuple(i / 100 for i in range(101)))

    @classmethod
    def wide(cls) -> "ThresholdGrid":
        """161 points over [-8, 8] in steps of 0.1, for unbounded scorers."""
        return cls(tuple((i - 80) / 10 for i in range(161)))

    @classmethod
    def for_scores(cls, scores: ScoreTable) -> "ThresholdGrid":
        """Unit grid when every score lies in [0, 1], otherwise the wide grid."""
        values = [record.score for record in scores.records.values() if record.score is not None]
        if values and all(0.0 <= value <= 1.0 for value in values):
            return cls.unit()
        return cls.wide()

    def __len__(self) -> int:
        return len(self.thetas)


@dataclass(frozen=True)
class SweepObjective:
    """What a sweep maximizes: kappa, or tau over a run set's orderings."""

    kind: str
    metric: MetricSpec | None = None

    def __post_init__(self):
        if self.kind not in ("kappa", "tau"):
            raise ValueError(f"objective kind must be 'kappa' or 'tau', got {self.kind!r}")
        if self.kind == "tau" and self.metric is None:
            raise ValueError("tau objective needs a metric, e.g. MetricSpec.parse('map@100')")
        if self.kind == "kappa" and self.metric is not None:
            raise ValueError("kappa objective takes no metric")

    def __str__(self) -> str:
        return self.kind if self.kind == "kappa" else f"tau:{self.metric}"


@dataclass(frozen=True)
class SweepResult:
    """Objective value per grid theta, and the selected theta.

    ``selected`` attains the curve maximum; ties break toward the
    smallest theta (the conservative choice: more pairs labelled relevant).
    """

    curve: tuple[tuple[float, float], ...]
    selected: float

    def __post_init__(self):
        if not self.curve:
            raise EmptyGrid("sweep curve is empty")
        best = max(value for _, value in self.curve)
        expected = min(theta for theta, value in self.curve if value == best)
        if self.selected != expected:
            raise ValueError(f"selected theta {self.selected} does not match curve optimum {expected}")

    def to_dict(self) -> dict:
        return {"curve": [[theta, value] for theta, value in self.curve], "selected": self.selected}

    @classmethod
    def from_dict(cls, data: Mapping) -> "SweepResult":
        curve = tuple((float(theta), float(value)) for theta, value in data["curve"])
        return cls(curve=curve, selected=float(data["selected"]))


@dataclass(frozen=True)
class TransferPlan:
    """Which dataset's selected theta each target dataset receives."""

    assignments: Mapping[str, str]

    PRESETS = {
        "trecdl-paper": {"19": "20", "20": "19", "21": "22", "22": "21", "23": "22"},
    }

    @classmethod
    def preset(cls, name: str) -> "TransferPlan":
        if name not in cls.PRESETS:
            raise ValueError(f"unknown transfer preset {name!r}; known: {sorted(cls.PRESETS)}")
        return cls(dict(cls.PRESETS[name]))


def judge_direct(scores: ScoreTable, token_map: TokenMap | None = None) -> BinaryQrels:
    """Read each record's generated token as its binary label.

    Every record must carry a token, and every token must be in the map;
    scores and probs are ignored. The key set is preserved exactly.
    """
    token_map = token_map if token_map is not None else TokenMap()
    labels: dict[tuple[str, str], int] = {}
    for (topic, doc), record in scores.records.items():
        if record.token is None:
            raise MissingToken(f"record for ({topic}, {doc}) has no token")
        label = token_map.entries.get(record.token)
        if label is None:
            raise UnknownToken(record.token, topic, doc)
        labels[(topic, doc)] = label
    return BinaryQrels(labels)


def judge_threshold(scores: ScoreTable, theta: float) -> BinaryQrels:
    """Label 1 iff score >= theta. Every record must carry a score."""
    theta = float(theta)
    if not isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta!r}")
    labels: dict[tuple[str, str], int] = {}
    for (topic, doc), record in scores.records.items():
        if record.score is None:
            raise MissingScore(f"record for ({topic}, {doc}) has no score")
        labels[(topic, doc)] = 1 if record.score >= theta else 0
    return BinaryQrels(labels)


def sweep(
    scores: ScoreTable,
    gold: BinaryQrels,
    grid: ThresholdGrid | Sequence[float],
    objective: SweepObjective,
    runs: Mapping[str, Run] | None = None,
    *,
    missing: str = "error",
    max_workers: int = 1,
) -> SweepResult:
    """Evaluate every grid theta against the gold labels and select the best.

    For the kappa objective each grid point thresholds the scores and
    scores the confusion against gold. For the tau objective each grid
    point's thresholded qrels re-evaluate the run set and tau-b compares
    that system ordering with the gold one (``runs`` is required then,
    and rejected otherwise). Scores must cover the gold key set unless
    ``missing="zero"``. Grid points are independent, so evaluation may
    fan out over ``max_workers`` threads; the curve is assembled in grid
    order either way.
    """
    if not isinstance(grid, ThresholdGrid):
        grid = ThresholdGrid(tuple(float(theta) for theta in grid))
    if (objective.kind == "tau") != (runs is not None):
        raise ValueError("runs must be provided exactly when the objective is tau")
    if missing == "error":
        uncovered = sorted(set(gold.entries) - set(scores.records))
        if uncovered:
            raise MissingPrediction(*uncovered[0])

    if objective.kind == "tau":
        assert runs is not None and objective.metric is not None
        system_ids = sorted(runs)
        gold_means = [evaluate_run(runs[system], gold, objective.metric).mean for system in system_ids]

        def value_at(theta: float) -> float:
            predicted = judge_threshold(scores, theta)
            predicted_means = [evaluate_run(runs[system], predicted, objective.metric).mean for system in system_ids]
            return kendall_tau_b(OrderingPair(system_ids, gold_means, predicted_means))

    else:

        def value_at(theta: float) -> float:
            predicted = judge_threshold(scores, theta)
            return cohen_kappa(confusion(predicted, gold, missing=missing))

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            values = list(pool.map(value_at, grid.thetas))
    else:
        values = [value_at(theta) for theta in grid.thetas]

    curve = tuple(zip(grid.thetas, values))
    best = max(values)
    selected = min(theta for theta, value in curve if value == best)
    return SweepResult(curve=curve, selected=selected)


def apply_transfer(plan: TransferPlan, per_source: Mapping[str, SweepResult]) -> dict[str, float]:
    """Give each target dataset the theta selected on its source dataset."""
    assigned: dict[str, float] = {}
    for target, source in sorted(plan.assignments.items()):
        result = per_source.get(source)
        if result is None:
            raise MissingSource(f"no sweep result for source dataset {source!r} (needed by target {target!r})")
        assigned[target] = result.selected
    return assigned
