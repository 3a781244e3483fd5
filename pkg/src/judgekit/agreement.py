"""Judge-quality statistics: Cohen's kappa and Kendall's tau over system orderings."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .errors import AllTied, DegenerateMarginals, MetricMismatch, MissingPrediction

if TYPE_CHECKING:
    from .metrics import RunEvaluation
    from .trec_io import BinaryQrels


@dataclass(frozen=True)
class ConfusionTable:
    """2x2 prediction-vs-gold counts; positive class is label 1."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class OrderingPair:
    """Two parallel metric-value lists over the same systems, in the same order."""

    systems: Sequence[str]
    values_a: Sequence[float]
    values_b: Sequence[float]

    def __post_init__(self):
        if len(self.systems) != len(self.values_a) or len(self.systems) != len(self.values_b):
            raise ValueError("systems, values_a and values_b must have equal lengths")
        if len(self.systems) < 2:
            raise ValueError("an ordering pair needs at least 2 systems")

    @classmethod
    def from_values(cls, values_a: Sequence[float], values_b: Sequence[float]) -> "OrderingPair":
        """Pair two bare value lists, numbering the systems positionally."""
        return cls([str(i) for i in range(len(values_a))], list(values_a), list(values_b))


def confusion(pred: BinaryQrels, gold: BinaryQrels, *, missing: str = "error") -> ConfusionTable:
    """Count agreement over the gold key set.

    Under the default ``missing="error"`` policy every gold pair must be
    predicted (the first missing pair is reported); ``missing="zero"``
    counts absent predictions as label 0. Predictions outside the gold
    key set are ignored.
    """
    if missing not in ("error", "zero"):
        raise ValueError(f"missing policy must be 'error' or 'zero', got {missing!r}")
    tp = fp = fn = tn = 0
    for pair, gold_label in sorted(gold.entries.items()):
        pred_label = pred.entries.get(pair)
        if pred_label is None:
            if missing == "error":
                raise MissingPrediction(*pair)
            pred_label = 0
        if pred_label == 1:
            if gold_label == 1:
                tp += 1
            else:
                fp += 1
        else:
            if gold_label == 1:
                fn += 1
            else:
                tn += 1
    return ConfusionTable(tp=tp, fp=fp, fn=fn, tn=tn)


def cohen_kappa(table: ConfusionTable, *, degenerate: str = "error") -> float:
    """Chance-corrected agreement: (po - pe) / (1 - pe).

    po is observed agreement; pe is the agreement expected from the two
    raters' marginals. When both raters are single-class, pe = 1 and
    kappa is undefined: the default raises DegenerateMarginals, while
    ``degenerate="one"`` coerces to 1.0 if po = 1 and to 0.0 otherwise.
    """
    if degenerate not in ("error", "one"):
        raise ValueError(f"degenerate policy must be 'error' or 'one', got {degenerate!r}")
    n = table.total
    if n < 1:
        raise ValueError("kappa needs at least one observation")
    agreement_count = table.tp + table.tn
    expected_count = (table.tp + table.fn) * (table.tp + table.fp) + (table.fp + table.tn) * (table.fn + table.tn)
    if expected_count == n * n:
        if degenerate == "error":
            raise DegenerateMarginals("both raters are single-class; chance agreement is 1")
        return 1.0 if agreement_count == n else 0.0
    po = agreement_count / n
    pe = expected_count / (n * n)
    return (po - pe) / (1.0 - pe)


def _pair_counts(values_a: Sequence[float], values_b: Sequence[float]) -> tuple[int, int, int, int]:
    """Concordant, discordant and per-list tied pair counts."""
    concordant = discordant = ties_a = ties_b = 0
    n = len(values_a)
    for i in range(n):
        for j in range(i + 1, n):
            diff_a = values_a[i] - values_a[j]
            diff_b = values_b[i] - values_b[j]
            if diff_a == 0:
                ties_a += 1
            if diff_b == 0:
                ties_b += 1
            if diff_a == 0 or diff_b == 0:
                continue
            if (diff_a > 0) == (diff_b > 0):
                concordant += 1
            else:
                discordant += 1
    return concordant, discordant, ties_a, ties_b


def kendall_tau_b(pair: OrderingPair) -> float:
    """Tau-b rank correlation: (C - D) / sqrt((T - Ta) * (T - Tb)).

    T is the number of item pairs; Ta/Tb count pairs tied within each
    list. Raises AllTied when either list is constant (tau undefined).
    """
    concordant, discordant, ties_a, ties_b = _pair_counts(pair.values_a, pair.values_b)
    n = len(pair.values_a)
    total_pairs = n * (n - 1) // 2
    if ties_a == total_pairs or ties_b == total_pairs:
        raise AllTied("all values tied in one of the lists")
    return (concordant - discordant) / math.sqrt((total_pairs - ties_a) * (total_pairs - ties_b))


def kendall_tau_a(pair: OrderingPair) -> float:
    """Tau-a rank correlation: (C - D) / T, with no tie correction."""
    concordant, discordant, ties_a, ties_b = _pair_counts(pair.values_a, pair.values_b)
    n = len(pair.values_a)
    total_pairs = n * (n - 1) // 2
    if ties_a == total_pairs or ties_b == total_pairs:
        raise AllTied("all values tied in one of the lists")
    return (concordant - discordant) / total_pairs


def system_ordering(evals: Sequence[tuple[str, RunEvaluation]]) -> list[tuple[str, float]]:
    """Order systems by mean metric value, descending; ties by system id.

    All evaluations must share the same metric. The id tie-break only
    affects display: correlation is computed from the raw values, so tied
    systems stay tied.
    """
    if not evals:
        return []
    specs = {evaluation.metric for _, evaluation in evals}
    if len(specs) > 1:
        raise MetricMismatch(f"evaluations mix metrics: {sorted(str(spec) for spec in specs)}")
    ordered = sorted(evals, key=lambda item: item[0])
    ordered.sort(key=lambda item: item[1].mean, reverse=True)
    return [(system, evaluation.mean) for system, evaluation in ordered]
