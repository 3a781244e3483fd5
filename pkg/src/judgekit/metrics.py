"""Per-topic and mean IR effectiveness metrics compatible with trec_eval.

Conventions (matching the standard trec_eval tool):
- Documents are ranked by score descending, ties broken by doc id
  descending lexicographic (see canonical_sort).
- Unjudged documents count as non-relevant; for graded qrels any grade
  >= 1 counts as relevant for the binary metrics.
- Topics with no relevant document are excluded from means; topics that
  are judged but missing from the run score 0 and stay in the mean.
- AP divides by the full relevant count, not min(R, K) (map_cut).
- nDCG uses linear gains (the grade itself) with a 1/log2(rank+1)
  discount, rank 1-based; the ideal ranking comes from the qrels grades.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Collection, Mapping

from .errors import NoRelevant
from .trec_io import canonical_sort

if TYPE_CHECKING:
    from .trec_io import BinaryQrels, DocId, GradedQrels, Run, TopicId

__all__ = [
    "MetricSpec",
    "RunEvaluation",
    "canonical_sort",
    "average_precision",
    "reciprocal_rank",
    "ndcg",
    "precision_at_k",
    "recall_at_k",
    "judged_at_k",
    "evaluate_run",
]

_KINDS = ("map", "mrr", "ndcg", "p", "recall", "judged")


@dataclass(frozen=True)
class MetricSpec:
    """A metric kind plus its rank cutoff, e.g. map@100."""

    kind: str
    depth: int

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"metric kind must be one of {_KINDS}, got {self.kind!r}")
        if isinstance(self.depth, bool) or not isinstance(self.depth, int) or self.depth < 1:
            raise ValueError(f"metric depth must be a positive integer, got {self.depth!r}")

    @classmethod
    def parse(cls, name: str) -> "MetricSpec":
        """Parse a metric name like ``map@100`` (case-insensitive)."""
        text = name.strip().lower()
        kind, sep, depth_text = text.partition("@")
        if not sep or not depth_text:
            raise ValueError(f"metric name {name!r} must look like `map@100`")
        try:
            depth = int(depth_text)
        except ValueError:
            raise ValueError(f"metric depth {depth_text!r} in {name!r} is not an integer") from None
        return cls(kind, depth)

    def __str__(self) -> str:
        return f"{self.kind}@{self.depth}"


@dataclass(frozen=True)
class RunEvaluation:
    """Per-topic values and their mean for one run under one metric.

    ``evaluable_topics`` is 0 when nothing could be evaluated; the mean
    is then reported as 0 and callers should treat the result as flagged.
    """

    metric: MetricSpec
    per_topic: Mapping[TopicId, float]
    mean: float
    evaluable_topics: int


def _relevant(rels: Mapping[DocId, int]) -> int:
    return sum(1 for grade in rels.values() if grade >= 1)


def average_precision(ranked: list[DocId], rels: Mapping[DocId, int], k: int) -> float:
    """AP@k for one topic: mean of precision at each relevant rank <= k.

    Divides by the topic's total relevant count R, so relevant documents
    never retrieved (or retrieved past k) still count against the score.
    Raises NoRelevant when R is 0 (the topic is not evaluable).
    """
    total_relevant = _relevant(rels)
    if total_relevant == 0:
        raise NoRelevant("topic has no relevant document")
    hits = 0
    total = 0.0
    for rank, doc in enumerate(ranked[:k], start=1):
        if rels.get(doc, 0) >= 1:
            hits += 1
            total += hits / rank
    return total / total_relevant


def reciprocal_rank(ranked: list[DocId], rels: Mapping[DocId, int], k: int) -> float:
    """1/rank of the first relevant document within the top k, else 0."""
    if _relevant(rels) == 0:
        raise NoRelevant("topic has no relevant document")
    for rank, doc in enumerate(ranked[:k], start=1):
        if rels.get(doc, 0) >= 1:
            return 1.0 / rank
    return 0.0


def ndcg(ranked: list[DocId], rels: Mapping[DocId, int], k: int) -> float:
    """nDCG@k with linear gains and 1/log2(rank+1) discount."""
    if _relevant(rels) == 0:
        raise NoRelevant("topic has no relevant document")
    dcg = 0.0
    for rank, doc in enumerate(ranked[:k], start=1):
        gain = rels.get(doc, 0)
        if gain > 0:
            dcg += gain / math.log2(rank + 1)
    ideal = 0.0
    for rank, gain in enumerate(sorted(rels.values(), reverse=True)[:k], start=1):
        if gain > 0:
            ideal += gain / math.log2(rank + 1)
    return dcg / ideal


def precision_at_k(ranked: list[DocId], rels: Mapping[DocId, int], k: int) -> float:
    """Fraction of the top k that is relevant; short rankings pad as non-relevant."""
    if _relevant(rels) == 0:
        raise NoRelevant("topic has no relevant document")
    hits = sum(1 for doc in ranked[:k] if rels.get(doc, 0) >= 1)
    return hits / k


def recall_at_k(ranked: list[DocId], rels: Mapping[DocId, int], k: int) -> float:
    """Fraction of the topic's relevant documents retrieved within the top k."""
    total_relevant = _relevant(rels)
    if total_relevant == 0:
        raise NoRelevant("topic has no relevant document")
    hits = sum(1 for doc in ranked[:k] if rels.get(doc, 0) >= 1)
    return hits / total_relevant


def judged_at_k(ranked: list[DocId], judged: Collection[DocId], k: int) -> float:
    """Fraction of the top min(k, len) documents present in the judged pool.

    Membership counts regardless of grade. ``ranked`` must be non-empty.
    """
    if not ranked:
        raise ValueError("ranking must be non-empty for judged@k")
    depth = min(k, len(ranked))
    hits = sum(1 for doc in ranked[:depth] if doc in judged)
    return hits / depth


_TOPIC_METRICS = {
    "map": average_precision,
    "mrr": reciprocal_rank,
    "ndcg": ndcg,
    "p": precision_at_k,
    "recall": recall_at_k,
}


def evaluate_run(run: Run, qrels: GradedQrels | BinaryQrels, spec: MetricSpec) -> RunEvaluation:
    """Evaluate one run under one metric, averaging over evaluable topics.

    For the relevance metrics a topic is evaluable iff its qrels contain
    at least one relevant document; evaluable topics absent from the run
    score 0. For judged@k a topic is evaluable iff the run ranked any
    document for it. With graded qrels, grade >= 1 counts as relevant for
    the binary metrics while nDCG uses the grades as gains.
    """
    grouped = qrels.by_topic()
    per_topic: dict[str, float] = {}
    if spec.kind == "judged":
        for topic in sorted(topic for topic, entries in run.topics.items() if entries):
            pool = grouped.get(topic, {})
            per_topic[topic] = judged_at_k(run.ranking(topic), pool.keys(), spec.depth)
    else:
        compute = _TOPIC_METRICS[spec.kind]
        for topic in sorted(topic for topic, rels in grouped.items() if _relevant(rels) > 0):
            ranked = run.ranking(topic)
            per_topic[topic] = compute(ranked, grouped[topic], spec.depth) if ranked else 0.0
    count = len(per_topic)
    mean = sum(per_topic.values()) / count if count else 0.0
    return RunEvaluation(metric=spec, per_topic=per_topic, mean=mean, evaluable_topics=count)
