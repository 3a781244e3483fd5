"""Parsers and writers for the on-disk formats.

Formats handled:
- Qrels: whitespace-separated ``topic iteration doc grade``, one judgment
  per line. The iteration column is ignored. Grades are non-negative
  integers (not capped at 3, so non-TREC collections load unchanged).
- Run: whitespace-separated ``topic Q0 doc rank score tag``. The textual
  rank column is ignored; documents are re-ranked from the scores using
  the canonical ordering (score descending, doc id descending on ties).
- Score table: TSV ``topic<TAB>doc<TAB>score<TAB>token<TAB>prob`` with the
  literal placeholder ``-`` for absent fields and no header line.

All parsers accept LF or CRLF input, skip blank lines, and report errors
with the source name and 1-based line number. Parsed structures are
immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (
    DuplicateDoc,
    DuplicatePair,
    InconsistentTag,
    MalformedLine,
    MissingSignal,
    ProbOutOfRange,
)

TopicId = str
DocId = str
Pair = tuple[TopicId, DocId]


def _is_token(value: str) -> bool:
    return bool(value) and not any(ch.isspace() for ch in value)


def _check_pair(topic: str, doc: str) -> None:
    if not _is_token(topic):
        raise ValueError(f"topic id must be a non-empty whitespace-free token, got {topic!r}")
    if not _is_token(doc):
        raise ValueError(f"doc id must be a non-empty whitespace-free token, got {doc!r}")


def canonical_sort(entries: Iterable[tuple[DocId, float]]) -> list[DocId]:
    """Order (doc, score) entries by score descending, doc id descending on ties.

    This is the ordering the standard TREC evaluation tooling applies to
    run entries, so ranked metrics are insensitive to input line order.
    Doc ids are assumed unique.
    """
    ordered = sorted(entries, key=lambda pair: pair[0], reverse=True)
    ordered.sort(key=lambda pair: pair[1], reverse=True)
    return [doc for doc, _ in ordered]


@dataclass(frozen=True)
class GradedQrels:
    """Graded relevance judgments keyed by (topic, doc)."""

    entries: Mapping[Pair, int]

    def __post_init__(self):
        for (topic, doc), grade in self.entries.items():
            _check_pair(topic, doc)
            if isinstance(grade, bool) or not isinstance(grade, int) or grade < 0:
                raise ValueError(f"grade for ({topic}, {doc}) must be a non-negative integer, got {grade!r}")

    def by_topic(self) -> dict[TopicId, dict[DocId, int]]:
        """Group entries as topic -> {doc: grade}."""
        grouped: dict[str, dict[str, int]] = {}
        for (topic, doc), grade in self.entries.items():
            grouped.setdefault(topic, {})[doc] = grade
        return grouped

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class BinaryQrels:
    """Binary relevance judgments keyed by (topic, doc); labels are 0 or 1."""

    entries: Mapping[Pair, int]

    def __post_init__(self):
        for (topic, doc), label in self.entries.items():
            _check_pair(topic, doc)
            if isinstance(label, bool) or label not in (0, 1):
                raise ValueError(f"label for ({topic}, {doc}) must be 0 or 1, got {label!r}")

    def by_topic(self) -> dict[TopicId, dict[DocId, int]]:
        """Group entries as topic -> {doc: label}."""
        grouped: dict[str, dict[str, int]] = {}
        for (topic, doc), label in self.entries.items():
            grouped.setdefault(topic, {})[doc] = label
        return grouped

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Run:
    """One system's ranked output: topic -> [(doc, score), ...] in canonical order.

    The constructor re-sorts each topic canonically (score descending,
    doc id descending on ties), so callers may pass unordered entries.
    """

    run_tag: str
    topics: Mapping[TopicId, tuple[tuple[DocId, float], ...]]

    def __post_init__(self):
        if not _is_token(self.run_tag):
            raise ValueError(f"run tag must be a non-empty whitespace-free token, got {self.run_tag!r}")
        normalized: dict[str, tuple[tuple[str, float], ...]] = {}
        for topic, entries in self.topics.items():
            if not _is_token(topic):
                raise ValueError(f"topic id must be a non-empty whitespace-free token, got {topic!r}")
            seen: set[str] = set()
            cleaned = []
            for doc, score in entries:
                _check_pair(topic, doc)
                score = float(score)
                if not math.isfinite(score):
                    raise ValueError(f"score for ({topic}, {doc}) must be finite, got {score!r}")
                if doc in seen:
                    raise DuplicateDoc(f"document {doc!r} listed twice for topic {topic!r}")
                seen.add(doc)
                cleaned.append((doc, score))
            by_doc = dict(cleaned)
            normalized[topic] = tuple((doc, by_doc[doc]) for doc in canonical_sort(cleaned))
        object.__setattr__(self, "topics", normalized)

    def ranking(self, topic: TopicId) -> list[DocId]:
        """Canonically ordered doc ids for one topic (empty if absent)."""
        return [doc for doc, _ in self.topics.get(topic, ())]


@dataclass(frozen=True)
class ScoreRecord:
    """Raw scorer output for one pair: at least one of score/token is set."""

    score: float | None = None
    token: str | None = None
    prob: float | None = None

    def __post_init__(self):
        if self.score is None and self.token is None:
            raise MissingSignal("record needs a score or a token")
        if self.score is not None and not math.isfinite(self.score):
            raise ValueError(f"score must be finite, got {self.score!r}")
        if self.token is not None and not _is_token(self.token):
            raise ValueError(f"token must be a non-empty whitespace-free token, got {self.token!r}")
        if self.prob is not None and not (0.0 <= self.prob <= 1.0):
            raise ProbOutOfRange(f"prob {self.prob!r} outside [0, 1]")


@dataclass(frozen=True)
class ScoreTable:
    """Per (topic, doc) raw scorer outputs."""

    records: Mapping[Pair, ScoreRecord]

    def __post_init__(self):
        for (topic, doc), record in self.records.items():
            _check_pair(topic, doc)
            if not isinstance(record, ScoreRecord):
                raise TypeError(f"record for ({topic}, {doc}) must be a ScoreRecord")

    def __len__(self) -> int:
        return len(self.records)


def parse_qrels(
    lines: Iterable[str],
    *,
    duplicate_policy: str = "error",
    source: str = "<qrels>",
) -> GradedQrels:
    """Parse qrels lines into GradedQrels.

    Duplicate (topic, doc) pairs with the same grade are silently
    de-duplicated. Conflicting duplicates raise DuplicatePair under the
    default policy; ``duplicate_policy="last-wins"`` keeps the last grade.
    """
    if duplicate_policy not in ("error", "last-wins"):
        raise ValueError(f"duplicate_policy must be 'error' or 'last-wins', got {duplicate_policy!r}")
    entries: dict[Pair, int] = {}
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 4:
            raise MalformedLine(source, line_no, f"expected 4 fields `topic iteration doc grade`, got {len(fields)}")
        topic, _iteration, doc, grade_text = fields
        try:
            grade = int(grade_text)
        except ValueError:
            raise MalformedLine(source, line_no, f"grade {grade_text!r} is not an integer") from None
        if grade < 0:
            raise MalformedLine(source, line_no, f"grade must be non-negative, got {grade}")
        key = (topic, doc)
        previous = entries.get(key)
        if previous is not None and previous != grade and duplicate_policy == "error":
            raise DuplicatePair(
                f"{source}:{line_no}: conflicting grades for ({topic}, {doc}): {previous} then {grade}"
            )
        entries[key] = grade
    return GradedQrels(entries)


def parse_run(lines: Iterable[str], *, source: str = "<run>") -> Run:
    """Parse run lines into a Run, re-ranked by the canonical ordering.

    The rank column is ignored in favor of the scores; all lines must
    carry the same run tag (taken from the first line).
    """
    run_tag: str | None = None
    per_topic: dict[str, dict[str, float]] = {}
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 6:
            raise MalformedLine(source, line_no, f"expected 6 fields `topic Q0 doc rank score tag`, got {len(fields)}")
        topic, _q0, doc, _rank, score_text, tag = fields
        try:
            score = float(score_text)
        except ValueError:
            raise MalformedLine(source, line_no, f"score {score_text!r} is not a number") from None
        if not math.isfinite(score):
            raise MalformedLine(source, line_no, f"score must be finite, got {score_text!r}")
        if run_tag is None:
            run_tag = tag
        elif tag != run_tag:
            raise InconsistentTag(f"{source}:{line_no}: run tag {tag!r} differs from {run_tag!r}")
        docs = per_topic.setdefault(topic, {})
        if doc in docs:
            raise DuplicateDoc(f"{source}:{line_no}: document {doc!r} listed twice for topic {topic!r}")
        docs[doc] = score
    if run_tag is None:
        run_tag = "-"
    return Run(run_tag, {topic: tuple(docs.items()) for topic, docs in per_topic.items()})


def parse_scores(lines: Iterable[str], *, source: str = "<scores>") -> ScoreTable:
    """Parse score-table TSV lines into a ScoreTable.

    Columns are ``topic doc score token prob`` separated by single tabs;
    ``-`` marks an absent score/token/prob. Every record must carry a
    score or a token; probs must lie in [0, 1].
    """
    records: dict[Pair, ScoreRecord] = {}
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        fields = [field.strip() for field in line.split("\t")]
        if len(fields) != 5:
            raise MalformedLine(source, line_no, f"expected 5 tab-separated fields `topic doc score token prob`, got {len(fields)}")
        topic, doc, score_text, token_text, prob_text = fields
        if not _is_token(topic) or not _is_token(doc):
            raise MalformedLine(source, line_no, "topic and doc must be non-empty whitespace-free tokens")

        score: float | None = None
        if score_text != "-":
            try:
                score = float(score_text)
            except ValueError:
                raise MalformedLine(source, line_no, f"score {score_text!r} is not a number") from None
            if not math.isfinite(score):
                raise MalformedLine(source, line_no, f"score must be finite, got {score_text!r}")

        token: str | None = None
        if token_text != "-":
            if not _is_token(token_text):
                raise MalformedLine(source, line_no, f"token must be whitespace-free, got {token_text!r}")
            token = token_text

        prob: float | None = None
        if prob_text != "-":
            try:
                prob = float(prob_text)
            except ValueError:
                raise MalformedLine(source, line_no, f"prob {prob_text!r} is not a number") from None
            if not (0.0 <= prob <= 1.0):
                raise ProbOutOfRange(f"{source}:{line_no}: prob {prob_text} outside [0, 1]")

        if score is None and token is None:
            raise MissingSignal(f"{source}:{line_no}: record needs a score or a token")
        key = (topic, doc)
        if key in records:
            raise DuplicatePair(f"{source}:{line_no}: pair ({topic}, {doc}) appears twice")
        records[key] = ScoreRecord(score=score, token=token, prob=prob)
    return ScoreTable(records)


def binarize(qrels: GradedQrels, cutoff: int = 2) -> BinaryQrels:
    """Collapse grades to binary labels: 1 iff grade >= cutoff.

    The key set is preserved exactly. The default cutoff of 2 is the
    TREC-DL convention (grades 2 and 3 count as relevant).
    """
    if isinstance(cutoff, bool) or not isinstance(cutoff, int) or cutoff < 0:
        raise ValueError(f"cutoff must be a non-negative integer, got {cutoff!r}")
    return BinaryQrels({pair: 1 if grade >= cutoff else 0 for pair, grade in qrels.entries.items()})


def write_qrels(qrels: BinaryQrels) -> str:
    """Render binary qrels as ``topic 0 doc label`` lines, LF-terminated.

    Lines are sorted by (topic, doc) so output is deterministic;
    parse_qrels followed by binarize(cutoff=1) reproduces the input.
    """
    return "".join(f"{topic} 0 {doc} {label}\n" for (topic, doc), label in sorted(qrels.entries.items()))


def load_qrels(path, **kwargs) -> GradedQrels:
    with open(path, encoding="utf-8") as handle:
        return parse_qrels(handle, source=str(path), **kwargs)


def load_run(path) -> Run:
    with open(path, encoding="utf-8") as handle:
        return parse_run(handle, source=str(path))


def load_scores(path) -> ScoreTable:
    with open(path, encoding="utf-8") as handle:
        return parse_scores(handle, source=str(path))
