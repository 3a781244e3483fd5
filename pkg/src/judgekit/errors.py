"""Exception types shared across the toolkit.

Domain errors (bad input files, protocol violations) derive from
JudgekitError so the CLI can map them to exit code 1; programming
mistakes keep raising the usual ValueError/TypeError.
"""

from __future__ import annotations


class JudgekitError(Exception):
    """Base class for data and protocol errors raised by this package."""


class MalformedLine(JudgekitError):
    """An input line does not match the expected file format."""

    def __init__(self, source: str, line_no: int, reason: str):
        self.source = source
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{source}:{line_no}: {reason}")


class DuplicatePair(JudgekitError):
    """The same (topic, doc) pair appears twice where it must be unique."""


class DuplicateDoc(JudgekitError):
    """A document appears twice within one topic of a run."""


class InconsistentTag(JudgekitError):
    """Run lines disagree on the run tag."""


class MissingSignal(JudgekitError):
    """A score-table record carries neither a score nor a token."""


class ProbOutOfRange(JudgekitError):
    """A score-table probability lies outside [0, 1]."""


class MissingToken(JudgekitError):
    """Direct generation hit a record without a token."""


class UnknownToken(JudgekitError):
    """A generated token is absent from the token map."""

    def __init__(self, token: str, topic: str, doc: str):
        self.token = token
        self.pair = (topic, doc)
        super().__init__(f"token {token!r} for ({topic}, {doc}) is not in the token map")


class MissingScore(JudgekitError):
    """Thresholding hit a record without a score."""


class EmptyGrid(JudgekitError):
    """A threshold grid contains no candidate values."""


class MissingPrediction(JudgekitError):
    """A gold pair has no predicted label under the strict missing policy."""

    def __init__(self, topic: str, doc: str):
        self.pair = (topic, doc)
        super().__init__(f"no prediction for gold pair ({topic}, {doc})")


class MissingSource(JudgekitError):
    """A transfer plan names a source dataset with no sweep result."""


class DegenerateMarginals(JudgekitError):
    """Both raters are single-class, so chance agreement is 1 and kappa is undefined."""


class AllTied(JudgekitError):
    """One of the value lists is constant, so tau-b is undefined."""


class MetricMismatch(JudgekitError):
    """Evaluations being combined were computed under different metrics."""


class NoRelevant(JudgekitError):
    """A topic has no relevant document; it is excluded, not failed."""


class UnknownJudge(JudgekitError):
    """A judge in the matrix has no catalog entry."""


class UnknownSystem(JudgekitError):
    """A system id is absent from the catalog or matrix."""
