"""Exception types for the scorer bridge."""

from __future__ import annotations


class BridgeError(Exception):
    """Base class for bridge data and model errors."""


class MalformedLine(BridgeError):
    """A pairs-file line does not match the expected format."""

    def __init__(self, source: str, line_no: int, reason: str):
        self.source = source
        self.line_no = line_no
        super().__init__(f"{source}:{line_no}: {reason}")


class DuplicatePair(BridgeError):
    """The same (topic, doc) pair appears twice in a pairs file."""


class ModelLoadFailure(BridgeError):
    """The model reference could not be loaded."""


class PairTooLong(BridgeError):
    """Query plus template exceed the model context even with the document dropped."""

    def __init__(self, topic: str, doc: str, needed: int, budget: int):
        self.pair = (topic, doc)
        super().__init__(
            f"pair ({topic}, {doc}) needs {needed} prompt tokens before the document, "
            f"but the context allows {budget}"
        )
