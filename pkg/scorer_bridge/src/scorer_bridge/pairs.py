"""Pairs-file I/O.

Format: TSV ``topic<TAB>doc<TAB>query<TAB>document``, one pair per line,
no header. Texts must be non-empty and carry no raw tab or newline;
those characters are backslash-escaped (``\\t``, ``\\n``, ``\\r``,
``\\\\``) so the file stays one-line-per-pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import DuplicatePair, MalformedLine

_UNESCAPES = {"t": "\t", "n": "\n", "r": "\r", "\\": "\\"}


def escape_text(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


def unescape_text(text: str) -> str:
    out: list[str] = []
    index = 0
    while index < len(text):
        ch = text[index]
        if ch != "\\":
            out.append(ch)
            index += 1
            continue
        if index + 1 >= len(text) or text[index + 1] not in _UNESCAPES:
            raise ValueError(f"bad escape at position {index} in {text!r}")
        out.append(_UNESCAPES[text[index + 1]])
        index += 2
    return "".join(out)


def _is_token(value: str) -> bool:
    return bool(value) and not any(ch.isspace() for ch in value)


@dataclass(frozen=True)
class QueryDocPair:
    topic: str
    doc: str
    query: str
    document: str

    def __post_init__(self):
        if not _is_token(self.topic) or not _is_token(self.doc):
            raise ValueError(f"topic/doc must be non-empty whitespace-free tokens, got ({self.topic!r}, {self.doc!r})")
        if not self.query or not self.document:
            raise ValueError(f"query and document must be non-empty for ({self.topic}, {self.doc})")


def parse_pairs(lines: Iterable[str], *, source: str = "<pairs>") -> list[QueryDocPair]:
    """Parse pairs lines; (topic, doc) keys must be unique."""
    pairs: list[QueryDocPair] = []
    seen: set[tuple[str, str]] = set()
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise MalformedLine(source, line_no, f"expected 4 tab-separated fields `topic doc query document`, got {len(fields)}")
        topic, doc, query_text, document_text = fields
        try:
            pair = QueryDocPair(topic, doc, unescape_text(query_text), unescape_text(document_text))
        except ValueError as exc:
            raise MalformedLine(source, line_no, str(exc)) from None
        key = (topic, doc)
        if key in seen:
            raise DuplicatePair(f"{source}:{line_no}: pair ({topic}, {doc}) appears twice")
        seen.add(key)
        pairs.append(pair)
    return pairs


def write_pairs(pairs: Iterable[QueryDocPair]) -> str:
    return "".join(
        f"{pair.topic}\t{pair.doc}\t{escape_text(pair.query)}\t{escape_text(pair.document)}\n" for pair in pairs
    )


def load_pairs(path) -> list[QueryDocPair]:
    with open(path, encoding="utf-8") as handle:
        return parse_pairs(handle, source=str(path))
