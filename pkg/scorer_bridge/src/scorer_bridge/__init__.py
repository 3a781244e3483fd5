"""Bridge from pointwise neural re-rankers to judgekit score-table TSVs."""

__version__ = "0.1.0"

from .errors import BridgeError, DuplicatePair, MalformedLine, ModelLoadFailure, PairTooLong
from .pairs import QueryDocPair, escape_text, load_pairs, parse_pairs, unescape_text, write_pairs
from .scoring import KINDS, PointwiseScorer, ScoredPair, load_scorer, score_pairs, to_score_table_tsv

__all__ = [
    "__version__",
    "BridgeError", "MalformedLine", "DuplicatePair", "ModelLoadFailure", "PairTooLong",
    "QueryDocPair", "parse_pairs", "write_pairs", "load_pairs", "escape_text", "unescape_text",
    "KINDS", "PointwiseScorer", "ScoredPair", "load_scorer", "score_pairs", "to_score_table_tsv",
]
