"""Command-line interface: score a pairs file into a score-table TSV.

    scorer-bridge score --model <ref> --kind generative_token|regression \
        --pairs pairs.tsv --out scores.tsv --batch 16

The output is the judgekit score-table TSV, written atomically. Exit
codes: 0 success, 1 data/model error, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

from .errors import BridgeError
from .pairs import load_pairs
from .scoring import KINDS, load_scorer, score_pairs, to_score_table_tsv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scorer-bridge", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subparsers = parser.add_subparsers(dest="verb", metavar="VERB")
    score = subparsers.add_parser("score", help="score a pairs file with a pointwise model")
    score.add_argument("--model", required=True, help="checkpoint reference (local path or hub id)")
    score.add_argument("--kind", required=True, choices=KINDS, help="scorer output style")
    score.add_argument("--pairs", required=True, help="pairs TSV: topic doc query document")
    score.add_argument("--out", required=True, help="output score-table TSV")
    score.add_argument("--batch", type=int, default=16, help="batch size (default 16)")
    score.add_argument("--max-length", type=int, default=512, help="prompt token budget (default 512)")
    score.add_argument("--skip-overflow", action="store_true",
                       help="skip pairs whose query+template exceed the context instead of failing")
    score.add_argument("--device", default="cpu", help="torch device (default cpu)")
    return parser


def _write_text_atomic(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    handle, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=target.name + ".", suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as tmp:
            tmp.write(text)
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    try:
        namespace = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if namespace.verb is None:
        print("usage error: a verb is required; see --help", file=sys.stderr)
        return 2
    if namespace.batch < 1:
        print("usage error: --batch must be >= 1", file=sys.stderr)
        return 2
    try:
        pairs = load_pairs(namespace.pairs)
        scorer = load_scorer(namespace.model, namespace.kind,
                             device=namespace.device, max_length=namespace.max_length)
        scored = score_pairs(scorer, pairs, namespace.batch, skip_overflow=namespace.skip_overflow)
        _write_text_atomic(namespace.out, to_score_table_tsv(scored))
    except BridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())
