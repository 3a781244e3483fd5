"""Score (query, document) pairs with a pointwise neural scorer.

Two scorer kinds:

- ``generative_token``: models that decide relevance by emitting one of
  two special tokens ("true"/"false"). The bridge reads the softmax over
  those two tokens' logits at the final decision position - the first
  decoder step for encoder-decoder models, the last prompt position for
  decoder-only models. score = prob = P(true); token = the argmax, so
  token "true" holds exactly when prob >= 0.5. No sampling anywhere, so
  re-runs are reproducible.
- ``regression``: sequence-classification models with a single output
  head; score = the raw scalar, token and prob stay absent.

Prompts follow the pointwise convention ``Query: ... Document: ...
Relevant:``. The document is truncated to fit the token budget (the
query is never truncated); a pair whose query plus template alone
overflow the context raises PairTooLong. Truncations are logged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import torch

from .errors import ModelLoadFailure, PairTooLong
from .pairs import QueryDocPair

logger = logging.getLogger("scorer_bridge")

KINDS = ("generative_token", "regression")

_TOKEN_CANDIDATES = (("true", "false"), ("▁true", "▁false"), ("Ġtrue", "Ġfalse"))


@dataclass(frozen=True)
class ScoredPair:
    topic: str
    doc: str
    score: float
    token: str | None = None
    prob: float | None = None


def _binary_token_ids(tokenizer) -> tuple[int, int]:
    for true_token, false_token in _TOKEN_CANDIDATES:
        ids = tokenizer.convert_tokens_to_ids([true_token, false_token])
        if None in ids:
            continue
        if tokenizer.unk_token_id is not None and tokenizer.unk_token_id in ids:
            continue
        return ids[0], ids[1]
    raise ModelLoadFailure("tokenizer has no single-token 'true'/'false' pair; not a generative_token scorer")


class PointwiseScorer:
    """A loaded model plus the prompt/truncation logic to score pairs."""

    def __init__(self, kind: str, tokenizer, model, *, max_length: int, device: str):
        self.kind = kind
        self.tokenizer = tokenizer
        self.model = model
        self.max_length = max_length
        self.device = device
        self.is_encoder_decoder = bool(getattr(model.config, "is_encoder_decoder", False))
        self.true_id: int | None = None
        self.false_id: int | None = None
        if kind == "generative_token":
            self.true_id, self.false_id = _binary_token_ids(tokenizer)

    def _encode_prompt(self, pair: QueryDocPair) -> list[int]:
        """Token ids for one pair, truncating the document to the budget."""
        encode = lambda text: self.tokenizer.encode(text, add_special_tokens=False)  # noqa: E731
        head = encode(f"Query: {pair.query} Document:")
        tail = encode(" Relevant:")
        append_eos = self.is_encoder_decoder and self.tokenizer.eos_token_id is not None
        budget = self.max_length - len(head) - len(tail) - (1 if append_eos else 0)
        if budget < 0:
            raise PairTooLong(pair.topic, pair.doc, len(head) + len(tail), self.max_length)
        doc_ids = encode(" " + pair.document)
        if len(doc_ids) > budget:
            logger.warning(
                "truncated document for (%s, %s): %d -> %d tokens",
                pair.topic, pair.doc, len(doc_ids), budget,
            )
            doc_ids = doc_ids[:budget]
        ids = head + doc_ids + tail
        if append_eos:
            ids.append(self.tokenizer.eos_token_id)
        return ids

    @torch.no_grad()
    def _forward_batch(self, batches: list[list[int]]) -> list[tuple[float, str | None, float | None]]:
        encoded = self.tokenizer.pad({"input_ids": batches}, return_tensors="pt")
        input_ids = encoded["input_ids"].to(self.device)
        attention_mask = encoded["attention_mask"].to(self.device)

        if self.kind == "regression":
            logits = self.model(input_ids=input_ids, attention_mask=attention_mask).logits
            return [(float(value), None, None) for value in logits[:, 0]]

        if self.is_encoder_decoder:
            start = self.model.config.decoder_start_token_id
            if start is None:
                raise ModelLoadFailure("encoder-decoder model has no decoder_start_token_id")
            decoder_input_ids = torch.full((input_ids.shape[0], 1), start, dtype=torch.long, device=self.device)
            outputs = self.model(
                input_ids=input_ids, attention_mask=attention_mask, decoder_input_ids=decoder_input_ids
            )
            decision_logits = outputs.logits[:, 0, :]
        else:
            outputs = self.model(input_ids=input_ids, attention_mask=attention_mask)
            last_positions = attention_mask.sum(dim=1) - 1
            decision_logits = outputs.logits[torch.arange(input_ids.shape[0]), last_positions, :]

        two_way = torch.stack(
            [decision_logits[:, self.true_id], decision_logits[:, self.false_id]], dim=1
        )
        p_true = torch.softmax(two_way, dim=1)[:, 0]
        results = []
        for value in p_true:
            prob = float(value)
            results.append((prob, "true" if prob >= 0.5 else "false", prob))
        return results


def load_scorer(model_ref: str, kind: str, *, device: str = "cpu", max_length: int = 512) -> PointwiseScorer:
    """Load a checkpoint (local path or hub id) as a pointwise scorer."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if max_length < 1:
        raise ValueError(f"max_length must be positive, got {max_length}")
    from transformers import (
        AutoConfig,
        AutoModelForCausalLM,
        AutoModelForSeq2SeqLM,
        AutoModelForSequenceClassification,
        AutoTokenizer,
    )

    try:
        config = AutoConfig.from_pretrained(model_ref)
        tokenizer = AutoTokenizer.from_pretrained(model_ref)
        if kind == "regression":
            model = AutoModelForSequenceClassification.from_pretrained(model_ref)
        elif getattr(config, "is_encoder_decoder", False):
            model = AutoModelForSeq2SeqLM.from_pretrained(model_ref)
        else:
            model = AutoModelForCausalLM.from_pretrained(model_ref)
    except (OSError, ValueError, EnvironmentError) as exc:
        raise ModelLoadFailure(f"cannot load {model_ref!r}: {exc}") from exc
    model.eval()
    model.to(device)
    return PointwiseScorer(kind, tokenizer, model, max_length=max_length, device=device)


def score_pairs(
    scorer: PointwiseScorer,
    pairs: Sequence[QueryDocPair],
    batch_size: int = 16,
    *,
    skip_overflow: bool = False,
) -> list[ScoredPair]:
    """Score pairs in order, batched; one result per pair.

    Without ``skip_overflow`` an overlong pair aborts before any scoring,
    so the output key set always equals the input key set; with it, the
    offending pairs are logged and dropped.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    kept: list[QueryDocPair] = []
    encoded: list[list[int]] = []
    for pair in pairs:
        try:
            ids = scorer._encode_prompt(pair)
        except PairTooLong:
            if not skip_overflow:
                raise
            logger.warning("skipping overlong pair (%s, %s)", pair.topic, pair.doc)
            continue
        kept.append(pair)
        encoded.append(ids)

    scored: list[ScoredPair] = []
    for start in range(0, len(kept), batch_size):
        chunk_pairs = kept[start : start + batch_size]
        chunk_ids = encoded[start : start + batch_size]
        for pair, (score, token, prob) in zip(chunk_pairs, scorer._forward_batch(chunk_ids)):
            scored.append(ScoredPair(topic=pair.topic, doc=pair.doc, score=score, token=token, prob=prob))
    return scored


def to_score_table_tsv(scored: Sequence[ScoredPair]) -> str:
    """Render results as the score-table TSV consumed by judgekit."""
    lines = []
    for item in scored:
        token = item.token if item.token is not None else "-"
        prob = repr(item.prob) if item.prob is not None else "-"
        lines.append(f"{item.topic}\t{item.doc}\t{item.score!r}\t{token}\t{prob}\n")
    return "".join(lines)
