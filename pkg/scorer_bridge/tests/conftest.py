"""Builds tiny local checkpoints so tests run without hub access."""

from __future__ import annotations

import os
from contextlib import contextmanager

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TOKENIZERS_PARALLELISM", "false")

import pytest
import torch
from tokenizers import Tokenizer, models, pre_tokenizers
from transformers import (
    BertConfig,
    BertForSequenceClassification,
    GPT2Config,
    GPT2LMHeadModel,
    PreTrainedTokenizerFast,
    T5Config,
    T5ForConditionalGeneration,
)
from transformers.utils import logging as hf_logging

from scorer_bridge.pairs import QueryDocPair

hf_logging.set_verbosity_error()
hf_logging.disable_progress_bar()

WORDS = [
    "[PAD]", "[UNK]", "[EOS]", "true", "false", "Query", "Document", "Relevant", ":",
    "what", "is", "the", "of", "a", "cat", "dog", "rain", "sun", "river", "planet",
    "deep", "learning", "food", "water", "fast", "slow", "city", "music", "green", "stone",
]


def _build_tokenizer() -> PreTrainedTokenizerFast:
    vocab = {word: index for index, word in enumerate(WORDS)}
    core = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
    core.pre_tokenizer = pre_tokenizers.Whitespace()
    return PreTrainedTokenizerFast(
        tokenizer_object=core, pad_token="[PAD]", unk_token="[UNK]", eos_token="[EOS]"
    )


@pytest.fixture(scope="session")
def seq2seq_model_dir(tmp_path_factory) -> str:
    tokenizer = _build_tokenizer()
    torch.manual_seed(1234)
    config = T5Config(
        vocab_size=len(WORDS), d_model=32, d_kv=8, d_ff=64, num_layers=2, num_heads=2,
        decoder_start_token_id=tokenizer.pad_token_id,
        pad_token_id=tokenizer.pad_token_id, eos_token_id=tokenizer.eos_token_id,
    )
    model = T5ForConditionalGeneration(config)
    target = tmp_path_factory.mktemp("toy-seq2seq")
    model.save_pretrained(target)
    tokenizer.save_pretrained(target)
    return str(target)


@pytest.fixture(scope="session")
def causal_model_dir(tmp_path_factory) -> str:
    tokenizer = _build_tokenizer()
    torch.manual_seed(4321)
    config = GPT2Config(
        vocab_size=len(WORDS), n_positions=128, n_embd=32, n_layer=2, n_head=2,
        bos_token_id=tokenizer.eos_token_id, eos_token_id=tokenizer.eos_token_id,
        pad_token_id=tokenizer.pad_token_id,
    )
    model = GPT2LMHeadModel(config)
    target = tmp_path_factory.mktemp("toy-causal")
    model.save_pretrained(target)
    tokenizer.save_pretrained(target)
    return str(target)


@pytest.fixture(scope="session")
def regression_model_dir(tmp_path_factory) -> str:
    tokenizer = _build_tokenizer()
    torch.manual_seed(777)
    config = BertConfig(
        vocab_size=len(WORDS), hidden_size=32, num_hidden_layers=2, num_attention_heads=2,
        intermediate_size=64, max_position_embeddings=128,
        pad_token_id=tokenizer.pad_token_id, num_labels=1,
    )
    model = BertForSequenceClassification(config)
    target = tmp_path_factory.mktemp("toy-regression")
    model.save_pretrained(target)
    tokenizer.save_pretrained(target)
    return str(target)


def toy_pairs(count: int) -> list[QueryDocPair]:
    """Deterministic pairs phrased in the toy vocabulary."""
    subjects = ["cat", "dog", "rain", "sun", "river", "planet", "city", "music", "green", "stone"]
    pairs = []
    for index in range(count):
        subject = subjects[index % len(subjects)]
        other = subjects[(index * 3 + 1) % len(subjects)]
        pairs.append(
            QueryDocPair(
                topic=f"q{index // 2 + 1}",
                doc=f"d{index + 1}",
                query=f"what is the {subject}",
                document=f"the {subject} is a {other} of deep water" if index % 2 == 0
                else f"{other} food is slow music",
            )
        )
    return pairs


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[acceptance] {name}: FAIL")
        raise
    print(f"[acceptance] {name}: PASS")
