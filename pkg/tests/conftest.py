"""Shared fixture builders for the test suite."""

from __future__ import annotations

import random
from contextlib import contextmanager
from pathlib import Path

import pytest


@contextmanager
def criterion(name: str):
    """Print one PASS/FAIL line per acceptance criterion."""
    try:
        yield
    except BaseException:
        print(f"[acceptance] {name}: FAIL")
        raise
    print(f"[acceptance] {name}: PASS")


def generate_eval_fixture(seed: int = 20240811, n_topics: int = 50):
    """Seeded topics/judgments/results for the parity checks.

    Returns (qrels, run) as plain dicts: qrels[topic][doc] = grade 0-3,
    run[topic][doc] = score. Runs retrieve 50-100 docs per topic, mixing
    judged and unjudged docs; scores are rounded to 2 decimals so score
    ties (and the doc-id tie-break) actually occur.
    """
    rng = random.Random(seed)
    qrels: dict[str, dict[str, int]] = {}
    run: dict[str, dict[str, float]] = {}
    catalog = [f"d{i:03d}" for i in range(150)]
    for index in range(1, n_topics + 1):
        topic = f"t{index:02d}"
        docs = rng.sample(catalog, 120)
        pool = docs[: rng.randint(40, 100)]
        grades = {doc: rng.choices((0, 1, 2, 3), weights=(50, 20, 20, 10))[0] for doc in pool}
        if not any(grade >= 1 for grade in grades.values()):
            grades[pool[0]] = rng.randint(1, 3)
        qrels[topic] = grades
        retrieved = rng.sample(docs, rng.randint(50, 100))
        run[topic] = {doc: round(rng.random() * 10, 2) for doc in retrieved}
    return qrels, run


def qrels_text(qrels: dict[str, dict[str, int]]) -> str:
    lines = []
    for topic in sorted(qrels):
        for doc in sorted(qrels[topic]):
            lines.append(f"{topic} 0 {doc} {qrels[topic][doc]}\n")
    return "".join(lines)


def run_text(run: dict[str, dict[str, float]], tag: str = "sys") -> str:
    lines = []
    for topic in sorted(run):
        for rank, doc in enumerate(sorted(run[topic]), start=1):
            lines.append(f"{topic} Q0 {doc} {rank} {run[topic][doc]} {tag}\n")
    return "".join(lines)


def write_file(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def eval_fixture():
    return generate_eval_fixture()
