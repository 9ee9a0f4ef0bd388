"""Textualized training corpus with value-only loss masks.

Rows become comma-joined "feature is value" phrases, phrase order shuffled
per row. Each encoded row carries a boolean mask that is True exactly on
value-token positions: the training loss sees only those tokens, the
template ("feature", "is", commas, specials) is masked out.
"""
from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass

from .tokenizer import COMMA, Vocab, value_tokens, word_tokens

IGNORE = -100


def load_schema_features(path: str) -> list[str]:
    """Feature names, in declaration order, from a schema JSON file."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return [f["name"] for f in payload["features"]]


def read_rows(path: str) -> list[dict[str, str]]:
    """Read a CSV table; values stay strings (the engine owns parsing)."""
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def phrase_tokens(feature: str, value: str) -> tuple[list[str], list[bool]]:
    """Tokens for one "feature is value" phrase plus its value mask."""
    toks = word_tokens(feature) + ["is"]
    mask = [False] * len(toks)
    vt = value_tokens(value)
    return toks + vt, mask + [True] * len(vt)


def encode_row(
    row: dict[str, str], order: list[str]
) -> tuple[list[str], list[bool]]:
    toks: list[str] = []
    mask: list[bool] = []
    for i, feature in enumerate(order):
        if i:
            toks.append(COMMA)
            mask.append(False)
        pt, pm = phrase_tokens(feature, row[feature])
        toks += pt
        mask += pm
    return toks, mask


def textualize(row: dict[str, str], order: list[str]) -> str:
    return ", ".join(f"{f} is {row[f]}" for f in order)


@dataclass
class Corpus:
    """Encoded rows ready for training."""

    vocab: Vocab
    sequences: list[list[int]]   # bos ... eos
    labels: list[list[int]]      # IGNORE off value tokens

    @property
    def masked_fraction(self) -> float:
        """Fraction of non-special positions that carry loss."""
        live = sum(sum(1 for t in lab if t != IGNORE) for lab in self.labels)
        total = sum(len(s) - 2 for s in self.sequences)  # exclude bos/eos
        return live / total if total else 0.0


def build_corpus(
    rows: list[dict[str, str]],
    features: list[str],
    seed: int = 0,
    shuffle_phrases: bool = True,
) -> Corpus:
    rng = random.Random(seed)
    vocab = Vocab()
    sequences: list[list[int]] = []
    labels: list[list[int]] = []
    for row in rows:
        order = list(features)
        if shuffle_phrases:
            rng.shuffle(order)
        toks, mask = encode_row(row, order)
        for t in toks:
            vocab.add(t)
        ids = [vocab.bos_id] + vocab.encode_all(toks) + [vocab.eos_id]
        lab = [IGNORE] + [
            i if m else IGNORE for i, m in zip(vocab.encode_all(toks), mask)
        ] + [IGNORE]
        sequences.append(ids)
        labels.append(lab)
    return Corpus(vocab, sequences, labels)
