"""Tiny causal LM trained from scratch on the textualized corpus.

A GPT-2 architecture instantiated from config — no pretrained weights are
fetched; the sandbox trains from random init, which is enough to learn the
template grammar and value conditionals of small tables.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass

import torch
from transformers import GPT2Config, GPT2LMHeadModel

from .corpus import IGNORE, Corpus
from .tokenizer import Vocab


@dataclass(frozen=True)
class BridgeConfig:
    n_embd: int = 64
    n_layer: int = 2
    n_head: int = 2
    n_positions: int = 256
    epochs: int = 30
    lr: float = 3e-3
    batch_size: int = 32
    seed: int = 0
    # Candidate scores are summed value-token log-probs by default; set to
    # average over value tokens instead.
    length_normalize: bool = False

    def __post_init__(self):
        if self.n_embd % self.n_head:
            raise ValueError("n_embd must be divisible by n_head")
        if min(self.epochs, self.batch_size, self.n_positions) < 1:
            raise ValueError("epochs, batch_size, n_positions must be >= 1")


def build_model(vocab_size: int, config: BridgeConfig) -> GPT2LMHeadModel:
    torch.manual_seed(config.seed)
    gpt = GPT2Config(
        vocab_size=vocab_size,
        n_positions=config.n_positions,
        n_embd=config.n_embd,
        n_layer=config.n_layer,
        n_head=config.n_head,
        bos_token_id=1,
        eos_token_id=2,
    )
    return GPT2LMHeadModel(gpt)


def _batches(corpus: Corpus, batch_size: int, pad_id: int):
    order = range(0, len(corpus.sequences), batch_size)
    for start in order:
        seqs = corpus.sequences[start:start + batch_size]
        labs = corpus.labels[start:start + batch_size]
        width = max(len(s) for s in seqs)
        ids = torch.full((len(seqs), width), pad_id, dtype=torch.long)
        labels = torch.full((len(seqs), width), IGNORE, dtype=torch.long)
        attn = torch.zeros((len(seqs), width), dtype=torch.long)
        for i, (s, l) in enumerate(zip(seqs, labs)):
            ids[i, : len(s)] = torch.tensor(s)
            labels[i, : len(l)] = torch.tensor(l)
            attn[i, : len(s)] = 1
        yield ids, labels, attn


def train_bridge(corpus: Corpus, config: BridgeConfig) -> GPT2LMHeadModel:
    """Fit the LM on value tokens only; template positions carry no loss."""
    model = build_model(len(corpus.vocab), config)
    model.train()
    opt = torch.optim.AdamW(model.parameters(), lr=config.lr)
    for _ in range(config.epochs):
        for ids, labels, attn in _batches(corpus, config.batch_size,
                                          corpus.vocab.pad_id):
            out = model(input_ids=ids, attention_mask=attn, labels=labels)
            opt.zero_grad()
            out.loss.backward()
            opt.step()
    model.eval()
    return model


def save_bridge(model: GPT2LMHeadModel, vocab: Vocab, config: BridgeConfig,
                out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    torch.save(model.state_dict(), os.path.join(out_dir, "weights.pt"))
    with open(os.path.join(out_dir, "vocab.json"), "w", encoding="utf-8") as fh:
        fh.write(vocab.to_json())
    with open(os.path.join(out_dir, "config.json"), "w", encoding="utf-8") as fh:
        json.dump(asdict(config), fh, indent=2, sort_keys=True)


def load_bridge(model_dir: str) -> tuple[GPT2LMHeadModel, Vocab, BridgeConfig]:
    with open(os.path.join(model_dir, "config.json"), encoding="utf-8") as fh:
        config = BridgeConfig(**json.load(fh))
    with open(os.path.join(model_dir, "vocab.json"), encoding="utf-8") as fh:
        vocab = Vocab.from_json(fh.read())
    model = build_model(len(vocab), config)
    state = torch.load(os.path.join(model_dir, "weights.pt"),
                       weights_only=True)
    model.load_state_dict(state)
    model.eval()
    return model, vocab, config
